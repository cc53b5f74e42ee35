#include "gelab/topo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace gelab {

LocalStats compute_local_stats(const Graph& graph) {
    const std::size_t n = graph.n_nodes;
    LocalStats stats;
    stats.degree.resize(n);
    stats.triangles.resize(n);
    stats.local_clustering.resize(n);

    for (std::size_t v = 0; v < n; ++v) {
        const auto& nb = graph.neighbors[v];
        const double k = static_cast<double>(nb.size());
        if (graph.directed) {
            // edges connected to the node, in either direction
            std::size_t in_out = graph.out_neighbors[v].size();
            for (auto u : nb) {
                if (std::binary_search(graph.out_neighbors[u].begin(),
                                       graph.out_neighbors[u].end(),
                                       static_cast<std::uint32_t>(v))) {
                    ++in_out;
                }
            }
            stats.degree[v] = static_cast<double>(in_out);
        } else {
            stats.degree[v] = k;
        }

        double tri = 0.0;
        for (std::size_t a = 0; a < nb.size(); ++a) {
            for (std::size_t b = a + 1; b < nb.size(); ++b) {
                if (graph.directed) {
                    auto x = nb[a], y = nb[b];
                    if (std::binary_search(graph.out_neighbors[x].begin(),
                                           graph.out_neighbors[x].end(), y)) {
                        tri += 1.0;
                    }
                    if (std::binary_search(graph.out_neighbors[y].begin(),
                                           graph.out_neighbors[y].end(), x)) {
                        tri += 1.0;
                    }
                } else if (graph.has_edge(nb[a], nb[b])) {
                    tri += 1.0;
                }
            }
        }
        stats.triangles[v] = tri;
        if (k < 2.0) {
            stats.local_clustering[v] = 0.0;
        } else if (graph.directed) {
            stats.local_clustering[v] = tri / (k * (k - 1.0));
        } else {
            stats.local_clustering[v] = 2.0 * tri / (k * (k - 1.0));
        }
    }
    return stats;
}

std::vector<double> compute_eigenvector_centrality(const Graph& graph, double tol, int max_iter) {
    const std::size_t n = graph.n_nodes;
    if (n == 0) throw std::invalid_argument("eigenvector centrality of empty graph");
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> next(n);
    for (int it = 0; it < max_iter; ++it) {
        // iterate on A + I: same eigenvectors, and the shifted spectrum keeps
        // bipartite graphs from oscillating between two limit points
        for (std::size_t v = 0; v < n; ++v) {
            double acc = x[v];
            for (auto u : graph.neighbors[v]) acc += x[u];
            next[v] = acc;
        }
        double norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
        if (norm == 0.0) return x;  // edgeless graph: uniform vector is stationary
        double diff = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            next[v] /= norm;
            diff = std::max(diff, std::abs(next[v] - x[v]));
        }
        x.swap(next);
        if (diff < tol) return x;
    }
    throw ConvergenceError(max_iter);
}

std::vector<double> compute_betweenness(const Graph& graph) {
    const std::size_t n = graph.n_nodes;
    std::vector<double> bc(n, 0.0);
    std::vector<int> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<std::uint32_t>> pred(n);
    std::vector<std::uint32_t> order;
    order.reserve(n);

    for (std::uint32_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : pred) p.clear();
        order.clear();

        dist[s] = 0;
        sigma[s] = 1.0;
        std::deque<std::uint32_t> queue{s};
        while (!queue.empty()) {
            auto v = queue.front();
            queue.pop_front();
            order.push_back(v);
            for (auto w : graph.neighbors[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    pred[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            auto w = *it;
            for (auto v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) bc[w] += delta[w];
        }
    }
    // each unordered (s,t) pair was counted from both endpoints
    for (auto& b : bc) b /= 2.0;
    return bc;
}

namespace {

// linear-interpolation quantile on a sorted vector
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    double pos = p * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return sorted.back();
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BinResult bin_feature(const std::vector<double>& values, int n_bins, BinStrategy strategy) {
    if (n_bins < 2) throw std::invalid_argument("bin_feature: n_bins must be >= 2");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("bin_feature: non-finite value");
    }
    BinResult result;
    result.classes.assign(values.size(), 0);

    auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    if (values.empty() || *mn_it == *mx_it) {
        result.n_classes = 1;
        result.degenerate = true;
        return result;
    }

    std::vector<double> edges;
    if (strategy == BinStrategy::Quantile) {
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 1; i < n_bins; ++i) {
            edges.push_back(quantile_sorted(sorted, static_cast<double>(i) / n_bins));
        }
    } else {
        double width = (*mx_it - *mn_it) / n_bins;
        for (int i = 1; i < n_bins; ++i) edges.push_back(*mn_it + width * i);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    // drop edges equal to the extremes, they would create empty bins
    while (!edges.empty() && edges.front() <= *mn_it) edges.erase(edges.begin());
    while (!edges.empty() && edges.back() >= *mx_it) edges.pop_back();

    for (std::size_t i = 0; i < values.size(); ++i) {
        int c = 0;
        for (double e : edges) {
            if (values[i] > e) ++c;  // intervals are right-closed
        }
        result.classes[i] = c;
    }
    result.n_classes = static_cast<int>(edges.size()) + 1;
    return result;
}

const std::vector<std::string>& TopoTable::feature_names() {
    static const std::vector<std::string> names = {"degree", "triangles", "local_clustering",
                                                   "eigenvector_centrality",
                                                   "betweenness_centrality"};
    return names;
}

const std::vector<double>& TopoTable::feature(const std::string& name) const {
    if (name == "degree") return degree;
    if (name == "triangles") return triangles;
    if (name == "local_clustering") return local_clustering;
    if (name == "eigenvector_centrality") return eigenvector;
    if (name == "betweenness_centrality") return betweenness;
    throw std::invalid_argument("unknown topological feature: " + name);
}

const std::vector<int>& TopoTable::feature_class(const std::string& name) const {
    if (name == "degree") return degree_class;
    if (name == "triangles") return triangles_class;
    if (name == "local_clustering") return lc_class;
    if (name == "eigenvector_centrality") return ec_class;
    if (name == "betweenness_centrality") return bc_class;
    throw std::invalid_argument("unknown topological feature: " + name);
}

TopoTable compute_topo_table(const Graph& graph, int n_bins, BinStrategy strategy) {
    TopoTable t;
    t.n_bins = n_bins;
    auto stats = compute_local_stats(graph);
    t.degree = std::move(stats.degree);
    t.triangles = std::move(stats.triangles);
    t.local_clustering = std::move(stats.local_clustering);
    t.eigenvector = compute_eigenvector_centrality(graph);
    t.betweenness = compute_betweenness(graph);
    t.degree_class = bin_feature(t.degree, n_bins, strategy).classes;
    t.triangles_class = bin_feature(t.triangles, n_bins, strategy).classes;
    t.lc_class = bin_feature(t.local_clustering, n_bins, strategy).classes;
    t.ec_class = bin_feature(t.eigenvector, n_bins, strategy).classes;
    t.bc_class = bin_feature(t.betweenness, n_bins, strategy).classes;
    return t;
}

void write_topo_csv(std::ostream& out, const Graph& graph, const TopoTable& t) {
    out << "node_id,degree,triangles,lc,ec,bc,deg_class,tri_class,lc_class,ec_class,bc_class\n";
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t v = 0; v < graph.n_nodes; ++v) {
        out << graph.node_ids[v] << ',' << fmt(t.degree[v]) << ',' << fmt(t.triangles[v]) << ','
            << fmt(t.local_clustering[v]) << ',' << fmt(t.eigenvector[v]) << ','
            << fmt(t.betweenness[v]) << ',' << t.degree_class[v] << ',' << t.triangles_class[v]
            << ',' << t.lc_class[v] << ',' << t.ec_class[v] << ',' << t.bc_class[v] << '\n';
    }
}

}  // namespace gelab
