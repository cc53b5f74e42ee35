#include "gelab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gelab {

double SparseMatrix::at(std::size_t r, std::size_t c) const {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        if (col_idx[k] == c) return values[k];
    }
    return 0.0;
}

std::vector<double> SparseMatrix::row_sums() const {
    std::vector<double> sums(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) sums[r] += values[k];
    }
    return sums;
}

bool SparseMatrix::is_symmetric(double tol) const {
    if (rows != cols) return false;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (std::abs(at(col_idx[k], r) - values[k]) > tol) return false;
        }
    }
    return true;
}

bool Graph::has_edge(std::uint32_t u, std::uint32_t v) const {
    const auto& nb = neighbors[u];
    return std::binary_search(nb.begin(), nb.end(), v);
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : line) {
        if (ch == ' ' || ch == '\t' || ch == ',' || ch == '\r') {
            if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::uint32_t intern_node(Graph& g, const std::string& id) {
    auto it = g.node_index.find(id);
    if (it != g.node_index.end()) return it->second;
    auto idx = static_cast<std::uint32_t>(g.node_ids.size());
    g.node_index.emplace(id, idx);
    g.node_ids.push_back(id);
    return idx;
}

void finalize_adjacency(Graph& g) {
    g.neighbors.assign(g.n_nodes, {});
    if (g.directed) g.out_neighbors.assign(g.n_nodes, {});
    for (auto [u, v] : g.edges) {
        g.neighbors[u].push_back(v);
        g.neighbors[v].push_back(u);
        if (g.directed) g.out_neighbors[u].push_back(v);
    }
    for (auto& nb : g.neighbors) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    if (g.directed) {
        for (auto& nb : g.out_neighbors) std::sort(nb.begin(), nb.end());
    }
}

}  // namespace

Graph load_edge_list(std::istream& in, const EdgeListOptions& options) {
    Graph g;
    g.directed = options.directed;
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() < 2 || tokens.size() > 3) {
            throw std::runtime_error("edge list parse error at line " + std::to_string(line_no) +
                                     ": expected 'u v' or 'u v w', got " +
                                     std::to_string(tokens.size()) + " token(s)");
        }
        std::uint32_t u = intern_node(g, tokens[0]);
        std::uint32_t v = intern_node(g, tokens[1]);
        if (u == v) continue;  // Ahat adds self loops back explicitly
        std::pair<std::uint32_t, std::uint32_t> e{u, v};
        if (!options.directed && e.first > e.second) std::swap(e.first, e.second);
        if (seen.insert(e).second) g.edges.push_back(e);
    }
    if (g.node_ids.empty()) throw std::runtime_error("edge list is empty");
    g.n_nodes = g.node_ids.size();
    finalize_adjacency(g);
    return g;
}

void load_attributes(std::istream& in, Graph& graph) {
    std::vector<std::vector<std::uint32_t>> rows(graph.n_nodes);
    std::vector<int> labels(graph.n_nodes, -1);
    std::vector<char> filled(graph.n_nodes, 0);
    std::unordered_map<std::string, int> label_ids;
    std::size_t width = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() < 3) {
            throw std::runtime_error("attribute row at line " + std::to_string(line_no) +
                                     " needs  <id> <features...> <label>");
        }
        if (width == 0) {
            width = tokens.size();
        } else if (tokens.size() != width) {
            throw std::runtime_error("attribute row width mismatch at line " + std::to_string(line_no));
        }
        auto it = graph.node_index.find(tokens[0]);
        if (it == graph.node_index.end()) {
            throw std::runtime_error("attribute row at line " + std::to_string(line_no) +
                                     " references unknown node '" + tokens[0] + "'");
        }
        std::uint32_t node = it->second;
        if (filled[node]) {
            throw std::runtime_error("node '" + tokens[0] + "' listed twice in attribute file");
        }
        filled[node] = 1;
        for (std::size_t j = 1; j + 1 < tokens.size(); ++j) {
            if (tokens[j] != "0") rows[node].push_back(static_cast<std::uint32_t>(j - 1));
        }
        const std::string& label = tokens.back();
        auto [lit, inserted] = label_ids.emplace(label, static_cast<int>(label_ids.size()));
        labels[node] = lit->second;
        (void)inserted;
    }
    if (width == 0) throw std::runtime_error("attribute file is empty");
    for (std::size_t v = 0; v < graph.n_nodes; ++v) {
        if (!filled[v]) {
            throw std::runtime_error("attribute file misses node '" + graph.node_ids[v] + "'");
        }
    }

    graph.attr_dim = width - 2;
    graph.attr_row_ptr.assign(graph.n_nodes + 1, 0);
    graph.attr_col.clear();
    for (std::size_t v = 0; v < graph.n_nodes; ++v) {
        graph.attr_row_ptr[v] = graph.attr_col.size();
        graph.attr_col.insert(graph.attr_col.end(), rows[v].begin(), rows[v].end());
    }
    graph.attr_row_ptr[graph.n_nodes] = graph.attr_col.size();
    graph.labels = std::move(labels);
    graph.n_classes = static_cast<int>(label_ids.size());
}

void load_labels(std::istream& in, Graph& graph) {
    std::vector<int> labels(graph.n_nodes, -1);
    std::unordered_map<std::string, int> label_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 2) {
            throw std::runtime_error("label row at line " + std::to_string(line_no) +
                                     " needs <id> <label>");
        }
        auto it = graph.node_index.find(tokens[0]);
        if (it == graph.node_index.end()) {
            throw std::runtime_error("label row at line " + std::to_string(line_no) +
                                     " references unknown node '" + tokens[0] + "'");
        }
        auto [lit, ins] = label_ids.emplace(tokens[1], static_cast<int>(label_ids.size()));
        (void)ins;
        labels[it->second] = lit->second;
    }
    for (std::size_t v = 0; v < graph.n_nodes; ++v) {
        if (labels[v] < 0) {
            throw std::runtime_error("label file misses node '" + graph.node_ids[v] + "'");
        }
    }
    graph.labels = std::move(labels);
    graph.n_classes = static_cast<int>(label_ids.size());
}

namespace {

SparseMatrix from_neighbor_lists(const std::vector<std::vector<std::uint32_t>>& nb,
                                 std::size_t n) {
    SparseMatrix m;
    m.rows = m.cols = n;
    m.row_ptr.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
        m.row_ptr[v] = m.col_idx.size();
        for (auto u : nb[v]) {
            m.col_idx.push_back(u);
            m.values.push_back(1.0);
        }
    }
    m.row_ptr[n] = m.col_idx.size();
    return m;
}

}  // namespace

SparseMatrix adjacency_matrix(const Graph& graph) {
    return from_neighbor_lists(graph.neighbors, graph.n_nodes);
}

SparseMatrix augmented_adjacency(const Graph& graph) {
    std::vector<std::vector<std::uint32_t>> nb = graph.neighbors;
    for (std::uint32_t v = 0; v < graph.n_nodes; ++v) {
        nb[v].insert(std::lower_bound(nb[v].begin(), nb[v].end(), v), v);
    }
    return from_neighbor_lists(nb, graph.n_nodes);
}

SparseMatrix normalize_adjacency(const SparseMatrix& ahat, NormalizeMode mode) {
    if (ahat.rows != ahat.cols) throw std::invalid_argument("normalize_adjacency: matrix not square");
    auto deg = ahat.row_sums();
    for (double d : deg) {
        if (d <= 0.0) throw std::invalid_argument("normalize_adjacency: zero row sum");
    }
    SparseMatrix out = ahat;
    if (mode == NormalizeMode::Mean) {
        for (std::size_t r = 0; r < out.rows; ++r) {
            for (std::size_t k = out.row_ptr[r]; k < out.row_ptr[r + 1]; ++k) out.values[k] /= deg[r];
        }
    } else {
        std::vector<double> dinv(out.rows);
        for (std::size_t r = 0; r < out.rows; ++r) dinv[r] = 1.0 / std::sqrt(deg[r]);
        for (std::size_t r = 0; r < out.rows; ++r) {
            for (std::size_t k = out.row_ptr[r]; k < out.row_ptr[r + 1]; ++k) {
                out.values[k] *= dinv[r] * dinv[out.col_idx[k]];
            }
        }
    }
    return out;
}

SparseMatrix proximity_power(const Graph& graph, int k) {
    if (k < 1) throw std::invalid_argument("proximity_power: k must be >= 1");
    const std::size_t n = graph.n_nodes;
    // Boolean row sets; repeated sparse row expansion of A^k.
    std::vector<std::vector<std::uint32_t>> reach = graph.neighbors;
    std::vector<char> mark(n, 0);
    for (int step = 1; step < k; ++step) {
        std::vector<std::vector<std::uint32_t>> next(n);
        for (std::size_t v = 0; v < n; ++v) {
            std::vector<std::uint32_t> acc;
            for (auto u : reach[v]) {
                for (auto w : graph.neighbors[u]) {
                    if (!mark[w]) {
                        mark[w] = 1;
                        acc.push_back(w);
                    }
                }
            }
            for (auto w : acc) mark[w] = 0;
            std::sort(acc.begin(), acc.end());
            next[v] = std::move(acc);
        }
        reach = std::move(next);
    }
    return from_neighbor_lists(reach, n);
}

SparseMatrix one_hot_features(const Graph& graph) {
    SparseMatrix m;
    m.rows = m.cols = graph.n_nodes;
    m.row_ptr.resize(graph.n_nodes + 1);
    m.col_idx.resize(graph.n_nodes);
    m.values.assign(graph.n_nodes, 1.0);
    for (std::size_t v = 0; v <= graph.n_nodes; ++v) m.row_ptr[v] = v;
    for (std::uint32_t v = 0; v < graph.n_nodes; ++v) m.col_idx[v] = v;
    return m;
}

SparseMatrix attribute_matrix(const Graph& graph) {
    if (!graph.has_attributes()) throw std::logic_error("graph has no attributes");
    SparseMatrix m;
    m.rows = graph.n_nodes;
    m.cols = graph.attr_dim;
    m.row_ptr = graph.attr_row_ptr;
    m.col_idx = graph.attr_col;
    m.values.assign(graph.attr_col.size(), 1.0);
    return m;
}

}  // namespace gelab
