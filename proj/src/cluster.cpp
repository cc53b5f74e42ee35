#include "gelab/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gelab/rng.hpp"

namespace gelab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd squared_dist_to(const MatrixXd& points, const Eigen::RowVectorXd& center) {
    return (points.rowwise() - center).rowwise().squaredNorm();
}

struct LloydResult {
    std::vector<int> assignment;
    double inertia = 0.0;
};

LloydResult lloyd(const MatrixXd& points, int k, std::mt19937_64& rng) {
    const auto n = points.rows();

    // k-means++ seeding
    MatrixXd centers(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    centers.row(0) = points.row(first(rng));
    VectorXd dist2 = squared_dist_to(points, centers.row(0));
    for (int c = 1; c < k; ++c) {
        const double total = dist2.sum();
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> unif(0.0, total);
            double r = unif(rng);
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += dist2(i);
                if (acc >= r) {
                    chosen = i;
                    break;
                }
            }
        } else {
            std::uniform_int_distribution<Eigen::Index> any(0, n - 1);
            chosen = any(rng);  // all points coincide with some center
        }
        centers.row(c) = points.row(chosen);
        dist2 = dist2.cwiseMin(squared_dist_to(points, centers.row(c)));
    }

    LloydResult result;
    result.assignment.assign(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 300; ++iter) {
        // assignment step
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int c = 0; c < k; ++c) {
                const double d = (points.row(i) - centers.row(c)).squaredNorm();
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            result.assignment[static_cast<std::size_t>(i)] = arg;
        }
        // update step with empty-cluster repair
        MatrixXd next = MatrixXd::Zero(k, points.cols());
        std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            next.row(result.assignment[static_cast<std::size_t>(i)]) += points.row(i);
            counts[static_cast<std::size_t>(result.assignment[static_cast<std::size_t>(i)])] += 1.0;
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0.0) {
                next.row(c) /= counts[static_cast<std::size_t>(c)];
                continue;
            }
            // split the largest cluster at its farthest member
            int largest = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                           counts.begin());
            double far_d = -1.0;
            Eigen::Index far_i = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (result.assignment[static_cast<std::size_t>(i)] != largest) continue;
                const double d = (points.row(i) - centers.row(largest)).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            next.row(c) = points.row(far_i);
            result.assignment[static_cast<std::size_t>(far_i)] = c;
        }
        const double moved = (next - centers).rowwise().norm().maxCoeff();
        centers = next;
        if (moved < 1e-6) break;
    }

    result.inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        result.inertia +=
            (points.row(i) - centers.row(result.assignment[static_cast<std::size_t>(i)]))
                .squaredNorm();
    }
    return result;
}

}  // namespace

Partition kmeans(const MatrixXd& points, int k, std::uint64_t seed, int restarts) {
    if (k < 1 || k > points.rows()) throw std::invalid_argument("kmeans: need 1 <= k <= n");
    Partition best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        auto run = lloyd(points, k, rng);
        if (run.inertia < best.inertia) {
            best.inertia = run.inertia;
            best.assignment = std::move(run.assignment);
        }
    }
    // compact ids in first-appearance order
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    int next_id = 0;
    for (auto& a : best.assignment) {
        if (remap[static_cast<std::size_t>(a)] < 0) remap[static_cast<std::size_t>(a)] = next_id++;
        a = remap[static_cast<std::size_t>(a)];
    }
    best.k = next_id;
    return best;
}

namespace {

// cosine 1-NN per row; ties and duplicate points resolve to the lowest index
std::vector<Eigen::Index> cosine_first_neighbor(const MatrixXd& points) {
    const auto n = points.rows();
    MatrixXd unit = points;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = unit.row(i).norm();
        if (norm > 0.0) unit.row(i) /= norm;
    }
    std::vector<Eigen::Index> nn(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        Eigen::Index arg = i == 0 ? 1 : 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double sim = unit.row(i).dot(unit.row(j));
            if (sim > best) {
                best = sim;
                arg = j;
            }
        }
        nn[static_cast<std::size_t>(i)] = arg;
    }
    return nn;
}

std::vector<int> components_of_nn_graph(const std::vector<Eigen::Index>& nn) {
    const auto n = static_cast<Eigen::Index>(nn.size());
    std::vector<std::vector<Eigen::Index>> adj(static_cast<std::size_t>(n));
    auto link = [&](Eigen::Index a, Eigen::Index b) {
        adj[static_cast<std::size_t>(a)].push_back(b);
        adj[static_cast<std::size_t>(b)].push_back(a);
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        link(i, nn[static_cast<std::size_t>(i)]);  // j is i's NN (covers "i is j's NN")
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (nn[static_cast<std::size_t>(i)] == nn[static_cast<std::size_t>(j)]) link(i, j);
        }
    }
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int c = 0;
    std::vector<Eigen::Index> stack;
    for (Eigen::Index s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        stack.push_back(s);
        comp[static_cast<std::size_t>(s)] = c;
        while (!stack.empty()) {
            auto v = stack.back();
            stack.pop_back();
            for (auto u : adj[static_cast<std::size_t>(v)]) {
                if (comp[static_cast<std::size_t>(u)] < 0) {
                    comp[static_cast<std::size_t>(u)] = c;
                    stack.push_back(u);
                }
            }
        }
        ++c;
    }
    return comp;
}

}  // namespace

std::vector<Partition> finch(const MatrixXd& points) {
    const auto n = points.rows();
    if (n < 2) throw std::invalid_argument("finch: need at least 2 points");

    std::vector<Partition> hierarchy;
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::iota(labels.begin(), labels.end(), 0);
    MatrixXd means = points;
    int current_k = static_cast<int>(n);

    while (current_k > 1) {
        auto nn = cosine_first_neighbor(means);
        auto comp = components_of_nn_graph(nn);
        const int new_k = 1 + *std::max_element(comp.begin(), comp.end());
        if (new_k >= current_k) break;  // no further merge possible

        // project point labels through the component map
        for (auto& l : labels) l = comp[static_cast<std::size_t>(l)];
        Partition part;
        part.assignment = labels;
        part.k = new_k;
        hierarchy.push_back(part);

        // means of the new clusters
        MatrixXd next = MatrixXd::Zero(new_k, points.cols());
        std::vector<double> counts(static_cast<std::size_t>(new_k), 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            next.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
            counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] += 1.0;
        }
        for (int c = 0; c < new_k; ++c) next.row(c) /= counts[static_cast<std::size_t>(c)];
        means = std::move(next);
        current_k = new_k;
    }

    if (hierarchy.empty()) {
        // n == 2 or an immediate full merge: single partition of one cluster
        Partition all;
        all.assignment.assign(static_cast<std::size_t>(n), 0);
        all.k = 1;
        hierarchy.push_back(std::move(all));
    }
    return hierarchy;
}

}  // namespace gelab
