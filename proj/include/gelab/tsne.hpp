#ifndef GELAB_TSNE_HPP
#define GELAB_TSNE_HPP

#include <Eigen/Dense>
#include <cstdint>

namespace gelab {

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    int exaggeration_iters = 250;  // x12 early exaggeration window
    double learning_rate = 200.0;
    std::uint64_t seed = 0;
};

/// Exact O(n^2) t-SNE to two dimensions: per-point bandwidths found by
/// binary search to the target perplexity, symmetrized affinities, gradient
/// descent with momentum 0.5 -> 0.8 and adaptive per-coordinate gains.
/// Requires perplexity < (n-1)/3.
Eigen::MatrixXd tsne_project(const Eigen::MatrixXd& points, const TsneConfig& config);

}  // namespace gelab

#endif
