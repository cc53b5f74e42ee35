#include "gelab/eigenmaps.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace gelab {

Embedding laplacian_eigenmaps(const Graph& graph, int d) {
    const auto n = static_cast<Eigen::Index>(graph.n_nodes);
    if (n <= d) throw std::invalid_argument("laplacian_eigenmaps: need n > d");

    Eigen::VectorXd dinv_sqrt(n);
    for (Eigen::Index v = 0; v < n; ++v) {
        double deg = static_cast<double>(graph.neighbors[static_cast<std::size_t>(v)].size());
        dinv_sqrt(v) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;  // isolated: L row = e_v
    }
    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t v = 0; v < graph.n_nodes; ++v) {
        for (auto u : graph.neighbors[v]) {
            lap(static_cast<Eigen::Index>(v), u) -=
                dinv_sqrt(static_cast<Eigen::Index>(v)) * dinv_sqrt(u);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("laplacian_eigenmaps: eigendecomposition failed");
    }
    // eigenvalues ascending; index 0 is the trivial component vector
    Embedding emb;
    emb.values = solver.eigenvectors().middleCols(1, d);
    emb.model = "laplacian_eigenmaps";
    return emb;
}

}  // namespace gelab
