#ifndef GELAB_TOPO_HPP
#define GELAB_TOPO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gelab/graph.hpp"

namespace gelab {

struct LocalStats {
    std::vector<double> degree;
    std::vector<double> triangles;
    std::vector<double> local_clustering;  // in [0,1]
};

/// Degree, triangle count and local clustering score per node.
/// Undirected: triangles = connected unordered neighbor pairs and
/// LC = 2T / (K(K-1)).  Directed: triangles = directed edges among the
/// (union-of-directions) neighbors and LC = T / (K(K-1)), with K the
/// number of distinct neighbors.  LC is 0 when K < 2.
LocalStats compute_local_stats(const Graph& graph);

/// Thrown when power iteration fails to converge.
struct ConvergenceError : std::runtime_error {
    int iterations;
    explicit ConvergenceError(int iters)
        : std::runtime_error("eigenvector centrality did not converge after " +
                             std::to_string(iters) + " iterations"),
          iterations(iters) {}
};

/// Power iteration on the (symmetrized) adjacency from the uniform positive
/// vector; result has unit Euclidean norm. Converged when successive
/// iterates differ by < tol in max norm.
std::vector<double> compute_eigenvector_centrality(const Graph& graph, double tol = 1e-10,
                                                   int max_iter = 10000);

/// Unnormalized betweenness centrality over the undirected view (Brandes,
/// unweighted BFS); endpoints excluded.
std::vector<double> compute_betweenness(const Graph& graph);

enum class BinStrategy { Quantile, EqualWidth };

struct BinResult {
    std::vector<int> classes;
    int n_classes = 0;        // distinct class ids actually used
    bool degenerate = false;  // constant input collapsed to one class
};

/// Monotone value -> class id mapping. Quantile edges follow the linear
/// interpolation convention with duplicate edges dropped, so tie plateaus
/// share a bin and class sizes balance up to ties.
BinResult bin_feature(const std::vector<double>& values, int n_bins,
                      BinStrategy strategy = BinStrategy::Quantile);

/// The five per-node features of the study plus their binned classes.
struct TopoTable {
    std::vector<double> degree, triangles, local_clustering, eigenvector, betweenness;
    std::vector<int> degree_class, triangles_class, lc_class, ec_class, bc_class;
    int n_bins = 6;

    static const std::vector<std::string>& feature_names();
    const std::vector<double>& feature(const std::string& name) const;
    const std::vector<int>& feature_class(const std::string& name) const;
};

TopoTable compute_topo_table(const Graph& graph, int n_bins = 6,
                             BinStrategy strategy = BinStrategy::Quantile);

/// CSV: node_id,degree,triangles,lc,ec,bc,deg_class,tri_class,lc_class,ec_class,bc_class
void write_topo_csv(std::ostream& out, const Graph& graph, const TopoTable& table);

}  // namespace gelab

#endif
