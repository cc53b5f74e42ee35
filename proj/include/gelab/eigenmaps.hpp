#ifndef GELAB_EIGENMAPS_HPP
#define GELAB_EIGENMAPS_HPP

#include "gelab/embedding.hpp"
#include "gelab/graph.hpp"

namespace gelab {

/// Laplacian Eigenmaps on the symmetric normalized Laplacian
/// L = I - D^-1/2 A D^-1/2 (undirected view, no self loops). The embedding
/// collects the eigenvectors of the d smallest eigenvalues after dropping
/// the single trivial one. Requires n > d.
Embedding laplacian_eigenmaps(const Graph& graph, int d);

}  // namespace gelab

#endif
