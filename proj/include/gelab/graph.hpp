#ifndef GELAB_GRAPH_HPP
#define GELAB_GRAPH_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gelab {

/// Sparse real matrix in compressed-row layout.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;  // size rows+1
    std::vector<std::uint32_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const { return col_idx.size(); }
    double at(std::size_t r, std::size_t c) const;
    std::vector<double> row_sums() const;
    bool is_symmetric(double tol = 0.0) const;
};

/// Immutable node/edge structure with optional binary attributes and labels.
/// Node ids from the input files are reindexed to dense 0-based indices in
/// first-appearance order; `node_ids` maps back to the external ids.
struct Graph {
    std::size_t n_nodes = 0;
    bool directed = false;
    // Each undirected edge stored once as (min,max); directed edges as given.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

    std::vector<std::string> node_ids;
    std::unordered_map<std::string, std::uint32_t> node_index;

    // Union-of-directions neighbor lists, sorted, no self loops.
    std::vector<std::vector<std::uint32_t>> neighbors;
    // Directed graphs only: successors of each node.
    std::vector<std::vector<std::uint32_t>> out_neighbors;

    // Optional sparse binary attribute matrix, n_nodes rows.
    std::size_t attr_dim = 0;
    std::vector<std::size_t> attr_row_ptr;
    std::vector<std::uint32_t> attr_col;

    // Optional per-node class ids (-1 where unset).
    std::vector<int> labels;
    int n_classes = 0;

    bool has_attributes() const { return attr_dim > 0; }
    bool has_labels() const { return n_classes > 0; }
    std::size_t degree(std::uint32_t v) const { return neighbors[v].size(); }
    bool has_edge(std::uint32_t u, std::uint32_t v) const;
};

struct EdgeListOptions {
    bool directed = false;
};

/// Parses a whitespace- or comma-separated edge list ("u v" or "u v w"; the
/// optional third weight token is ignored, `#` starts a comment line).
/// Throws std::runtime_error with the line number on malformed lines and on
/// empty input. Undirected inputs are deduplicated canonically; self loops
/// are dropped.
Graph load_edge_list(std::istream& in, const EdgeListOptions& options);

/// Attaches a Planetoid-style attribute file (`<id> <f1> ... <fk> <label>`)
/// to a previously loaded graph. Every row must reference a known node, rows
/// must agree on width, and no node may appear twice. Nonzero feature tokens
/// become 1 entries; label words are mapped to class ids in first-appearance
/// order.
void load_attributes(std::istream& in, Graph& graph);

/// Attaches a `<id> <label>` file to a loaded graph; labels may be arbitrary
/// tokens and are mapped to class ids in first-appearance order.
void load_labels(std::istream& in, Graph& graph);

/// A-hat = A + I over the undirected view of the graph (directed inputs are
/// symmetrized; embedders treat every graph as undirected).
SparseMatrix augmented_adjacency(const Graph& graph);

enum class NormalizeMode { Mean, Spectral };

/// Mean: D^-1 * Ahat.  Spectral: D^-1/2 * Ahat * D^-1/2.  D is taken from
/// the row sums of `ahat`, which are >= 1 by construction.
SparseMatrix normalize_adjacency(const SparseMatrix& ahat, NormalizeMode mode);

/// Binary reachability-in-exactly-k-steps matrix: entry (i,j) is 1 iff
/// (A^k)_ij >= 1, computed on the adjacency without self loops. k >= 1.
SparseMatrix proximity_power(const Graph& graph, int k);

/// n x n identity used as H0 when the graph carries no attributes.
SparseMatrix one_hot_features(const Graph& graph);

/// Adjacency without self loops over the undirected view (binary).
SparseMatrix adjacency_matrix(const Graph& graph);

/// Attribute matrix as CSR of 1.0 entries (requires has_attributes()).
SparseMatrix attribute_matrix(const Graph& graph);

}  // namespace gelab

#endif
