#ifndef GELAB_WALKS_HPP
#define GELAB_WALKS_HPP

#include <cstdint>
#include <vector>

#include "gelab/graph.hpp"

namespace gelab {

struct WalkConfig {
    int walk_length = 80;  // nodes per walk, including the start
    int num_walks = 10;    // walks per start node
    double p = 1.0;        // return parameter
    double q = 1.0;        // in-out parameter
    std::uint64_t seed = 0;
};

struct WalkCorpus {
    std::vector<std::vector<std::uint32_t>> walks;
    WalkConfig config;
    std::size_t n_nodes = 0;
};

/// Second-order biased random walks over the undirected view. From edge
/// (t,v) the next node x is drawn with weight 1/p if x == t, 1 if x is
/// adjacent to t, 1/q otherwise. Walk RNG streams are derived per
/// (start node, walk index) from the seed, so corpora are reproducible
/// independently of scheduling.
WalkCorpus biased_random_walks(const Graph& graph, const WalkConfig& config);

}  // namespace gelab

#endif
