#include "gelab/walks.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "gelab/rng.hpp"

namespace gelab {

WalkCorpus biased_random_walks(const Graph& graph, const WalkConfig& config) {
    if (config.p <= 0.0 || config.q <= 0.0) {
        throw std::invalid_argument("biased_random_walks: p and q must be positive");
    }
    WalkCorpus corpus;
    corpus.config = config;
    corpus.n_nodes = graph.n_nodes;
    corpus.walks.reserve(graph.n_nodes * static_cast<std::size_t>(config.num_walks));

    std::vector<double> weights;
    for (int pass = 0; pass < config.num_walks; ++pass) {
        for (std::uint32_t start = 0; start < graph.n_nodes; ++start) {
            std::mt19937_64 rng(mix_seed(config.seed, (static_cast<std::uint64_t>(pass) << 32) |
                                                          static_cast<std::uint64_t>(start)));
            std::vector<std::uint32_t> walk{start};
            if (!graph.neighbors[start].empty()) {
                walk.reserve(static_cast<std::size_t>(config.walk_length));
                // first hop: uniform neighbor
                const auto& nb0 = graph.neighbors[start];
                std::uniform_int_distribution<std::size_t> pick(0, nb0.size() - 1);
                walk.push_back(nb0[pick(rng)]);
                while (walk.size() < static_cast<std::size_t>(config.walk_length)) {
                    std::uint32_t prev = walk[walk.size() - 2];
                    std::uint32_t cur = walk.back();
                    const auto& nb = graph.neighbors[cur];
                    if (nb.empty()) break;
                    weights.resize(nb.size());
                    double total = 0.0;
                    for (std::size_t i = 0; i < nb.size(); ++i) {
                        double w;
                        if (nb[i] == prev) {
                            w = 1.0 / config.p;
                        } else if (graph.has_edge(prev, nb[i])) {
                            w = 1.0;
                        } else {
                            w = 1.0 / config.q;
                        }
                        total += w;
                        weights[i] = total;
                    }
                    std::uniform_real_distribution<double> unif(0.0, total);
                    double r = unif(rng);
                    auto it = std::upper_bound(weights.begin(), weights.end(), r);
                    std::size_t idx = std::min(static_cast<std::size_t>(it - weights.begin()),
                                               nb.size() - 1);
                    walk.push_back(nb[idx]);
                }
            }
            corpus.walks.push_back(std::move(walk));
        }
    }
    return corpus;
}

}  // namespace gelab
