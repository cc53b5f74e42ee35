#ifndef GELAB_SKIPGRAM_HPP
#define GELAB_SKIPGRAM_HPP

#include <cstdint>

#include "gelab/embedding.hpp"
#include "gelab/walks.hpp"

namespace gelab {

struct SkipGramConfig {
    int dim = 64;
    int window = 10;
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;  // decays linearly over the whole schedule
    std::uint64_t seed = 0;
};

struct SkipGramResult {
    Embedding embedding;                // center vectors
    std::vector<double> epoch_losses;   // mean SGNS loss per epoch
};

/// Skip-gram with negative sampling over the walk corpus. Context pairs use
/// the full window; negatives are drawn from the unigram^0.75 distribution.
SkipGramResult skipgram_train(const WalkCorpus& corpus, const SkipGramConfig& config);

/// Inclusive [lo, hi] context range around `pos`; shared with the trainer.
std::pair<std::size_t, std::size_t> window_bounds(std::size_t pos, std::size_t len, int window);

/// All (center, context) pairs a walk contributes.
std::vector<std::pair<std::uint32_t, std::uint32_t>> window_pairs(
    const std::vector<std::uint32_t>& walk, int window);

}  // namespace gelab

#endif
