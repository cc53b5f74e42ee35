#include "gelab/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace gelab {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::pair<std::size_t, std::size_t> window_bounds(std::size_t pos, std::size_t len, int window) {
    const std::size_t lo = pos >= static_cast<std::size_t>(window) ? pos - window : 0;
    const std::size_t hi = std::min(len - 1, pos + static_cast<std::size_t>(window));
    return {lo, hi};
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> window_pairs(
    const std::vector<std::uint32_t>& walk, int window) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::size_t pos = 0; pos < walk.size(); ++pos) {
        auto [lo, hi] = window_bounds(pos, walk.size(), window);
        for (std::size_t c = lo; c <= hi; ++c) {
            if (c != pos) pairs.emplace_back(walk[pos], walk[c]);
        }
    }
    return pairs;
}

SkipGramResult skipgram_train(const WalkCorpus& corpus, const SkipGramConfig& config) {
    if (corpus.walks.empty()) throw std::invalid_argument("skipgram_train: empty corpus");
    const std::size_t n = corpus.n_nodes;
    const std::size_t dim = static_cast<std::size_t>(config.dim);

    // unigram^0.75 negative-sampling distribution
    std::vector<double> counts(n, 0.0);
    std::size_t total_positions = 0;
    for (const auto& walk : corpus.walks) {
        for (auto v : walk) counts[v] += 1.0;
        total_positions += walk.size();
    }
    std::vector<double> noise_cdf(n, 0.0);
    double acc = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        acc += std::pow(counts[v], 0.75);
        noise_cdf[v] = acc;
    }
    if (acc <= 0.0) throw std::invalid_argument("skipgram_train: corpus has no tokens");

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> center(n * dim);
    std::vector<double> context(n * dim, 0.0);
    {
        std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(dim),
                                                    0.5 / static_cast<double>(dim));
        for (auto& x : center) x = init(rng);
    }

    auto sample_noise = [&]() -> std::uint32_t {
        double r = unif(rng) * acc;
        auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), r);
        return static_cast<std::uint32_t>(std::min<std::size_t>(it - noise_cdf.begin(), n - 1));
    };

    SkipGramResult result;
    const double total_schedule =
        static_cast<double>(total_positions) * static_cast<double>(config.epochs);
    std::size_t processed = 0;
    std::vector<double> grad_center(dim);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t epoch_pairs = 0;
        for (const auto& walk : corpus.walks) {
            for (std::size_t pos = 0; pos < walk.size(); ++pos) {
                const double alpha =
                    config.lr *
                    std::max(1e-4, 1.0 - static_cast<double>(processed) / total_schedule);
                ++processed;
                const std::uint32_t w = walk[pos];
                double* vw = center.data() + static_cast<std::size_t>(w) * dim;
                const auto [lo, hi] = window_bounds(pos, walk.size(), config.window);
                for (std::size_t cpos = lo; cpos <= hi; ++cpos) {
                    if (cpos == pos) continue;
                    const std::uint32_t target = walk[cpos];
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    // one positive then `negatives` noise samples
                    for (int s = 0; s <= config.negatives; ++s) {
                        std::uint32_t ctx;
                        double label;
                        if (s == 0) {
                            ctx = target;
                            label = 1.0;
                        } else {
                            ctx = sample_noise();
                            if (ctx == target) continue;
                            label = 0.0;
                        }
                        double* uc = context.data() + static_cast<std::size_t>(ctx) * dim;
                        double score = 0.0;
                        for (std::size_t j = 0; j < dim; ++j) score += vw[j] * uc[j];
                        const double pred = sigmoid(score);
                        epoch_loss -= label > 0.5 ? std::log(std::max(pred, 1e-12))
                                                  : std::log(std::max(1.0 - pred, 1e-12));
                        const double g = (pred - label) * alpha;
                        for (std::size_t j = 0; j < dim; ++j) {
                            grad_center[j] += g * uc[j];
                            uc[j] -= g * vw[j];
                        }
                    }
                    for (std::size_t j = 0; j < dim; ++j) vw[j] -= grad_center[j];
                    ++epoch_pairs;
                }
            }
        }
        result.epoch_losses.push_back(epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs)
                                                      : 0.0);
    }

    result.embedding.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t j = 0; j < dim; ++j) {
            result.embedding.values(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j)) =
                center[v * dim + j];
        }
    }
    result.embedding.seed = config.seed;
    return result;
}

}  // namespace gelab
