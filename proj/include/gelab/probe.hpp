#ifndef GELAB_PROBE_HPP
#define GELAB_PROBE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace gelab {

enum class ProbeKind { LinearRegression, LogisticRegression, LinearSvm, Mlp };

const char* probe_name(ProbeKind kind);

struct ProbeSpec {
    int folds = 5;
    std::uint64_t seed = 0;
};

struct FoldAssignment {
    std::vector<int> fold;  // fold id per index
    int k = 0;
    bool stratified = false;  // false after a fallback
};

/// Disjoint folds covering 0..n-1, sizes within 1 of each other. With a
/// class vector the split preserves per-class proportions within +-1; a
/// class smaller than k falls back to the unstratified split.
FoldAssignment kfold_split(std::size_t n, int k, const std::vector<int>* stratify_on,
                           std::uint64_t seed);

struct MetricSummary {
    std::vector<double> folds;
    double mean() const;
    double stddev() const;  // sample std over folds
};

struct RegressionProbeResult {
    MetricSummary mse;
    MetricSummary mae;
};

struct ClassificationProbeResult {
    MetricSummary macro_f1;
    MetricSummary micro_f1;
    bool missing_class_warning = false;
};

/// Ridge regression (lambda 1e-6) per fold on train-standardized features
/// against the train-z-scored target; errors are reported on the test fold
/// in standardized units. Throws on constant targets.
RegressionProbeResult regression_probe(const Eigen::MatrixXd& features,
                                       const std::vector<double>& target, const ProbeSpec& spec);

/// Cross-validated classifier probe on train-standardized features.
/// LogisticRegression: full-batch softmax + Adam (500 epochs, lr 0.01,
/// L2 1e-4). LinearSvm: one-vs-rest hinge via subgradient descent with L2.
/// Mlp: two 100-wide ReLU layers, Adam lr 0.001, 200 epochs, batches of 200,
/// no early stopping.
ClassificationProbeResult classification_probe(const Eigen::MatrixXd& features,
                                               const std::vector<int>& classes,
                                               const ProbeSpec& spec, ProbeKind kind);

}  // namespace gelab

#endif
