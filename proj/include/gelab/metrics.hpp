#ifndef GELAB_METRICS_HPP
#define GELAB_METRICS_HPP

#include <Eigen/Dense>
#include <vector>

namespace gelab {

struct F1Scores {
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
};

/// Per-class precision/recall/F1 from the confusion matrix; macro averages
/// over the union of observed classes (absent-prediction classes contribute
/// 0), micro aggregates global TP/FP/FN.
F1Scores classification_scores(const std::vector<int>& y_true, const std::vector<int>& y_pred);

struct ExternalMetrics {
    double nmi = 0.0;  // arithmetic-mean normalization
    double ari = 0.0;
    double acc = 0.0;  // optimal one-to-one assignment (Hungarian)
};

ExternalMetrics external_metrics(const std::vector<int>& pred, const std::vector<int>& truth);

struct InternalMetrics {
    double davies_bouldin = 0.0;
    double calinski_harabasz = 0.0;
    double silhouette = 0.0;
    bool degenerate_warning = false;
};

/// DB/CH/SC of the embedding grouped by the given labels (>= 2 groups).
/// Degenerate 0/0 cases evaluate to 0 and set the warning flag.
InternalMetrics internal_metrics(const Eigen::MatrixXd& points, const std::vector<int>& labels);

/// Maximum-weight one-to-one assignment on a square cost matrix (Hungarian
/// algorithm); returns the column matched to each row.
std::vector<int> hungarian_max(const Eigen::MatrixXd& weights);

}  // namespace gelab

#endif
