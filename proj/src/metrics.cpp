#include "gelab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace gelab {

F1Scores classification_scores(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw std::invalid_argument("classification_scores: length mismatch");
    }
    int n_classes = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        n_classes = std::max({n_classes, y_true[i] + 1, y_pred[i] + 1});
    }
    std::vector<double> tp(n_classes, 0.0), fp(n_classes, 0.0), fn(n_classes, 0.0);
    std::vector<char> observed(n_classes, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        observed[y_true[i]] = observed[y_pred[i]] = 1;
        if (y_true[i] == y_pred[i]) {
            tp[y_true[i]] += 1.0;
        } else {
            fp[y_pred[i]] += 1.0;
            fn[y_true[i]] += 1.0;
        }
    }
    F1Scores out;
    double macro = 0.0, observed_count = 0.0;
    double tp_all = 0.0, fp_all = 0.0, fn_all = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        if (!observed[c]) continue;
        observed_count += 1.0;
        const double denom = 2.0 * tp[c] + fp[c] + fn[c];
        macro += denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
        tp_all += tp[c];
        fp_all += fp[c];
        fn_all += fn[c];
    }
    out.macro_f1 = observed_count > 0.0 ? macro / observed_count : 0.0;
    const double micro_denom = 2.0 * tp_all + fp_all + fn_all;
    out.micro_f1 = micro_denom > 0.0 ? 2.0 * tp_all / micro_denom : 0.0;
    return out;
}

namespace {

double log2_safe(double x) { return std::log2(x); }

std::size_t relabel(const std::vector<int>& v, std::vector<int>& out) {
    std::map<int, int> ids;
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto [it, ins] = ids.emplace(v[i], static_cast<int>(ids.size()));
        (void)ins;
        out[i] = it->second;
    }
    return ids.size();
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

ExternalMetrics external_metrics(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("external_metrics: length mismatch");
    const auto n = static_cast<double>(pred.size());
    std::vector<int> u, v;
    const auto ku = relabel(pred, u);
    const auto kv = relabel(truth, v);

    Eigen::MatrixXd contingency = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ku),
                                                        static_cast<Eigen::Index>(kv));
    for (std::size_t i = 0; i < u.size(); ++i) contingency(u[i], v[i]) += 1.0;
    Eigen::VectorXd row_sum = contingency.rowwise().sum();
    Eigen::VectorXd col_sum = contingency.colwise().sum();

    ExternalMetrics out;

    // NMI with arithmetic-mean normalization
    double hu = 0.0, hv = 0.0, mi = 0.0;
    for (Eigen::Index i = 0; i < row_sum.size(); ++i) {
        const double p = row_sum(i) / n;
        if (p > 0.0) hu -= p * log2_safe(p);
    }
    for (Eigen::Index j = 0; j < col_sum.size(); ++j) {
        const double p = col_sum(j) / n;
        if (p > 0.0) hv -= p * log2_safe(p);
    }
    for (Eigen::Index i = 0; i < contingency.rows(); ++i) {
        for (Eigen::Index j = 0; j < contingency.cols(); ++j) {
            const double pij = contingency(i, j) / n;
            if (pij > 0.0) {
                mi += pij * log2_safe(pij * n * n / (row_sum(i) * col_sum(j)));
            }
        }
    }
    if (ku == 1 && kv == 1) {
        out.nmi = 1.0;  // two identical trivial partitions
    } else {
        const double norm = 0.5 * (hu + hv);
        out.nmi = norm > 0.0 ? mi / norm : 0.0;
    }

    // ARI under the permutation model
    double sum_ij = 0.0, sum_u = 0.0, sum_v = 0.0;
    for (Eigen::Index i = 0; i < contingency.rows(); ++i) {
        for (Eigen::Index j = 0; j < contingency.cols(); ++j) sum_ij += comb2(contingency(i, j));
    }
    for (Eigen::Index i = 0; i < row_sum.size(); ++i) sum_u += comb2(row_sum(i));
    for (Eigen::Index j = 0; j < col_sum.size(); ++j) sum_v += comb2(col_sum(j));
    const double expected = sum_u * sum_v / comb2(n);
    const double maximum = 0.5 * (sum_u + sum_v);
    out.ari = maximum == expected ? 1.0 : (sum_ij - expected) / (maximum - expected);

    // ACC via optimal cluster-to-class matching on a padded square matrix
    const auto dim = static_cast<Eigen::Index>(std::max(ku, kv));
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(dim, dim);
    padded.topLeftCorner(contingency.rows(), contingency.cols()) = contingency;
    auto match = hungarian_max(padded);
    double correct = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) correct += padded(i, match[static_cast<std::size_t>(i)]);
    out.acc = correct / n;
    return out;
}

InternalMetrics internal_metrics(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != points.rows()) {
        throw std::invalid_argument("internal_metrics: label count mismatch");
    }
    std::vector<int> compact;
    const auto k = static_cast<int>(relabel(labels, compact));
    if (k < 2) throw std::invalid_argument("internal_metrics: need at least 2 groups");
    const auto n = points.rows();

    InternalMetrics out;
    std::vector<std::vector<Eigen::Index>> members(k);
    for (Eigen::Index i = 0; i < n; ++i) members[compact[static_cast<std::size_t>(i)]].push_back(i);

    Eigen::MatrixXd centroids(k, points.cols());
    for (int c = 0; c < k; ++c) {
        Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(points.cols());
        for (auto i : members[c]) mu += points.row(i);
        centroids.row(c) = mu / static_cast<double>(members[c].size());
    }

    // Davies-Bouldin
    std::vector<double> scatter(k, 0.0);
    for (int c = 0; c < k; ++c) {
        for (auto i : members[c]) scatter[c] += (points.row(i) - centroids.row(c)).norm();
        scatter[c] /= static_cast<double>(members[c].size());
    }
    double db = 0.0;
    for (int a = 0; a < k; ++a) {
        double worst = 0.0;
        for (int b = 0; b < k; ++b) {
            if (a == b) continue;
            const double sep = (centroids.row(a) - centroids.row(b)).norm();
            if (sep == 0.0) {
                if (scatter[a] + scatter[b] > 0.0) {
                    worst = std::numeric_limits<double>::infinity();
                } else {
                    out.degenerate_warning = true;  // coincident empty-scatter clusters
                }
                continue;
            }
            worst = std::max(worst, (scatter[a] + scatter[b]) / sep);
        }
        db += worst;
    }
    out.davies_bouldin = db / static_cast<double>(k);

    // Calinski-Harabasz
    Eigen::RowVectorXd global = points.colwise().mean();
    double between = 0.0, within = 0.0;
    for (int c = 0; c < k; ++c) {
        between += static_cast<double>(members[c].size()) *
                   (centroids.row(c) - global).squaredNorm();
        for (auto i : members[c]) within += (points.row(i) - centroids.row(c)).squaredNorm();
    }
    if (within == 0.0 && between == 0.0) {
        out.calinski_harabasz = 0.0;
        out.degenerate_warning = true;
    } else if (within == 0.0) {
        out.calinski_harabasz = std::numeric_limits<double>::infinity();
    } else {
        out.calinski_harabasz = (between / static_cast<double>(k - 1)) /
                                (within / static_cast<double>(n - k));
    }

    // Silhouette (mean over samples; singleton clusters contribute 0)
    double sil = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int ci = compact[static_cast<std::size_t>(i)];
        if (members[ci].size() < 2) continue;  // term is 0
        double a = 0.0;
        for (auto j : members[ci]) {
            if (j != i) a += (points.row(i) - points.row(j)).norm();
        }
        a /= static_cast<double>(members[ci].size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == ci) continue;
            double d = 0.0;
            for (auto j : members[c]) d += (points.row(i) - points.row(j)).norm();
            b = std::min(b, d / static_cast<double>(members[c].size()));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) {
            sil += (b - a) / denom;
        } else {
            out.degenerate_warning = true;  // coincident points, 0/0 -> 0
        }
    }
    out.silhouette = sil / static_cast<double>(n);
    return out;
}

std::vector<int> hungarian_max(const Eigen::MatrixXd& weights) {
    if (weights.rows() != weights.cols()) throw std::invalid_argument("hungarian_max: square matrix required");
    const int n = static_cast<int>(weights.rows());
    // Jonker-Volgenant style shortest augmenting paths on the negated matrix.
    Eigen::MatrixXd cost = -weights;
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> match(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) match[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    }
    return match;
}

}  // namespace gelab
