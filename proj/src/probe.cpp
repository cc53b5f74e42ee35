#include "gelab/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gelab/metrics.hpp"
#include "gelab/rng.hpp"
#include "gelab/tensor.hpp"

namespace gelab {

const char* probe_name(ProbeKind kind) {
    switch (kind) {
        case ProbeKind::LinearRegression: return "ln_r";
        case ProbeKind::LogisticRegression: return "lg_r";
        case ProbeKind::LinearSvm: return "svm_l";
        case ProbeKind::Mlp: return "mlp";
    }
    throw std::invalid_argument("unknown probe kind");
}

double MetricSummary::mean() const {
    if (folds.empty()) return 0.0;
    return std::accumulate(folds.begin(), folds.end(), 0.0) / static_cast<double>(folds.size());
}

double MetricSummary::stddev() const {
    if (folds.size() < 2) return 0.0;
    const double m = mean();
    double acc = 0.0;
    for (double v : folds) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(folds.size() - 1));
}

FoldAssignment kfold_split(std::size_t n, int k, const std::vector<int>* stratify_on,
                           std::uint64_t seed) {
    if (k < 2 || static_cast<std::size_t>(k) > n) {
        throw std::invalid_argument("kfold_split: need 2 <= k <= n");
    }
    FoldAssignment out;
    out.k = k;
    out.fold.assign(n, 0);

    bool stratify = stratify_on != nullptr;
    if (stratify) {
        std::vector<std::size_t> class_sizes;
        for (int c : *stratify_on) {
            if (c < 0) throw std::invalid_argument("kfold_split: negative class id");
            if (static_cast<std::size_t>(c) >= class_sizes.size()) class_sizes.resize(c + 1, 0);
            ++class_sizes[static_cast<std::size_t>(c)];
        }
        for (std::size_t s : class_sizes) {
            if (s > 0 && s < static_cast<std::size_t>(k)) {
                stratify = false;  // fall back, caller sees .stratified == false
                break;
            }
        }
    }

    std::mt19937_64 rng(splitmix64(seed));
    if (!stratify) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t base = n / static_cast<std::size_t>(k);
        const std::size_t extra = n % static_cast<std::size_t>(k);
        std::size_t at = 0;
        for (int f = 0; f < k; ++f) {
            std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
            for (std::size_t i = 0; i < size; ++i) out.fold[idx[at++]] = f;
        }
        out.stratified = false;
        return out;
    }

    // per class: shuffle, then deal round-robin with a rotating offset so the
    // total fold sizes also stay within one of each other
    int max_class = *std::max_element(stratify_on->begin(), stratify_on->end());
    int offset = 0;
    for (int c = 0; c <= max_class; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if ((*stratify_on)[i] == c) members.push_back(i);
        }
        if (members.empty()) continue;
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            out.fold[members[i]] = static_cast<int>((offset + i) % static_cast<std::size_t>(k));
        }
        offset = static_cast<int>((offset + members.size()) % static_cast<std::size_t>(k));
    }
    out.stratified = true;
    return out;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardizer fit(const MatrixXd& x) {
        Standardizer s;
        s.mean = x.colwise().mean();
        Eigen::RowVectorXd var =
            (x.rowwise() - s.mean).array().square().colwise().sum() / static_cast<double>(x.rows());
        s.scale = var.array().sqrt();
        for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
            if (s.scale(j) < 1e-12) s.scale(j) = 1.0;
        }
        return s;
    }
    MatrixXd apply(const MatrixXd& x) const {
        return (x.rowwise() - mean).array().rowwise() / scale.array();
    }
};

MatrixXd take_rows(const MatrixXd& x, const std::vector<std::size_t>& rows) {
    MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

int count_classes(const std::vector<int>& classes) {
    int mx = -1;
    for (int c : classes) {
        if (c < 0) throw std::invalid_argument("classification_probe: negative class id");
        mx = std::max(mx, c);
    }
    return mx + 1;
}

std::vector<int> predict_rowwise_argmax(const MatrixXd& scores) {
    std::vector<int> pred(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best;
        scores.row(i).maxCoeff(&best);
        pred[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return pred;
}

std::vector<int> fit_predict_logistic(const MatrixXd& xtr, const std::vector<int>& ytr,
                                      const MatrixXd& xte, int n_classes) {
    auto w = nk::tensor(nk::Matrix::Zero(xtr.cols(), n_classes), true);
    auto b = nk::tensor(nk::Matrix::Zero(1, n_classes), true);
    auto x = nk::tensor(xtr);
    nk::AdamState adam(0.01);
    const double l2 = 1e-4;
    for (int epoch = 0; epoch < 500; ++epoch) {
        nk::Tape tape;
        auto logits = tape.add_row(tape.matmul(x, w), b);
        auto loss = tape.add(tape.softmax_cross_entropy(logits, ytr),
                             tape.scale(tape.sum_all(tape.square(w)), l2));
        tape.backward(loss);
        adam.step({w, b});
    }
    MatrixXd scores = (xte * w->value).rowwise() + b->value.row(0);
    return predict_rowwise_argmax(scores);
}

std::vector<int> fit_predict_linear_svm(const MatrixXd& xtr, const std::vector<int>& ytr,
                                        const MatrixXd& xte, int n_classes) {
    const double lambda = 1e-4;
    const int iters = 500;
    const double eta0 = 0.5;
    const auto n = xtr.rows();
    MatrixXd w = MatrixXd::Zero(xtr.cols(), n_classes);
    VectorXd b = VectorXd::Zero(n_classes);
    VectorXd y(n);
    for (int c = 0; c < n_classes; ++c) {
        for (Eigen::Index i = 0; i < n; ++i) y(i) = ytr[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
        VectorXd wc = VectorXd::Zero(xtr.cols());
        double bc = 0.0;
        for (int t = 0; t < iters; ++t) {
            VectorXd margins = (xtr * wc).array() + bc;
            margins.array() *= y.array();
            VectorXd grad_w = lambda * wc;
            double grad_b = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (margins(i) < 1.0) {
                    grad_w.noalias() -= (y(i) / static_cast<double>(n)) * xtr.row(i).transpose();
                    grad_b -= y(i) / static_cast<double>(n);
                }
            }
            const double eta = eta0 / std::sqrt(static_cast<double>(t + 1));
            wc -= eta * grad_w;
            bc -= eta * grad_b;
        }
        w.col(c) = wc;
        b(c) = bc;
    }
    MatrixXd scores = (xte * w).rowwise() + b.transpose();
    return predict_rowwise_argmax(scores);
}

std::vector<int> fit_predict_mlp(const MatrixXd& xtr, const std::vector<int>& ytr,
                                 const MatrixXd& xte, int n_classes, std::uint64_t seed) {
    const int hidden = 100;
    const int epochs = 200;
    const Eigen::Index batch_size = std::min<Eigen::Index>(200, xtr.rows());

    auto w1 = nk::tensor(nk::glorot_uniform(xtr.cols(), hidden, mix_seed(seed, 11)), true);
    auto b1 = nk::tensor(nk::Matrix::Zero(1, hidden), true);
    auto w2 = nk::tensor(nk::glorot_uniform(hidden, hidden, mix_seed(seed, 12)), true);
    auto b2 = nk::tensor(nk::Matrix::Zero(1, hidden), true);
    auto w3 = nk::tensor(nk::glorot_uniform(hidden, n_classes, mix_seed(seed, 13)), true);
    auto b3 = nk::tensor(nk::Matrix::Zero(1, n_classes), true);
    std::vector<nk::TensorPtr> params{w1, b1, w2, b2, w3, b3};
    nk::AdamState adam(0.001);

    std::vector<std::size_t> order(static_cast<std::size_t>(xtr.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed, 14));

    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(batch_size)) {
            const auto count = std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                                     order.size() - at);
            MatrixXd xb(static_cast<Eigen::Index>(count), xtr.cols());
            std::vector<int> yb(count);
            for (std::size_t i = 0; i < count; ++i) {
                xb.row(static_cast<Eigen::Index>(i)) =
                    xtr.row(static_cast<Eigen::Index>(order[at + i]));
                yb[i] = ytr[order[at + i]];
            }
            nk::Tape tape;
            auto h1 = tape.relu(tape.add_row(tape.matmul(nk::tensor(std::move(xb)), w1), b1));
            auto h2 = tape.relu(tape.add_row(tape.matmul(h1, w2), b2));
            auto logits = tape.add_row(tape.matmul(h2, w3), b3);
            auto loss = tape.softmax_cross_entropy(logits, yb);
            tape.backward(loss);
            adam.step(params);
        }
    }

    MatrixXd a1 = ((xte * w1->value).rowwise() + b1->value.row(0)).cwiseMax(0.0);
    MatrixXd a2 = ((a1 * w2->value).rowwise() + b2->value.row(0)).cwiseMax(0.0);
    MatrixXd scores = (a2 * w3->value).rowwise() + b3->value.row(0);
    return predict_rowwise_argmax(scores);
}

}  // namespace

RegressionProbeResult regression_probe(const MatrixXd& features, const std::vector<double>& target,
                                       const ProbeSpec& spec) {
    if (static_cast<Eigen::Index>(target.size()) != features.rows()) {
        throw std::invalid_argument("regression_probe: target length mismatch");
    }
    const auto [mn, mx] = std::minmax_element(target.begin(), target.end());
    if (*mn == *mx) throw std::invalid_argument("regression_probe: constant target");

    auto folds = kfold_split(target.size(), spec.folds, nullptr, spec.seed);
    RegressionProbeResult result;
    const double lambda = 1e-6;

    for (int f = 0; f < spec.folds; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < target.size(); ++i) {
            (folds.fold[i] == f ? test : train).push_back(i);
        }
        MatrixXd xtr_raw = take_rows(features, train);
        MatrixXd xte_raw = take_rows(features, test);
        auto std_x = Standardizer::fit(xtr_raw);
        MatrixXd xtr = std_x.apply(xtr_raw);
        MatrixXd xte = std_x.apply(xte_raw);

        double mu = 0.0;
        for (auto i : train) mu += target[i];
        mu /= static_cast<double>(train.size());
        double var = 0.0;
        for (auto i : train) var += (target[i] - mu) * (target[i] - mu);
        var /= static_cast<double>(train.size());
        if (var <= 0.0) throw std::invalid_argument("regression_probe: constant training target");
        const double sd = std::sqrt(var);

        VectorXd ytr(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) ytr(static_cast<Eigen::Index>(i)) = (target[train[i]] - mu) / sd;
        VectorXd yte(static_cast<Eigen::Index>(test.size()));
        for (std::size_t i = 0; i < test.size(); ++i) yte(static_cast<Eigen::Index>(i)) = (target[test[i]] - mu) / sd;

        MatrixXd gram = xtr.transpose() * xtr;
        gram.diagonal().array() += lambda;
        VectorXd beta = gram.ldlt().solve(xtr.transpose() * ytr);

        VectorXd residual = xte * beta - yte;
        result.mse.folds.push_back(residual.squaredNorm() / static_cast<double>(test.size()));
        result.mae.folds.push_back(residual.array().abs().mean());
    }
    return result;
}

ClassificationProbeResult classification_probe(const MatrixXd& features,
                                               const std::vector<int>& classes,
                                               const ProbeSpec& spec, ProbeKind kind) {
    if (static_cast<Eigen::Index>(classes.size()) != features.rows()) {
        throw std::invalid_argument("classification_probe: class vector length mismatch");
    }
    const int n_classes = count_classes(classes);
    if (n_classes < 2) throw std::invalid_argument("classification_probe: need at least 2 classes");
    if (kind == ProbeKind::LinearRegression) {
        throw std::invalid_argument("classification_probe: LinearRegression is a regression probe");
    }

    auto folds = kfold_split(classes.size(), spec.folds, &classes, spec.seed);
    ClassificationProbeResult result;

    for (int f = 0; f < spec.folds; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < classes.size(); ++i) {
            (folds.fold[i] == f ? test : train).push_back(i);
        }
        MatrixXd xtr_raw = take_rows(features, train);
        MatrixXd xte_raw = take_rows(features, test);
        auto std_x = Standardizer::fit(xtr_raw);
        MatrixXd xtr = std_x.apply(xtr_raw);
        MatrixXd xte = std_x.apply(xte_raw);
        std::vector<int> ytr(train.size()), yte(test.size());
        for (std::size_t i = 0; i < train.size(); ++i) ytr[i] = classes[train[i]];
        for (std::size_t i = 0; i < test.size(); ++i) yte[i] = classes[test[i]];

        std::vector<char> present(static_cast<std::size_t>(n_classes), 0);
        for (int c : ytr) present[static_cast<std::size_t>(c)] = 1;
        if (std::find(present.begin(), present.end(), 0) != present.end()) {
            result.missing_class_warning = true;
        }

        std::vector<int> pred;
        switch (kind) {
            case ProbeKind::LogisticRegression:
                pred = fit_predict_logistic(xtr, ytr, xte, n_classes);
                break;
            case ProbeKind::LinearSvm:
                pred = fit_predict_linear_svm(xtr, ytr, xte, n_classes);
                break;
            case ProbeKind::Mlp:
                pred = fit_predict_mlp(xtr, ytr, xte, n_classes,
                                       mix_seed(spec.seed, static_cast<std::uint64_t>(f)));
                break;
            default:
                break;
        }
        auto scores = classification_scores(yte, pred);
        result.macro_f1.folds.push_back(scores.macro_f1);
        result.micro_f1.folds.push_back(scores.micro_f1);
    }
    return result;
}

}  // namespace gelab
