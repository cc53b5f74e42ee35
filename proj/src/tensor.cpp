#include "gelab/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

namespace gelab::nk {

BatchNormState::BatchNormState(Eigen::Index channels) {
    gamma = tensor(Matrix::Ones(1, channels), true);
    beta = tensor(Matrix::Zero(1, channels), true);
}

bool Tape::check_nan_enabled() {
    static const bool enabled = std::getenv("GELAB_CHECK_NAN") != nullptr;
    return enabled;
}

void Tape::track(const TensorPtr& t) {
    for (const auto& seen : tracked_) {
        if (seen == t) return;
    }
    tracked_.push_back(t);
}

TensorPtr Tape::make_result(Matrix value, std::initializer_list<TensorPtr> inputs) {
    bool rg = false;
    for (const auto& in : inputs) {
        track(in);
        rg = rg || in->requires_grad;
    }
    if (check_nan_enabled() && !value.allFinite()) {
        throw std::runtime_error("non-finite value produced on tape");
    }
    auto out = tensor(std::move(value), rg);
    track(out);
    return out;
}

TensorPtr Tape::matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->cols() != b->rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    auto out = make_result(a->value * b->value, {a, b});
    if (out->requires_grad) {
        record([a, b, out] {
            if (a->requires_grad) a->grad.noalias() += out->grad * b->value.transpose();
            if (b->requires_grad) b->grad.noalias() += a->value.transpose() * out->grad;
        });
    }
    return out;
}

namespace {

// CSR * dense with per-row scalar accumulation in index order.
Matrix spmm(const SparseMatrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(a.rows), b.cols());
    const Eigen::Index d = b.cols();
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const double w = a.values[k];
            const Eigen::Index c = a.col_idx[k];
            for (Eigen::Index j = 0; j < d; ++j) {
                out(static_cast<Eigen::Index>(r), j) += w * b(c, j);
            }
        }
    }
    return out;
}

// A^T * dense, same traversal as spmm.
Matrix spmm_transposed(const SparseMatrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(a.cols), b.cols());
    const Eigen::Index d = b.cols();
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const double w = a.values[k];
            const Eigen::Index c = a.col_idx[k];
            for (Eigen::Index j = 0; j < d; ++j) {
                out(c, j) += w * b(static_cast<Eigen::Index>(r), j);
            }
        }
    }
    return out;
}

}  // namespace

TensorPtr Tape::matmul(const SparseMatrix& a, const TensorPtr& b) {
    if (static_cast<Eigen::Index>(a.cols) != b->rows()) {
        throw std::invalid_argument("matmul: inner dimensions differ");
    }
    auto out = make_result(spmm(a, b->value), {b});
    if (out->requires_grad) {
        const SparseMatrix* ap = &a;
        record([ap, b, out] {
            if (b->requires_grad) b->grad += spmm_transposed(*ap, out->grad);
        });
    }
    return out;
}

TensorPtr Tape::transpose(const TensorPtr& a) {
    auto out = make_result(a->value.transpose(), {a});
    if (out->requires_grad) {
        record([a, out] {
            if (a->requires_grad) a->grad += out->grad.transpose();
        });
    }
    return out;
}

TensorPtr Tape::add(const TensorPtr& a, const TensorPtr& b) {
    if (a->rows() != b->rows() || a->cols() != b->cols()) {
        throw std::invalid_argument("add: shape mismatch");
    }
    auto out = make_result(a->value + b->value, {a, b});
    if (out->requires_grad) {
        record([a, b, out] {
            if (a->requires_grad) a->grad += out->grad;
            if (b->requires_grad) b->grad += out->grad;
        });
    }
    return out;
}

TensorPtr Tape::sub(const TensorPtr& a, const TensorPtr& b) {
    if (a->rows() != b->rows() || a->cols() != b->cols()) {
        throw std::invalid_argument("sub: shape mismatch");
    }
    auto out = make_result(a->value - b->value, {a, b});
    if (out->requires_grad) {
        record([a, b, out] {
            if (a->requires_grad) a->grad += out->grad;
            if (b->requires_grad) b->grad -= out->grad;
        });
    }
    return out;
}

TensorPtr Tape::scale(const TensorPtr& a, double s) {
    auto out = make_result(a->value * s, {a});
    if (out->requires_grad) {
        record([a, out, s] {
            if (a->requires_grad) a->grad += s * out->grad;
        });
    }
    return out;
}

TensorPtr Tape::add_row(const TensorPtr& x, const TensorPtr& bias) {
    if (bias->rows() != 1 || bias->cols() != x->cols()) {
        throw std::invalid_argument("add_row: bias must be 1 x cols(x)");
    }
    Matrix v = x->value;
    v.rowwise() += bias->value.row(0);
    auto out = make_result(std::move(v), {x, bias});
    if (out->requires_grad) {
        record([x, bias, out] {
            if (x->requires_grad) x->grad += out->grad;
            if (bias->requires_grad) bias->grad.row(0) += out->grad.colwise().sum();
        });
    }
    return out;
}

TensorPtr Tape::tanh(const TensorPtr& a) {
    auto out = make_result(a->value.array().tanh().matrix(), {a});
    if (out->requires_grad) {
        record([a, out] {
            if (a->requires_grad) {
                a->grad.array() += out->grad.array() * (1.0 - out->value.array().square());
            }
        });
    }
    return out;
}

TensorPtr Tape::sigmoid(const TensorPtr& a) {
    Matrix v = (1.0 + (-a->value.array()).exp()).inverse().matrix();
    auto out = make_result(std::move(v), {a});
    if (out->requires_grad) {
        record([a, out] {
            if (a->requires_grad) {
                a->grad.array() +=
                    out->grad.array() * out->value.array() * (1.0 - out->value.array());
            }
        });
    }
    return out;
}

TensorPtr Tape::relu(const TensorPtr& a) {
    auto out = make_result(a->value.cwiseMax(0.0), {a});
    if (out->requires_grad) {
        record([a, out] {
            if (a->requires_grad) {
                a->grad.array() +=
                    out->grad.array() * (a->value.array() > 0.0).cast<double>();
            }
        });
    }
    return out;
}

TensorPtr Tape::square(const TensorPtr& a) {
    auto out = make_result(a->value.array().square().matrix(), {a});
    if (out->requires_grad) {
        record([a, out] {
            if (a->requires_grad) a->grad.array() += out->grad.array() * 2.0 * a->value.array();
        });
    }
    return out;
}

TensorPtr Tape::sum_all(const TensorPtr& a) {
    Matrix v(1, 1);
    v(0, 0) = a->value.sum();
    auto out = make_result(std::move(v), {a});
    if (out->requires_grad) {
        record([a, out] {
            if (a->requires_grad) a->grad.array() += out->grad(0, 0);
        });
    }
    return out;
}

TensorPtr Tape::mean_all(const TensorPtr& a) {
    const double inv = 1.0 / static_cast<double>(a->value.size());
    Matrix v(1, 1);
    v(0, 0) = a->value.sum() * inv;
    auto out = make_result(std::move(v), {a});
    if (out->requires_grad) {
        record([a, out, inv] {
            if (a->requires_grad) a->grad.array() += out->grad(0, 0) * inv;
        });
    }
    return out;
}

TensorPtr Tape::batch_norm(const TensorPtr& x, BatchNormState& bn) {
    if (bn.gamma->cols() != x->cols()) {
        throw std::invalid_argument("batch_norm: channel count mismatch");
    }
    const auto n = static_cast<double>(x->rows());
    Eigen::RowVectorXd mu = x->value.colwise().mean();
    Matrix centered = x->value.rowwise() - mu;
    Eigen::RowVectorXd var = centered.array().square().colwise().sum() / n;  // population
    Eigen::RowVectorXd inv_std = (var.array() + bn.eps).rsqrt();
    Matrix xhat = centered.array().rowwise() * inv_std.array();
    Matrix y = (xhat.array().rowwise() * bn.gamma->value.row(0).array()).rowwise() +
               bn.beta->value.row(0).array();

    auto gamma = bn.gamma;
    auto beta = bn.beta;
    auto out = make_result(std::move(y), {x, gamma, beta});
    if (out->requires_grad) {
        record([x, gamma, beta, out, xhat = std::move(xhat), inv_std = std::move(inv_std), n] {
            const Matrix& dy = out->grad;
            if (beta->requires_grad) beta->grad.row(0) += dy.colwise().sum();
            if (gamma->requires_grad) {
                gamma->grad.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
            }
            if (x->requires_grad) {
                Matrix dxhat = dy.array().rowwise() * gamma->value.row(0).array();
                Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
                Eigen::RowVectorXd sum_dxhat_xhat = (dxhat.array() * xhat.array()).colwise().sum();
                Matrix dx = (n * dxhat.array() - (Matrix::Ones(dxhat.rows(), 1) * sum_dxhat).array() -
                             xhat.array() * (Matrix::Ones(dxhat.rows(), 1) * sum_dxhat_xhat).array())
                                .rowwise() *
                            (inv_std.array() / n);
                x->grad += dx;
            }
        });
    }
    return out;
}

TensorPtr Tape::softmax_cross_entropy(const TensorPtr& logits, const std::vector<int>& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != logits->rows()) {
        throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
    }
    const Eigen::Index n = logits->rows();
    Matrix shifted = logits->value.colwise() - logits->value.rowwise().maxCoeff();
    Matrix expv = shifted.array().exp();
    Eigen::VectorXd norm = expv.rowwise().sum();
    Matrix probs = expv.array().colwise() / norm.array();

    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        loss -= std::log(std::max(probs(i, labels[i]), 1e-300));
    }
    Matrix v(1, 1);
    v(0, 0) = loss / static_cast<double>(n);

    auto out = make_result(std::move(v), {logits});
    if (out->requires_grad) {
        record([logits, out, probs = std::move(probs), labels, n] {
            if (!logits->requires_grad) return;
            Matrix d = probs;
            for (Eigen::Index i = 0; i < n; ++i) d(i, labels[i]) -= 1.0;
            logits->grad += (out->grad(0, 0) / static_cast<double>(n)) * d;
        });
    }
    return out;
}

TensorPtr Tape::sigmoid_recon_loss(const TensorPtr& h, const SparseMatrix& target) {
    const auto n = h->rows();
    if (static_cast<Eigen::Index>(target.rows) != n ||
        static_cast<Eigen::Index>(target.cols) != n) {
        throw std::invalid_argument("sigmoid_recon_loss: target dimension mismatch");
    }
    const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    const Eigen::Index block = 512;

    double loss = 0.0;
    Matrix g;
    const bool want_grad = h->requires_grad;
    if (want_grad) g = Matrix::Zero(n, h->cols());

    for (Eigen::Index r0 = 0; r0 < n; r0 += block) {
        const Eigen::Index b = std::min(block, n - r0);
        Matrix p = h->value.middleRows(r0, b) * h->value.transpose();  // scores
        p = ((1.0 + (-p.array()).exp()).inverse()).matrix();           // sigmoid
        Matrix m = p;                                                  // residual, then weighted
        for (Eigen::Index i = 0; i < b; ++i) {
            const auto row = static_cast<std::size_t>(r0 + i);
            for (std::size_t k = target.row_ptr[row]; k < target.row_ptr[row + 1]; ++k) {
                m(i, target.col_idx[k]) -= target.values[k];
            }
        }
        loss += m.squaredNorm();
        if (want_grad) {
            // d/dS of (sigmoid(S)-T)^2 = 2 r p (1-p); the symmetric half doubles it
            m.array() *= p.array() * (1.0 - p.array());
            g.middleRows(r0, b).noalias() = (4.0 * inv_n2) * (m * h->value);
        }
    }
    Matrix v(1, 1);
    v(0, 0) = loss * inv_n2;
    auto out = make_result(std::move(v), {h});
    if (out->requires_grad) {
        record([h, out, g = std::move(g)] {
            if (h->requires_grad) h->grad.noalias() += out->grad(0, 0) * g;
        });
    }
    return out;
}

void Tape::backward(const TensorPtr& loss) {
    if (consumed_) throw std::logic_error("tape already consumed by a backward pass");
    if (loss->rows() != 1 || loss->cols() != 1) {
        throw std::invalid_argument("backward: loss must be a scalar");
    }
    consumed_ = true;
    for (auto& t : tracked_) t->zero_grad();
    loss->grad(0, 0) = 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
}

void AdamState::step(const std::vector<TensorPtr>& params) {
    if (m.empty()) {
        for (const auto& p : params) {
            m.emplace_back(Matrix::Zero(p->rows(), p->cols()));
            v.emplace_back(Matrix::Zero(p->rows(), p->cols()));
        }
    }
    if (m.size() != params.size()) throw std::invalid_argument("adam: parameter list changed");
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = *params[i];
        if (p.grad.size() == 0) p.zero_grad();
        m[i] = beta1 * m[i] + (1.0 - beta1) * p.grad;
        v[i] = beta2 * v[i] + (1.0 - beta2) * p.grad.array().square().matrix();
        Matrix mhat = m[i] / bc1;
        Matrix vhat = v[i] / bc2;
        p.value.array() -= lr * mhat.array() / (vhat.array().sqrt() + eps);
    }
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = dist(rng);
    }
    return w;
}

Matrix densify(const SparseMatrix& m) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            out(static_cast<Eigen::Index>(r), m.col_idx[k]) = m.values[k];
        }
    }
    return out;
}

}  // namespace gelab::nk
