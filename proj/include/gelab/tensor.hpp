#ifndef GELAB_TENSOR_HPP
#define GELAB_TENSOR_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "gelab/graph.hpp"

namespace gelab::nk {

using Matrix = Eigen::MatrixXd;

/// Dense matrix with an optional gradient buffer. Gradients are owned by the
/// tensor and populated by Tape::backward.
struct Tensor {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;

    Tensor(Matrix v, bool rg) : value(std::move(v)), requires_grad(rg) {}
    Eigen::Index rows() const { return value.rows(); }
    Eigen::Index cols() const { return value.cols(); }
    void zero_grad() { grad = Matrix::Zero(value.rows(), value.cols()); }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline TensorPtr tensor(Matrix v, bool requires_grad = false) {
    return std::make_shared<Tensor>(std::move(v), requires_grad);
}

/// Learnable scale/shift of a batch-normalization layer. Training is always
/// full batch, so the batch statistics are the population statistics and no
/// running averages are kept.
struct BatchNormState {
    TensorPtr gamma;  // 1 x C, initialized to 1
    TensorPtr beta;   // 1 x C, initialized to 0
    double eps = 1e-5;

    explicit BatchNormState(Eigen::Index channels);
};

/// Records the forward pass and replays it in reverse. A tape is consumed by
/// exactly one backward() call.
class Tape {
public:
    TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
    TensorPtr matmul(const SparseMatrix& a, const TensorPtr& b);
    TensorPtr transpose(const TensorPtr& a);
    TensorPtr add(const TensorPtr& a, const TensorPtr& b);
    TensorPtr sub(const TensorPtr& a, const TensorPtr& b);
    TensorPtr scale(const TensorPtr& a, double s);
    /// x + row vector broadcast over all rows (bias).
    TensorPtr add_row(const TensorPtr& x, const TensorPtr& bias);
    TensorPtr tanh(const TensorPtr& a);
    TensorPtr sigmoid(const TensorPtr& a);
    TensorPtr relu(const TensorPtr& a);
    TensorPtr square(const TensorPtr& a);
    TensorPtr sum_all(const TensorPtr& a);
    TensorPtr mean_all(const TensorPtr& a);
    /// Per-column standardization over the full batch followed by gamma/beta.
    TensorPtr batch_norm(const TensorPtr& x, BatchNormState& bn);
    /// Mean softmax cross-entropy of row-wise logits against class ids.
    TensorPtr softmax_cross_entropy(const TensorPtr& logits, const std::vector<int>& labels);
    /// mean((sigmoid(h h^T) - target)^2) over all n^2 entries, evaluated in
    /// row blocks so the n x n product is never materialized. `target` must
    /// be a symmetric binary matrix.
    TensorPtr sigmoid_recon_loss(const TensorPtr& h, const SparseMatrix& target);

    /// Populates grad on every requires_grad tensor reachable from `loss`;
    /// unreachable tracked tensors get zero grad. `loss` must be 1x1.
    void backward(const TensorPtr& loss);

    /// Parameters registered here are grad-zeroed on backward even when the
    /// current graph never touched them.
    void watch(const TensorPtr& t) { track(t); }

private:
    std::vector<std::function<void()>> records_;
    std::vector<TensorPtr> tracked_;
    bool consumed_ = false;

    void track(const TensorPtr& t);
    TensorPtr make_result(Matrix value, std::initializer_list<TensorPtr> inputs);
    void record(std::function<void()> fn) { records_.push_back(std::move(fn)); }
    static bool check_nan_enabled();
};

/// Bias-corrected Adam over a fixed parameter list.
struct AdamState {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;

    explicit AdamState(double learning_rate = 0.01) : lr(learning_rate) {}
    /// Applies one update using each parameter's current grad.
    void step(const std::vector<TensorPtr>& params);
};

/// Glorot-uniform matrix, U(-sqrt(6/(fan_in+fan_out)), +).
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// Dense copy of a sparse matrix (test and small-scale use).
Matrix densify(const SparseMatrix& m);

}  // namespace gelab::nk

#endif
