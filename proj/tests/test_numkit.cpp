#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gelab/graph.hpp"
#include "gelab/tensor.hpp"

using namespace gelab;
using nk::Matrix;
using nk::TensorPtr;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = dist(rng);
    }
    return m;
}

SparseMatrix random_sparse(std::mt19937_64& rng, std::size_t r, std::size_t c, double density,
                           bool positive = false) {
    SparseMatrix m;
    m.rows = r;
    m.cols = c;
    m.row_ptr.assign(r + 1, 0);
    std::bernoulli_distribution coin(density);
    std::normal_distribution<double> value(0.0, 1.0);
    for (std::size_t i = 0; i < r; ++i) {
        m.row_ptr[i] = m.col_idx.size();
        for (std::size_t j = 0; j < c; ++j) {
            if (coin(rng)) {
                m.col_idx.push_back(static_cast<std::uint32_t>(j));
                double v = value(rng);
                m.values.push_back(positive ? std::abs(v) + 0.1 : v);
            }
        }
    }
    m.row_ptr[r] = m.col_idx.size();
    return m;
}

// central finite differences of a scalar function of one parameter tensor
Matrix finite_diff(const std::function<double()>& eval, const TensorPtr& param, double h = 1e-5) {
    Matrix grad(param->rows(), param->cols());
    for (Eigen::Index i = 0; i < param->rows(); ++i) {
        for (Eigen::Index j = 0; j < param->cols(); ++j) {
            const double keep = param->value(i, j);
            param->value(i, j) = keep + h;
            const double up = eval();
            param->value(i, j) = keep - h;
            const double down = eval();
            param->value(i, j) = keep;
            grad(i, j) = (up - down) / (2.0 * h);
        }
    }
    return grad;
}

void check_close(const Matrix& analytic, const Matrix& numeric, double rel_tol = 1e-4) {
    REQUIRE(analytic.rows() == numeric.rows());
    REQUIRE(analytic.cols() == numeric.cols());
    for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
        for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
            const double denom = std::max({std::abs(analytic(i, j)), std::abs(numeric(i, j)), 1e-6});
            REQUIRE(std::abs(analytic(i, j) - numeric(i, j)) / denom < rel_tol);
        }
    }
}

}  // namespace

TEST_CASE("matmul basics") {
    std::mt19937_64 rng(1);
    SUBCASE("identity times X is X") {
        Matrix x = random_matrix(rng, 4, 3);
        nk::Tape tape;
        auto out = tape.matmul(nk::tensor(Matrix::Identity(4, 4)), nk::tensor(x));
        CHECK(out->value == x);
    }
    SUBCASE("K3 Ahat times ones gives row sums") {
        std::istringstream in("0 1\n1 2\n0 2");
        auto g = load_edge_list(in, {});
        auto ahat = augmented_adjacency(g);
        nk::Tape tape;
        auto out = tape.matmul(ahat, nk::tensor(Matrix::Ones(3, 1)));
        for (int i = 0; i < 3; ++i) CHECK(out->value(i, 0) == 3.0);
    }
    SUBCASE("dimension mismatch") {
        nk::Tape tape;
        CHECK_THROWS_AS(tape.matmul(nk::tensor(Matrix::Zero(2, 3)), nk::tensor(Matrix::Zero(2, 3))),
                        std::invalid_argument);
    }
    SUBCASE("gradient of half squared Frobenius of A*B wrt B is A^T(AB)") {
        Matrix a = random_matrix(rng, 5, 4);
        auto b = nk::tensor(random_matrix(rng, 4, 3), true);
        nk::Tape tape;
        auto loss = tape.scale(tape.sum_all(tape.square(tape.matmul(nk::tensor(a), b))), 0.5);
        tape.backward(loss);
        Matrix expected = a.transpose() * (a * b->value);
        check_close(b->grad, expected, 1e-10);

        auto eval = [&] {
            nk::Tape t;
            return t.scale(t.sum_all(t.square(t.matmul(nk::tensor(a), b))), 0.5)->value(0, 0);
        };
        check_close(b->grad, finite_diff(eval, b));
    }
}

TEST_CASE("sparse matmul is bitwise-equal to densifying first") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 25; ++trial) {
        std::uniform_int_distribution<std::size_t> dim(1, 12);
        const std::size_t r = dim(rng), k = dim(rng), c = dim(rng);
        auto a = random_sparse(rng, r, k, 0.4, /*positive=*/true);
        Matrix b = random_matrix(rng, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
        b = b.cwiseAbs();  // keep partial sums away from signed zero
        nk::Tape tape;
        auto sparse_out = tape.matmul(a, nk::tensor(b));
        Matrix ad = nk::densify(a);
        Matrix dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                double acc = 0.0;
                for (std::size_t kk = 0; kk < k; ++kk) {
                    const double av =
                        ad(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(kk));
                    if (av != 0.0) {
                        acc += av * b(static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(j));
                    }
                }
                dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
            }
        }
        REQUIRE(sparse_out->value == dense);
    }
}

TEST_CASE("backward basics") {
    std::mt19937_64 rng(3);
    SUBCASE("loss = sum(W) gives all-ones grad") {
        auto w = nk::tensor(random_matrix(rng, 3, 4), true);
        nk::Tape tape;
        tape.backward(tape.sum_all(w));
        CHECK(w->grad == Matrix::Ones(3, 4));
    }
    SUBCASE("norm of tanh at zero has zero grad") {
        auto w = nk::tensor(Matrix::Zero(3, 3), true);
        nk::Tape tape;
        tape.backward(tape.sum_all(tape.square(tape.tanh(w))));
        CHECK(w->grad == Matrix::Zero(3, 3));
    }
    SUBCASE("non-scalar loss rejected") {
        auto w = nk::tensor(Matrix::Zero(2, 2), true);
        nk::Tape tape;
        auto y = tape.tanh(w);
        CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
    }
    SUBCASE("tape consumed exactly once") {
        auto w = nk::tensor(Matrix::Zero(2, 2), true);
        nk::Tape tape;
        auto loss = tape.sum_all(w);
        tape.backward(loss);
        CHECK_THROWS_AS(tape.backward(loss), std::logic_error);
    }
    SUBCASE("unreachable parameters get zero grad") {
        auto used = nk::tensor(random_matrix(rng, 2, 2), true);
        auto unused = nk::tensor(random_matrix(rng, 2, 2), true);
        nk::Tape tape;
        tape.watch(unused);
        tape.backward(tape.sum_all(used));
        CHECK(unused->grad == Matrix::Zero(2, 2));
    }
    SUBCASE("deterministic: same inputs, same gradients") {
        Matrix grads[2];
        for (int round = 0; round < 2; ++round) {
            std::mt19937_64 r2(99);
            auto w = nk::tensor(random_matrix(r2, 4, 4), true);
            auto x = nk::tensor(random_matrix(r2, 6, 4));
            nk::Tape tape;
            auto loss = tape.mean_all(tape.square(tape.tanh(tape.matmul(x, w))));
            tape.backward(loss);
            grads[round] = w->grad;
        }
        CHECK(grads[0] == grads[1]);
    }
}

TEST_CASE("gradient checks across ops, 100 random instances") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<Eigen::Index> dim(1, 6);
    for (int instance = 0; instance < 100; ++instance) {
        const Eigen::Index n = dim(rng) + 1, d = dim(rng), h = dim(rng);
        auto w = nk::tensor(random_matrix(rng, d, h, 0.7), true);
        auto x = nk::tensor(random_matrix(rng, n, d, 0.7));
        const int which = instance % 5;

        auto build = [&](nk::Tape& tape) -> TensorPtr {
            auto z = tape.matmul(x, w);
            switch (which) {
                case 0: return tape.mean_all(tape.square(tape.tanh(z)));
                case 1: return tape.mean_all(tape.square(tape.sigmoid(z)));
                case 2: return tape.mean_all(tape.square(tape.relu(z)));
                case 3: return tape.sum_all(tape.square(tape.sub(z, tape.scale(z, 0.25))));
                default: {
                    auto t = tape.transpose(z);
                    return tape.mean_all(tape.square(tape.matmul(z, t)));
                }
            }
        };
        nk::Tape tape;
        tape.backward(build(tape));
        Matrix analytic = w->grad;
        auto eval = [&] {
            nk::Tape t;
            return build(t)->value(0, 0);
        };
        check_close(analytic, finite_diff(eval, w));
    }
}

TEST_CASE("batch norm") {
    std::mt19937_64 rng(11);
    SUBCASE("standardized input with unit gamma is unchanged") {
        Matrix x(4, 2);
        x << 1, -1, -1, 1, 1, 1, -1, -1;  // columns already zero-mean unit-variance
        nk::BatchNormState bn(2);
        nk::Tape tape;
        auto y = tape.batch_norm(nk::tensor(x), bn);
        for (Eigen::Index i = 0; i < 4; ++i) {
            for (Eigen::Index j = 0; j < 2; ++j) {
                CHECK(y->value(i, j) == doctest::Approx(x(i, j)).epsilon(1e-4));
            }
        }
    }
    SUBCASE("constant column maps to beta") {
        Matrix x = Matrix::Constant(5, 3, 42.0);
        nk::BatchNormState bn(3);
        bn.beta->value.setConstant(-1.5);
        nk::Tape tape;
        auto y = tape.batch_norm(nk::tensor(x), bn);
        for (Eigen::Index i = 0; i < y->rows(); ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) CHECK(y->value(i, j) == doctest::Approx(-1.5));
        }
    }
    SUBCASE("gradients wrt x, gamma, beta match finite differences") {
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::Index n = 5, c = 3;
            auto x = nk::tensor(random_matrix(rng, n, c), true);
            nk::BatchNormState bn(c);
            bn.gamma->value = (random_matrix(rng, 1, c, 0.5).array() + 1.0).matrix();
            bn.beta->value = random_matrix(rng, 1, c, 0.5);

            auto build = [&](nk::Tape& tape) {
                return tape.mean_all(tape.square(tape.batch_norm(x, bn)));
            };
            nk::Tape tape;
            tape.backward(build(tape));
            Matrix gx = x->grad, gg = bn.gamma->grad, gb = bn.beta->grad;
            auto eval = [&] {
                nk::Tape t;
                return build(t)->value(0, 0);
            };
            check_close(gx, finite_diff(eval, x));
            check_close(gg, finite_diff(eval, bn.gamma));
            check_close(gb, finite_diff(eval, bn.beta));
        }
    }
}

TEST_CASE("softmax cross entropy gradcheck") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 6, d = 4;
        const int classes = 3;
        auto w = nk::tensor(random_matrix(rng, d, classes), true);
        auto x = nk::tensor(random_matrix(rng, n, d));
        std::vector<int> y(n);
        std::uniform_int_distribution<int> lab(0, classes - 1);
        for (auto& v : y) v = lab(rng);

        auto build = [&](nk::Tape& tape) {
            return tape.softmax_cross_entropy(tape.matmul(x, w), y);
        };
        nk::Tape tape;
        tape.backward(build(tape));
        Matrix analytic = w->grad;
        auto eval = [&] {
            nk::Tape t;
            return build(t)->value(0, 0);
        };
        check_close(analytic, finite_diff(eval, w));
    }
}

TEST_CASE("fused reconstruction loss") {
    std::mt19937_64 rng(17);
    std::istringstream in("0 1\n1 2\n0 2\n2 3\n3 4\n1 4");
    auto g = load_edge_list(in, {});
    auto a = adjacency_matrix(g);

    SUBCASE("zero embedding on K3 gives 0.25") {
        std::istringstream k3("0 1\n1 2\n0 2");
        auto gk3 = load_edge_list(k3, {});
        auto ak3 = adjacency_matrix(gk3);
        nk::Tape tape;
        auto loss = tape.sigmoid_recon_loss(nk::tensor(Matrix::Zero(3, 4)), ak3);
        CHECK(loss->value(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("matches the composed-op route and finite differences") {
        for (int trial = 0; trial < 10; ++trial) {
            auto h = nk::tensor(random_matrix(rng, 5, 3, 0.6), true);
            Matrix target = nk::densify(a);

            nk::Tape fused_tape;
            auto fused = fused_tape.sigmoid_recon_loss(h, a);
            nk::Tape composed_tape;
            auto composed = composed_tape.mean_all(composed_tape.square(composed_tape.sub(
                composed_tape.sigmoid(composed_tape.matmul(h, composed_tape.transpose(h))),
                nk::tensor(target))));
            CHECK(fused->value(0, 0) == doctest::Approx(composed->value(0, 0)).epsilon(1e-12));

            fused_tape.backward(fused);
            Matrix fused_grad = h->grad;
            composed_tape.backward(composed);
            check_close(fused_grad, h->grad, 1e-10);

            auto eval = [&] {
                nk::Tape t;
                return t.sigmoid_recon_loss(h, a)->value(0, 0);
            };
            check_close(fused_grad, finite_diff(eval, h));
        }
    }
    SUBCASE("target dimension mismatch") {
        nk::Tape tape;
        CHECK_THROWS_AS(tape.sigmoid_recon_loss(nk::tensor(Matrix::Zero(4, 2)), a),
                        std::invalid_argument);
    }
}

TEST_CASE("adam") {
    SUBCASE("first step moves by about -lr * sign(g)") {
        auto p = nk::tensor(Matrix::Zero(1, 1), true);
        p->zero_grad();
        p->grad(0, 0) = 3.7;
        nk::AdamState adam(0.01);
        adam.step({p});
        CHECK(p->value(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
    }
    SUBCASE("zero grad leaves the parameter unchanged") {
        auto p = nk::tensor(Matrix::Constant(2, 2, 5.0), true);
        p->zero_grad();
        nk::AdamState adam(0.01);
        adam.step({p});
        CHECK(p->value == Matrix::Constant(2, 2, 5.0));
        CHECK(adam.step_count == 1);
    }
    SUBCASE("three-step trace matches the hand recurrence") {
        // scalar quadratic f(x) = x^2/2, grad = x, lr 0.1
        auto p = nk::tensor(Matrix::Constant(1, 1, 1.0), true);
        nk::AdamState adam(0.1);
        double x = 1.0, m = 0.0, v = 0.0;
        for (int t = 1; t <= 3; ++t) {
            p->zero_grad();
            p->grad(0, 0) = p->value(0, 0);
            adam.step({p});

            const double g = x;
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            const double mhat = m / (1.0 - std::pow(0.9, t));
            const double vhat = v / (1.0 - std::pow(0.999, t));
            x -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
            CHECK(p->value(0, 0) == doctest::Approx(x).epsilon(1e-12));
        }
    }
}
