#include "gelab/tsne.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace gelab {

using Eigen::MatrixXd;

Eigen::MatrixXd tsne_project(const MatrixXd& points, const TsneConfig& config) {
    const auto n = points.rows();
    if (config.perplexity >= (static_cast<double>(n) - 1.0) / 3.0) {
        throw std::invalid_argument("tsne_project: perplexity too large for n");
    }

    // pairwise squared distances in input space
    Eigen::VectorXd sq = points.rowwise().squaredNorm();
    MatrixXd d2 = (-2.0 * points * points.transpose()).colwise() + sq;
    d2.rowwise() += sq.transpose();
    d2.diagonal().setZero();
    d2 = d2.cwiseMax(0.0);

    // conditional affinities via per-point bandwidth search
    const double target_entropy = std::log(config.perplexity);
    MatrixXd p = MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0, beta_lo = -1.0, beta_hi = -1.0;
        Eigen::VectorXd row;
        for (int it = 0; it < 50; ++it) {
            row = ((-beta * d2.row(i).transpose().array()).exp()).matrix();
            row(i) = 0.0;
            const double sum = row.sum();
            double entropy;
            if (sum <= 0.0) {
                entropy = 0.0;
            } else {
                // H = log(sum) + beta * E[d^2]
                entropy = std::log(sum) + beta * d2.row(i).dot(row.transpose()) / sum;
            }
            const double diff = entropy - target_entropy;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0.0) {
                beta_lo = beta;
                beta = beta_hi < 0.0 ? beta * 2.0 : 0.5 * (beta + beta_hi);
            } else {
                beta_hi = beta;
                beta = beta_lo < 0.0 ? beta / 2.0 : 0.5 * (beta + beta_lo);
            }
        }
        const double sum = row.sum();
        if (sum > 0.0) p.row(i) = row.transpose() / sum;
    }

    // symmetrize and floor
    p = (p + p.transpose()) / (2.0 * static_cast<double>(n));
    p = p.cwiseMax(1e-12);
    p.diagonal().setZero();

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> init(0.0, 1e-4);
    MatrixXd y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i, 0) = init(rng);
        y(i, 1) = init(rng);
    }
    MatrixXd velocity = MatrixXd::Zero(n, 2);
    MatrixXd gains = MatrixXd::Ones(n, 2);

    for (int iter = 0; iter < config.iterations; ++iter) {
        const double exaggeration = iter < config.exaggeration_iters ? 12.0 : 1.0;
        const double momentum = iter < config.exaggeration_iters ? 0.5 : 0.8;

        Eigen::VectorXd ysq = y.rowwise().squaredNorm();
        MatrixXd num = (-2.0 * y * y.transpose()).colwise() + ysq;
        num.rowwise() += ysq.transpose();
        num = ((1.0 + num.array()).inverse()).matrix();  // student-t kernel
        num.diagonal().setZero();
        const double qsum = num.sum();

        // gradient: 4 * sum_j (exP_ij - Q_ij) (y_i - y_j) t_ij
        MatrixXd w = (exaggeration * p - num / qsum).cwiseProduct(num);
        Eigen::VectorXd wsum = w.rowwise().sum();
        MatrixXd grad = 4.0 * (wsum.asDiagonal() * y - w * y);

        for (Eigen::Index i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                const bool same_sign = (grad(i, c) > 0.0) == (velocity(i, c) > 0.0);
                gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
            }
        }
        velocity = momentum * velocity - config.learning_rate * gains.cwiseProduct(grad);
        y += velocity;
        y.rowwise() -= y.colwise().mean();  // keep the embedding centered
    }
    return y;
}

}  // namespace gelab
