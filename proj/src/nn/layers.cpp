// SPDX-License-Identifier: Apache-2.0
#include "d2dra/nn/layers.hpp"

#include <cmath>

#include "d2dra/errors.hpp"

namespace d2dra::nn {

Dense::Dense(int n_in, int n_out)
    : weight(Matrix::Zero(n_out, n_in)), bias(Matrix::Zero(n_out, 1)), d_weight(Matrix::Zero(n_out, n_in)),
      d_bias(Matrix::Zero(n_out, 1))
{
}

void Dense::init(Rng& rng)
{
    const double stddev = std::sqrt(2.0 / static_cast<double>(n_in()));
    // row-major fill so the draw order matches the on-disk layout
    for (Eigen::Index r = 0; r < weight.rows(); ++r)
        for (Eigen::Index c = 0; c < weight.cols(); ++c)
            weight(r, c) = stddev * rng.normal();
    bias.setZero();
}

Matrix Dense::forward(const Matrix& x)
{
    input_ = x;
    return forward_infer(x);
}

Matrix Dense::forward_infer(const Matrix& x) const
{
    if (x.rows() != weight.cols())
        throw ShapeMismatch("dense layer input width mismatch");
    Matrix y = weight * x;
    y.colwise() += bias.col(0);
    return y;
}

Matrix Dense::backward(const Matrix& dy)
{
    d_weight.noalias() += dy * input_.transpose();
    d_bias += dy.rowwise().sum();
    return weight.transpose() * dy;
}

BatchNorm::BatchNorm(int n, double eps, double mom)
    : scale(Matrix::Ones(n, 1)), shift(Matrix::Zero(n, 1)), d_scale(Matrix::Zero(n, 1)), d_shift(Matrix::Zero(n, 1)),
      running_mean(Matrix::Zero(n, 1)), running_var(Matrix::Ones(n, 1)), epsilon(eps), momentum(mom)
{
}

Matrix BatchNorm::forward(const Matrix& x, Mode mode)
{
    if (mode == Mode::Infer)
        return forward_infer(x);
    if (x.rows() != scale.rows())
        throw ShapeMismatch("batch norm input width mismatch");
    if (x.cols() < 2)
        throw ShapeMismatch("batch norm in train mode needs a batch of at least 2");

    const double m = static_cast<double>(x.cols());
    const Eigen::VectorXd mean = x.rowwise().mean();
    Matrix centered = x.colwise() - mean;
    const Eigen::VectorXd var = centered.array().square().rowwise().sum() / m;
    inv_std_ = (var.array() + epsilon).rsqrt();
    x_hat_ = centered.array().colwise() * inv_std_.array();

    running_mean = momentum * running_mean + (1.0 - momentum) * mean;
    running_var = momentum * running_var + (1.0 - momentum) * var;

    Matrix y = x_hat_.array().colwise() * scale.col(0).array();
    y.colwise() += shift.col(0);
    return y;
}

Matrix BatchNorm::forward_infer(const Matrix& x) const
{
    if (x.rows() != scale.rows())
        throw ShapeMismatch("batch norm input width mismatch");
    const Eigen::ArrayXd gain = scale.col(0).array() * (running_var.col(0).array() + epsilon).rsqrt();
    const Eigen::ArrayXd offset = shift.col(0).array() - running_mean.col(0).array() * gain;
    Matrix y = x.array().colwise() * gain;
    y.colwise() += offset.matrix();
    return y;
}

Matrix BatchNorm::backward(const Matrix& dy)
{
    const double m = static_cast<double>(dy.cols());
    d_scale += (dy.array() * x_hat_.array()).rowwise().sum().matrix();
    d_shift += dy.rowwise().sum();

    const Matrix dx_hat = dy.array().colwise() * scale.col(0).array();
    const Eigen::ArrayXd sum_dx_hat = dx_hat.rowwise().sum().array();
    const Eigen::ArrayXd sum_dx_hat_xhat = (dx_hat.array() * x_hat_.array()).rowwise().sum();
    Matrix dx = (m * dx_hat.array()).colwise() - sum_dx_hat;
    dx.array() -= x_hat_.array().colwise() * sum_dx_hat_xhat;
    dx.array().colwise() *= inv_std_.array() / m;
    return dx;
}

Matrix relu(const Matrix& x)
{
    return x.cwiseMax(0.0);
}

Matrix relu_backward(const Matrix& dy, const Matrix& x)
{
    return (x.array() > 0.0).select(dy, 0.0);
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng)
{
    Matrix mask(rows, cols);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            mask(r, c) = rng.uniform() < rate ? 0.0 : keep_scale;
    return mask;
}

Matrix dropout(const Matrix& x, double rate, Mode mode, Rng& rng)
{
    if (mode == Mode::Infer || rate == 0.0)
        return x;
    return x.cwiseProduct(dropout_mask(x.rows(), x.cols(), rate, rng));
}

Matrix softmax_blocks(const Matrix& logits, int block)
{
    if (block <= 0 || logits.rows() % block != 0)
        throw ShapeMismatch("softmax block size does not divide the logit count");
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
        for (Eigen::Index b = 0; b < logits.rows(); b += block) {
            const auto y = logits.col(c).segment(b, block);
            const double mx = y.maxCoeff();
            auto o = out.col(c).segment(b, block);
            o = (y.array() - mx).exp().matrix();
            o /= o.sum();
        }
    return out;
}

Matrix softmax_blocks_backward(const Matrix& d_probs, const Matrix& probs, int block)
{
    Matrix d_logits(probs.rows(), probs.cols());
    for (Eigen::Index c = 0; c < probs.cols(); ++c)
        for (Eigen::Index b = 0; b < probs.rows(); b += block) {
            const auto s = probs.col(c).segment(b, block);
            const auto ds = d_probs.col(c).segment(b, block);
            const double dot = s.dot(ds);
            d_logits.col(c).segment(b, block) = s.cwiseProduct((ds.array() - dot).matrix());
        }
    return d_logits;
}

std::vector<double> softmax(const std::vector<double>& y)
{
    Matrix m = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    const Matrix s = softmax_blocks(m, static_cast<int>(y.size()));
    return {s.data(), s.data() + s.size()};
}

double sigmoid(double x)
{
    // split on sign so exp never overflows
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& x)
{
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

Matrix sigmoid_backward(const Matrix& d_out, const Matrix& out)
{
    return d_out.array() * out.array() * (1.0 - out.array());
}

}  // namespace d2dra::nn
