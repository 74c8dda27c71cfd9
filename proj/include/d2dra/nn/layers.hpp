// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "d2dra/rng.hpp"

namespace d2dra::nn {

// Activations are feature-major: one column per batch element.
using Matrix = Eigen::MatrixXd;

enum class Mode { Train, Infer };

/// Trainable tensor with its gradient accumulator.
struct Param {
    std::string name;
    Matrix* value;
    Matrix* grad;
};

/// Non-trainable persisted tensor (BN running statistics).
struct Buffer {
    std::string name;
    Matrix* value;
};

/// Fully connected layer y = W x + b.
class Dense {
public:
    Dense() = default;
    Dense(int n_in, int n_out);

    /// Zero-mean Gaussian weights with variance 2 / fan_in, zero bias.
    void init(Rng& rng);

    Matrix forward(const Matrix& x);
    Matrix forward_infer(const Matrix& x) const;
    /// Accumulates dW, db and returns dL/dx.
    Matrix backward(const Matrix& dy);

    int n_in() const { return static_cast<int>(weight.cols()); }
    int n_out() const { return static_cast<int>(weight.rows()); }

    Matrix weight, bias;
    Matrix d_weight, d_bias;

private:
    Matrix input_;
};

/// Batch normalization over the batch dimension, per feature.
///
/// Train mode normalizes with the batch mean and population variance and
/// folds them into exponential running averages:
/// running = momentum * running + (1 - momentum) * batch.
/// Infer mode uses the running averages only.
class BatchNorm {
public:
    BatchNorm() = default;
    explicit BatchNorm(int n, double epsilon = 1e-5, double momentum = 0.99);

    Matrix forward(const Matrix& x, Mode mode);
    Matrix forward_infer(const Matrix& x) const;
    Matrix backward(const Matrix& dy);

    int size() const { return static_cast<int>(scale.rows()); }

    Matrix scale, shift;
    Matrix d_scale, d_shift;
    Matrix running_mean, running_var;
    double epsilon = 1e-5;
    double momentum = 0.99;

private:
    Matrix x_hat_;
    Eigen::VectorXd inv_std_;
};

Matrix relu(const Matrix& x);
/// Subgradient at 0 is 0.
Matrix relu_backward(const Matrix& dy, const Matrix& x);

/// Inverted dropout mask: 0 with probability `rate`, otherwise 1 / (1 - rate).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);
Matrix dropout(const Matrix& x, double rate, Mode mode, Rng& rng);

/// Softmax over consecutive row blocks of `block` rows, column by column.
Matrix softmax_blocks(const Matrix& logits, int block);
Matrix softmax_blocks_backward(const Matrix& d_probs, const Matrix& probs, int block);

std::vector<double> softmax(const std::vector<double>& y);

Matrix sigmoid(const Matrix& x);
double sigmoid(double x);
Matrix sigmoid_backward(const Matrix& d_out, const Matrix& out);

}  // namespace d2dra::nn
