// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "d2dra/nn/layers.hpp"

namespace d2dra::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed parameter list.
class Adam {
public:
    Adam(std::vector<Param> params, AdamConfig config);

    void step();
    void zero_grad();
    void set_lr(double lr) { config_.lr = lr; }
    long steps() const { return t_; }

private:
    std::vector<Param> params_;
    AdamConfig config_;
    std::vector<Matrix> m_, v_;
    long t_ = 0;
};

}  // namespace d2dra::nn
