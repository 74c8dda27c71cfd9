// SPDX-License-Identifier: Apache-2.0
#include "d2dra/nn/adam.hpp"

#include <cmath>

namespace d2dra::nn {

Adam::Adam(std::vector<Param> params, AdamConfig config) : params_(std::move(params)), config_(config)
{
    for (const auto& p : params_) {
        m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
        v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
}

void Adam::step()
{
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const Matrix& g = *params_[i].grad;
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
        params_[i].value->array() -=
            config_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
    }
}

void Adam::zero_grad()
{
    for (auto& p : params_)
        p.grad->setZero();
}

}  // namespace d2dra::nn
