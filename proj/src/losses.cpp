// SPDX-License-Identifier: Apache-2.0
#include "d2dra/losses.hpp"

#include <cmath>

#include "d2dra/errors.hpp"

namespace d2dra {

namespace {

void zero_like(const SoftOutputs& soft, SoftOutputs& grad)
{
    grad.n_tps = soft.n_tps;
    grad.n_power_levels = soft.n_power_levels;
    grad.n_channels = soft.n_channels;
    grad.power_probs.assign(soft.power_probs.size(), 0.0);
    grad.channel_probs.assign(soft.channel_probs.size(), 0.0);
    grad.feedback_soft.assign(soft.feedback_soft.size(), 0.0);
    grad.bs_soft.assign(soft.bs_soft.size(), 0.0);
}

bool is_distributed(const SoftOutputs& soft)
{
    return !soft.feedback_soft.empty() || !soft.bs_soft.empty();
}

// weighted decision penalty (power and channel) and, for the distributed
// model, weighted feedback penalty
double add_binarization(const SoftOutputs& soft, double kappa, double w_decision, double w_feedback,
                        SoftOutputs* grad)
{
    double term = w_decision * (binarization_penalty(soft.power_probs, kappa) +
                                binarization_penalty(soft.channel_probs, kappa));
    if (is_distributed(soft))
        term += w_feedback *
                (binarization_penalty(soft.feedback_soft, kappa) + binarization_penalty(soft.bs_soft, kappa));
    if (grad != nullptr) {
        add_binarization_gradient(soft.power_probs, kappa, w_decision, grad->power_probs);
        add_binarization_gradient(soft.channel_probs, kappa, w_decision, grad->channel_probs);
        if (is_distributed(soft)) {
            add_binarization_gradient(soft.feedback_soft, kappa, w_feedback, grad->feedback_soft);
            add_binarization_gradient(soft.bs_soft, kappa, w_feedback, grad->bs_soft);
        }
    }
    return term;
}

}  // namespace

void LossWeights::validate() const
{
    if (!(kappa > 0.0))
        throw ConfigError("kappa must be positive");
    if (rho_1 < 0.0 || rho_2 < 0.0 || lambda_1 < 0.0 || lambda_2 < 0.0 || lambda_3 < 0.0)
        throw ConfigError("penalty weights must be non-negative");
    if (!(delta_ft > 0.0))
        throw ConfigError("delta_ft must be positive");
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o)
{
    objective_term += o.objective_term;
    qos_term += o.qos_term;
    binarization_term += o.binarization_term;
    return *this;
}

LossBreakdown& LossBreakdown::operator*=(double s)
{
    objective_term *= s;
    qos_term *= s;
    binarization_term *= s;
    return *this;
}

double binarization_penalty(std::span<const double> values, double kappa)
{
    double g = 0.0;
    for (double x : values)
        g -= std::pow(std::abs(x - 0.5), kappa);
    return g;
}

void add_binarization_gradient(std::span<const double> values, double kappa, double weight, std::span<double> grad)
{
    if (weight == 0.0)
        return;
    for (std::size_t e = 0; e < values.size(); ++e) {
        const double d = values[e] - 0.5;
        if (d == 0.0)
            continue;
        grad[e] -= weight * kappa * std::pow(std::abs(d), kappa - 1.0) * (d > 0.0 ? 1.0 : -1.0);
    }
}

LossBreakdown ct_loss(const SoftOutputs& soft, const LabeledSample& label, const LossWeights& weights,
                      SoftOutputs* grad)
{
    if (!label.feasible)
        throw InfeasibleLabel("infeasible samples carry no CT label");
    if (label.optimal.n_tps() != soft.n_tps)
        throw ShapeMismatch("label does not match soft outputs");
    if (grad != nullptr)
        zero_like(soft, *grad);

    LossBreakdown loss;
    for (int i = 0; i < soft.n_tps; ++i) {
        const std::size_t pj = static_cast<std::size_t>(i) * soft.n_power_levels + label.optimal.power_idx[i];
        const std::size_t ck = static_cast<std::size_t>(i) * soft.n_channels + label.optimal.channel_idx[i];
        const double p = soft.power_probs[pj];
        const double a = soft.channel_probs[ck];
        loss.objective_term -= std::log(std::max(p, kProbabilityFloor)) + std::log(std::max(a, kProbabilityFloor));
        if (grad != nullptr) {
            if (p > kProbabilityFloor)
                grad->power_probs[pj] -= 1.0 / p;
            if (a > kProbabilityFloor)
                grad->channel_probs[ck] -= 1.0 / a;
        }
    }
    loss.binarization_term = add_binarization(soft, weights.kappa, weights.rho_1, weights.rho_2, grad);
    return loss;
}

LossBreakdown ft_loss(const SoftOutputs& soft, const ChannelSample& sample, const SystemConfig& config,
                      const LossWeights& weights, Objective objective, SoftOutputs* grad)
{
    const auto cue = se_cue(sample, soft, config);
    const double scale = weights.lambda_1 / (config.se_threshold + weights.delta_ft);

    LossBreakdown loss;
    std::vector<double> cue_weights(cue.size(), 0.0);
    for (std::size_t k = 0; k < cue.size(); ++k) {
        const double shortfall = config.se_threshold - cue[k];
        if (shortfall > 0.0) {
            loss.qos_term += scale * shortfall;
            cue_weights[k] = scale;
        }
    }

    const auto obj = soft_objective(sample, soft, config, objective, cue_weights);
    loss.objective_term = -obj.objective;
    if (grad != nullptr) {
        zero_like(soft, *grad);
        // d(-objective - Σ w_k SE_0^k) where w_k is the active hinge slope
        for (std::size_t e = 0; e < obj.d_power.size(); ++e)
            grad->power_probs[e] = -obj.d_power[e];
        for (std::size_t e = 0; e < obj.d_channel.size(); ++e)
            grad->channel_probs[e] = -obj.d_channel[e];
    }
    loss.binarization_term = add_binarization(soft, weights.kappa, weights.lambda_2, weights.lambda_3, grad);
    return loss;
}

}  // namespace d2dra
