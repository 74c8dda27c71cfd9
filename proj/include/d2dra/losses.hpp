// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "d2dra/channel.hpp"
#include "d2dra/config.hpp"
#include "d2dra/objective.hpp"
#include "d2dra/oracle.hpp"

namespace d2dra {

/// Loss weights. rho_* weight the CT binarization penalties; lambda_1 the
/// FT QoS hinge and lambda_2/lambda_3 the FT binarization penalties. The
/// *_2 / *_3 terms only apply to the distributed model's feedback values.
struct LossWeights {
    double kappa = 2.0;
    double rho_1 = 1.0;
    double rho_2 = 1.0;
    double lambda_1 = 10.0;
    double lambda_2 = 1.0;
    double lambda_3 = 1.0;
    double delta_ft = 1e-6;

    void validate() const;
    bool operator==(const LossWeights&) const = default;
};

struct LossBreakdown {
    double objective_term = 0.0;     // cross entropy (CT) or negative objective (FT)
    double qos_term = 0.0;           // weighted QoS hinge (FT only)
    double binarization_term = 0.0;  // weighted sum of binarization penalties

    double total() const { return objective_term + qos_term + binarization_term; }
    LossBreakdown& operator+=(const LossBreakdown& o);
    LossBreakdown& operator*=(double s);
};

inline constexpr double kProbabilityFloor = 1e-12;

/// -Σ |x - 0.5|^κ; zero when every value is 0.5, most negative at {0, 1}.
double binarization_penalty(std::span<const double> values, double kappa);

/// Adds weight * ∂penalty/∂x to `grad`.
void add_binarization_gradient(std::span<const double> values, double kappa, double weight, std::span<double> grad);

/// Cross entropy against a one-hot label plus the weighted binarization
/// penalties. Throws InfeasibleLabel for an infeasible label. When `grad`
/// is non-null it receives ∂loss/∂soft with the same layout as `soft`.
LossBreakdown ct_loss(const SoftOutputs& soft, const LabeledSample& label, const LossWeights& weights,
                      SoftOutputs* grad = nullptr);

/// Negative soft objective, the normalized QoS hinge on every CUE, and the
/// weighted binarization penalties.
LossBreakdown ft_loss(const SoftOutputs& soft, const ChannelSample& sample, const SystemConfig& config,
                      const LossWeights& weights, Objective objective, SoftOutputs* grad = nullptr);

}  // namespace d2dra
