// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "d2dra/channel.hpp"
#include "d2dra/config.hpp"

namespace d2dra {

/// Hard per-TP decision. Idle is power_idx 0, canonically on channel 0.
struct Allocation {
    std::vector<int> channel_idx;
    std::vector<int> power_idx;

    static Allocation idle(int n_tps);

    int n_tps() const { return static_cast<int>(power_idx.size()); }
    void canonicalize();
    bool is_canonical() const;
    bool operator==(const Allocation&) const = default;
};

/// Relaxed (training-time) outputs for one sample.
///
/// power_probs is N x N_P and channel_probs N x K, both row-major with one
/// simplex per TP. feedback_soft (N x B_F) and bs_soft (B_B) are only
/// populated by the distributed model.
struct SoftOutputs {
    int n_tps = 0;
    int n_power_levels = 0;
    int n_channels = 0;
    std::vector<double> power_probs;
    std::vector<double> channel_probs;
    std::vector<double> feedback_soft;
    std::vector<double> bs_soft;

    double power_prob(int i, int j) const { return power_probs[static_cast<std::size_t>(i) * n_power_levels + j]; }
    double channel_prob(int i, int k) const { return channel_probs[static_cast<std::size_t>(i) * n_channels + k]; }

    /// One-hot relaxation of a hard allocation.
    static SoftOutputs one_hot(const Allocation& alloc, int n_power_levels, int n_channels);
};

/// Effective transmit power per (TP, channel): q[i][k] = a_i^k p_i,
/// stored row-major N x K. Hard and soft evaluation both reduce to this.
std::vector<double> effective_power(const Allocation& alloc, const SystemConfig& config);
std::vector<double> effective_power(const SoftOutputs& soft, const SystemConfig& config);

/// Expected transmit power Σ_j P_j p̂_i^j per TP (the exact level for a
/// one-hot row).
std::vector<double> soft_power(const SoftOutputs& soft, const SystemConfig& config);
std::vector<double> hard_power(const Allocation& alloc, const SystemConfig& config);

/// Per-(TP, channel) D2D SE, row-major N x K. Channels a TP does not use
/// contribute exactly zero in hard mode.
std::vector<double> se_d2d_matrix(const ChannelSample& sample, std::span<const double> q, const SystemConfig& config);

/// Per-TP D2D spectral efficiency (summed over channels) in b/s/Hz.
std::vector<double> se_d2d(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config);
std::vector<double> se_d2d(const ChannelSample& sample, const SoftOutputs& soft, const SystemConfig& config);

/// Per-channel CUE spectral efficiency in b/s/Hz.
std::vector<double> se_cue(const ChannelSample& sample, std::span<const double> q, const SystemConfig& config);
std::vector<double> se_cue(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config);
std::vector<double> se_cue(const ChannelSample& sample, const SoftOutputs& soft, const SystemConfig& config);

/// Per-channel QoS indicator SE_0^k >= SE_thr.
std::vector<bool> qos_ok(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config);
bool all_qos_ok(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config);

/// Per-TP energy efficiency SE_i / (p_i + P_CIR) in b/s/Hz/W.
std::vector<double> ee_d2d(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config);
std::vector<double> ee_d2d(const ChannelSample& sample, const SoftOutputs& soft, const SystemConfig& config);

double sum_se(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config);
double sum_ee(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config);

enum class Objective { SumSE, SumEE };

/// Soft-mode objective, CUE rates, and their gradients with respect to the
/// relaxed outputs, used by the fine-tuning loss.
struct SoftObjectiveResult {
    double objective = 0.0;           // Σ_{i,k} SE_i^k or Σ_{i,k} EE_i^k
    std::vector<double> cue_se;       // SE_0^k
    std::vector<double> d_power;      // ∂objective/∂power_probs, N x N_P
    std::vector<double> d_channel;    // ∂objective/∂channel_probs, N x K
};

/// Objective and CUE rates in soft mode. When `cue_weights` is non-empty,
/// the gradient also includes Σ_k cue_weights[k] ∂SE_0^k, letting the
/// caller fold a hinge on the CUE rate into the same backward pass.
SoftObjectiveResult soft_objective(const ChannelSample& sample, const SoftOutputs& soft, const SystemConfig& config,
                                   Objective objective, std::span<const double> cue_weights = {});

}  // namespace d2dra
