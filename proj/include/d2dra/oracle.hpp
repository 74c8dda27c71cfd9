// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "d2dra/channel.hpp"
#include "d2dra/config.hpp"
#include "d2dra/objective.hpp"

namespace d2dra {

inline constexpr std::uint64_t kDefaultOracleBudget = 10'000'000;

struct LabeledSample {
    std::uint64_t sample_id = 0;
    Allocation optimal;
    bool feasible = false;
    double optimal_sum_se = 0.0;
    double optimal_value = 0.0;  // maximized objective (sum SE or sum EE)
};

/// Options per TP: K (N_P - 1) active (channel, level) pairs plus one idle.
int options_per_tp(int n_channels, int n_power_levels);

/// (K (N_P - 1) + 1)^N, saturating at UINT64_MAX.
std::uint64_t enumerate_count(int n_tps, int n_channels, int n_power_levels);
std::uint64_t enumerate_count(const SystemConfig& config);

/// Decodes candidate `index` (TP 0 most significant digit). Candidate
/// order is lexicographic in the per-TP (channel_idx, power_idx) pairs.
Allocation decode_candidate(std::uint64_t index, int n_tps, int n_channels, int n_power_levels);

/// Every joint candidate in index order, already canonical.
std::vector<Allocation> enumerate_candidates(int n_tps, int n_channels, int n_power_levels);

/// Scans every candidate and returns the QoS-feasible maximizer of the
/// objective; ties go to the smallest candidate index. A sample where no
/// candidate meets the threshold comes back with feasible = false and the
/// all-idle allocation. Throws BudgetExceeded when the candidate count is
/// above `budget`.
LabeledSample exhaustive_optimal(const ChannelSample& sample, const SystemConfig& config,
                                 Objective objective = Objective::SumSE, std::uint64_t budget = kDefaultOracleBudget,
                                 int threads = 1);

std::vector<LabeledSample> label_dataset(const std::vector<ChannelSample>& samples, const SystemConfig& config,
                                         Objective objective, std::uint64_t budget, int threads);

}  // namespace d2dra
