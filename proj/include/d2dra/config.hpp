// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace d2dra {

/// Scenario constants for one D2D-underlay cell.
///
/// Defaults follow the reference evaluation setup: 100 m square, 30 m pair
/// radius, P_M = 200 mW over 8 equally spaced levels, W = 10 MHz,
/// N_0 = -173 dBm/Hz, path gain 10^-3.453 d^-3.8.
struct SystemConfig {
    int n_tps = 3;
    int n_channels = 3;
    int n_power_levels = 8;
    std::vector<double> power_levels;  // filled by finalize() when empty
    double p_max_watts = 0.2;
    double p_cue_watts = 0.2;
    double bandwidth_hz = 10e6;
    double noise_psd_w_per_hz = 5.011872336272714e-21;  // -173 dBm/Hz
    double se_threshold = 0.0;
    int bf_bits = 12;
    int bb_bits = 24;
    double area_side_m = 100.0;
    double pair_max_dist_m = 30.0;
    double pl_coeff_log10 = 3.453;
    double pl_exponent = 3.8;
    double p_cir_watts = 0.5;
    double d_min_m = 1.0;
    std::uint64_t master_seed = 1;

    bool operator==(const SystemConfig&) const = default;

    double noise_power() const { return noise_psd_w_per_hz * bandwidth_hz; }
    int n_nodes() const { return n_tps + 1; }

    /// Number of gains in one full channel tensor, K (N+1)^2.
    int tensor_size() const { return n_channels * n_nodes() * n_nodes(); }
    /// Number of gains one receiver observes, K (N+1).
    int local_size() const { return n_channels * n_nodes(); }
};

/// N_P equally spaced levels from 0 to p_max.
std::vector<double> equal_power_levels(int n_levels, double p_max);

/// Fills power_levels when empty and validates every invariant.
/// Throws ConfigError on violation.
void finalize(SystemConfig& config);
void validate(const SystemConfig& config);

}  // namespace d2dra
