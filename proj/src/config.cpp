// SPDX-License-Identifier: Apache-2.0
#include "d2dra/config.hpp"

#include <cmath>
#include <string>

#include "d2dra/errors.hpp"

namespace d2dra {

std::vector<double> equal_power_levels(int n_levels, double p_max)
{
    std::vector<double> levels(static_cast<std::size_t>(std::max(n_levels, 0)));
    for (int j = 0; j < n_levels; ++j)
        levels[j] = n_levels == 1 ? 0.0 : p_max * j / (n_levels - 1);
    if (n_levels > 1)
        levels.back() = p_max;
    return levels;
}

void finalize(SystemConfig& config)
{
    if (config.power_levels.empty())
        config.power_levels = equal_power_levels(config.n_power_levels, config.p_max_watts);
    validate(config);
}

void validate(const SystemConfig& c)
{
    auto fail = [](const std::string& what) { throw ConfigError("invalid system config: " + what); };
    if (c.n_tps < 1)
        fail("n_tps must be >= 1");
    if (c.n_channels < 1)
        fail("n_channels must be >= 1");
    if (c.n_power_levels < 2)
        fail("n_power_levels must be >= 2");
    if (c.bf_bits < 1 || c.bb_bits < 1)
        fail("bf_bits and bb_bits must be >= 1");
    if (static_cast<int>(c.power_levels.size()) != c.n_power_levels)
        fail("power_levels length must equal n_power_levels");
    if (c.power_levels.front() != 0.0)
        fail("power_levels[0] must be 0");
    if (c.power_levels.back() != c.p_max_watts)
        fail("last power level must equal p_max_watts");
    for (std::size_t j = 1; j < c.power_levels.size(); ++j)
        if (!(c.power_levels[j] > c.power_levels[j - 1]))
            fail("power_levels must be strictly ascending");
    if (!(c.noise_power() > 0.0) || !std::isfinite(c.noise_power()))
        fail("noise power N0*W must be positive");
    if (c.p_cue_watts < 0.0)
        fail("p_cue_watts must be >= 0");
    if (c.se_threshold < 0.0)
        fail("se_threshold must be >= 0");
    if (!(c.area_side_m > 0.0))
        fail("area_side_m must be positive");
    if (c.pair_max_dist_m < 0.0)
        fail("pair_max_dist_m must be >= 0");
    if (!(c.d_min_m > 0.0))
        fail("d_min_m must be positive");
    if (c.p_cir_watts < 0.0)
        fail("p_cir_watts must be >= 0");
}

}  // namespace d2dra
