// SPDX-License-Identifier: Apache-2.0
#include "d2dra/objective.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "d2dra/errors.hpp"

namespace d2dra {

namespace {

void check_shape(const ChannelSample& sample, const SystemConfig& config)
{
    if (sample.n_tps() != config.n_tps || sample.n_channels() != config.n_channels)
        throw ShapeMismatch("channel sample does not match system config");
}

void check_shape(const Allocation& alloc, const SystemConfig& config)
{
    if (alloc.n_tps() != config.n_tps || static_cast<int>(alloc.channel_idx.size()) != config.n_tps)
        throw ShapeMismatch("allocation size does not match n_tps");
    for (int i = 0; i < config.n_tps; ++i) {
        if (alloc.channel_idx[i] < 0 || alloc.channel_idx[i] >= config.n_channels)
            throw ShapeMismatch("channel index out of range");
        if (alloc.power_idx[i] < 0 || alloc.power_idx[i] >= config.n_power_levels)
            throw ShapeMismatch("power index out of range");
    }
}

void check_shape(const SoftOutputs& soft, const SystemConfig& config)
{
    const auto n = static_cast<std::size_t>(config.n_tps);
    if (soft.n_tps != config.n_tps || soft.n_power_levels != config.n_power_levels ||
        soft.n_channels != config.n_channels || soft.power_probs.size() != n * config.n_power_levels ||
        soft.channel_probs.size() != n * config.n_channels)
        throw ShapeMismatch("soft outputs do not match system config");
}

double per_tp_denominator(double p, const SystemConfig& config)
{
    const double denom = p + config.p_cir_watts;
    if (!(denom > 0.0))
        throw ConfigError("energy efficiency needs p_cir_watts > 0 when a TP is idle");
    return denom;
}

std::vector<double> row_sums(const std::vector<double>& m, int rows, int cols)
{
    std::vector<double> out(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out[r] += m[static_cast<std::size_t>(r) * cols + c];
    return out;
}

}  // namespace

Allocation Allocation::idle(int n_tps)
{
    return {std::vector<int>(static_cast<std::size_t>(n_tps), 0), std::vector<int>(static_cast<std::size_t>(n_tps), 0)};
}

void Allocation::canonicalize()
{
    for (std::size_t i = 0; i < power_idx.size(); ++i)
        if (power_idx[i] == 0)
            channel_idx[i] = 0;
}

bool Allocation::is_canonical() const
{
    for (std::size_t i = 0; i < power_idx.size(); ++i)
        if (power_idx[i] == 0 && channel_idx[i] != 0)
            return false;
    return true;
}

SoftOutputs SoftOutputs::one_hot(const Allocation& alloc, int n_power_levels, int n_channels)
{
    SoftOutputs s;
    s.n_tps = alloc.n_tps();
    s.n_power_levels = n_power_levels;
    s.n_channels = n_channels;
    s.power_probs.assign(static_cast<std::size_t>(s.n_tps) * n_power_levels, 0.0);
    s.channel_probs.assign(static_cast<std::size_t>(s.n_tps) * n_channels, 0.0);
    for (int i = 0; i < s.n_tps; ++i) {
        s.power_probs[static_cast<std::size_t>(i) * n_power_levels + alloc.power_idx[i]] = 1.0;
        s.channel_probs[static_cast<std::size_t>(i) * n_channels + alloc.channel_idx[i]] = 1.0;
    }
    return s;
}

std::vector<double> hard_power(const Allocation& alloc, const SystemConfig& config)
{
    check_shape(alloc, config);
    std::vector<double> p(static_cast<std::size_t>(config.n_tps));
    for (int i = 0; i < config.n_tps; ++i)
        p[i] = config.power_levels[alloc.power_idx[i]];
    return p;
}

std::vector<double> soft_power(const SoftOutputs& soft, const SystemConfig& config)
{
    check_shape(soft, config);
    std::vector<double> p(static_cast<std::size_t>(config.n_tps), 0.0);
    for (int i = 0; i < config.n_tps; ++i)
        for (int j = 0; j < config.n_power_levels; ++j)
            p[i] += config.power_levels[j] * soft.power_prob(i, j);
    return p;
}

std::vector<double> effective_power(const Allocation& alloc, const SystemConfig& config)
{
    const auto p = hard_power(alloc, config);
    const int kk = config.n_channels;
    std::vector<double> q(static_cast<std::size_t>(config.n_tps) * kk, 0.0);
    for (int i = 0; i < config.n_tps; ++i)
        q[static_cast<std::size_t>(i) * kk + alloc.channel_idx[i]] = p[i];
    return q;
}

std::vector<double> effective_power(const SoftOutputs& soft, const SystemConfig& config)
{
    const auto p = soft_power(soft, config);
    const int kk = config.n_channels;
    std::vector<double> q(static_cast<std::size_t>(config.n_tps) * kk);
    for (int i = 0; i < config.n_tps; ++i)
        for (int k = 0; k < kk; ++k)
            q[static_cast<std::size_t>(i) * kk + k] = soft.channel_prob(i, k) * p[i];
    return q;
}

std::vector<double> se_d2d_matrix(const ChannelSample& sample, std::span<const double> q, const SystemConfig& config)
{
    check_shape(sample, config);
    const int n = config.n_tps;
    const int kk = config.n_channels;
    if (q.size() != static_cast<std::size_t>(n) * kk)
        throw ShapeMismatch("effective power must be N x K");
    const double noise = config.noise_power();
    std::vector<double> se(q.size(), 0.0);
    for (int k = 0; k < kk; ++k) {
        for (int i = 1; i <= n; ++i) {
            const double signal = sample.gain(k, i, i) * q[static_cast<std::size_t>(i - 1) * kk + k];
            double interference = noise + sample.gain(k, i, 0) * config.p_cue_watts;
            for (int l = 1; l <= n; ++l)
                if (l != i)
                    interference += sample.gain(k, i, l) * q[static_cast<std::size_t>(l - 1) * kk + k];
            se[static_cast<std::size_t>(i - 1) * kk + k] = std::log2(1.0 + signal / interference);
        }
    }
    return se;
}

std::vector<double> se_d2d(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config)
{
    return row_sums(se_d2d_matrix(sample, effective_power(alloc, config), config), config.n_tps, config.n_channels);
}

std::vector<double> se_d2d(const ChannelSample& sample, const SoftOutputs& soft, const SystemConfig& config)
{
    return row_sums(se_d2d_matrix(sample, effective_power(soft, config), config), config.n_tps, config.n_channels);
}

std::vector<double> se_cue(const ChannelSample& sample, std::span<const double> q, const SystemConfig& config)
{
    check_shape(sample, config);
    const int n = config.n_tps;
    const int kk = config.n_channels;
    if (q.size() != static_cast<std::size_t>(n) * kk)
        throw ShapeMismatch("effective power must be N x K");
    std::vector<double> se(static_cast<std::size_t>(kk));
    for (int k = 0; k < kk; ++k) {
        double interference = config.noise_power();
        for (int l = 1; l <= n; ++l)
            interference += sample.gain(k, 0, l) * q[static_cast<std::size_t>(l - 1) * kk + k];
        se[k] = std::log2(1.0 + sample.gain(k, 0, 0) * config.p_cue_watts / interference);
    }
    return se;
}

std::vector<double> se_cue(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config)
{
    return se_cue(sample, effective_power(alloc, config), config);
}

std::vector<double> se_cue(const ChannelSample& sample, const SoftOutputs& soft, const SystemConfig& config)
{
    return se_cue(sample, effective_power(soft, config), config);
}

std::vector<bool> qos_ok(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config)
{
    const auto se0 = se_cue(sample, alloc, config);
    std::vector<bool> ok(se0.size());
    for (std::size_t k = 0; k < se0.size(); ++k)
        ok[k] = se0[k] >= config.se_threshold;
    return ok;
}

bool all_qos_ok(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config)
{
    for (bool ok : qos_ok(sample, alloc, config))
        if (!ok)
            return false;
    return true;
}

std::vector<double> ee_d2d(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config)
{
    auto se = se_d2d(sample, alloc, config);
    const auto p = hard_power(alloc, config);
    for (std::size_t i = 0; i < se.size(); ++i)
        se[i] /= per_tp_denominator(p[i], config);
    return se;
}

std::vector<double> ee_d2d(const ChannelSample& sample, const SoftOutputs& soft, const SystemConfig& config)
{
    auto se = se_d2d(sample, soft, config);
    const auto p = soft_power(soft, config);
    for (std::size_t i = 0; i < se.size(); ++i)
        se[i] /= per_tp_denominator(p[i], config);
    return se;
}

double sum_se(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config)
{
    const auto se = se_d2d(sample, alloc, config);
    return std::accumulate(se.begin(), se.end(), 0.0);
}

double sum_ee(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config)
{
    const auto ee = ee_d2d(sample, alloc, config);
    return std::accumulate(ee.begin(), ee.end(), 0.0);
}

SoftObjectiveResult soft_objective(const ChannelSample& sample, const SoftOutputs& soft, const SystemConfig& config,
                                   Objective objective, std::span<const double> cue_weights)
{
    check_shape(sample, config);
    check_shape(soft, config);
    const int n = config.n_tps;
    const int kk = config.n_channels;
    const int np = config.n_power_levels;
    const double inv_ln2 = 1.0 / std::numbers::ln2;
    const double noise = config.noise_power();
    if (!cue_weights.empty() && cue_weights.size() != static_cast<std::size_t>(kk))
        throw ShapeMismatch("cue weights must have one entry per channel");

    const auto p = soft_power(soft, config);
    const auto q = effective_power(soft, config);
    auto at = [kk](int i, int k) { return static_cast<std::size_t>(i) * kk + k; };

    // per-TP objective weight: 1 for SE, 1/(p_i + P_CIR) for EE
    std::vector<double> weight(static_cast<std::size_t>(n), 1.0);
    if (objective == Objective::SumEE)
        for (int i = 0; i < n; ++i)
            weight[i] = 1.0 / per_tp_denominator(p[i], config);

    SoftObjectiveResult r;
    r.cue_se.assign(static_cast<std::size_t>(kk), 0.0);
    std::vector<double> dq(q.size(), 0.0);
    std::vector<double> dp(static_cast<std::size_t>(n), 0.0);
    std::vector<double> se_tp(static_cast<std::size_t>(n), 0.0);

    for (int k = 0; k < kk; ++k) {
        for (int i = 1; i <= n; ++i) {
            const double s = sample.gain(k, i, i) * q[at(i - 1, k)];
            double in = noise + sample.gain(k, i, 0) * config.p_cue_watts;
            for (int l = 1; l <= n; ++l)
                if (l != i)
                    in += sample.gain(k, i, l) * q[at(l - 1, k)];
            const double se = std::log2(1.0 + s / in);
            se_tp[i - 1] += se;
            r.objective += weight[i - 1] * se;

            const double d_signal = inv_ln2 / (in + s);
            const double d_interf = -inv_ln2 * s / (in * (in + s));
            dq[at(i - 1, k)] += weight[i - 1] * d_signal * sample.gain(k, i, i);
            for (int l = 1; l <= n; ++l)
                if (l != i)
                    dq[at(l - 1, k)] += weight[i - 1] * d_interf * sample.gain(k, i, l);
        }

        const double s0 = sample.gain(k, 0, 0) * config.p_cue_watts;
        double in0 = noise;
        for (int l = 1; l <= n; ++l)
            in0 += sample.gain(k, 0, l) * q[at(l - 1, k)];
        r.cue_se[k] = std::log2(1.0 + s0 / in0);
        if (!cue_weights.empty() && cue_weights[k] != 0.0) {
            const double d_interf = -inv_ln2 * s0 / (in0 * (in0 + s0));
            for (int l = 1; l <= n; ++l)
                dq[at(l - 1, k)] += cue_weights[k] * d_interf * sample.gain(k, 0, l);
        }
    }

    if (objective == Objective::SumEE)
        for (int i = 0; i < n; ++i)
            dp[i] -= se_tp[i] * weight[i] * weight[i];

    r.d_channel.assign(static_cast<std::size_t>(n) * kk, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < kk; ++k) {
            r.d_channel[at(i, k)] = dq[at(i, k)] * p[i];
            dp[i] += dq[at(i, k)] * soft.channel_prob(i, k);
        }
    r.d_power.assign(static_cast<std::size_t>(n) * np, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < np; ++j)
            r.d_power[static_cast<std::size_t>(i) * np + j] = dp[i] * config.power_levels[j];
    return r;
}

}  // namespace d2dra
