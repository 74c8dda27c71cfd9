// SPDX-License-Identifier: Apache-2.0
#include "d2dra/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "d2dra/errors.hpp"
#include "d2dra/parallel.hpp"

namespace d2dra {

namespace {

struct ChunkBest {
    bool found = false;
    double value = -std::numeric_limits<double>::infinity();
    std::uint64_t index = 0;
};

// Candidate scanner with precomputed per-option channel/power tables.
class Scanner {
public:
    Scanner(const ChannelSample& sample, const SystemConfig& config, Objective objective)
        : sample_(sample), config_(config), objective_(objective), n_(config.n_tps),
          options_(options_per_tp(config.n_channels, config.n_power_levels))
    {
        const int levels = config.n_power_levels - 1;
        option_channel_.push_back(0);
        option_power_.push_back(0.0);
        for (int c = 0; c < config.n_channels; ++c)
            for (int j = 1; j <= levels; ++j) {
                option_channel_.push_back(c);
                option_power_.push_back(config.power_levels[j]);
            }
        cue_signal_.resize(static_cast<std::size_t>(config.n_channels));
        for (int k = 0; k < config.n_channels; ++k)
            cue_signal_[k] = sample.gain(k, 0, 0) * config.p_cue_watts;
    }

    ChunkBest scan(std::uint64_t begin, std::uint64_t end) const
    {
        ChunkBest best;
        if (begin >= end)
            return best;
        std::vector<int> digit(static_cast<std::size_t>(n_));
        std::uint64_t rest = begin;
        for (int i = n_ - 1; i >= 0; --i) {
            digit[i] = static_cast<int>(rest % options_);
            rest /= options_;
        }
        std::vector<double> cue_interf(static_cast<std::size_t>(config_.n_channels));
        const double noise = config_.noise_power();
        for (std::uint64_t idx = begin; idx < end; ++idx) {
            std::fill(cue_interf.begin(), cue_interf.end(), noise);
            for (int i = 0; i < n_; ++i) {
                const int o = digit[i];
                if (o != 0) {
                    const int c = option_channel_[o];
                    cue_interf[c] += sample_.gain(c, 0, i + 1) * option_power_[o];
                }
            }
            bool feasible = true;
            for (int k = 0; k < config_.n_channels && feasible; ++k)
                feasible = std::log2(1.0 + cue_signal_[k] / cue_interf[k]) >= config_.se_threshold;
            if (feasible) {
                const double v = value(digit);
                if (!best.found || v > best.value) {
                    best = {true, v, idx};
                }
            }
            for (int i = n_ - 1; i >= 0; --i) {
                if (++digit[i] < options_)
                    break;
                digit[i] = 0;
            }
        }
        return best;
    }

private:
    double value(const std::vector<int>& digit) const
    {
        const double noise = config_.noise_power();
        double total = 0.0;
        for (int i = 0; i < n_; ++i) {
            const int o = digit[i];
            if (o == 0)
                continue;
            const int c = option_channel_[o];
            const int rx = i + 1;
            double interference = noise + sample_.gain(c, rx, 0) * config_.p_cue_watts;
            for (int l = 0; l < n_; ++l)
                if (l != i && digit[l] != 0 && option_channel_[digit[l]] == c)
                    interference += sample_.gain(c, rx, l + 1) * option_power_[digit[l]];
            const double se = std::log2(1.0 + sample_.gain(c, rx, rx) * option_power_[o] / interference);
            total += objective_ == Objective::SumEE ? se / (option_power_[o] + config_.p_cir_watts) : se;
        }
        return total;
    }

    const ChannelSample& sample_;
    const SystemConfig& config_;
    Objective objective_;
    int n_;
    int options_;
    std::vector<int> option_channel_;
    std::vector<double> option_power_;
    std::vector<double> cue_signal_;
};

}  // namespace

int options_per_tp(int n_channels, int n_power_levels)
{
    return n_channels * (n_power_levels - 1) + 1;
}

std::uint64_t enumerate_count(int n_tps, int n_channels, int n_power_levels)
{
    const std::uint64_t base = static_cast<std::uint64_t>(options_per_tp(n_channels, n_power_levels));
    std::uint64_t count = 1;
    for (int i = 0; i < n_tps; ++i) {
        if (base != 0 && count > std::numeric_limits<std::uint64_t>::max() / base)
            return std::numeric_limits<std::uint64_t>::max();
        count *= base;
    }
    return count;
}

std::uint64_t enumerate_count(const SystemConfig& config)
{
    return enumerate_count(config.n_tps, config.n_channels, config.n_power_levels);
}

Allocation decode_candidate(std::uint64_t index, int n_tps, int n_channels, int n_power_levels)
{
    const int options = options_per_tp(n_channels, n_power_levels);
    Allocation a = Allocation::idle(n_tps);
    for (int i = n_tps - 1; i >= 0; --i) {
        const int o = static_cast<int>(index % options);
        index /= options;
        if (o != 0) {
            a.channel_idx[i] = (o - 1) / (n_power_levels - 1);
            a.power_idx[i] = 1 + (o - 1) % (n_power_levels - 1);
        }
    }
    return a;
}

std::vector<Allocation> enumerate_candidates(int n_tps, int n_channels, int n_power_levels)
{
    const std::uint64_t count = enumerate_count(n_tps, n_channels, n_power_levels);
    std::vector<Allocation> out;
    out.reserve(count);
    for (std::uint64_t idx = 0; idx < count; ++idx)
        out.push_back(decode_candidate(idx, n_tps, n_channels, n_power_levels));
    return out;
}

LabeledSample exhaustive_optimal(const ChannelSample& sample, const SystemConfig& config, Objective objective,
                                 std::uint64_t budget, int threads)
{
    if (sample.n_tps() != config.n_tps || sample.n_channels() != config.n_channels)
        throw ShapeMismatch("channel sample does not match system config");
    const std::uint64_t count = enumerate_count(config);
    if (count > budget)
        throw BudgetExceeded("exhaustive search needs " + std::to_string(count) + " candidates, budget is " +
                             std::to_string(budget));

    const Scanner scanner(sample, config, objective);
    ChunkBest best;
    if (threads <= 1) {
        best = scanner.scan(0, count);
    } else {
        std::vector<ChunkBest> partial(static_cast<std::size_t>(threads));
        const std::uint64_t chunk = (count + threads - 1) / threads;
        parallel_for(static_cast<std::size_t>(threads), threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t w = b; w < e; ++w) {
                const std::uint64_t lo = std::min(count, w * chunk);
                partial[w] = scanner.scan(lo, std::min(count, lo + chunk));
            }
        });
        // chunks are ordered by index, so strict > keeps the smallest index on ties
        for (const auto& p : partial)
            if (p.found && (!best.found || p.value > best.value))
                best = p;
    }

    LabeledSample label;
    label.feasible = best.found;
    label.optimal = best.found ? decode_candidate(best.index, config.n_tps, config.n_channels, config.n_power_levels)
                               : Allocation::idle(config.n_tps);
    label.optimal_sum_se = sum_se(sample, label.optimal, config);
    label.optimal_value = best.found ? best.value : 0.0;
    return label;
}

std::vector<LabeledSample> label_dataset(const std::vector<ChannelSample>& samples, const SystemConfig& config,
                                         Objective objective, std::uint64_t budget, int threads)
{
    if (enumerate_count(config) > budget)
        throw BudgetExceeded("exhaustive search needs " + std::to_string(enumerate_count(config)) +
                             " candidates, budget is " + std::to_string(budget));
    std::vector<LabeledSample> labels(samples.size());
    parallel_for(samples.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            labels[s] = exhaustive_optimal(samples[s], config, objective, budget, 1);
            labels[s].sample_id = s;
        }
    });
    return labels;
}

}  // namespace d2dra
