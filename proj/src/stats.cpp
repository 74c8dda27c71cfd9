// SPDX-License-Identifier: Apache-2.0
#include "d2dra/stats.hpp"

#include <cmath>

#include "d2dra/errors.hpp"

namespace d2dra {

DatasetStats compute_stats(std::span<const ChannelSample> samples)
{
    if (samples.size() < 2)
        throw EmptyDataset("statistics need at least two samples");
    const auto& first = samples.front();
    const std::size_t dim = first.gains().size();
    DatasetStats stats{first.n_tps(), first.n_channels(), std::vector<double>(dim, 0.0),
                       std::vector<double>(dim, 0.0)};

    for (const auto& s : samples) {
        if (s.gains().size() != dim)
            throw ShapeMismatch("dataset samples have inconsistent shapes");
        for (std::size_t e = 0; e < dim; ++e)
            stats.mean_log10[e] += std::log10(s.gains()[e]);
    }
    const double m = static_cast<double>(samples.size());
    for (auto& v : stats.mean_log10)
        v /= m;

    // second pass for the variance, population convention
    for (const auto& s : samples)
        for (std::size_t e = 0; e < dim; ++e) {
            const double d = std::log10(s.gains()[e]) - stats.mean_log10[e];
            stats.std_log10[e] += d * d;
        }
    for (auto& v : stats.std_log10)
        v = std::max(std::sqrt(v / m), kStdFloor);
    return stats;
}

void preprocess_into(const ChannelSample& sample, const DatasetStats& stats, std::span<double> out)
{
    const auto g = sample.gains();
    if (g.size() != stats.mean_log10.size() || out.size() != g.size())
        throw ShapeMismatch("sample shape does not match dataset statistics");
    for (std::size_t e = 0; e < g.size(); ++e)
        out[e] = (std::log10(g[e]) - stats.mean_log10[e]) / stats.std_log10[e];
}

std::vector<double> preprocess(const ChannelSample& sample, const DatasetStats& stats)
{
    std::vector<double> out(sample.gains().size());
    preprocess_into(sample, stats, out);
    return out;
}

}  // namespace d2dra
