// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "d2dra/channel.hpp"

namespace d2dra {

inline constexpr double kStdFloor = 1e-6;

/// Per-entry mean and standard deviation of log10(h) over a training set.
struct DatasetStats {
    int n_tps = 0;
    int n_channels = 0;
    std::vector<double> mean_log10;
    std::vector<double> std_log10;

    bool operator==(const DatasetStats&) const = default;
};

/// Population statistics of log10 gains; throws EmptyDataset for fewer
/// than two samples.
DatasetStats compute_stats(std::span<const ChannelSample> samples);

/// (log10 h - mean) / std, elementwise over the full tensor.
std::vector<double> preprocess(const ChannelSample& sample, const DatasetStats& stats);

/// Same as preprocess() but writes into a caller-provided buffer.
void preprocess_into(const ChannelSample& sample, const DatasetStats& stats, std::span<double> out);

}  // namespace d2dra
