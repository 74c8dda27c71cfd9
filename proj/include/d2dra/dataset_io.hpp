// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "d2dra/channel.hpp"
#include "d2dra/oracle.hpp"
#include "d2dra/stats.hpp"

namespace d2dra {

// All three files share an 8-byte magic "D2DRA\0\1\0" and a little-endian
// u32 header {N, K, sample_count}.

struct DatasetHeader {
    std::uint32_t n_tps = 0;
    std::uint32_t n_channels = 0;
    std::uint32_t sample_count = 0;
};

inline constexpr std::size_t kDatasetHeaderBytes = 8 + 3 * 4;

/// Gains as f64 in (k, rx, tx) row-major order per sample.
void write_dataset(const std::filesystem::path& path, const std::vector<ChannelSample>& samples, int n_tps,
                   int n_channels);
std::vector<ChannelSample> read_dataset(const std::filesystem::path& path);
DatasetHeader read_header(const std::filesystem::path& path);

/// sample_count = 0, then the mean tensor, then the std tensor.
void write_stats(const std::filesystem::path& path, const DatasetStats& stats);
void write_stats(std::ostream& out, const DatasetStats& stats);
DatasetStats read_stats(const std::filesystem::path& path);

/// Per sample: u8 feasible, then per TP u8 channel_idx, u8 power_idx.
void write_labels(const std::filesystem::path& path, const std::vector<LabeledSample>& labels, int n_tps,
                  int n_channels);
/// Sum-SE fields are not stored; callers recompute them if needed.
std::vector<LabeledSample> read_labels(const std::filesystem::path& path);

}  // namespace d2dra
