// SPDX-License-Identifier: Apache-2.0
#include "d2dra/dataset_io.hpp"

#include <fstream>

#include "d2dra/binary_io.hpp"

namespace d2dra {

namespace {

constexpr char kMagic[8] = {'D', '2', 'D', 'R', 'A', '\x00', '\x01', '\x00'};

void write_header(std::ostream& out, const DatasetHeader& h)
{
    binary::write_magic(out, kMagic);
    binary::write_le(out, h.n_tps);
    binary::write_le(out, h.n_channels);
    binary::write_le(out, h.sample_count);
}

DatasetHeader read_header(std::istream& in)
{
    binary::expect_magic(in, kMagic, "D2DRA file");
    DatasetHeader h;
    h.n_tps = binary::read_le<std::uint32_t>(in);
    h.n_channels = binary::read_le<std::uint32_t>(in);
    h.sample_count = binary::read_le<std::uint32_t>(in);
    if (h.n_tps == 0 || h.n_channels == 0)
        throw FormatError("header has zero N or K");
    return h;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path.string());
    return in;
}

std::size_t tensor_size(const DatasetHeader& h)
{
    return static_cast<std::size_t>(h.n_channels) * (h.n_tps + 1) * (h.n_tps + 1);
}

void expect_eof(std::istream& in, const std::filesystem::path& path)
{
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError("trailing bytes in " + path.string());
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const std::vector<ChannelSample>& samples, int n_tps,
                   int n_channels)
{
    for (const auto& s : samples)
        if (s.n_tps() != n_tps || s.n_channels() != n_channels)
            throw ShapeMismatch("dataset samples have inconsistent shapes");
    binary::atomic_write(path, [&](std::ostream& out) {
        write_header(out, {static_cast<std::uint32_t>(n_tps), static_cast<std::uint32_t>(n_channels),
                           static_cast<std::uint32_t>(samples.size())});
        for (const auto& s : samples)
            for (double g : s.gains())
                binary::write_f64(out, g);
    });
}

DatasetHeader read_header(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_header(in);
}

std::vector<ChannelSample> read_dataset(const std::filesystem::path& path)
{
    auto in = open_input(path);
    const auto h = read_header(in);
    const std::size_t dim = tensor_size(h);
    std::vector<ChannelSample> samples;
    samples.reserve(h.sample_count);
    for (std::uint32_t s = 0; s < h.sample_count; ++s) {
        std::vector<double> gains(dim);
        for (auto& g : gains)
            g = binary::read_f64(in);
        samples.emplace_back(static_cast<int>(h.n_tps), static_cast<int>(h.n_channels), std::move(gains));
    }
    expect_eof(in, path);
    return samples;
}

void write_stats(std::ostream& out, const DatasetStats& stats)
{
    write_header(out, {static_cast<std::uint32_t>(stats.n_tps), static_cast<std::uint32_t>(stats.n_channels), 0});
    for (double v : stats.mean_log10)
        binary::write_f64(out, v);
    for (double v : stats.std_log10)
        binary::write_f64(out, v);
}

void write_stats(const std::filesystem::path& path, const DatasetStats& stats)
{
    binary::atomic_write(path, [&](std::ostream& out) { write_stats(out, stats); });
}

DatasetStats read_stats(const std::filesystem::path& path)
{
    auto in = open_input(path);
    const auto h = read_header(in);
    if (h.sample_count != 0)
        throw FormatError(path.string() + " is a dataset, not a stats file");
    const std::size_t dim = tensor_size(h);
    DatasetStats stats{static_cast<int>(h.n_tps), static_cast<int>(h.n_channels), std::vector<double>(dim),
                       std::vector<double>(dim)};
    for (auto& v : stats.mean_log10)
        v = binary::read_f64(in);
    for (auto& v : stats.std_log10)
        v = binary::read_f64(in);
    expect_eof(in, path);
    return stats;
}

void write_labels(const std::filesystem::path& path, const std::vector<LabeledSample>& labels, int n_tps,
                  int n_channels)
{
    for (const auto& l : labels)
        if (l.optimal.n_tps() != n_tps || !l.optimal.is_canonical())
            throw ShapeMismatch("labels must be canonical allocations over n_tps pairs");
    binary::atomic_write(path, [&](std::ostream& out) {
        write_header(out, {static_cast<std::uint32_t>(n_tps), static_cast<std::uint32_t>(n_channels),
                           static_cast<std::uint32_t>(labels.size())});
        for (const auto& l : labels) {
            binary::write_le<std::uint8_t>(out, l.feasible ? 1 : 0);
            for (int i = 0; i < n_tps; ++i) {
                binary::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(l.optimal.channel_idx[i]));
                binary::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(l.optimal.power_idx[i]));
            }
        }
    });
}

std::vector<LabeledSample> read_labels(const std::filesystem::path& path)
{
    auto in = open_input(path);
    const auto h = read_header(in);
    std::vector<LabeledSample> labels(h.sample_count);
    for (std::uint32_t s = 0; s < h.sample_count; ++s) {
        auto& l = labels[s];
        l.sample_id = s;
        l.feasible = binary::read_le<std::uint8_t>(in) != 0;
        l.optimal = Allocation::idle(static_cast<int>(h.n_tps));
        for (std::uint32_t i = 0; i < h.n_tps; ++i) {
            l.optimal.channel_idx[i] = binary::read_le<std::uint8_t>(in);
            l.optimal.power_idx[i] = binary::read_le<std::uint8_t>(in);
        }
        if (!l.optimal.is_canonical())
            throw FormatError("label " + std::to_string(s) + " is not in canonical form");
    }
    expect_eof(in, path);
    return labels;
}

}  // namespace d2dra
