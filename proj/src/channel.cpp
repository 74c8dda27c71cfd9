// SPDX-License-Identifier: Apache-2.0
#include "d2dra/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "d2dra/errors.hpp"
#include "d2dra/parallel.hpp"

namespace d2dra {

namespace {

constexpr int kPlacementRetryCap = 10000;

Position uniform_in_square(double side, Rng& rng)
{
    const double x = rng.uniform(0.0, side);
    const double y = rng.uniform(0.0, side);
    return {x, y};
}

Position receiver_near(Position tx, double radius, double side, Rng& rng)
{
    if (radius == 0.0)
        return tx;
    for (int attempt = 0; attempt < kPlacementRetryCap; ++attempt) {
        // uniform in the disc: sqrt on the radius draw
        const double r = radius * std::sqrt(rng.uniform());
        const double theta = 2.0 * M_PI * rng.uniform();
        const Position rx{tx.x + r * std::cos(theta), tx.y + r * std::sin(theta)};
        if (rx.x >= 0.0 && rx.x <= side && rx.y >= 0.0 && rx.y <= side)
            return rx;
    }
    throw std::logic_error("receiver placement exceeded retry cap");
}

}  // namespace

double distance(Position a, Position b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

ChannelSample::ChannelSample(int n_tps, int n_channels)
    : n_tps_(n_tps), n_channels_(n_channels),
      gains_(static_cast<std::size_t>(n_channels) * (n_tps + 1) * (n_tps + 1), 0.0)
{
}

ChannelSample::ChannelSample(int n_tps, int n_channels, std::vector<double> gains)
    : n_tps_(n_tps), n_channels_(n_channels), gains_(std::move(gains))
{
    if (gains_.size() != static_cast<std::size_t>(n_channels) * (n_tps + 1) * (n_tps + 1))
        throw ShapeMismatch("channel tensor size does not match K (N+1)^2");
}

std::vector<std::size_t> local_indices(int n_tps, int n_channels, int rx)
{
    const int nodes = n_tps + 1;
    if (rx < 0 || rx >= nodes)
        throw ShapeMismatch("receiver index out of range");
    std::vector<std::size_t> idx;
    idx.reserve(static_cast<std::size_t>(n_channels) * nodes);
    for (int k = 0; k < n_channels; ++k)
        for (int tx = 0; tx < nodes; ++tx)
            idx.push_back((static_cast<std::size_t>(k) * nodes + rx) * nodes + tx);
    return idx;
}

std::vector<std::size_t> ChannelSample::local_indices(int rx) const
{
    return d2dra::local_indices(n_tps_, n_channels_, rx);
}

std::vector<double> ChannelSample::local_csi(int rx) const
{
    std::vector<double> out;
    for (std::size_t i : local_indices(rx))
        out.push_back(gains_[i]);
    return out;
}

Topology sample_topology(const SystemConfig& config, Rng& rng)
{
    const double side = config.area_side_m;
    Topology topo;
    topo.bs_pos = {side / 2.0, side / 2.0};
    for (int k = 0; k < config.n_channels; ++k)
        topo.cue_pos.push_back(uniform_in_square(side, rng));
    for (int i = 0; i < config.n_tps; ++i) {
        const Position tx = uniform_in_square(side, rng);
        topo.tp_tx_pos.push_back(tx);
        topo.tp_rx_pos.push_back(receiver_near(tx, config.pair_max_dist_m, side, rng));
    }
    return topo;
}

double path_gain(double distance_m, const SystemConfig& config)
{
    const double d = std::max(distance_m, config.d_min_m);
    return std::pow(10.0, -config.pl_coeff_log10) * std::pow(d, -config.pl_exponent);
}

ChannelSample sample_channel(const Topology& topology, const SystemConfig& config, Rng& rng)
{
    const int n = config.n_tps;
    ChannelSample sample(n, config.n_channels);
    for (int k = 0; k < config.n_channels; ++k) {
        for (int rx = 0; rx <= n; ++rx) {
            const Position rx_pos = rx == 0 ? topology.bs_pos : topology.tp_rx_pos[rx - 1];
            for (int tx = 0; tx <= n; ++tx) {
                const Position tx_pos = tx == 0 ? topology.cue_pos[k] : topology.tp_tx_pos[tx - 1];
                sample.gain(k, rx, tx) = path_gain(distance(tx_pos, rx_pos), config) * rng.exponential();
            }
        }
    }
    return sample;
}

ChannelSample generate_sample(const SystemConfig& config, std::uint64_t index)
{
    Rng topo_rng(config.master_seed, StreamTag::Topology, index);
    Rng fading_rng(config.master_seed, StreamTag::Fading, index);
    return sample_channel(sample_topology(config, topo_rng), config, fading_rng);
}

std::vector<ChannelSample> generate_dataset(const SystemConfig& config, std::uint64_t first_index,
                                            std::size_t count, int threads)
{
    std::vector<ChannelSample> out(count);
    parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s)
            out[s] = generate_sample(config, first_index + s);
    });
    return out;
}

}  // namespace d2dra
