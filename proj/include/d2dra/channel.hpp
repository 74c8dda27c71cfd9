// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "d2dra/config.hpp"
#include "d2dra/rng.hpp"

namespace d2dra {

struct Position {
    double x = 0.0;
    double y = 0.0;
};

double distance(Position a, Position b);

struct Topology {
    Position bs_pos;
    std::vector<Position> cue_pos;    // one CUE per channel
    std::vector<Position> tp_tx_pos;  // D2D transmitters
    std::vector<Position> tp_rx_pos;  // D2D receivers
};

/// One realization of the full gain tensor h[k][rx][tx].
///
/// rx = 0 is the BS, rx = i the receiver of TP i; tx = 0 is the CUE of
/// channel k, tx = i the transmitter of TP i. Stored row-major in
/// (k, rx, tx) order, which is also the on-disk and network-input order.
class ChannelSample {
public:
    ChannelSample() = default;
    ChannelSample(int n_tps, int n_channels);
    ChannelSample(int n_tps, int n_channels, std::vector<double> gains);

    int n_tps() const { return n_tps_; }
    int n_channels() const { return n_channels_; }
    int n_nodes() const { return n_tps_ + 1; }

    std::size_t index(int k, int rx, int tx) const
    {
        return (static_cast<std::size_t>(k) * n_nodes() + rx) * n_nodes() + tx;
    }
    double gain(int k, int rx, int tx) const { return gains_[index(k, rx, tx)]; }
    double& gain(int k, int rx, int tx) { return gains_[index(k, rx, tx)]; }

    std::span<const double> gains() const { return gains_; }
    std::span<double> gains() { return gains_; }

    /// Flat indices of the gains node `rx` can measure: h[k][rx][*] for all k.
    std::vector<std::size_t> local_indices(int rx) const;
    std::vector<double> local_csi(int rx) const;

    bool operator==(const ChannelSample&) const = default;

private:
    int n_tps_ = 0;
    int n_channels_ = 0;
    std::vector<double> gains_;
};

/// Flat indices of receiver `rx`'s local view, shared by every sample
/// of the given dimensions.
std::vector<std::size_t> local_indices(int n_tps, int n_channels, int rx);

/// Places the BS at the centre, CUEs and D2D transmitters uniformly in the
/// square, and each D2D receiver uniformly in the disc of radius
/// pair_max_dist_m around its transmitter (rejection-resampled into the
/// square).
Topology sample_topology(const SystemConfig& config, Rng& rng);

/// 10^-pl_coeff_log10 * max(d, d_min)^-pl_exponent.
double path_gain(double distance_m, const SystemConfig& config);

/// Path gain times an independent unit-mean exponential for every
/// (k, rx, tx) link.
ChannelSample sample_channel(const Topology& topology, const SystemConfig& config, Rng& rng);

/// Sample `index` of the dataset defined by config.master_seed. Topology
/// and fading come from independent streams keyed by the index, so any
/// subset can be regenerated in isolation.
ChannelSample generate_sample(const SystemConfig& config, std::uint64_t index);

std::vector<ChannelSample> generate_dataset(const SystemConfig& config, std::uint64_t first_index,
                                            std::size_t count, int threads = 1);

}  // namespace d2dra
