// SPDX-License-Identifier: Apache-2.0
#include "d2dra/baselines.hpp"

#include "d2dra/errors.hpp"
#include "d2dra/stats.hpp"

namespace d2dra {

Allocation random_baseline(const ChannelSample& sample, const SystemConfig& config, Rng& rng)
{
    const int n = sample.n_tps();
    if (n != config.n_tps || sample.n_channels() != config.n_channels)
        throw ShapeMismatch("sample does not match config");
    Allocation alloc = Allocation::idle(n);
    if (config.n_power_levels < 2)
        return alloc;
    for (int i = 0; i < n; ++i) {
        alloc.channel_idx[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.n_channels)));
        alloc.power_idx[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.n_power_levels)));
    }
    alloc.canonicalize();
    return alloc;
}

Allocation naive_baseline(const ChannelSample& sample, const CentralizedModel& model)
{
    const auto& dims = model.dims();
    if (sample.n_tps() != dims.n_tps || sample.n_channels() != dims.n_channels)
        throw ShapeMismatch("sample does not match model");
    const std::vector<double> full = preprocess(sample, model.stats());

    Matrix x = Matrix::Zero(dims.tensor_size(), dims.n_tps);
    for (int i = 0; i < dims.n_tps; ++i)
        for (std::size_t e : sample.local_indices(i + 1))
            x(static_cast<Eigen::Index>(e), i) = full[e];
    const std::vector<Allocation> per_tp = model.decide_batch(x);

    Allocation alloc = Allocation::idle(dims.n_tps);
    for (int i = 0; i < dims.n_tps; ++i) {
        alloc.channel_idx[i] = per_tp[static_cast<std::size_t>(i)].channel_idx[i];
        alloc.power_idx[i] = per_tp[static_cast<std::size_t>(i)].power_idx[i];
    }
    alloc.canonicalize();
    return alloc;
}

}  // namespace d2dra
