// SPDX-License-Identifier: Apache-2.0
#include "d2dra/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "d2dra/errors.hpp"
#include "d2dra/nn/adam.hpp"

namespace d2dra {

namespace {

void write_column(Matrix& m, Eigen::Index col, const std::vector<double>& v, double scale)
{
    for (std::size_t r = 0; r < v.size(); ++r)
        m(static_cast<Eigen::Index>(r), col) = scale * v[r];
}

Matrix gather_columns(const Matrix& x, std::span<const std::size_t> idx)
{
    Matrix out(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c)
        out.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(idx[c]));
    return out;
}

// Batch boundaries over n items; a trailing batch of one is folded into
// its predecessor since train-mode BN needs two samples.
std::vector<std::size_t> batch_starts(std::size_t n, std::size_t batch)
{
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s < n; s += batch)
        starts.push_back(s);
    if (starts.size() > 1 && n - starts.back() < 2)
        starts.pop_back();
    starts.push_back(n);
    return starts;
}

void shuffle(std::vector<std::size_t>& order, Rng& rng)
{
    // Fisher-Yates on our own uniform draws, identical on every platform
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);
}

template <typename Model>
void run_phase(Model& model, const Matrix& x, const std::vector<ChannelSample>& samples,
               const std::vector<LabeledSample>& labels, std::vector<std::size_t> pool, const SystemConfig& system,
               const TrainConfig& config, Phase phase, TrainResult& result, const EpochCallback& on_epoch)
{
    const int epochs = phase == Phase::CoarseTuning ? config.epochs_ct : config.epochs_ft;
    if (epochs <= 0 || pool.size() < 2)
        return;
    nn::Adam adam(model.parameters(), {phase == Phase::CoarseTuning ? config.lr_ct : config.lr_ft});
    const std::uint64_t phase_key = phase == Phase::CoarseTuning ? 1 : 2;
    std::uint64_t step = 0;

    for (int epoch = 1; epoch <= epochs; ++epoch) {
        Rng shuffle_rng(config.seed, StreamTag::Shuffle, (phase_key << 32) + static_cast<std::uint64_t>(epoch));
        shuffle(pool, shuffle_rng);
        const auto starts = batch_starts(pool.size(), static_cast<std::size_t>(config.batch_size));

        LossBreakdown total;
        for (std::size_t b = 0; b + 1 < starts.size(); ++b) {
            const std::span<const std::size_t> idx(pool.data() + starts[b], starts[b + 1] - starts[b]);
            std::vector<const ChannelSample*> batch_samples;
            std::vector<const LabeledSample*> batch_labels;
            for (std::size_t i : idx) {
                batch_samples.push_back(&samples[i]);
                batch_labels.push_back(phase == Phase::CoarseTuning ? &labels[i] : nullptr);
            }
            Rng dropout_rng(config.seed, StreamTag::Dropout, (phase_key << 40) + step++);
            LossBreakdown l = batch_loss(model, gather_columns(x, idx), batch_samples, batch_labels, system, config,
                                         phase, &dropout_rng);
            adam.step();
            l *= static_cast<double>(idx.size());
            total += l;
        }
        total *= 1.0 / static_cast<double>(pool.size());
        result.history.push_back({epoch, phase, total});
        if (on_epoch)
            on_epoch(result.history.back());
    }
}

template <typename Model>
TrainResult train_impl(Model& model, const std::vector<ChannelSample>& samples,
                       const std::vector<LabeledSample>& labels, const SystemConfig& system,
                       const TrainConfig& config, const EpochCallback& on_epoch)
{
    config.validate();
    if (samples.empty())
        throw EmptyDataset("training needs at least one sample");
    const std::size_t n_ct = ct_label_count(config, samples.size());
    if (labels.size() < n_ct)
        throw MissingLabels("coarse tuning needs labels for the first " + std::to_string(n_ct) + " samples, got " +
                            std::to_string(labels.size()));

    TrainResult result;
    if (config.epochs_ct <= 0 && config.epochs_ft <= 0)
        return result;

    const Matrix x = normalized_batch(samples, model.stats());

    std::vector<std::size_t> ct_pool;
    for (std::size_t i = 0; i < n_ct; ++i)
        if (labels[i].feasible)
            ct_pool.push_back(i);
    result.ct_samples = ct_pool.size();
    run_phase(model, x, samples, labels, std::move(ct_pool), system, config, Phase::CoarseTuning, result, on_epoch);

    std::vector<std::size_t> ft_pool(samples.size());
    std::iota(ft_pool.begin(), ft_pool.end(), std::size_t{0});
    run_phase(model, x, samples, labels, std::move(ft_pool), system, config, Phase::FineTuning, result, on_epoch);
    return result;
}

}  // namespace

void TrainConfig::validate() const
{
    if (!(zeta_ct >= 0.0 && zeta_ct <= 1.0))
        throw ConfigError("zeta_ct must lie in [0, 1]");
    if (!(lr_ct > 0.0) || !(lr_ft > 0.0))
        throw ConfigError("learning rates must be positive");
    if (epochs_ct < 0 || epochs_ft < 0)
        throw ConfigError("epoch counts must be non-negative");
    if (batch_size < 2)
        throw ConfigError("batch_size must be >= 2");
    weights.validate();
    if (arch.units < 1 || arch.width < 1 || !(arch.dropout_rate >= 0.0 && arch.dropout_rate < 1.0))
        throw ConfigError("invalid network architecture");
}

std::size_t ct_label_count(const TrainConfig& config, std::size_t dataset_size)
{
    if (config.epochs_ct <= 0 || config.zeta_ct <= 0.0)
        return 0;
    return std::min(dataset_size,
                    static_cast<std::size_t>(std::ceil(config.zeta_ct * static_cast<double>(dataset_size) - 1e-9)));
}

ArchConfig default_arch(ModelMode mode)
{
    return mode == ModelMode::Centralized ? ArchConfig{16, 400, 0.05} : ArchConfig{8, 150, 0.05};
}

std::string phase_name(Phase phase)
{
    return phase == Phase::CoarseTuning ? "CT" : "FT";
}

template <typename Model>
LossBreakdown batch_loss(Model& model, const Matrix& x, std::span<const ChannelSample* const> samples,
                         std::span<const LabeledSample* const> labels, const SystemConfig& system,
                         const TrainConfig& config, Phase phase, Rng* dropout_rng)
{
    const auto& dims = model.dims();
    const Eigen::Index batch = x.cols();
    const double scale = 1.0 / static_cast<double>(batch);

    model.zero_grad();
    const BatchSoft soft = model.forward(x, Mode::Train, dropout_rng);
    BatchSoft grads{Matrix::Zero(soft.power.rows(), batch), Matrix::Zero(soft.channel.rows(), batch),
                    Matrix::Zero(soft.feedback.rows(), batch), Matrix::Zero(soft.bs.rows(), batch)};

    LossBreakdown total;
    SoftOutputs g;
    for (Eigen::Index c = 0; c < batch; ++c) {
        const SoftOutputs s = soft.column(c, dims);
        const LossBreakdown l =
            phase == Phase::CoarseTuning
                ? ct_loss(s, *labels[static_cast<std::size_t>(c)], config.weights, &g)
                : ft_loss(s, *samples[static_cast<std::size_t>(c)], system, config.weights, config.objective, &g);
        total += l;
        write_column(grads.power, c, g.power_probs, scale);
        write_column(grads.channel, c, g.channel_probs, scale);
        write_column(grads.feedback, c, g.feedback_soft, scale);
        write_column(grads.bs, c, g.bs_soft, scale);
    }
    model.backward(grads);
    total *= scale;
    return total;
}

template <typename Model>
LossBreakdown batch_loss_value(Model model, const Matrix& x, std::span<const ChannelSample* const> samples,
                               std::span<const LabeledSample* const> labels, const SystemConfig& system,
                               const TrainConfig& config, Phase phase)
{
    Rng rng(0);
    return batch_loss(model, x, samples, labels, system, config, phase, &rng);
}

template LossBreakdown batch_loss(CentralizedModel&, const Matrix&, std::span<const ChannelSample* const>,
                                  std::span<const LabeledSample* const>, const SystemConfig&, const TrainConfig&,
                                  Phase, Rng*);
template LossBreakdown batch_loss(DistributedModel&, const Matrix&, std::span<const ChannelSample* const>,
                                  std::span<const LabeledSample* const>, const SystemConfig&, const TrainConfig&,
                                  Phase, Rng*);
template LossBreakdown batch_loss_value(CentralizedModel, const Matrix&, std::span<const ChannelSample* const>,
                                        std::span<const LabeledSample* const>, const SystemConfig&,
                                        const TrainConfig&, Phase);
template LossBreakdown batch_loss_value(DistributedModel, const Matrix&, std::span<const ChannelSample* const>,
                                        std::span<const LabeledSample* const>, const SystemConfig&,
                                        const TrainConfig&, Phase);

TrainResult train(CentralizedModel& model, const std::vector<ChannelSample>& samples,
                  const std::vector<LabeledSample>& labels, const SystemConfig& system, const TrainConfig& config,
                  const EpochCallback& on_epoch)
{
    return train_impl(model, samples, labels, system, config, on_epoch);
}

TrainResult train(DistributedModel& model, const std::vector<ChannelSample>& samples,
                  const std::vector<LabeledSample>& labels, const SystemConfig& system, const TrainConfig& config,
                  const EpochCallback& on_epoch)
{
    return train_impl(model, samples, labels, system, config, on_epoch);
}

}  // namespace d2dra
