// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "d2dra/losses.hpp"
#include "d2dra/models.hpp"
#include "d2dra/oracle.hpp"

namespace d2dra {

enum class ModelMode { Centralized, Distributed };

/// 16 x 400 basic modules for the centralized model, 8 x 150 for the
/// distributed one.
ArchConfig default_arch(ModelMode mode);

struct TrainConfig {
    ModelMode mode = ModelMode::Centralized;
    Objective objective = Objective::SumSE;
    double zeta_ct = 0.01;
    double lr_ct = 1e-3;
    double lr_ft = 3e-6;
    int epochs_ct = 10;
    int epochs_ft = 10;
    int batch_size = 256;
    LossWeights weights;
    ArchConfig arch;
    std::uint64_t seed = 1;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

enum class Phase { CoarseTuning, FineTuning };

struct EpochRecord {
    int epoch = 0;  // 1-based within the phase
    Phase phase = Phase::CoarseTuning;
    LossBreakdown mean;  // per-sample mean over the epoch
};

struct TrainResult {
    std::vector<EpochRecord> history;
    std::size_t ct_samples = 0;  // labeled samples actually used in CT
};

/// Number of leading dataset samples whose labels CT consumes:
/// ceil(zeta_ct * M) when CT runs, else 0.
std::size_t ct_label_count(const TrainConfig& config, std::size_t dataset_size);

/// Coarse tuning on the first ct_label_count() samples (infeasible ones
/// skipped) with the cross-entropy loss at lr_ct, then fine tuning on the
/// whole dataset with the unsupervised loss at lr_ft. Deterministic for a
/// given seed. Throws EmptyDataset or MissingLabels.
using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(CentralizedModel& model, const std::vector<ChannelSample>& samples,
                  const std::vector<LabeledSample>& labels, const SystemConfig& system, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});
TrainResult train(DistributedModel& model, const std::vector<ChannelSample>& samples,
                  const std::vector<LabeledSample>& labels, const SystemConfig& system, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Mean loss of one mini-batch in train mode; fills the parameter
/// gradients of `model` (zeroed first). `labels` is only read in CT.
template <typename Model>
LossBreakdown batch_loss(Model& model, const Matrix& x, std::span<const ChannelSample* const> samples,
                         std::span<const LabeledSample* const> labels, const SystemConfig& system,
                         const TrainConfig& config, Phase phase, Rng* dropout_rng);

/// Same train-mode loss evaluated on a copy, leaving the caller's
/// gradients and BN running statistics untouched.
template <typename Model>
LossBreakdown batch_loss_value(Model model, const Matrix& x, std::span<const ChannelSample* const> samples,
                               std::span<const LabeledSample* const> labels, const SystemConfig& system,
                               const TrainConfig& config, Phase phase);

std::string phase_name(Phase phase);

}  // namespace d2dra
