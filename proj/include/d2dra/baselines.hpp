// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "d2dra/channel.hpp"
#include "d2dra/config.hpp"
#include "d2dra/models.hpp"
#include "d2dra/objective.hpp"
#include "d2dra/rng.hpp"

namespace d2dra {

/// Independent uniform channel and power-level draws per TP, canonicalized.
Allocation random_baseline(const ChannelSample& sample, const SystemConfig& config, Rng& rng);

/// Per TP, runs the centralized model on a surrogate input that keeps only
/// that TP's local CSI (everything else at the dataset mean, i.e. 0 after
/// normalization) and keeps that TP's decision.
Allocation naive_baseline(const ChannelSample& sample, const CentralizedModel& model);

}  // namespace d2dra
