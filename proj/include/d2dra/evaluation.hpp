// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "d2dra/channel.hpp"
#include "d2dra/config.hpp"
#include "d2dra/models.hpp"
#include "d2dra/objective.hpp"
#include "d2dra/oracle.hpp"

namespace d2dra {

enum class Scheme { Oracle, Centralized, Distributed, Naive, Random };

std::string scheme_name(Scheme scheme);
Scheme parse_scheme(const std::string& name);  // throws ConfigError
std::string objective_name(Objective objective);
Objective parse_objective(const std::string& name);

/// Sum D2D SE if every channel meets SE_thr, else 0.
double scored_sum_se(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config);
/// Sum D2D EE under the same zero-on-violation rule.
double scored_sum_ee(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config);

struct ViolationStats {
    std::size_t total = 0;
    std::size_t violated = 0;
    double probability = 0.0;
    std::optional<double> level;  // mean shortfall over violated pairs
};

/// Over channel-sample pairs: a pair is violated when SE_0 < thr.
ViolationStats violation_stats(std::span<const double> cue_se, double threshold);

/// |round(x) - x| per relaxed output, rounding half up.
std::vector<double> binarization_error_samples(const SoftOutputs& soft);

struct TimingStats {
    std::size_t samples = 0;
    double median_s = 0.0;
    double mean_s = 0.0;
};

struct MetricsReport {
    std::string scheme;
    double se_threshold = 0.0;
    Objective objective = Objective::SumSE;
    std::size_t n_samples = 0;
    double avg_sum_se = 0.0;
    double avg_sum_ee = 0.0;
    ViolationStats violation;
    std::vector<double> se_cdf;      // sorted scored sum SE per sample
    std::vector<double> ee_cdf;      // sorted scored sum EE per sample
    std::vector<double> cue_cdf;     // sorted SE_0 per channel-sample pair
    std::vector<double> binerr_cdf;  // sorted binarization errors (DNN schemes)
    TimingStats timing;
};

struct EvalOptions {
    Objective objective = Objective::SumSE;  // objective the oracle maximizes
    const CentralizedModel* centralized = nullptr;
    const DistributedModel* distributed = nullptr;
    const std::vector<LabeledSample>* labels = nullptr;  // reused by the oracle when present
    std::uint64_t seed = 1;                               // random-baseline streams
    std::uint64_t oracle_budget = kDefaultOracleBudget;
    int threads = 1;
    std::size_t timing_samples = 100;  // single-threaded timed decisions; 0 disables
};

/// Hard decision of `scheme` on sample `index` of the evaluation set.
Allocation scheme_decision(Scheme scheme, const ChannelSample& sample, std::size_t index,
                           const SystemConfig& config, const EvalOptions& options);

/// Throws MissingDependency when the scheme needs a model that is absent.
MetricsReport evaluate(Scheme scheme, const std::vector<ChannelSample>& samples, const SystemConfig& config,
                       const EvalOptions& options);

/// Mean of a CDF table.
double cdf_mean(std::span<const double> table);

/// Stem shared by a report's files: <scheme>_thr<thr>_<objective>.
std::string report_stem(const MetricsReport& report);
/// Writes one CSV per metric plus a timing CSV into `dir`.
void write_report(const std::filesystem::path& dir, const MetricsReport& report);
/// summary_thr<thr>_<objective>.csv (metrics only) and .txt (with timings).
void write_summary(const std::filesystem::path& dir, const std::vector<MetricsReport>& reports);
std::string format_summary(const std::vector<MetricsReport>& reports);

}  // namespace d2dra
