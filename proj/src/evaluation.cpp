// SPDX-License-Identifier: Apache-2.0
#include "d2dra/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "d2dra/baselines.hpp"
#include "d2dra/binary_io.hpp"
#include "d2dra/errors.hpp"
#include "d2dra/parallel.hpp"

namespace d2dra {

namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double mean(std::span<const double> v)
{
    if (v.empty())
        return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void write_column_csv(const std::filesystem::path& path, const std::string& header, const std::vector<double>& values)
{
    binary::atomic_write(path, [&](std::ostream& os) {
        os << "rank," << header << '\n';
        for (std::size_t r = 0; r < values.size(); ++r)
            os << r << ',' << num(values[r]) << '\n';
    });
}

struct SampleResult {
    double se = 0.0;
    double ee = 0.0;
    std::vector<double> cue;
    std::vector<double> binerr;
};

}  // namespace

std::string scheme_name(Scheme scheme)
{
    switch (scheme) {
    case Scheme::Oracle: return "oracle";
    case Scheme::Centralized: return "centralized";
    case Scheme::Distributed: return "distributed";
    case Scheme::Naive: return "naive";
    case Scheme::Random: return "random";
    }
    return "unknown";
}

Scheme parse_scheme(const std::string& name)
{
    for (Scheme s : {Scheme::Oracle, Scheme::Centralized, Scheme::Distributed, Scheme::Naive, Scheme::Random})
        if (scheme_name(s) == name)
            return s;
    throw ConfigError("unknown scheme '" + name + "'");
}

std::string objective_name(Objective objective)
{
    return objective == Objective::SumSE ? "se" : "ee";
}

Objective parse_objective(const std::string& name)
{
    if (name == "se")
        return Objective::SumSE;
    if (name == "ee")
        return Objective::SumEE;
    throw ConfigError("unknown objective '" + name + "' (expected se or ee)");
}

double scored_sum_se(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config)
{
    return all_qos_ok(sample, alloc, config) ? sum_se(sample, alloc, config) : 0.0;
}

double scored_sum_ee(const ChannelSample& sample, const Allocation& alloc, const SystemConfig& config)
{
    return all_qos_ok(sample, alloc, config) ? sum_ee(sample, alloc, config) : 0.0;
}

ViolationStats violation_stats(std::span<const double> cue_se, double threshold)
{
    ViolationStats out;
    out.total = cue_se.size();
    double shortfall = 0.0;
    for (double v : cue_se)
        if (v < threshold) {
            ++out.violated;
            shortfall += threshold - v;
        }
    if (out.total > 0)
        out.probability = static_cast<double>(out.violated) / static_cast<double>(out.total);
    if (out.violated > 0)
        out.level = shortfall / static_cast<double>(out.violated);
    return out;
}

std::vector<double> binarization_error_samples(const SoftOutputs& soft)
{
    std::vector<double> out;
    out.reserve(soft.power_probs.size() + soft.channel_probs.size() + soft.feedback_soft.size() +
                soft.bs_soft.size());
    for (const auto* values : {&soft.power_probs, &soft.channel_probs, &soft.feedback_soft, &soft.bs_soft})
        for (double x : *values)
            out.push_back(std::abs(std::floor(x + 0.5) - x));
    return out;
}

Allocation scheme_decision(Scheme scheme, const ChannelSample& sample, std::size_t index,
                           const SystemConfig& config, const EvalOptions& options)
{
    switch (scheme) {
    case Scheme::Oracle:
        if (options.labels != nullptr && index < options.labels->size())
            return (*options.labels)[index].optimal;
        return exhaustive_optimal(sample, config, options.objective, options.oracle_budget, 1).optimal;
    case Scheme::Centralized:
        return options.centralized->decide(sample);
    case Scheme::Distributed:
        return options.distributed->decide(sample).allocation;
    case Scheme::Naive:
        return naive_baseline(sample, *options.centralized);
    case Scheme::Random: {
        Rng rng(options.seed, StreamTag::RandomBaseline, index);
        return random_baseline(sample, config, rng);
    }
    }
    throw ConfigError("unknown scheme");
}

MetricsReport evaluate(Scheme scheme, const std::vector<ChannelSample>& samples, const SystemConfig& config,
                       const EvalOptions& options)
{
    if ((scheme == Scheme::Centralized || scheme == Scheme::Naive) && options.centralized == nullptr)
        throw MissingDependency(scheme_name(scheme) + " scheme needs a trained centralized model");
    if (scheme == Scheme::Distributed && options.distributed == nullptr)
        throw MissingDependency("distributed scheme needs a trained distributed model");
    if (samples.empty())
        throw EmptyDataset("evaluation set is empty");
    if (scheme == Scheme::Oracle && options.labels != nullptr && options.labels->size() != samples.size())
        throw ShapeMismatch("label count does not match the evaluation set");
    if (scheme == Scheme::Oracle && options.labels == nullptr &&
        enumerate_count(config) > options.oracle_budget)
        throw BudgetExceeded("oracle candidate count exceeds the budget");

    std::vector<SampleResult> results(samples.size());
    parallel_for(samples.size(), options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const Allocation alloc = scheme_decision(scheme, samples[s], s, config, options);
            SampleResult& r = results[s];
            r.se = scored_sum_se(samples[s], alloc, config);
            r.ee = scored_sum_ee(samples[s], alloc, config);
            r.cue = se_cue(samples[s], alloc, config);
            if (scheme == Scheme::Centralized)
                r.binerr = binarization_error_samples(options.centralized->soft(samples[s]));
            else if (scheme == Scheme::Distributed)
                r.binerr = binarization_error_samples(options.distributed->soft(samples[s]));
        }
    });

    MetricsReport report;
    report.scheme = scheme_name(scheme);
    report.se_threshold = config.se_threshold;
    report.objective = options.objective;
    report.n_samples = samples.size();
    for (const auto& r : results) {
        report.se_cdf.push_back(r.se);
        report.ee_cdf.push_back(r.ee);
        report.cue_cdf.insert(report.cue_cdf.end(), r.cue.begin(), r.cue.end());
        report.binerr_cdf.insert(report.binerr_cdf.end(), r.binerr.begin(), r.binerr.end());
    }
    report.violation = violation_stats(report.cue_cdf, config.se_threshold);
    for (auto* table : {&report.se_cdf, &report.ee_cdf, &report.cue_cdf, &report.binerr_cdf})
        std::sort(table->begin(), table->end());
    report.avg_sum_se = mean(report.se_cdf);
    report.avg_sum_ee = mean(report.ee_cdf);

    const std::size_t n_timed = std::min(options.timing_samples, samples.size());
    if (n_timed > 0) {
        EvalOptions timed = options;
        timed.labels = nullptr;
        std::vector<double> times(n_timed);
        for (std::size_t s = 0; s < n_timed; ++s) {
            const auto t0 = std::chrono::steady_clock::now();
            const Allocation alloc = scheme_decision(scheme, samples[s], s, config, timed);
            const auto t1 = std::chrono::steady_clock::now();
            times[s] = std::chrono::duration<double>(t1 - t0).count();
            if (alloc.n_tps() != config.n_tps)
                throw ShapeMismatch("decision has the wrong size");
        }
        report.timing.samples = n_timed;
        report.timing.mean_s = mean(times);
        std::sort(times.begin(), times.end());
        report.timing.median_s = n_timed % 2 == 1 ? times[n_timed / 2]
                                                  : 0.5 * (times[n_timed / 2 - 1] + times[n_timed / 2]);
    }
    return report;
}

double cdf_mean(std::span<const double> table)
{
    return mean(table);
}

std::string report_stem(const MetricsReport& report)
{
    return report.scheme + "_thr" + short_num(report.se_threshold) + "_" + objective_name(report.objective);
}

void write_report(const std::filesystem::path& dir, const MetricsReport& report)
{
    std::filesystem::create_directories(dir);
    const std::string stem = report_stem(report);
    write_column_csv(dir / (stem + "_se_cdf.csv"), "sum_se", report.se_cdf);
    write_column_csv(dir / (stem + "_ee_cdf.csv"), "sum_ee", report.ee_cdf);
    write_column_csv(dir / (stem + "_cue_cdf.csv"), "cue_se", report.cue_cdf);
    write_column_csv(dir / (stem + "_binerr_cdf.csv"), "binarization_error", report.binerr_cdf);
    binary::atomic_write(dir / (stem + "_timing.csv"), [&](std::ostream& os) {
        os << "timed_samples,median_s,mean_s\n"
           << report.timing.samples << ',' << num(report.timing.median_s) << ',' << num(report.timing.mean_s)
           << '\n';
    });
}

void write_summary(const std::filesystem::path& dir, const std::vector<MetricsReport>& reports)
{
    if (reports.empty())
        return;
    std::filesystem::create_directories(dir);
    const std::string stem =
        "summary_thr" + short_num(reports.front().se_threshold) + "_" + objective_name(reports.front().objective);
    binary::atomic_write(dir / (stem + ".csv"), [&](std::ostream& os) {
        os << "scheme,samples,avg_sum_se,avg_sum_ee,qos_violation_prob,qos_violation_level\n";
        for (const auto& r : reports)
            os << r.scheme << ',' << r.n_samples << ',' << num(r.avg_sum_se) << ',' << num(r.avg_sum_ee) << ','
               << num(r.violation.probability) << ',' << (r.violation.level ? num(*r.violation.level) : "") << '\n';
    });
    binary::atomic_write(dir / (stem + ".txt"), [&](std::ostream& os) { os << format_summary(reports); });
}

std::string format_summary(const std::vector<MetricsReport>& reports)
{
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %8s %12s %12s %10s %10s %12s\n", "scheme", "samples", "avg_sum_se",
                  "avg_sum_ee", "viol_prob", "viol_level", "median_ms");
    os << line;
    for (const auto& r : reports) {
        const std::string level = r.violation.level ? short_num(*r.violation.level) : "-";
        std::snprintf(line, sizeof line, "%-12s %8zu %12.6f %12.6f %10.6f %10s %12.6f\n", r.scheme.c_str(),
                      r.n_samples, r.avg_sum_se, r.avg_sum_ee, r.violation.probability, level.c_str(),
                      r.timing.median_s * 1e3);
        os << line;
    }
    return os.str();
}

}  // namespace d2dra
