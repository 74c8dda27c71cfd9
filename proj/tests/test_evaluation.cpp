// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "d2dra/errors.hpp"
#include "d2dra/evaluation.hpp"

using namespace d2dra;
namespace fs = std::filesystem;

namespace {

SystemConfig small(double thr)
{
    SystemConfig c;
    c.n_tps = 2;
    c.n_channels = 2;
    c.n_power_levels = 4;
    c.bf_bits = 3;
    c.bb_bits = 4;
    c.se_threshold = thr;
    finalize(c);
    return c;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("d2dra_eval_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("scheme and objective names")
{
    for (Scheme s : {Scheme::Oracle, Scheme::Centralized, Scheme::Distributed, Scheme::Naive, Scheme::Random})
        CHECK(parse_scheme(scheme_name(s)) == s);
    CHECK_THROWS_AS(parse_scheme("greedy"), ConfigError);
    CHECK(parse_objective("ee") == Objective::SumEE);
    CHECK(objective_name(Objective::SumSE) == "se");
    CHECK_THROWS_AS(parse_objective("rate"), ConfigError);
}

TEST_CASE("scored objectives zero out violating samples")
{
    const SystemConfig lax = small(0.0);
    const ChannelSample s = generate_sample(lax, 11);
    const Allocation a{{0, 1}, {3, 2}};
    CHECK(scored_sum_se(s, a, lax) == doctest::Approx(sum_se(s, a, lax)).epsilon(1e-12));
    CHECK(scored_sum_ee(s, a, lax) == doctest::Approx(sum_ee(s, a, lax)).epsilon(1e-12));

    const SystemConfig strict = small(1e3);
    CHECK(scored_sum_se(s, a, strict) == 0.0);
    CHECK(scored_sum_ee(s, a, strict) == 0.0);
}

TEST_CASE("violation statistics")
{
    const std::vector<double> one{0.8, 0.6};
    const auto v = violation_stats(one, 1.0);
    CHECK(v.total == 2u);
    CHECK(v.violated == 2u);
    CHECK(v.probability == 1.0);
    REQUIRE(v.level.has_value());
    CHECK(*v.level == doctest::Approx(0.3).epsilon(1e-12));

    const std::vector<double> mixed{1.5, 0.8, 2.0, 0.6};
    const auto m = violation_stats(mixed, 1.0);
    CHECK(m.probability == 0.5);
    CHECK(*m.level == doctest::Approx(0.3).epsilon(1e-12));

    const std::vector<double> fine{1.0, 2.0};
    const auto f = violation_stats(fine, 1.0);
    CHECK(f.violated == 0u);
    CHECK(f.probability == 0.0);
    CHECK_FALSE(f.level.has_value());
}

TEST_CASE("binarization error")
{
    SoftOutputs s;
    s.n_tps = 1;
    s.n_power_levels = 2;
    s.n_channels = 1;
    s.power_probs = {0.73, 0.5};
    s.channel_probs = {0.98};
    const auto e = binarization_error_samples(s);
    REQUIRE(e.size() == 3u);
    CHECK(e[0] == doctest::Approx(0.27).epsilon(1e-12));
    CHECK(e[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e[2] == doctest::Approx(0.02).epsilon(1e-9));
    for (double x : e) {
        CHECK(x >= 0.0);
        CHECK(x <= 0.5);
    }
}

TEST_CASE("oracle dominates every scheme sample by sample")
{
    const SystemConfig c = small(1.0);
    const auto data = generate_dataset(c, 0, 60, 2);
    const auto stats = compute_stats(generate_dataset(c, 1000, 200, 2));
    CentralizedModel cm(ModelDims::from(c), {2, 16, 0.0}, stats);
    DistributedModel dm(ModelDims::from(c), {2, 16, 0.0}, stats);
    Rng r1(1), r2(2);
    cm.init(r1);
    dm.init(r2);
    EvalOptions opt;
    opt.centralized = &cm;
    opt.distributed = &dm;
    opt.threads = 2;
    opt.timing_samples = 5;

    for (Scheme s : {Scheme::Centralized, Scheme::Distributed, Scheme::Naive, Scheme::Random})
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double best = scored_sum_se(data[i], scheme_decision(Scheme::Oracle, data[i], i, c, opt), c);
            CHECK(scored_sum_se(data[i], scheme_decision(s, data[i], i, c, opt), c) <= best + 1e-9);
        }

    const auto oracle = evaluate(Scheme::Oracle, data, c, opt);
    const auto random = evaluate(Scheme::Random, data, c, opt);
    CHECK(oracle.avg_sum_se >= random.avg_sum_se);
    CHECK(oracle.violation.probability <= random.violation.probability);
    CHECK(oracle.binerr_cdf.empty());
    CHECK(oracle.timing.samples == 5u);
}

TEST_CASE("random baseline never violates a zero threshold")
{
    const SystemConfig c = small(0.0);
    const auto data = generate_dataset(c, 0, 100, 1);
    const auto r = evaluate(Scheme::Random, data, c, EvalOptions{});
    CHECK(r.violation.total == 200u);
    CHECK(r.violation.violated == 0u);
    CHECK_FALSE(r.violation.level.has_value());
}

TEST_CASE("reports are deterministic and internally consistent")
{
    const SystemConfig c = small(1.0);
    const auto data = generate_dataset(c, 0, 80, 2);
    const auto stats = compute_stats(data);
    DistributedModel dm(ModelDims::from(c), {2, 16, 0.0}, stats);
    Rng rng(3);
    dm.init(rng);
    EvalOptions opt;
    opt.distributed = &dm;
    opt.timing_samples = 0;
    const auto labels = label_dataset(data, c, Objective::SumSE, kDefaultOracleBudget, 2);

    for (Scheme s : {Scheme::Distributed, Scheme::Random, Scheme::Oracle}) {
        auto run = [&](int threads) {
            EvalOptions o = opt;
            o.threads = threads;
            return evaluate(s, data, c, o);
        };
        const auto a = run(1);
        const auto b = run(3);
        CHECK(a.se_cdf == b.se_cdf);
        CHECK(a.cue_cdf == b.cue_cdf);
        CHECK(a.binerr_cdf == b.binerr_cdf);
        CHECK(a.avg_sum_se == b.avg_sum_se);
        CHECK(a.n_samples == 80u);
        CHECK(a.se_cdf.size() == 80u);
        CHECK(a.cue_cdf.size() == 160u);
        CHECK(std::is_sorted(a.se_cdf.begin(), a.se_cdf.end()));
        CHECK(std::abs(cdf_mean(a.se_cdf) - a.avg_sum_se) < 1e-9);
        CHECK(std::abs(cdf_mean(a.ee_cdf) - a.avg_sum_ee) < 1e-9);
    }
    const auto dist = evaluate(Scheme::Distributed, data, c, opt);
    CHECK(dist.binerr_cdf.size() == 80u * static_cast<std::size_t>(2 * 4 + 2 * 2 + 2 * 3 + 4));

    EvalOptions with_labels = opt;
    with_labels.labels = &labels;
    CHECK(evaluate(Scheme::Oracle, data, c, with_labels).se_cdf == evaluate(Scheme::Oracle, data, c, opt).se_cdf);
}

TEST_CASE("evaluation errors")
{
    const SystemConfig c = small(0.0);
    const auto data = generate_dataset(c, 0, 10, 1);
    CHECK_THROWS_AS(evaluate(Scheme::Naive, data, c, EvalOptions{}), MissingDependency);
    CHECK_THROWS_AS(evaluate(Scheme::Centralized, data, c, EvalOptions{}), MissingDependency);
    CHECK_THROWS_AS(evaluate(Scheme::Distributed, data, c, EvalOptions{}), MissingDependency);
    CHECK_THROWS_AS(evaluate(Scheme::Random, {}, c, EvalOptions{}), EmptyDataset);

    EvalOptions tight;
    tight.oracle_budget = 10;
    CHECK_THROWS_AS(evaluate(Scheme::Oracle, data, c, tight), BudgetExceeded);
}

TEST_CASE("report files embed scheme, threshold and objective")
{
    const SystemConfig c = small(1.0);
    const auto data = generate_dataset(c, 0, 20, 1);
    EvalOptions opt;
    opt.timing_samples = 3;
    const auto r = evaluate(Scheme::Random, data, c, opt);
    const auto o = evaluate(Scheme::Oracle, data, c, opt);
    CHECK(report_stem(r) == "random_thr1_se");

    const fs::path dir = scratch("files");
    write_report(dir, r);
    write_summary(dir, {o, r});
    for (const char* suffix : {"_se_cdf.csv", "_ee_cdf.csv", "_cue_cdf.csv", "_binerr_cdf.csv", "_timing.csv"})
        CHECK(fs::exists(dir / ("random_thr1_se" + std::string(suffix))));
    REQUIRE(fs::exists(dir / "summary_thr1_se.csv"));
    CHECK(fs::exists(dir / "summary_thr1_se.txt"));

    std::ifstream in(dir / "summary_thr1_se.csv");
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        lines.push_back(line);
    REQUIRE(lines.size() == 3u);
    CHECK(lines[1].rfind("oracle,", 0) == 0);
    CHECK(lines[2].rfind("random,", 0) == 0);
    CHECK(lines[0].find("time") == std::string::npos);

    std::ifstream cdf(dir / "random_thr1_se_se_cdf.csv");
    std::size_t rows = 0;
    for (std::string line; std::getline(cdf, line);)
        ++rows;
    CHECK(rows == 21u);

    const std::string text = format_summary({o, r});
    CHECK(text.find("oracle") != std::string::npos);
    CHECK(text.find("random") != std::string::npos);
    fs::remove_all(dir);
}
