// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "d2dra/binary_io.hpp"
#include "d2dra/dataset_io.hpp"
#include "d2dra/errors.hpp"
#include "d2dra/evaluation.hpp"
#include "d2dra/run_config.hpp"
#include "d2dra/stats.hpp"
#include "d2dra/train.hpp"

namespace d2dra::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    int threads = 1;
};

std::string hex(std::uint64_t v)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void add_common(CLI::App* cmd, Common& common)
{
    cmd->add_option("--config", common.config_path, "run configuration file ([system]/[train]/[eval])")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", common.overrides, "override one key, e.g. --set system.se_threshold=1")
        ->take_all();
    cmd->add_option("--threads", common.threads, "worker threads for sample-parallel stages")
        ->check(CLI::PositiveNumber);
}

RunConfig resolve(const Common& common, const std::vector<std::string>& flag_overrides = {})
{
    RunConfig config = common.config_path.empty() ? parse_run_config("") : load_run_config(common.config_path);
    for (const auto& o : common.overrides)
        apply_override(config, o);
    for (const auto& o : flag_overrides)
        apply_override(config, o);
    return config;
}

void check_shape(const SystemConfig& config, const DatasetHeader& h, const std::string& what)
{
    if (static_cast<int>(h.n_tps) != config.n_tps || static_cast<int>(h.n_channels) != config.n_channels)
        throw ConfigError(what + " has N=" + std::to_string(h.n_tps) + ", K=" + std::to_string(h.n_channels) +
                          " but the configuration says N=" + std::to_string(config.n_tps) +
                          ", K=" + std::to_string(config.n_channels));
}

std::vector<ChannelSample> load_dataset(const fs::path& path, const SystemConfig& config)
{
    if (!fs::exists(path))
        throw MissingDependency("dataset " + path.string() + " not found");
    check_shape(config, read_header(path), "dataset " + path.string());
    return read_dataset(path);
}

std::vector<LabeledSample> load_labels(const fs::path& path, const SystemConfig& config)
{
    if (!fs::exists(path))
        throw MissingDependency("label file " + path.string() + " not found");
    check_shape(config, read_header(path), "label file " + path.string());
    return read_labels(path);
}

std::map<std::string, std::string> run_manifest(const RunConfig& config)
{
    return {{"master_seed", std::to_string(config.system.master_seed)},
            {"train_seed", std::to_string(config.train.seed)},
            {"objective", objective_name(config.train.objective)},
            {"se_threshold", num(config.system.se_threshold)}};
}

// gen-data ---------------------------------------------------------------

struct GenArgs {
    Common common;
    long long count = -1;
    std::uint64_t start = 0;
    std::string out;
    std::string stats_out;
};

int cmd_gen_data(const GenArgs& args)
{
    const RunConfig config = resolve(args.common);
    if (args.count <= 0)
        throw ConfigError("--count must be positive");
    const auto samples = generate_dataset(config.system, args.start, static_cast<std::size_t>(args.count),
                                          args.common.threads);
    const fs::path out = args.out;
    const fs::path stats_path = args.stats_out.empty() ? fs::path(args.out + ".stats") : fs::path(args.stats_out);
    write_dataset(out, samples, config.system.n_tps, config.system.n_channels);
    if (samples.size() >= 2)
        write_stats(stats_path, compute_stats(samples));
    std::cout << "samples " << samples.size() << "\nchecksum " << hex(binary::file_checksum(out)) << '\n';
    return kExitOk;
}

// label ------------------------------------------------------------------

struct LabelArgs {
    Common common;
    std::string data;
    std::string out;
    std::string objective;
    long long limit = -1;
};

int cmd_label(const LabelArgs& args)
{
    std::vector<std::string> flags;
    if (!args.objective.empty())
        flags.push_back("train.objective=" + args.objective);
    const RunConfig config = resolve(args.common, flags);
    const std::uint64_t count = enumerate_count(config.system);
    if (count > config.eval.oracle_budget)
        throw BudgetExceeded("oracle would scan " + std::to_string(count) + " candidates, budget is " +
                             std::to_string(config.eval.oracle_budget));
    auto samples = load_dataset(args.data, config.system);
    if (args.limit >= 0 && static_cast<std::size_t>(args.limit) < samples.size())
        samples.resize(static_cast<std::size_t>(args.limit));
    const auto labels = label_dataset(samples, config.system, config.train.objective, config.eval.oracle_budget,
                                      args.common.threads);
    write_labels(args.out, labels, config.system.n_tps, config.system.n_channels);

    std::size_t feasible = 0;
    double se = 0.0;
    for (const auto& l : labels) {
        feasible += l.feasible ? 1 : 0;
        se += l.optimal_sum_se;
    }
    const double n = static_cast<double>(std::max<std::size_t>(labels.size(), 1));
    std::cout << "labels " << labels.size() << "\nfeasible_fraction " << num(static_cast<double>(feasible) / n)
              << "\nmean_optimal_sum_se " << num(se / n) << "\nchecksum " << hex(binary::file_checksum(args.out))
              << '\n';
    return kExitOk;
}

// train ------------------------------------------------------------------

struct TrainArgs {
    Common common;
    std::string data;
    std::string labels;
    std::string stats;
    std::string out_dir;
    std::string mode;
    std::string objective;
    bool quiet = false;
};

template <typename Model>
TrainResult fit_and_save(Model& model, const std::vector<ChannelSample>& samples,
                         const std::vector<LabeledSample>& labels, const RunConfig& config, const fs::path& bundle,
                         bool quiet)
{
    Rng init_rng(config.train.seed, StreamTag::WeightInit, 0);
    model.init(init_rng);
    const auto result = train(model, samples, labels, config.system, config.train, [&](const EpochRecord& r) {
        if (!quiet)
            std::cerr << phase_name(r.phase) << " epoch " << r.epoch << " loss " << r.mean.total() << '\n';
    });
    save_bundle(bundle, model, run_manifest(config));
    return result;
}

int cmd_train(const TrainArgs& args)
{
    std::vector<std::string> flags;
    if (!args.mode.empty())
        flags.push_back("train.mode=" + args.mode);
    if (!args.objective.empty())
        flags.push_back("train.objective=" + args.objective);
    const RunConfig config = resolve(args.common, flags);
    const auto samples = load_dataset(args.data, config.system);
    if (samples.empty())
        throw EmptyDataset("training dataset is empty");

    std::vector<LabeledSample> labels;
    const std::size_t needed = ct_label_count(config.train, samples.size());
    if (needed > 0) {
        if (args.labels.empty())
            throw MissingLabels("coarse tuning needs labels for " + std::to_string(needed) +
                                " samples; pass --labels or set train.zeta_ct=0");
        labels = load_labels(args.labels, config.system);
    }
    const DatasetStats stats = args.stats.empty() ? compute_stats(samples) : read_stats(args.stats);

    const fs::path dir = args.out_dir;
    fs::create_directories(dir);
    binary::atomic_write(dir / "config.txt", [&](std::ostream& os) { os << print_run_config(config); });

    const ModelDims dims = ModelDims::from(config.system);
    TrainResult result;
    if (config.train.mode == ModelMode::Centralized) {
        CentralizedModel model(dims, config.train.arch, stats);
        result = fit_and_save(model, samples, labels, config, dir / "model.bin", args.quiet);
    } else {
        DistributedModel model(dims, config.train.arch, stats);
        result = fit_and_save(model, samples, labels, config, dir / "model.bin", args.quiet);
    }

    binary::atomic_write(dir / "loss_history.csv", [&](std::ostream& os) {
        os << "epoch,phase,objective_term,qos_term,binarization_term,total\n";
        for (const auto& r : result.history)
            os << r.epoch << ',' << phase_name(r.phase) << ',' << num(r.mean.objective_term) << ','
               << num(r.mean.qos_term) << ',' << num(r.mean.binarization_term) << ',' << num(r.mean.total())
               << '\n';
    });
    std::cout << "ct_samples " << result.ct_samples << "\nepochs " << result.history.size();
    if (!result.history.empty())
        std::cout << "\nfinal_loss " << num(result.history.back().mean.total());
    std::cout << "\nmodel " << (dir / "model.bin").string() << "\nchecksum "
              << hex(binary::file_checksum(dir / "model.bin")) << '\n';
    return kExitOk;
}

// eval -------------------------------------------------------------------

struct EvalArgs {
    Common common;
    std::string data;
    std::string labels;
    std::string centralized;
    std::string distributed;
    std::string schemes;
    std::string objective;
    std::string out_dir;
};

int cmd_eval(const EvalArgs& args)
{
    std::vector<std::string> flags;
    if (!args.schemes.empty())
        flags.push_back("eval.schemes=" + args.schemes);
    if (!args.objective.empty())
        flags.push_back("train.objective=" + args.objective);
    const RunConfig config = resolve(args.common, flags);
    if (config.eval.schemes.empty())
        throw ConfigError("no schemes requested");

    auto needs = [&](Scheme s) {
        return std::find(config.eval.schemes.begin(), config.eval.schemes.end(), s) != config.eval.schemes.end();
    };
    std::optional<CentralizedModel> centralized;
    std::optional<DistributedModel> distributed;
    if ((needs(Scheme::Centralized) || needs(Scheme::Naive)) && !args.centralized.empty())
        centralized = load_centralized(args.centralized);
    if (needs(Scheme::Distributed) && !args.distributed.empty())
        distributed = load_distributed(args.distributed);

    const auto samples = load_dataset(args.data, config.system);
    std::vector<LabeledSample> labels;
    if (needs(Scheme::Oracle) && !args.labels.empty())
        labels = load_labels(args.labels, config.system);

    EvalOptions options;
    options.objective = config.train.objective;
    options.centralized = centralized ? &*centralized : nullptr;
    options.distributed = distributed ? &*distributed : nullptr;
    options.labels = labels.empty() ? nullptr : &labels;
    options.seed = config.system.master_seed;
    options.oracle_budget = config.eval.oracle_budget;
    options.threads = args.common.threads;
    options.timing_samples = config.eval.timing_samples;

    std::vector<MetricsReport> reports;
    for (Scheme s : config.eval.schemes) {
        reports.push_back(evaluate(s, samples, config.system, options));
        write_report(args.out_dir, reports.back());
    }
    write_summary(args.out_dir, reports);
    std::cout << format_summary(reports);
    return kExitOk;
}

// bench ------------------------------------------------------------------

struct BenchArgs {
    Common common;
    std::vector<int> n_list{2, 3, 4, 5};
    int samples = 20;
    int oracle_samples = 3;
    std::string out;
};

template <typename Fn>
double median_time(int reps, Fn&& fn)
{
    std::vector<double> t;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn(r);
        t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(t.begin(), t.end());
    return t.empty() ? 0.0 : t[t.size() / 2];
}

int cmd_bench(const BenchArgs& args)
{
    const RunConfig config = resolve(args.common);
    if (args.samples < 2)
        throw ConfigError("--samples must be >= 2");
    std::ostringstream csv;
    csv << "n_tps,n_channels,n_power_levels,candidates,centralized_s,distributed_s,oracle_s\n";
    char line[128];
    std::snprintf(line, sizeof line, "%6s %14s %16s %16s %14s\n", "N", "candidates", "centralized_ms",
                  "distributed_ms", "oracle_ms");
    std::cout << line;
    for (int n : args.n_list) {
        SystemConfig sys = config.system;
        sys.n_tps = n;
        finalize(sys);
        const auto samples = generate_dataset(sys, 0, static_cast<std::size_t>(args.samples), 1);
        const DatasetStats stats = compute_stats(samples);
        const ModelDims dims = ModelDims::from(sys);
        Rng rng(config.train.seed, StreamTag::Bench, static_cast<std::uint64_t>(n));
        const bool central = config.train.mode == ModelMode::Centralized;
        CentralizedModel cen(dims, central ? config.train.arch : default_arch(ModelMode::Centralized), stats);
        cen.init(rng);
        DistributedModel dis(dims, central ? default_arch(ModelMode::Distributed) : config.train.arch, stats);
        dis.init(rng);

        const double t_cen = median_time(args.samples, [&](int s) { (void)cen.decide(samples[s]); });
        const double t_dis = median_time(args.samples, [&](int s) { (void)dis.decide(samples[s]); });
        const std::uint64_t count = enumerate_count(sys);
        std::optional<double> t_orc;
        if (count <= config.eval.oracle_budget)
            t_orc = median_time(std::min(args.oracle_samples, args.samples), [&](int s) {
                (void)exhaustive_optimal(samples[s], sys, config.train.objective, config.eval.oracle_budget, 1);
            });

        csv << n << ',' << sys.n_channels << ',' << sys.n_power_levels << ',' << count << ',' << num(t_cen) << ','
            << num(t_dis) << ',' << (t_orc ? num(*t_orc) : "") << '\n';
        std::snprintf(line, sizeof line, "%6d %14llu %16.4f %16.4f %14s\n", n, static_cast<unsigned long long>(count),
                      t_cen * 1e3, t_dis * 1e3, t_orc ? std::to_string(*t_orc * 1e3).c_str() : "-");
        std::cout << line;
    }
    if (!args.out.empty())
        binary::atomic_write(args.out, [&](std::ostream& os) { os << csv.str(); });
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args)
{
    CLI::App app{"DNN-based D2D resource allocation laboratory"};
    app.require_subcommand(1);
    app.footer("Configuration keys (set in a --config file or with --set section.key=value):\n" +
               describe_run_config_keys() +
               "\nExit codes: 0 success, 2 configuration error, 3 missing dependency, 4 budget exceeded.");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate a channel dataset and its statistics");
    add_common(gen_cmd, gen.common);
    gen_cmd->add_option("--count", gen.count, "number of samples")->required();
    gen_cmd->add_option("--out", gen.out, "dataset file")->required();
    gen_cmd->add_option("--start", gen.start, "index of the first sample (use disjoint ranges for held-out sets)");
    gen_cmd->add_option("--stats-out", gen.stats_out, "statistics file (default <out>.stats)");

    LabelArgs lab;
    auto* lab_cmd = app.add_subcommand("label", "exhaustive-search labels for a dataset");
    add_common(lab_cmd, lab.common);
    lab_cmd->add_option("--data", lab.data, "dataset file")->required();
    lab_cmd->add_option("--out", lab.out, "label file")->required();
    lab_cmd->add_option("--objective", lab.objective, "se or ee (overrides train.objective)");
    lab_cmd->add_option("--limit", lab.limit, "label only the first n samples");

    TrainArgs tr;
    auto* tr_cmd = app.add_subcommand("train", "coarse tuning then fine tuning");
    add_common(tr_cmd, tr.common);
    tr_cmd->add_option("--data", tr.data, "training dataset")->required();
    tr_cmd->add_option("--labels", tr.labels, "label file covering the CT subset");
    tr_cmd->add_option("--stats", tr.stats, "statistics file (default: computed from the dataset)");
    tr_cmd->add_option("--out-dir", tr.out_dir, "run directory")->required();
    tr_cmd->add_option("--mode", tr.mode, "centralized or distributed (overrides train.mode)");
    tr_cmd->add_option("--objective", tr.objective, "se or ee (overrides train.objective)");
    tr_cmd->add_flag("--quiet", tr.quiet, "no per-epoch progress");

    EvalArgs ev;
    auto* ev_cmd = app.add_subcommand("eval", "evaluate schemes on a dataset");
    add_common(ev_cmd, ev.common);
    ev_cmd->add_option("--data", ev.data, "evaluation dataset")->required();
    ev_cmd->add_option("--labels", ev.labels, "oracle labels for the dataset (otherwise computed)");
    ev_cmd->add_option("--centralized", ev.centralized, "centralized model bundle");
    ev_cmd->add_option("--distributed", ev.distributed, "distributed model bundle");
    ev_cmd->add_option("--schemes", ev.schemes, "comma-separated schemes (overrides eval.schemes)");
    ev_cmd->add_option("--objective", ev.objective, "oracle objective se or ee (overrides train.objective)");
    ev_cmd->add_option("--out-dir", ev.out_dir, "report directory")->required();

    BenchArgs be;
    auto* be_cmd = app.add_subcommand("bench", "per-sample decision time versus N");
    add_common(be_cmd, be.common);
    be_cmd->add_option("--n-list", be.n_list, "values of N")->delimiter(',');
    be_cmd->add_option("--samples", be.samples, "timed samples per N for the DNN schemes");
    be_cmd->add_option("--oracle-samples", be.oracle_samples, "timed samples per N for the oracle");
    be_cmd->add_option("--out", be.out, "CSV output");

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*gen_cmd)
            return cmd_gen_data(gen);
        if (*lab_cmd)
            return cmd_label(lab);
        if (*tr_cmd)
            return cmd_train(tr);
        if (*ev_cmd)
            return cmd_eval(ev);
        return cmd_bench(be);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const EmptyDataset& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const MissingDependency& e) {
        std::cerr << "missing dependency: " << e.what() << '\n';
        return kExitMissingDependency;
    } catch (const MissingLabels& e) {
        std::cerr << "missing dependency: " << e.what() << '\n';
        return kExitMissingDependency;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace d2dra::cli
