// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "d2dra/binary_io.hpp"
#include "d2dra/dataset_io.hpp"
#include "d2dra/errors.hpp"
#include "d2dra/models.hpp"
#include "d2dra/nn/tensor_io.hpp"
#include "d2dra/run_config.hpp"

using namespace d2dra;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("d2dra_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

SystemConfig small()
{
    SystemConfig c;
    c.n_tps = 2;
    c.n_channels = 3;
    c.n_power_levels = 3;
    c.bf_bits = 3;
    c.bb_bits = 5;
    finalize(c);
    return c;
}

void flip_byte(const fs::path& path, std::streamoff from_end)
{
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(-from_end, std::ios::end);
    char b = 0;
    f.read(&b, 1);
    f.seekp(-from_end, std::ios::end);
    b = static_cast<char>(b ^ 0x40);
    f.write(&b, 1);
}

}  // namespace

TEST_CASE("dataset files")
{
    const fs::path dir = scratch("dataset");
    SystemConfig c;
    finalize(c);
    const auto data = generate_dataset(c, 0, 1000, 2);
    write_dataset(dir / "d.bin", data, c.n_tps, c.n_channels);
    CHECK(fs::file_size(dir / "d.bin") == 20u + 1000u * 48u * 8u);
    const auto back = read_dataset(dir / "d.bin");
    REQUIRE(back.size() == data.size());
    for (std::size_t s = 0; s < data.size(); ++s)
        CHECK(std::ranges::equal(back[s].gains(), data[s].gains()));
    const auto h = read_header(dir / "d.bin");
    CHECK(h.n_tps == 3u);
    CHECK(h.n_channels == 3u);
    CHECK(h.sample_count == 1000u);

    std::ofstream(dir / "d.bin", std::ios::app | std::ios::binary) << 'x';
    CHECK_THROWS_AS(read_dataset(dir / "d.bin"), FormatError);
    CHECK_THROWS_AS(read_dataset(dir / "missing.bin"), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("stats and label files")
{
    const fs::path dir = scratch("stats");
    const SystemConfig c = small();
    const auto data = generate_dataset(c, 0, 50, 1);
    const auto stats = compute_stats(data);
    write_stats(dir / "s.bin", stats);
    const auto back = read_stats(dir / "s.bin");
    CHECK(back.mean_log10 == stats.mean_log10);
    CHECK(back.std_log10 == stats.std_log10);
    CHECK(back.n_tps == 2);
    CHECK(back.n_channels == 3);

    write_dataset(dir / "d.bin", data, 2, 3);
    CHECK_THROWS_AS(read_stats(dir / "d.bin"), FormatError);

    SystemConfig strict = c;
    strict.se_threshold = 2.0;
    const auto labels = label_dataset(data, strict, Objective::SumSE, kDefaultOracleBudget, 1);
    write_labels(dir / "l.bin", labels, 2, 3);
    CHECK(fs::file_size(dir / "l.bin") == kDatasetHeaderBytes + 50u * 5u);
    const auto lb = read_labels(dir / "l.bin");
    REQUIRE(lb.size() == labels.size());
    for (std::size_t s = 0; s < labels.size(); ++s) {
        CHECK(lb[s].feasible == labels[s].feasible);
        CHECK(lb[s].optimal == labels[s].optimal);
    }
    fs::remove_all(dir);
}

TEST_CASE("tensor streams")
{
    nn::Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const auto t = nn::to_named("layer.w", m);
    CHECK(t.dims == std::vector<std::uint32_t>{2, 3});
    CHECK(t.data == std::vector<double>{1, 2, 3, 4, 5, 6});

    std::stringstream buf;
    nn::write_tensors(buf, {t, nn::to_named("b", nn::Matrix::Constant(4, 1, -0.5))});
    const auto back = nn::read_tensors(buf);
    REQUIRE(back.size() == 2u);
    CHECK(back[0] == t);
    nn::Matrix dst(2, 3);
    nn::assign_from(back[0], dst);
    CHECK(dst == m);
    nn::Matrix wrong(3, 2);
    CHECK_THROWS_AS(nn::assign_from(back[0], wrong), FormatError);

    std::stringstream junk("not a tensor file");
    CHECK_THROWS_AS(nn::read_tensors(junk), FormatError);
}

TEST_CASE("model bundles")
{
    const fs::path dir = scratch("bundle");
    const SystemConfig c = small();
    const auto data = generate_dataset(c, 0, 40, 1);
    const auto stats = compute_stats(data);

    DistributedModel dm(ModelDims::from(c), {3, 16, 0.1}, stats);
    Rng rng(1);
    dm.init(rng);
    const Matrix x = normalized_batch(data, stats);
    Rng drop(2);
    dm.forward(x, Mode::Train, &drop);
    save_bundle(dir / "d.bin", dm, {{"note", "x"}});
    CHECK(bundle_kind(dir / "d.bin") == ModelKind::Distributed);
    CHECK(read_manifest(dir / "d.bin").at("note") == "x");
    const DistributedModel dl = load_distributed(dir / "d.bin");
    CHECK(dl.arch().dropout_rate == 0.1);
    const BatchSoft a = dm.forward_infer(x), b = dl.forward_infer(x);
    CHECK(a.power == b.power);
    CHECK(a.feedback == b.feedback);
    CHECK(a.bs == b.bs);
    CHECK_THROWS_AS(load_centralized(dir / "d.bin"), MissingDependency);

    CentralizedModel cm(ModelDims::from(c), {2, 8, 0.0}, stats);
    cm.init(rng);
    save_bundle(dir / "c.bin", cm);
    CHECK(load_centralized(dir / "c.bin").forward_infer(x).channel == cm.forward_infer(x).channel);

    flip_byte(dir / "c.bin", 3);
    CHECK_THROWS_AS(load_centralized(dir / "c.bin"), FormatError);
    CHECK_THROWS_AS(load_centralized(dir / "none.bin"), MissingDependency);
    fs::remove_all(dir);
}

TEST_CASE("file checksum")
{
    const fs::path dir = scratch("checksum");
    std::ofstream(dir / "a") << "hello";
    std::ofstream(dir / "b") << "hello";
    std::ofstream(dir / "c") << "hellp";
    CHECK(binary::file_checksum(dir / "a") == binary::file_checksum(dir / "b"));
    CHECK(binary::file_checksum(dir / "a") != binary::file_checksum(dir / "c"));
    fs::remove_all(dir);
}

TEST_CASE("run configuration text")
{
    RunConfig defaults = parse_run_config("");
    CHECK(defaults.system.n_tps == 3);
    CHECK(defaults.train.arch.units == 16);
    CHECK(defaults.train.arch.width == 400);

    const RunConfig custom = parse_run_config(R"(
# desk setup
[system]
n_tps = 2
n_channels = 2
n_power_levels = 4
se_threshold = 1.5
[train]
mode = distributed
lr_ft = 1e-4
units = 4
width = 64
[eval]
schemes = oracle, distributed, naive
)");
    CHECK(custom.system.n_tps == 2);
    CHECK(custom.system.power_levels.size() == 4u);
    CHECK(custom.system.power_levels.back() == custom.system.p_max_watts);
    CHECK(custom.system.se_threshold == 1.5);
    CHECK(custom.train.lr_ft == 1e-4);
    CHECK(custom.eval.schemes == std::vector<Scheme>{Scheme::Oracle, Scheme::Distributed, Scheme::Naive});
    CHECK(parse_run_config(print_run_config(custom)) == custom);
    CHECK(parse_run_config(print_run_config(defaults)) == defaults);

    RunConfig o = custom;
    apply_override(o, "train.epochs_ft=7");
    apply_override(o, "system.n_power_levels=3");
    CHECK(o.train.epochs_ft == 7);
    CHECK(o.system.power_levels.size() == 3u);
    CHECK_THROWS_AS(apply_override(o, "train.nope=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(o, "epochs_ft"), ConfigError);

    CHECK_THROWS_AS(parse_run_config("[system]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[other]\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[system]\nn_tps = three\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[train]\nzeta_ct = 2\n"), ConfigError);
    CHECK(describe_run_config_keys().find("train.zeta_ct") != std::string::npos);

    CHECK(custom.train.arch.units == 4);
    RunConfig dist = parse_run_config("[train]\nmode = distributed\n");
    CHECK(dist.train.arch.units == 8);
    CHECK(dist.train.arch.width == 150);
    CHECK(parse_run_config("[train]\nwidth = 32\nmode = distributed\n").train.arch.width == 32);
    apply_override(defaults, "train.mode=distributed");
    CHECK(defaults.train.arch.width == 150);
    apply_override(defaults, "train.mode=centralized");
    CHECK(defaults.train.arch.width == 400);

    const fs::path dir = scratch("config");
    std::ofstream(dir / "run.cfg") << print_run_config(custom);
    CHECK(load_run_config(dir / "run.cfg") == custom);
    fs::remove_all(dir);
}
