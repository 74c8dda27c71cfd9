// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using d2dra::cli::run;

namespace {

struct Captured {
    int code = 0;
    std::string out;
};

Captured call(std::vector<std::string> args)
{
    args.insert(args.begin(), "d2dra");
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    const int code = run(args);
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return {code, out.str()};
}

std::string field(const std::string& text, const std::string& key)
{
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (line.rfind(key + " ", 0) == 0)
            return line.substr(key.size() + 1);
    return {};
}

std::size_t line_count(const fs::path& p)
{
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);)
        ++n;
    return n;
}

struct Workspace {
    fs::path dir;
    std::string cfg;

    Workspace()
    {
        dir = fs::temp_directory_path() / "d2dra_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
        cfg = (dir / "run.cfg").string();
        std::ofstream(cfg) << "[system]\nn_tps = 2\nn_channels = 2\nn_power_levels = 4\nse_threshold = 1\n"
                              "bf_bits = 3\nbb_bits = 4\n[train]\nunits = 2\nwidth = 16\nepochs_ct = 2\n"
                              "epochs_ft = 3\nbatch_size = 32\nzeta_ct = 0.2\n";
    }
    ~Workspace() { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("data generation")
{
    Workspace w;
    CHECK(call({"gen-data", "--config", w.cfg, "--count", "0", "--out", w.path("empty.bin")}).code ==
          d2dra::cli::kExitConfig);

    const auto a = call({"gen-data", "--config", w.cfg, "--count", "50", "--out", w.path("a.bin")});
    const auto b = call({"gen-data", "--config", w.cfg, "--count", "50", "--out", w.path("b.bin"), "--threads", "3"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(field(a.out, "samples") == "50");
    CHECK(field(a.out, "checksum") == field(b.out, "checksum"));
    CHECK(fs::exists(w.path("a.bin.stats")));

    const auto c = call({"gen-data", "--config", w.cfg, "--count", "50", "--out", w.path("c.bin"), "--set",
                         "system.master_seed=7"});
    CHECK(field(c.out, "checksum") != field(a.out, "checksum"));

    CHECK(call({"gen-data", "--config", w.cfg, "--count", "5", "--out", w.path("x.bin"), "--set", "system.bogus=1"})
              .code == d2dra::cli::kExitConfig);
    CHECK(call({"gen-data", "--count", "5"}).code == d2dra::cli::kExitConfig);
}

TEST_CASE("labelling respects the search budget")
{
    Workspace w;
    REQUIRE(call({"gen-data", "--config", w.cfg, "--count", "20", "--out", w.path("d.bin")}).code == 0);
    const auto ok = call({"label", "--config", w.cfg, "--data", w.path("d.bin"), "--out", w.path("l.bin")});
    REQUIRE(ok.code == 0);
    CHECK(field(ok.out, "labels") == "20");
    CHECK(call({"label", "--config", w.cfg, "--data", w.path("d.bin"), "--out", w.path("l2.bin"), "--set",
                "eval.oracle_budget=10"})
              .code == d2dra::cli::kExitBudget);
    CHECK_FALSE(fs::exists(w.path("l2.bin")));
}

TEST_CASE("train and evaluate")
{
    Workspace w;
    REQUIRE(call({"gen-data", "--config", w.cfg, "--count", "200", "--out", w.path("train.bin")}).code == 0);
    REQUIRE(call({"gen-data", "--config", w.cfg, "--count", "40", "--start", "100000", "--out", w.path("test.bin")})
                .code == 0);

    CHECK(call({"train", "--config", w.cfg, "--data", w.path("train.bin"), "--out-dir", w.path("m0"), "--quiet"}).code ==
          d2dra::cli::kExitMissingDependency);

    REQUIRE(call({"label", "--config", w.cfg, "--data", w.path("train.bin"), "--out", w.path("train.lab"), "--limit",
                  "40"})
                .code == 0);
    for (const char* mode : {"centralized", "distributed"}) {
        const auto t = call({"train", "--config", w.cfg, "--data", w.path("train.bin"), "--labels",
                             w.path("train.lab"), "--stats", w.path("train.bin.stats"), "--mode", mode, "--out-dir",
                             w.path(mode), "--quiet"});
        INFO(t.out);
        REQUIRE(t.code == 0);
        CHECK(field(t.out, "epochs") == "5");
        CHECK(line_count(w.dir / mode / "loss_history.csv") == 6u);
        CHECK(fs::exists(w.dir / mode / "config.txt"));
    }

    const auto e = call({"eval", "--config", w.cfg, "--data", w.path("test.bin"), "--centralized",
                         w.path("centralized/model.bin"), "--distributed", w.path("distributed/model.bin"),
                         "--schemes", "oracle,centralized,distributed,naive,random", "--out-dir", w.path("eval")});
    INFO(e.out);
    REQUIRE(e.code == 0);
    CHECK(line_count(w.dir / "eval" / "summary_thr1_se.csv") == 6u);
    CHECK(fs::exists(w.dir / "eval" / "naive_thr1_se_se_cdf.csv"));

    CHECK(call({"eval", "--config", w.cfg, "--data", w.path("test.bin"), "--schemes", "naive", "--out-dir",
                w.path("eval2")})
              .code == d2dra::cli::kExitMissingDependency);
    CHECK(call({"eval", "--config", w.cfg, "--data", w.path("test.bin"), "--distributed",
                w.path("centralized/model.bin"), "--schemes", "distributed", "--out-dir", w.path("eval3")})
              .code == d2dra::cli::kExitMissingDependency);
}

TEST_CASE("timing benchmark")
{
    Workspace w;
    const auto b = call({"bench", "--config", w.cfg, "--n-list", "2,3", "--samples", "4", "--oracle-samples", "2",
                         "--out", w.path("bench.csv")});
    REQUIRE(b.code == 0);
    CHECK(line_count(w.path("bench.csv")) == 3u);
}

TEST_CASE("help and unknown commands through the executable")
{
    const std::string tool = D2DRA_TOOL;
    auto status = [](const std::string& cmd) {
        const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status(tool + " --help") == 0);
    CHECK(status(tool + " train --help") == 0);
    CHECK(status(tool + " frobnicate") == d2dra::cli::kExitConfig);
    CHECK(status(tool + " eval --data /nonexistent --out-dir /tmp/x --schemes naive") ==
          d2dra::cli::kExitMissingDependency);
}
