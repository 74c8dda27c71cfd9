// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "d2dra/channel.hpp"
#include "d2dra/errors.hpp"
#include "d2dra/stats.hpp"

using namespace d2dra;

namespace {

SystemConfig defaults()
{
    SystemConfig c;
    finalize(c);
    return c;
}

bool inside(Position p, double side)
{
    return p.x >= 0.0 && p.x <= side && p.y >= 0.0 && p.y <= side;
}

}  // namespace

TEST_CASE("config defaults and validation")
{
    const SystemConfig c = defaults();
    CHECK(c.power_levels.size() == 8);
    CHECK(c.power_levels.front() == 0.0);
    CHECK(c.power_levels.back() == 0.2);
    CHECK(c.power_levels[1] == doctest::Approx(0.02857).epsilon(1e-3));
    CHECK(c.noise_power() == doctest::Approx(std::pow(10.0, -17.3 - 3.0) * 1e7).epsilon(1e-12));

    SystemConfig bad = defaults();
    bad.power_levels = {0.0, 0.3, 0.1};
    bad.n_power_levels = 3;
    CHECK_THROWS_AS(validate(bad), ConfigError);
    bad = defaults();
    bad.n_power_levels = 1;
    bad.power_levels.clear();
    CHECK_THROWS_AS(finalize(bad), ConfigError);
    bad = defaults();
    bad.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("path gain")
{
    const SystemConfig c = defaults();
    CHECK(path_gain(1.0, c) == doctest::Approx(3.524e-4).epsilon(1e-3));
    CHECK(path_gain(10.0, c) == doctest::Approx(5.585e-8).epsilon(1e-3));
    CHECK(path_gain(100.0, c) == doctest::Approx(8.851e-12).epsilon(1e-3));
    CHECK(path_gain(0.0, c) == path_gain(1.0, c));
    CHECK(path_gain(0.3, c) == path_gain(1.0, c));
}

TEST_CASE("topology respects the area and pair radius")
{
    const SystemConfig c = defaults();
    for (std::uint64_t s = 0; s < 200; ++s) {
        Rng rng(c.master_seed, StreamTag::Topology, s);
        const Topology t = sample_topology(c, rng);
        REQUIRE(t.cue_pos.size() == 3);
        REQUIRE(t.tp_tx_pos.size() == 3);
        CHECK(inside(t.bs_pos, c.area_side_m));
        for (auto p : t.cue_pos)
            CHECK(inside(p, c.area_side_m));
        for (int i = 0; i < 3; ++i) {
            CHECK(inside(t.tp_tx_pos[i], c.area_side_m));
            CHECK(inside(t.tp_rx_pos[i], c.area_side_m));
            CHECK(distance(t.tp_tx_pos[i], t.tp_rx_pos[i]) <= 30.0);
        }
    }

    SystemConfig zero = defaults();
    zero.pair_max_dist_m = 0.0;
    Rng rng(1);
    const Topology t = sample_topology(zero, rng);
    for (int i = 0; i < 3; ++i) {
        CHECK(t.tp_rx_pos[i].x == t.tp_tx_pos[i].x);
        CHECK(t.tp_rx_pos[i].y == t.tp_tx_pos[i].y);
    }

    Rng a(7), b(7);
    const Topology ta = sample_topology(c, a);
    const Topology tb = sample_topology(c, b);
    for (int i = 0; i < 3; ++i) {
        CHECK(ta.tp_rx_pos[i].x == tb.tp_rx_pos[i].x);
        CHECK(ta.cue_pos[i].y == tb.cue_pos[i].y);
    }
}

TEST_CASE("fading is unit-mean exponential")
{
    SystemConfig c = defaults();
    c.n_tps = 1;
    c.n_channels = 1;
    Topology t;
    t.bs_pos = {50, 50};
    t.cue_pos = {{40, 50}};
    t.tp_tx_pos = {{50, 60}};
    t.tp_rx_pos = {{55, 60}};
    Rng rng(11);
    const double pg = path_gain(5.0, c);
    const int m = 100000;
    std::vector<double> x(m);
    for (int s = 0; s < m; ++s)
        x[s] = sample_channel(t, c, rng).gain(0, 1, 1) / pg;
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= m;
    CHECK(std::abs(mean - 1.0) < 0.01);

    std::sort(x.begin(), x.end());
    double ks = 0.0;
    for (int s = 0; s < m; ++s) {
        const double f = 1.0 - std::exp(-x[s]);
        ks = std::max({ks, std::abs(f - static_cast<double>(s) / m), std::abs(f - static_cast<double>(s + 1) / m)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("channel samples are positive, shaped and reproducible")
{
    const SystemConfig c = defaults();
    const ChannelSample s = generate_sample(c, 42);
    CHECK(s.gains().size() == 3u * 4 * 4);
    for (double g : s.gains()) {
        CHECK(std::isfinite(g));
        CHECK(g > 0.0);
    }
    CHECK(generate_sample(c, 42) == s);
    CHECK_FALSE(generate_sample(c, 43) == s);

    const auto serial = generate_dataset(c, 10, 50, 1);
    const auto parallel = generate_dataset(c, 10, 50, 4);
    CHECK(serial == parallel);
    CHECK(serial[5] == generate_sample(c, 15));

    for (int rx = 0; rx <= 3; ++rx) {
        const auto idx = s.local_indices(rx);
        CHECK(idx.size() == 12u);
        for (std::size_t e : idx)
            CHECK((e / 4) % 4 == static_cast<std::size_t>(rx));
        CHECK(s.local_csi(rx).size() == 12u);
    }
}

TEST_CASE("dataset statistics")
{
    ChannelSample a(1, 1, {1e-5, 1e-5, 1e-5, 1e-5});
    ChannelSample b(1, 1, {1e-3, 1e-5, 1e-5, 1e-5});
    const std::vector<ChannelSample> two{a, b};
    const DatasetStats st = compute_stats(two);
    CHECK(st.mean_log10[0] == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(st.std_log10[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.std_log10[1] == kStdFloor);

    CHECK_THROWS_AS(compute_stats(std::vector<ChannelSample>{a}), EmptyDataset);
    CHECK_THROWS_AS(compute_stats(std::vector<ChannelSample>{}), EmptyDataset);

    const SystemConfig c = defaults();
    auto data = generate_dataset(c, 0, 64, 2);
    const DatasetStats base = compute_stats(data);
    auto scaled = data;
    const double factor = 37.5;
    for (auto& s : scaled)
        for (double& g : s.gains())
            g *= factor;
    const DatasetStats shifted = compute_stats(scaled);
    for (std::size_t e = 0; e < base.mean_log10.size(); ++e) {
        CHECK(shifted.mean_log10[e] == doctest::Approx(base.mean_log10[e] + std::log10(factor)).epsilon(1e-12));
        CHECK(shifted.std_log10[e] == doctest::Approx(base.std_log10[e]).epsilon(1e-9));
    }
    const auto x0 = preprocess(data[3], base);
    const auto x1 = preprocess(scaled[3], shifted);
    for (std::size_t e = 0; e < x0.size(); ++e)
        CHECK(std::abs(x0[e] - x1[e]) < 1e-12);
}

TEST_CASE("preprocess centres and scales")
{
    DatasetStats st{1, 1, {-4, -4, -4, -4}, {0.5, 0.5, 0.5, 0.5}};
    ChannelSample at_mean(1, 1, {1e-4, 1e-4, 1e-4, 1e-4});
    for (double v : preprocess(at_mean, st))
        CHECK(std::abs(v) < 1e-12);
    const double one_std = std::pow(10.0, -3.5);
    ChannelSample up(1, 1, {one_std, one_std, one_std, one_std});
    for (double v : preprocess(up, st))
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}
