// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "d2dra/errors.hpp"
#include "d2dra/losses.hpp"

using namespace d2dra;

namespace {

SoftOutputs make_soft(int n, int np, int k, Rng& rng, int bf = 0, int bb = 0)
{
    SoftOutputs s;
    s.n_tps = n;
    s.n_power_levels = np;
    s.n_channels = k;
    auto simplex = [&](std::vector<double>& v, int block) {
        v.resize(static_cast<std::size_t>(n) * block);
        for (int i = 0; i < n; ++i) {
            double z = 0.0;
            for (int j = 0; j < block; ++j)
                z += v[static_cast<std::size_t>(i) * block + j] = 0.1 + rng.uniform();
            for (int j = 0; j < block; ++j)
                v[static_cast<std::size_t>(i) * block + j] /= z;
        }
    };
    simplex(s.power_probs, np);
    simplex(s.channel_probs, k);
    for (int e = 0; e < n * bf; ++e)
        s.feedback_soft.push_back(0.05 + 0.9 * rng.uniform());
    for (int e = 0; e < bb; ++e)
        s.bs_soft.push_back(0.05 + 0.9 * rng.uniform());
    return s;
}

SystemConfig small(int n, int k, int np, double thr)
{
    SystemConfig c;
    c.n_tps = n;
    c.n_channels = k;
    c.n_power_levels = np;
    c.se_threshold = thr;
    finalize(c);
    return c;
}

LossWeights weightless()
{
    LossWeights w;
    w.rho_1 = w.rho_2 = w.lambda_2 = w.lambda_3 = 0.0;
    return w;
}

template <typename Fn>
void check_soft_gradient(const SoftOutputs& soft, const SoftOutputs& grad, Fn loss)
{
    const double h = 1e-6;
    auto probe = [&](std::vector<double> SoftOutputs::*field) {
        for (std::size_t e = 0; e < (soft.*field).size(); ++e) {
            SoftOutputs up = soft, dn = soft;
            (up.*field)[e] += h;
            (dn.*field)[e] -= h;
            const double fd = (loss(up) - loss(dn)) / (2 * h);
            CHECK((grad.*field)[e] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
    };
    probe(&SoftOutputs::power_probs);
    probe(&SoftOutputs::channel_probs);
    probe(&SoftOutputs::feedback_soft);
    probe(&SoftOutputs::bs_soft);
}

}  // namespace

TEST_CASE("binarization penalty")
{
    CHECK(binarization_penalty(std::vector<double>{0.5, 0.5, 0.5}, 2.0) == 0.0);
    CHECK(binarization_penalty(std::vector<double>{1.0}, 2.0) == doctest::Approx(-0.25));
    CHECK(binarization_penalty(std::vector<double>{0.0, 1.0, 0.5}, 1.0) == doctest::Approx(-1.0));
    Rng rng(1);
    for (int t = 0; t < 100; ++t)
        CHECK(binarization_penalty(std::vector<double>{rng.uniform(), rng.uniform()}, 1.5) <= 0.0);
}

TEST_CASE("coarse-tuning loss")
{
    LabeledSample label;
    label.feasible = true;
    label.optimal = Allocation{{1, 0}, {2, 0}};
    const SoftOutputs exact = SoftOutputs::one_hot(label.optimal, 3, 2);
    CHECK(ct_loss(exact, label, weightless()).total() == 0.0);

    // one TP, one decision head with probability 0.5 on the labelled class
    SoftOutputs half;
    half.n_tps = 1;
    half.n_power_levels = 2;
    half.n_channels = 1;
    half.power_probs = {0.5, 0.5};
    half.channel_probs = {1.0};
    LabeledSample one;
    one.feasible = true;
    one.optimal = Allocation{{0}, {1}};
    const auto l = ct_loss(half, one, weightless());
    CHECK(l.objective_term == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // larger rho lowers the loss: g <= 0, most negative at binary outputs
    Rng rng(2);
    const SoftOutputs soft = make_soft(2, 3, 2, rng, 2, 3);
    LossWeights lo = weightless(), hi = weightless();
    hi.rho_1 = hi.rho_2 = 2.0;
    lo.rho_1 = lo.rho_2 = 1.0;
    CHECK(ct_loss(soft, label, hi).total() < ct_loss(soft, label, lo).total());
    CHECK(ct_loss(exact, label, hi).binarization_term == doctest::Approx(2.0 * (-0.25) * 10));

    LabeledSample bad = label;
    bad.feasible = false;
    CHECK_THROWS_AS(ct_loss(soft, bad, lo), InfeasibleLabel);

    SoftOutputs zero = exact;
    zero.power_probs[2] = 0.0;
    CHECK(std::isfinite(ct_loss(zero, label, lo).total()));
    CHECK(ct_loss(zero, label, weightless()).objective_term == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("fine-tuning loss")
{
    Rng rng(3);
    const SystemConfig c0 = small(2, 2, 3, 0.0);
    const ChannelSample s = generate_sample(c0, 4);
    const SoftOutputs soft = make_soft(2, 3, 2, rng);

    const auto zero_thr = ft_loss(soft, s, c0, LossWeights{}, Objective::SumSE);
    CHECK(zero_thr.qos_term == 0.0);

    const Allocation a{{0, 1}, {2, 1}};
    const SoftOutputs binary = SoftOutputs::one_hot(a, 3, 2);
    const auto plain = ft_loss(binary, s, c0, weightless(), Objective::SumSE);
    CHECK(plain.total() == doctest::Approx(-sum_se(s, a, c0)).epsilon(1e-12));
    const auto ee = ft_loss(binary, s, c0, weightless(), Objective::SumEE);
    CHECK(ee.total() == doctest::Approx(-sum_ee(s, a, c0)).epsilon(1e-12));

    // hinge: SE_thr = 1, delta = 1e-6, SE_0 = 0.5 gives 0.5 / 1.000001 per channel
    SystemConfig c1 = small(1, 1, 2, 1.0);
    c1.noise_psd_w_per_hz = 1e-20;
    const double target_sinr = std::pow(2.0, 0.5) - 1.0;
    const double noise = c1.noise_power();
    ChannelSample weak(1, 1, {target_sinr * noise / c1.p_cue_watts, 1e-9, 1e-9, 1e-8});
    const SoftOutputs idle = SoftOutputs::one_hot(Allocation::idle(1), 2, 1);
    LossWeights w = weightless();
    w.lambda_1 = 1.0;
    const auto hinge = ft_loss(idle, weak, c1, w, Objective::SumSE);
    CHECK(se_cue(weak, Allocation::idle(1), c1)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(hinge.qos_term == doctest::Approx(0.5 / 1.000001).epsilon(1e-12));
    CHECK(hinge.qos_term == doctest::Approx(0.4999995).epsilon(1e-9));

    const auto full = ft_loss(soft, s, small(2, 2, 3, 2.0), LossWeights{}, Objective::SumSE);
    CHECK(full.total() == doctest::Approx(full.objective_term + full.qos_term + full.binarization_term).epsilon(1e-12));
}

TEST_CASE("loss gradients with respect to the relaxed outputs")
{
    Rng rng(4);
    LabeledSample label;
    label.feasible = true;
    label.optimal = Allocation{{1, 0, 1}, {2, 0, 1}};
    for (int distributed = 0; distributed < 2; ++distributed) {
        const SoftOutputs soft = make_soft(3, 3, 2, rng, distributed ? 2 : 0, distributed ? 3 : 0);
        LossWeights w;
        w.rho_1 = 0.7;
        w.rho_2 = 1.3;
        w.lambda_2 = 0.4;
        w.lambda_3 = 0.9;
        w.kappa = 1.7;

        SoftOutputs g;
        ct_loss(soft, label, w, &g);
        check_soft_gradient(soft, g, [&](const SoftOutputs& x) { return ct_loss(x, label, w).total(); });

        for (double thr : {0.0, 2.0, 6.0})
            for (Objective o : {Objective::SumSE, Objective::SumEE}) {
                const SystemConfig c = small(3, 2, 3, thr);
                const ChannelSample s = generate_sample(c, 7);
                ft_loss(soft, s, c, w, o, &g);
                check_soft_gradient(soft, g, [&](const SoftOutputs& x) { return ft_loss(x, s, c, w, o).total(); });
            }
    }
}

TEST_CASE("weight validation")
{
    LossWeights w;
    CHECK_NOTHROW(w.validate());
    w.kappa = 0.0;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    w = LossWeights{};
    w.lambda_1 = -1.0;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    w = LossWeights{};
    w.delta_ft = 0.0;
    CHECK_THROWS_AS(w.validate(), ConfigError);
}
