#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "rotor/conditioned_model.hpp"
#include "rotor/gibbs_sampler.hpp"
#include "rotor/rng.hpp"
#include "rotor/stats.hpp"

#include "oracles.hpp"

using namespace rotor;

namespace {

// open 2-site chain: one bond, optional site fields
CouplingModel two_site_chain(double coupling, double h = 0.0, double y0 = 0.0, double y1 = 0.0) {
    std::vector<CouplingModel::Bond> bonds{{0, 1, coupling}};
    if (h == 0.0) return CouplingModel(2, std::move(bonds));
    return CouplingModel(2, std::move(bonds), FieldSpec({h, h}, {y0, y1}));
}

struct ChainStats {
    MeanErr sin0, cos0, pair;
};

ChainStats sample_two_site(const CouplingModel& model, long sweeps, std::uint64_t seed) {
    std::vector<double> w{0.3, -0.4};
    Rng rng(seed);
    std::vector<double> s0, c0, cp;
    s0.reserve(sweeps);
    for (long k = 0; k < sweeps; ++k) {
        detail::sweep_signed(w, model, 1.2, rng);
        if (k < sweeps / 10) continue; // burn-in
        s0.push_back(std::sin(w[0]));
        c0.push_back(std::cos(w[0]));
        cp.push_back(std::cos(w[0] - w[1]));
    }
    return {batch_means(s0, 100), batch_means(c0, 100), batch_means(cp, 100)};
}

} // namespace

TEST_CASE("sampler config validation") {
    SamplerConfig bad;
    bad.sweeps = 10;
    bad.burn_in = 20;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SamplerConfig{};
    bad.proposal_width = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SamplerConfig{};
    bad.proposal_width = 4.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("metropolis sweep: free model accepts everything and stays uniform") {
    LatticeShape s(4);
    CouplingModel model = make_torus_model(s, XYParams(0.0, 1.0));
    SpinConfig config(s, 1.0);
    Rng rng(401);
    std::vector<double> site0;
    for (int sweep = 0; sweep < 4000; ++sweep) {
        double acc = metropolis_sweep(config, model, 0.8, rng);
        CHECK(acc == 1.0);
        for (int i = 0; i < s.n_sites(); ++i) {
            CHECK(config[i] >= 0.0);
            CHECK(config[i] < two_pi);
        }
        if (sweep >= 500) site0.push_back(config[0]);
    }
    double ks = ks_statistic(std::move(site0), [](double x) { return x / two_pi; });
    // samples are weakly correlated between sweeps; the band is loose
    CHECK(ks <= 3.0 * ks_critical(3500, 0.01));
}

TEST_CASE("two-site chain matches the quadrature oracle") {
    for (double bj : {0.5, 1.0, 2.0}) {
        CouplingModel model = two_site_chain(bj);
        ExpectationTable exact = exact_small_volume(model, 64);
        ChainStats mc = sample_two_site(model, 400000, 412);
        CHECK(std::fabs(mc.pair.mean - exact.cos_pair[0][1]) <= 3.0 * mc.pair.stderr_);
        CHECK(std::fabs(mc.sin0.mean - exact.sin_mean[0]) <= 3.0 * mc.sin0.stderr_);
        CHECK(std::fabs(mc.cos0.mean - exact.cos_mean[0]) <= 3.0 * mc.cos0.stderr_);
    }
    // with alternating-target style fields
    for (double bj : {0.5, 2.0}) {
        CouplingModel model = two_site_chain(bj, 0.27, 0.0, pi);
        ExpectationTable exact = exact_small_volume(model, 64);
        ChainStats mc = sample_two_site(model, 400000, 413);
        CHECK(std::fabs(mc.pair.mean - exact.cos_pair[0][1]) <= 3.0 * mc.pair.stderr_);
        CHECK(std::fabs(mc.cos0.mean - exact.cos_mean[0]) <= 3.0 * mc.cos0.stderr_);
    }
}

TEST_CASE("strong coupling keeps the chain inside the starting basin") {
    // beta*J = 200 is the near-deterministic proxy: spin-wave fluctuations
    // (~ sqrt(G/betaJ)) and the slow collective phase drift both stay well
    // under 0.2 rad over this window.  At beta*J = 20 the free global
    // rotation already wanders too far for a pointwise 0.2 rad statement.
    LatticeShape s(8);
    ConditionedParams p(200.0, 1.0, 2.0);
    GroundStatePair g = ground_states(p, s);
    CouplingModel model = make_torus_model(s, p.xy(), make_yspec_fields(s, p));
    SpinConfig config = g.x_ri;
    Rng rng(404);
    for (int sweep = 0; sweep < 1000; ++sweep) metropolis_sweep(config, model, 0.05, rng);
    for (int i = 0; i < s.n_sites(); ++i)
        CHECK(circular_distance(config[i], g.x_ri[i]) < 0.2);
}

TEST_CASE("run_chain: empty series and bit-identical reruns") {
    LatticeShape s(4);
    ConditionedParams p(1.0, 1.0, 2.0);
    CouplingModel model = make_torus_model(s, p.xy(), make_yspec_fields(s, p));
    SpinConfig init(s, 1.0);

    SamplerConfig cfg;
    cfg.sweeps = 50;
    cfg.burn_in = 50;
    cfg.seed = 9;
    CHECK(run_chain(init, model, cfg).samples.empty());

    cfg.sweeps = 300;
    cfg.burn_in = 100;
    cfg.thin = 3;
    ObservableSeries a = run_chain(init, model, cfg);
    ObservableSeries b = run_chain(init, model, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    REQUIRE(!a.samples.empty());
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        CHECK(a.samples[k].m_lr == b.samples[k].m_lr);
        CHECK(a.samples[k].m_ud == b.samples[k].m_ud);
        CHECK(a.samples[k].energy == b.samples[k].energy);
        CHECK(a.samples[k].acc == b.samples[k].acc);
        CHECK(a.samples[k].acc >= 0.0);
        CHECK(a.samples[k].acc <= 1.0);
    }
}

TEST_CASE("mirrored chain negates the left-right order parameter bit-exactly") {
    LatticeShape s(4);
    ConditionedParams p(2.0, 1.0, 2.0);
    CouplingModel model = make_torus_model(s, p.xy(), make_yspec_fields(s, p));

    // initial angles on a coarse grid so the mirrored start is exact
    Rng rng(405);
    SpinConfig init(s), mirrored(s);
    for (int i = 0; i < s.n_sites(); ++i) {
        double w = std::floor(rng.uniform(-pi, pi) * 1048576.0) / 1048576.0;
        init[i] = from_signed(w);
        mirrored[i] = from_signed(-w);
    }

    SamplerConfig cfg;
    cfg.sweeps = 200;
    cfg.burn_in = 0;
    cfg.seed = 406;
    ObservableSeries chain = run_chain(init, model, cfg);
    cfg.mirror_proposals = true;
    ObservableSeries image = run_chain(mirrored, model, cfg);
    REQUIRE(chain.samples.size() == image.samples.size());
    for (std::size_t k = 0; k < chain.samples.size(); ++k) {
        double neg = -chain.samples[k].m_lr;
        CHECK(std::memcmp(&neg, &image.samples[k].m_lr, sizeof neg) == 0);
        CHECK(chain.samples[k].m_ud == image.samples[k].m_ud);
        CHECK(chain.samples[k].energy == image.samples[k].energy);
        CHECK(chain.samples[k].acc == image.samples[k].acc);
    }
}

TEST_CASE("exact_small_volume: free, single-site, and symmetric cases") {
    // free measure: everything uniform
    CouplingModel free_model = two_site_chain(0.0);
    ExpectationTable t0 = exact_small_volume(free_model, 64);
    CHECK(std::fabs(t0.sin_mean[0]) <= 1e-10);
    CHECK(std::fabs(t0.sin_mean[1]) <= 1e-10);
    CHECK(std::fabs(t0.cos_pair[0][1]) <= 1e-10);
    CHECK(t0.Z == doctest::Approx(two_pi * two_pi).epsilon(1e-12));

    // single site in a unit field: Bessel ratio
    CouplingModel single(1, {}, FieldSpec({1.0}, {0.0}));
    ExpectationTable t1 = exact_small_volume(single, 64);
    double bessel = oracle::bessel_i1(1.0) / oracle::bessel_i0(1.0);
    CHECK(bessel == doctest::Approx(0.4463900).epsilon(1e-6));
    CHECK(t1.cos_mean[0] == doctest::Approx(bessel).epsilon(1e-10));
    CHECK(std::fabs(t1.sin_mean[0]) <= 1e-12);

    // alternating-target fields keep <sin> at zero by reflection symmetry
    LatticeShape s2(2);
    ConditionedParams p(1.0, 1.0, 2.0);
    CouplingModel torus = make_torus_model(s2, p.xy(), make_yspec_fields(s2, p));
    ExpectationTable t2 = exact_small_volume(torus, 24);
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(t2.sin_mean[i]) <= 1e-12);

    // partition function against a half-resolution Riemann sum
    CouplingModel pair_model = two_site_chain(1.3, 0.4, 0.0, pi);
    ExpectationTable t3 = exact_small_volume(pair_model, 64);
    int n = 32;
    double z = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<double> x{i * two_pi / n, j * two_pi / n};
            z += std::exp(-pair_model.energy(x));
        }
    z *= (two_pi / n) * (two_pi / n);
    CHECK(t3.Z == doctest::Approx(z).epsilon(1e-6));

    CouplingModel too_big(5, {});
    CHECK_THROWS_AS(exact_small_volume(too_big, 16), std::invalid_argument);
    CHECK_THROWS_AS(exact_small_volume(single, 65), std::invalid_argument);
}

TEST_CASE("chessboard check: constant functions saturate the inequality") {
    LatticeShape s(2);
    ConditionedParams p(1.0, 1.0, 2.0);
    FieldSpec fields = make_yspec_fields(s, p);

    std::vector<PlaquetteFn> ones(4, [](const std::array<double, 4>&) { return 1.0; });
    ChessboardResult r = chessboard_check(ones, s, p.xy(), fields, 12);
    CHECK(r.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.holds);

    std::vector<PlaquetteFn> constant(4, [](const std::array<double, 4>&) { return 2.5; });
    r = chessboard_check(constant, s, p.xy(), fields, 12);
    CHECK(r.lhs == doctest::Approx(std::pow(2.5, 4)).epsilon(1e-12));
    CHECK(r.rhs == doctest::Approx(std::pow(2.5, 4)).epsilon(1e-12));
}

TEST_CASE("chessboard check: random invariant functions satisfy the inequality") {
    LatticeShape s(2);
    Rng rng(407);
    for (double bj : {0.5, 5.0}) {
        ConditionedParams p(bj, 1.0, 2.0);
        FieldSpec fields = make_yspec_fields(s, p);
        for (int rep = 0; rep < 4; ++rep) {
            std::vector<PlaquetteFn> f_set;
            for (int a = 0; a < 4; ++a) f_set.push_back(random_invariant_plaquette_fn(rng));
            ChessboardResult r = chessboard_check(f_set, s, p.xy(), fields, 12);
            CHECK(r.holds);
        }
    }
}

TEST_CASE("chessboard check: non-invariant input is rejected") {
    LatticeShape s(2);
    ConditionedParams p(1.0, 1.0, 2.0);
    FieldSpec fields = make_yspec_fields(s, p);
    std::vector<PlaquetteFn> bad(4, [](const std::array<double, 4>& x) { return 1.0 + x[0]; });
    CHECK_THROWS_AS(chessboard_check(bad, s, p.xy(), fields, 8), std::invalid_argument);
}

TEST_CASE("boundary probe: frozen rings select the phase at strong coupling") {
    ConditionedParams p(200.0, 1.0, 2.0);
    SamplerConfig cfg;
    cfg.sweeps = 2000;
    cfg.burn_in = 400;
    cfg.proposal_width = 0.1;
    cfg.seed = 408;
    std::vector<BadProbeRow> rows = bad_config_probe({8}, p, 0.5 * pi, 1.5 * pi, cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].gap >= 1.5);
    // the two ring values are reflections of each other
    CHECK(std::fabs(rows[0].mean_xi + rows[0].mean_eta) <=
          3.0 * std::sqrt(rows[0].err_xi * rows[0].err_xi + rows[0].err_eta * rows[0].err_eta) +
              0.02);
}

TEST_CASE("boundary probe: weak coupling forgets the ring") {
    ConditionedParams p(0.1, 1.0, 2.0);
    SamplerConfig cfg;
    cfg.sweeps = 4000;
    cfg.burn_in = 500;
    cfg.proposal_width = 1.5;
    cfg.seed = 409;
    std::vector<BadProbeRow> rows = bad_config_probe({16}, p, 0.5 * pi, 1.5 * pi, cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].gap <= 0.1 + 3.0 * rows[0].gap_err);
}
