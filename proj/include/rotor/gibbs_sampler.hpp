#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rotor/angle.hpp"
#include "rotor/conditioned_model.hpp"
#include "rotor/lattice.hpp"
#include "rotor/quadrature.hpp"
#include "rotor/rng.hpp"
#include "rotor/rotor_model.hpp"
#include "rotor/stats.hpp"

namespace rotor {

struct SamplerConfig {
    long sweeps = 1000;
    long burn_in = 0;
    double proposal_width = 0.5; // radians, in (0, pi]
    std::uint64_t seed = 1;
    int thin = 1;
    // Adapt the width during burn-in toward 40-60% acceptance (frozen once
    // burn-in ends).  Deterministic, so reproducibility is unaffected.
    bool tune_width = false;
    // Negate every proposal increment.  Together with a mirrored initial
    // state this makes the chain the exact left-right reflection of the
    // unmirrored one (used by the symmetry self-test).
    bool mirror_proposals = false;

    void validate() const {
        if (sweeps < 0 || burn_in < 0 || sweeps < burn_in)
            throw std::invalid_argument("SamplerConfig: need sweeps >= burn_in >= 0");
        if (!(proposal_width > 0.0) || proposal_width > pi)
            throw std::invalid_argument("SamplerConfig: proposal width must be in (0, pi]");
        if (thin < 1) throw std::invalid_argument("SamplerConfig: thin must be >= 1");
    }
};

struct ObservableSample {
    long sweep = 0;
    double m_lr = 0.0;   // (1/N) sum_i sin x_i
    double m_ud = 0.0;   // (1/N) sum_i (-1)^{parity} cos x_i
    double energy = 0.0;
    double acc = 0.0;    // acceptance fraction of the sweep
};

struct ObservableSeries {
    std::vector<ObservableSample> samples;
};

// The chain state is kept in the signed representation (-pi, pi], where the
// left-right mirror is exact floating-point negation.  The conversion from
// [0, 2pi) is exact (Sterbenz), and so is its inverse on converted values.
inline double to_signed(double a) { return a > pi ? a - two_pi : a; }

inline double from_signed(double w) {
    double a = w < 0.0 ? w + two_pi : w;
    if (a >= two_pi) a = 0.0;
    return a;
}

namespace detail {

inline double wrap_signed_step(double c) {
    if (c > pi) return c - two_pi;
    if (c <= -pi) return c + two_pi;
    return c;
}

// One full sweep in fixed site order over the signed state.  Proposals are
// uniform increments of half-width `width`; acceptance is the Metropolis rule
// for the model's Gibbs weight e^{-H} (inverse temperature inside H).  The
// uniform for the accept decision is always drawn, so the rng stream position
// does not depend on the state.
inline double sweep_signed(std::vector<double>& w, const CouplingModel& model, double width,
                           Rng& rng, bool mirror = false,
                           const std::vector<char>* frozen = nullptr) {
    long accepted = 0, attempted = 0;
    for (int site = 0; site < model.n_sites; ++site) {
        if (frozen && (*frozen)[site]) continue;
        double u = rng.uniform(-width, width);
        if (mirror) u = -u;
        double cand = wrap_signed_step(w[site] + u);
        double dh = model.local_delta(w, site, cand);
        double r = rng.uniform();
        ++attempted;
        if (dh <= 0.0 || r < std::exp(-dh)) {
            w[site] = cand;
            ++accepted;
        }
    }
    return attempted ? static_cast<double>(accepted) / attempted : 0.0;
}

// Width adaptation used during burn-in: nudge toward the 40-60% acceptance
// window every `interval` sweeps.
struct WidthTuner {
    double width;
    int interval = 50;
    double acc_sum = 0.0;
    int count = 0;

    explicit WidthTuner(double w) : width(w) {}

    void observe(double acc) {
        acc_sum += acc;
        if (++count < interval) return;
        double mean = acc_sum / count;
        if (mean < 0.4) width = std::max(1e-3, width * 0.8);
        else if (mean > 0.6) width = std::min(pi, width * 1.25);
        acc_sum = 0.0;
        count = 0;
    }
};

} // namespace detail

// One Metropolis sweep over a configuration in [0, 2pi).  Returns the
// acceptance fraction.
inline double metropolis_sweep(SpinConfig& config, const CouplingModel& model, double width,
                               Rng& rng, const std::vector<char>* frozen = nullptr) {
    if (config.n_sites() != model.n_sites)
        throw std::invalid_argument("metropolis_sweep: config does not match model");
    std::vector<double> w(config.angles.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = to_signed(config.angles[i]);
    double acc = detail::sweep_signed(w, model, width, rng, false, frozen);
    for (std::size_t i = 0; i < w.size(); ++i) config.angles[i] = from_signed(w[i]);
    return acc;
}

// Run a chain on the torus model and record the observable series after
// burn-in, one record per `thin` sweeps.  Deterministic given the seed.
inline ObservableSeries run_chain(const SpinConfig& initial, const CouplingModel& model,
                                  const SamplerConfig& cfg,
                                  const std::vector<char>* frozen = nullptr) {
    cfg.validate();
    if (initial.n_sites() != model.n_sites)
        throw std::invalid_argument("run_chain: config does not match model");
    const LatticeShape& shape = initial.shape;
    std::vector<double> w(initial.angles.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = to_signed(initial.angles[i]);
    Rng rng(cfg.seed);
    ObservableSeries series;
    detail::WidthTuner tuner(cfg.proposal_width);
    const double inv_n = 1.0 / model.n_sites;
    for (long sweep = 0; sweep < cfg.sweeps; ++sweep) {
        double acc = detail::sweep_signed(w, model, tuner.width, rng,
                                          cfg.mirror_proposals, frozen);
        if (cfg.tune_width && sweep < cfg.burn_in) tuner.observe(acc);
        if (sweep < cfg.burn_in || (sweep - cfg.burn_in) % cfg.thin != 0) continue;
        ObservableSample s;
        s.sweep = sweep;
        double lr = 0.0, ud = 0.0;
        for (int i = 0; i < model.n_sites; ++i) {
            lr += sin_odd(w[i]);
            ud += shape.parity_sign(i) * cos_even(w[i]);
        }
        s.m_lr = lr * inv_n;
        s.m_ud = ud * inv_n;
        s.energy = model.energy(w);
        s.acc = acc;
        series.samples.push_back(s);
    }
    return series;
}

// Run a chain and collect configuration snapshots: one every `stride` sweeps
// after burn-in.  Used by the percolation analysis.
inline std::vector<SpinConfig> run_chain_states(const SpinConfig& initial,
                                                const CouplingModel& model,
                                                const SamplerConfig& cfg, long stride,
                                                const std::vector<char>* frozen = nullptr) {
    cfg.validate();
    if (stride < 1) throw std::invalid_argument("run_chain_states: stride must be >= 1");
    std::vector<double> w(initial.angles.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = to_signed(initial.angles[i]);
    Rng rng(cfg.seed);
    detail::WidthTuner tuner(cfg.proposal_width);
    std::vector<SpinConfig> snapshots;
    for (long sweep = 0; sweep < cfg.sweeps; ++sweep) {
        double acc = detail::sweep_signed(w, model, tuner.width, rng,
                                          cfg.mirror_proposals, frozen);
        if (cfg.tune_width && sweep < cfg.burn_in) tuner.observe(acc);
        if (sweep < cfg.burn_in || (sweep - cfg.burn_in) % stride != 0) continue;
        SpinConfig snap = initial;
        for (std::size_t i = 0; i < w.size(); ++i) snap.angles[i] = from_signed(w[i]);
        snapshots.push_back(std::move(snap));
    }
    return snapshots;
}

// ---------------------------------------------------------------------------
// Exact small-volume quadrature oracle
// ---------------------------------------------------------------------------

struct ExpectationTable {
    double Z = 0.0;
    std::vector<double> sin_mean;
    std::vector<double> cos_mean;
    std::vector<std::vector<double>> cos_pair; // <cos(x_i - x_j)>
};

// Tensor-product midpoint quadrature of <f> = int f e^{-H} / Z over
// [0, 2pi)^sites for f in {sin x_i, cos x_i, cos(x_i - x_j)}.  Cost is
// n_grid^sites, hence the hard caps.
inline ExpectationTable exact_small_volume(const CouplingModel& model, int n_grid) {
    const int n = model.n_sites;
    if (n < 1 || n > 4)
        throw std::invalid_argument("exact_small_volume: supports 1..4 sites only");
    if (n_grid < 2 || n_grid > 64)
        throw std::invalid_argument("exact_small_volume: n_grid must be in [2, 64]");
    QuadratureRule rule = midpoint_rule(n_grid, 0.0, two_pi);
    ExpectationTable table;
    table.sin_mean.assign(n, 0.0);
    table.cos_mean.assign(n, 0.0);
    table.cos_pair.assign(n, std::vector<double>(n, 0.0));
    std::vector<int> k(n, 0);
    std::vector<double> x(n, 0.0);
    double volume_element = 1.0;
    for (int i = 0; i < n; ++i) volume_element *= rule.weights[0];
    double z = 0.0;
    while (true) {
        for (int i = 0; i < n; ++i) x[i] = rule.nodes[k[i]];
        double weight = std::exp(-model.energy(x));
        z += weight;
        for (int i = 0; i < n; ++i) {
            table.sin_mean[i] += weight * std::sin(x[i]);
            table.cos_mean[i] += weight * std::cos(x[i]);
            for (int j = i + 1; j < n; ++j)
                table.cos_pair[i][j] += weight * std::cos(x[i] - x[j]);
        }
        int d = 0;
        while (d < n && ++k[d] == n_grid) k[d++] = 0;
        if (d == n) break;
    }
    if (!(z > 0.0)) throw std::domain_error("exact_small_volume: partition function <= 0");
    for (int i = 0; i < n; ++i) {
        table.sin_mean[i] /= z;
        table.cos_mean[i] /= z;
        table.cos_pair[i][i] = 1.0;
        for (int j = i + 1; j < n; ++j) {
            table.cos_pair[i][j] /= z;
            table.cos_pair[j][i] = table.cos_pair[i][j];
        }
    }
    table.Z = z * volume_element;
    return table;
}

// ---------------------------------------------------------------------------
// Chessboard estimate check on the 2x2 torus
// ---------------------------------------------------------------------------

// Nonnegative function of the four plaquette corners, in the fixed order
// (base, right, down, down-right).
using PlaquetteFn = std::function<double(const std::array<double, 4>&)>;

struct ChessboardResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

namespace detail {

inline std::array<double, 4> reflect_corners_vertical(const std::array<double, 4>& c) {
    return {c[1], c[0], c[3], c[2]};
}
inline std::array<double, 4> reflect_corners_horizontal(const std::array<double, 4>& c) {
    return {c[2], c[3], c[0], c[1]};
}

} // namespace detail

// Full-quadrature verification of the chessboard inequality
//   int prod_a f_a(x_a) dnu <= prod_a [ int prod_b f_a(x_b) dnu ]^{1/|Lambda|}
// for the periodic 2x2 torus Gibbs measure of (params, fields).  Each f_a
// must be invariant under the two reflections of the elementary cube; this is
// verified by sampling before any integration.
inline ChessboardResult chessboard_check(const std::vector<PlaquetteFn>& f_set,
                                         const LatticeShape& shape, const XYParams& params,
                                         const FieldSpec& fields, int n_grid) {
    if (shape.side != 2)
        throw std::invalid_argument("chessboard_check: 2x2 torus only");
    if (f_set.size() != 4)
        throw std::invalid_argument("chessboard_check: need one function per dual site");
    Rng check_rng(0x5bd1e995);
    for (const PlaquetteFn& f : f_set)
        for (int trial = 0; trial < 100; ++trial) {
            std::array<double, 4> x;
            for (double& a : x) a = check_rng.uniform(0.0, two_pi);
            double v = f(x);
            if (std::fabs(v - f(detail::reflect_corners_vertical(x))) > 1e-9 ||
                std::fabs(v - f(detail::reflect_corners_horizontal(x))) > 1e-9)
                throw std::invalid_argument(
                    "chessboard_check: function is not reflection invariant");
        }

    CouplingModel model = make_torus_model(shape, params, fields);
    // corner site indices per dual site, in the canonical order
    std::array<std::array<int, 4>, 4> corners;
    for (int a = 0; a < 4; ++a) {
        int r = shape.row(a), c = shape.col(a);
        corners[a] = {shape.index(r, c), shape.index(r, c + 1), shape.index(r + 1, c),
                      shape.index(r + 1, c + 1)};
    }
    QuadratureRule rule = midpoint_rule(n_grid, 0.0, two_pi);
    double z = 0.0, lhs_raw = 0.0;
    std::array<double, 4> homog_raw = {0.0, 0.0, 0.0, 0.0};
    std::array<int, 4> k = {0, 0, 0, 0};
    std::vector<double> x(4, 0.0);
    while (true) {
        for (int i = 0; i < 4; ++i) x[i] = rule.nodes[k[i]];
        double weight = std::exp(-model.energy(x));
        z += weight;
        std::array<std::array<double, 4>, 4> tuples;
        for (int a = 0; a < 4; ++a)
            for (int q = 0; q < 4; ++q) tuples[a][q] = x[corners[a][q]];
        double prod = 1.0;
        for (int a = 0; a < 4; ++a) prod *= f_set[a](tuples[a]);
        lhs_raw += weight * prod;
        for (int a = 0; a < 4; ++a) {
            double hp = 1.0;
            for (int b = 0; b < 4; ++b) hp *= f_set[a](tuples[b]);
            homog_raw[a] += weight * hp;
        }
        int d = 0;
        while (d < 4 && ++k[d] == n_grid) k[d++] = 0;
        if (d == 4) break;
    }
    ChessboardResult result;
    result.lhs = lhs_raw / z;
    result.rhs = 1.0;
    for (int a = 0; a < 4; ++a) result.rhs *= std::pow(homog_raw[a] / z, 0.25);
    result.holds = result.lhs <= result.rhs + 1e-9;
    return result;
}

// Random reflection-invariant plaquette function: a trigonometric polynomial
// of degree <= 2, symmetrized over the cube reflections and shifted strictly
// positive.
inline PlaquetteFn random_invariant_plaquette_fn(Rng& rng) {
    struct Term {
        int kind;   // 0: cos(k x_p + phase), 1: cos(x_p - x_q + phase)
        int p, q, freq;
        double coeff, phase;
    };
    std::vector<Term> terms;
    double coeff_sum = 0.0;
    for (int m = 0; m < 4; ++m) {
        Term t;
        t.kind = rng.uniform() < 0.5 ? 0 : 1;
        t.p = static_cast<int>(rng.uniform() * 4) & 3;
        t.q = static_cast<int>(rng.uniform() * 4) & 3;
        t.freq = rng.uniform() < 0.5 ? 1 : 2;
        t.coeff = rng.uniform(-1.0, 1.0);
        t.phase = rng.uniform(0.0, two_pi);
        coeff_sum += std::fabs(t.coeff);
        terms.push_back(t);
    }
    double shift = coeff_sum + 0.1;
    return [terms, shift](const std::array<double, 4>& x) {
        auto eval = [&](const std::array<double, 4>& c) {
            double g = 0.0;
            for (const auto& t : terms)
                g += t.kind == 0 ? t.coeff * std::cos(t.freq * c[t.p] + t.phase)
                                 : t.coeff * std::cos(c[t.p] - c[t.q] + t.phase);
            return g;
        };
        std::array<double, 4> r1 = detail::reflect_corners_vertical(x);
        std::array<double, 4> r2 = detail::reflect_corners_horizontal(x);
        std::array<double, 4> r12 = detail::reflect_corners_horizontal(r1);
        return shift + 0.25 * (eval(x) + eval(r1) + eval(r2) + eval(r12));
    };
}

// ---------------------------------------------------------------------------
// Boundary-sensitivity probe
// ---------------------------------------------------------------------------

struct BadProbeRow {
    int L = 0;
    double mean_xi = 0.0, err_xi = 0.0;
    double mean_eta = 0.0, err_eta = 0.0;
    double gap = 0.0, gap_err = 0.0;
};

// Sample the conditioned time-zero model on an L x L box whose outer ring of
// sites is frozen to the ring angle (xi, then eta); the bulk carries the
// alternating-target fields.  Records <sin x_center> for both rings.  A gap
// that stays away from zero as L grows is the finite-volume signature of an
// essential discontinuity in the conditional probabilities.
inline std::vector<BadProbeRow> bad_config_probe(const std::vector<int>& L_list,
                                                 const ConditionedParams& p, double xi_angle,
                                                 double eta_angle, const SamplerConfig& base) {
    base.validate();
    std::vector<BadProbeRow> rows;
    int stream = 0;
    for (int L : L_list) {
        LatticeShape shape(L);
        FieldSpec fields = make_yspec_fields(shape, p);
        CouplingModel model = make_torus_model(shape, p.xy(), fields);
        std::vector<char> frozen(shape.n_sites(), 0);
        for (int i = 0; i < shape.n_sites(); ++i) {
            int r = shape.row(i), c = shape.col(i);
            if (r == 0 || r == L - 1 || c == 0 || c == L - 1) frozen[i] = 1;
        }
        const int center = shape.index(L / 2, L / 2);
        BadProbeRow row;
        row.L = L;
        for (int which = 0; which < 2; ++which) {
            double ring = which == 0 ? xi_angle : eta_angle;
            std::vector<double> w(shape.n_sites(), to_signed(wrap_angle(ring)));
            Rng rng = Rng::stream(base.seed, static_cast<std::uint64_t>(stream++));
            std::vector<double> sin_center;
            sin_center.reserve(base.sweeps - base.burn_in);
            for (long sweep = 0; sweep < base.sweeps; ++sweep) {
                detail::sweep_signed(w, model, base.proposal_width, rng, false, &frozen);
                if (sweep >= base.burn_in) sin_center.push_back(sin_odd(w[center]));
            }
            MeanErr me = batch_means(sin_center);
            if (which == 0) {
                row.mean_xi = me.mean;
                row.err_xi = me.stderr_;
            } else {
                row.mean_eta = me.mean;
                row.err_eta = me.stderr_;
            }
        }
        row.gap = std::fabs(row.mean_xi - row.mean_eta);
        row.gap_err = std::sqrt(row.err_xi * row.err_xi + row.err_eta * row.err_eta);
        rows.push_back(row);
    }
    return rows;
}

} // namespace rotor
