#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rotor/angle.hpp"
#include "rotor/lattice.hpp"

namespace rotor {

// Ferromagnetic planar-rotor couplings: pair energy -beta*J*cos(x_i - x_j).
struct XYParams {
    double beta = 1.0;
    double J = 1.0;

    XYParams() = default;
    XYParams(double beta_, double J_) : beta(beta_), J(J_) {
        if (!(std::isfinite(beta) && std::isfinite(J)) || beta < 0.0 || J < 0.0)
            throw std::invalid_argument("XYParams: beta and J must be finite and >= 0");
    }

    double coupling() const { return beta * J; }
};

// Per-site field term -h_i * cos(x_i - y_i): energy is lowered when x_i
// aligns with the target y_i for h_i > 0.  Targets that are exactly 0 or pi
// are special-cased so the field energy reduces to -h_i * (+-cos x_i), an
// evaluation path that is exactly even under x -> -x.
struct FieldSpec {
    std::vector<double> h;
    std::vector<double> y;
    std::vector<int> axis_sign; // +1 for y = 0, -1 for y = pi, 0 otherwise

    FieldSpec() = default;
    FieldSpec(std::vector<double> h_, std::vector<double> y_)
        : h(std::move(h_)), y(std::move(y_)) {
        if (h.size() != y.size())
            throw std::invalid_argument("FieldSpec: h and y lengths differ");
        axis_sign.resize(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            axis_sign[i] = y[i] == 0.0 ? 1 : (y[i] == pi ? -1 : 0);
    }

    std::size_t size() const { return h.size(); }
    bool empty() const { return h.empty(); }

    double site_energy(int i, double x) const {
        if (axis_sign[i] != 0) return -h[i] * axis_sign[i] * cos_even(x);
        return -h[i] * std::cos(x - y[i]);
    }
};

namespace detail {
inline void check_fields(const SpinConfig& config, const FieldSpec* fields) {
    if (fields && !fields->empty() &&
        fields->size() != static_cast<std::size_t>(config.n_sites()))
        throw std::invalid_argument("field spec does not match lattice size");
}
} // namespace detail

// Total energy on the periodic torus:
//   H = -beta*J * sum_bonds cos(x_i - x_j) + sum_i field_i(x_i)
// with the multigraph bond convention (2 L^2 bonds, doubled pairs on L = 2).
inline double energy_total(const SpinConfig& config, const XYParams& params,
                           const FieldSpec* fields = nullptr) {
    detail::check_fields(config, fields);
    const double c = params.coupling();
    const LatticeShape& s = config.shape;
    double e = 0.0;
    for (int r = 0; r < s.side; ++r)
        for (int col = 0; col < s.side; ++col) {
            int i = s.index(r, col);
            e -= c * std::cos(config[i] - config[s.index(r, col + 1)]);
            e -= c * std::cos(config[i] - config[s.index(r + 1, col)]);
        }
    if (fields && !fields->empty())
        for (int i = 0; i < config.n_sites(); ++i)
            e += fields->site_energy(i, config[i]);
    return e;
}

// Energy change of moving one spin, from its four incident bonds (doubled on
// L = 2) and the local field only.
inline double energy_delta(const SpinConfig& config, int site, double new_angle,
                           const XYParams& params, const FieldSpec* fields = nullptr) {
    if (site < 0 || site >= config.n_sites())
        throw std::invalid_argument("energy_delta: site out of range");
    detail::check_fields(config, fields);
    const double c = params.coupling();
    const double old_angle = config[site];
    double d = 0.0;
    for (int nbr : config.shape.neighbors(site))
        d -= c * (std::cos(new_angle - config[nbr]) - std::cos(old_angle - config[nbr]));
    if (fields && !fields->empty())
        d += fields->site_energy(site, new_angle) - fields->site_energy(site, old_angle);
    return d;
}

// High-temperature uniqueness criterion for the nearest-neighbour pair
// interaction: the oscillation of -beta*J*cos over a pair is exactly 2*beta*J
// and each site sits in 2d pairs, so the sum is 4*d*beta*J and the condition
// is the strict bound 4*d*beta*J < 2.
struct DobrushinResult {
    double sum = 0.0;
    bool satisfied = false;
};

inline DobrushinResult dobrushin_sum(const XYParams& params, int dimension) {
    if (dimension < 1) throw std::invalid_argument("dobrushin_sum: dimension must be >= 1");
    DobrushinResult r;
    r.sum = 4.0 * dimension * params.coupling();
    r.satisfied = r.sum < 2.0;
    return r;
}

// Energy attached to one dual-lattice site (elementary plaquette): half of
// each of the four interior bonds plus a quarter of each corner's field term.
// Summing over all L^2 plaquettes reproduces energy_total exactly, because
// every bond lies in two plaquettes and every site in four.
inline double plaquette_energy(const SpinConfig& config, int dual_site,
                               const XYParams& params, const FieldSpec* fields = nullptr) {
    if (dual_site < 0 || dual_site >= config.n_sites())
        throw std::invalid_argument("plaquette_energy: dual site out of range");
    detail::check_fields(config, fields);
    const LatticeShape& s = config.shape;
    const int r = s.row(dual_site), c = s.col(dual_site);
    const int a = s.index(r, c);
    const int b = s.index(r, c + 1);
    const int d = s.index(r + 1, c);
    const int e = s.index(r + 1, c + 1);
    const double cpl = params.coupling();
    double bonds = -cpl * (std::cos(config[a] - config[b]) + std::cos(config[a] - config[d]) +
                           std::cos(config[b] - config[e]) + std::cos(config[d] - config[e]));
    double corners = 0.0;
    if (fields && !fields->empty())
        corners = fields->site_energy(a, config[a]) + fields->site_energy(b, config[b]) +
                  fields->site_energy(d, config[d]) + fields->site_energy(e, config[e]);
    return 0.5 * bonds + 0.25 * corners;
}

// Generic bond-list model used by the sampler and the small-volume quadrature
// oracle: energy = -sum_bonds coupling*cos(x_i - x_j) + sum_i field_i(x_i).
// Covers both the periodic torus and ad-hoc test systems (chains, single
// sites).
struct CouplingModel {
    struct Bond {
        int i, j;
        double coupling;
    };

    int n_sites = 0;
    std::vector<Bond> bonds;
    FieldSpec fields; // empty = no fields
    std::vector<std::vector<std::pair<int, double>>> adjacency;

    CouplingModel() = default;
    CouplingModel(int n, std::vector<Bond> bonds_, FieldSpec fields_ = {})
        : n_sites(n), bonds(std::move(bonds_)), fields(std::move(fields_)) {
        if (!fields.empty() && fields.size() != static_cast<std::size_t>(n))
            throw std::invalid_argument("CouplingModel: field spec size mismatch");
        adjacency.resize(n);
        for (const Bond& b : bonds) {
            if (b.i < 0 || b.i >= n || b.j < 0 || b.j >= n)
                throw std::invalid_argument("CouplingModel: bond site out of range");
            adjacency[b.i].emplace_back(b.j, b.coupling);
            adjacency[b.j].emplace_back(b.i, b.coupling);
        }
    }

    double energy(const std::vector<double>& x) const {
        double e = 0.0;
        for (const Bond& b : bonds) e -= b.coupling * cos_even(x[b.i] - x[b.j]);
        if (!fields.empty())
            for (int i = 0; i < n_sites; ++i) e += fields.site_energy(i, x[i]);
        return e;
    }

    // Energy change of the single-site move x[site] -> x_new.
    double local_delta(const std::vector<double>& x, int site, double x_new) const {
        double d = 0.0;
        for (auto [nbr, c] : adjacency[site])
            d -= c * (cos_even(x_new - x[nbr]) - cos_even(x[site] - x[nbr]));
        if (!fields.empty())
            d += fields.site_energy(site, x_new) - fields.site_energy(site, x[site]);
        return d;
    }
};

inline CouplingModel make_torus_model(const LatticeShape& shape, const XYParams& params,
                                      FieldSpec fields = {}) {
    std::vector<CouplingModel::Bond> bonds;
    bonds.reserve(2 * shape.n_sites());
    for (auto [i, j] : lattice_edges(shape)) bonds.push_back({i, j, params.coupling()});
    return CouplingModel(shape.n_sites(), std::move(bonds), std::move(fields));
}

} // namespace rotor
