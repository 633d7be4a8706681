#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotor/angle.hpp"
#include "rotor/circle_kernel.hpp"
#include "rotor/lattice.hpp"
#include "rotor/rng.hpp"

namespace rotor {

// Uniform time grid on [0, t_final]; dt is derived, so n_steps * dt recovers
// t_final exactly in this representation.
struct PathGrid {
    double t_final = 1.0;
    int n_steps = 100;

    PathGrid() = default;
    PathGrid(double t, int n) : t_final(t), n_steps(n) {
        if (!(t > 0.0) || n < 1)
            throw std::invalid_argument("PathGrid: need t_final > 0 and n_steps >= 1");
    }

    double dt() const { return t_final / n_steps; }
};

struct Trajectory {
    PathGrid grid;
    std::vector<SpinConfig> states; // n_steps + 1 entries, angles wrapped
};

// Drift of the coupled diffusions.  In interacting mode
//   b_i = -U'(x_i) - beta*J * sum_{j~i} sin(x_i - x_j),
// the clock convention being diffusion coefficient sqrt(2) (generator d^2),
// which matches the kernel's Fourier decay e^{-n^2 t}.  decoupled mode zeroes
// the drift at one marked site, free mode zeroes it everywhere.
struct DriftSpec {
    enum class Mode { free_motion, interacting, decoupled };

    Mode mode = Mode::free_motion;
    double beta = 0.0;
    double J = 0.0;
    std::function<double(double)> u_prime; // single-site drift; may be empty
    int decoupled_site = -1;

    static DriftSpec free_motion_spec() { return {}; }

    static DriftSpec interacting_spec(double beta, double J,
                                      std::function<double(double)> u_prime = {}) {
        DriftSpec d;
        d.mode = Mode::interacting;
        d.beta = beta;
        d.J = J;
        d.u_prime = std::move(u_prime);
        return d;
    }

    static DriftSpec decoupled_spec(double beta, double J, int site,
                                    std::function<double(double)> u_prime = {}) {
        DriftSpec d = interacting_spec(beta, J, std::move(u_prime));
        d.mode = Mode::decoupled;
        d.decoupled_site = site;
        return d;
    }
};

// Euler-Maruyama step rule X(s+dt) = X(s) + b(X(s)) dt + sqrt(2 dt) xi, with
// independent standard Gaussians per site, wrapped to [0, 2pi).  Free-mode
// increments are exact (no discretization error) since the drift vanishes.
inline Trajectory integrate_sde(const SpinConfig& initial, const DriftSpec& drift,
                                const PathGrid& grid, Rng& rng) {
    // free-mode increments are exact at any step; with drift the weak error
    // is O(dt), so a coarse grid deserves a note
    bool has_drift = drift.mode != DriftSpec::Mode::free_motion &&
                     (drift.beta * drift.J != 0.0 || drift.u_prime);
    if (has_drift && grid.dt() > 0.01) {
        static bool warned = false;
        if (!warned) {
            std::fprintf(stderr,
                         "integrate_sde: dt = %g above the recommended 0.01 for drifted runs\n",
                         grid.dt());
            warned = true;
        }
    }
    Trajectory traj;
    traj.grid = grid;
    traj.states.reserve(grid.n_steps + 1);
    traj.states.push_back(initial);
    const int n = initial.n_sites();
    const double dt = grid.dt();
    const double noise = std::sqrt(2.0 * dt);
    const double cpl = drift.beta * drift.J;
    SpinConfig current = initial;
    std::vector<double> b(n, 0.0);
    for (int step = 0; step < grid.n_steps; ++step) {
        if (drift.mode == DriftSpec::Mode::free_motion) {
            std::fill(b.begin(), b.end(), 0.0);
        } else {
            for (int i = 0; i < n; ++i) {
                double bi = 0.0;
                if (drift.mode == DriftSpec::Mode::decoupled && i == drift.decoupled_site) {
                    b[i] = 0.0;
                    continue;
                }
                if (drift.u_prime) bi -= drift.u_prime(current[i]);
                for (int nbr : current.shape.neighbors(i))
                    bi -= cpl * std::sin(current[i] - current[nbr]);
                if (!std::isfinite(bi))
                    throw std::runtime_error("integrate_sde: non-finite drift at site " +
                                             std::to_string(i));
                b[i] = bi;
            }
        }
        SpinConfig next = current;
        for (int i = 0; i < n; ++i)
            next[i] = wrap_angle(current[i] + b[i] * dt + noise * rng.gaussian());
        traj.states.push_back(next);
        current = std::move(next);
    }
    return traj;
}

// Exact marginal of the free dynamics at time t: one independent circle
// increment per site, no grid, no discretization error.
inline SpinConfig free_propagate(const SpinConfig& initial, double t, Rng& rng) {
    SpinConfig out = initial;
    for (double& a : out.angles) a = wrap_angle(a + kernel::sample_increment(t, rng));
    return out;
}

namespace detail {
inline void check_edge(const SpinConfig& x, int i, int j, const char* who) {
    if (i < 0 || i >= x.n_sites() || j < 0 || j >= x.n_sites())
        throw std::invalid_argument(std::string(who) + ": edge site out of range");
    bool adjacent = false;
    for (int nbr : x.shape.neighbors(i)) adjacent |= (nbr == j);
    if (!adjacent)
        throw std::invalid_argument(std::string(who) + ": sites are not nearest neighbours");
}
} // namespace detail

// Integrand of the change of measure between interacting and single-site
// dynamics, for one pair interaction phi = -J cos(x_i - x_j):
//
//   g = (beta/2) sum_{i in A} (phi_A'' + U'(x_i) phi_A')
//       - (beta^2/4) sum_{B u C = A, B n C != 0} sum_{i in B n C} phi_B' phi_C'
//
// (constants at the sqrt(2)-diffusion clock).  For a single pair the second
// sum collapses to B = C = A.
inline double girsanov_integrand(const SpinConfig& x, int i, int j,
                                 const std::function<double(double)>& u_prime, double beta,
                                 double J) {
    detail::check_edge(x, i, j, "girsanov_integrand");
    const double diff = x[i] - x[j];
    const double s = std::sin(diff);
    const double c = std::cos(diff);
    double first = 2.0 * J * c;
    if (u_prime) first += J * s * (u_prime(x[i]) - u_prime(x[j]));
    double second = 2.0 * J * J * s * s;
    return 0.5 * beta * first - 0.25 * beta * beta * second;
}

// Path-weight potential of one edge for the interaction -beta*J*cos, boundary
// terms at half weight and the time integral by the trapezoid rule:
//
//   Phi_A = phi_A(X(t))/2 - phi_A(X(0))/2
//           - int_0^t [ (1/2) sum_j phi_A'' - (1/4) sum (phi')^2 ] ds.
inline double girsanov_potential(int i, int j, const Trajectory& traj, double beta, double J) {
    if (traj.states.empty()) throw std::invalid_argument("girsanov_potential: empty trajectory");
    detail::check_edge(traj.states.front(), i, j, "girsanov_potential");
    const double cpl = beta * J;
    auto pair_energy = [&](const SpinConfig& x) { return -cpl * std::cos(x[i] - x[j]); };
    auto integrand = [&](const SpinConfig& x) {
        return girsanov_integrand(x, i, j, nullptr, beta, J);
    };
    const double dt = traj.grid.dt();
    double integral = 0.5 * (integrand(traj.states.front()) + integrand(traj.states.back()));
    for (std::size_t k = 1; k + 1 < traj.states.size(); ++k)
        integral += integrand(traj.states[k]);
    integral *= dt;
    return 0.5 * pair_energy(traj.states.back()) - 0.5 * pair_energy(traj.states.front()) -
           integral;
}

// log F^t = -sum_A Phi_A over the full potential family: the per-edge terms
// plus the cross-gradient terms living on unions of overlapping edges.
// Site-wise this collapses to
//   log F = -(H(X_t) - H(X_0))/2 + int_0^t [ (1/2) Lap H - (1/4) |grad H|^2 ]
// with H = -beta*J sum_edges cos(x_i - x_j), which is the exact change of
// measure between the interacting and free path laws: its mean over free
// paths is 1.  Dropping the cross terms (edge potentials alone) would bias
// the mean at order beta^2.  Computed in log space; exponentiate at the end.
inline double girsanov_log_density(const Trajectory& traj, double beta, double J) {
    if (traj.states.empty()) throw std::invalid_argument("girsanov_log_density: empty trajectory");
    const LatticeShape& shape = traj.states.front().shape;
    const auto edges = lattice_edges(shape);
    const double cpl = beta * J;
    auto hamiltonian = [&](const SpinConfig& x) {
        double h = 0.0;
        for (auto [i, j] : edges) h -= cpl * std::cos(x[i] - x[j]);
        return h;
    };
    auto integrand = [&](const SpinConfig& x) {
        double lap_half = 0.0;
        for (auto [i, j] : edges) lap_half += cpl * std::cos(x[i] - x[j]);
        double grad_sq = 0.0;
        for (int i = 0; i < x.n_sites(); ++i) {
            double g = 0.0;
            for (int nbr : shape.neighbors(i)) g += cpl * std::sin(x[i] - x[nbr]);
            grad_sq += g * g;
        }
        return lap_half - 0.25 * grad_sq;
    };
    const double dt = traj.grid.dt();
    double integral = 0.5 * (integrand(traj.states.front()) + integrand(traj.states.back()));
    for (std::size_t k = 1; k + 1 < traj.states.size(); ++k)
        integral += integrand(traj.states[k]);
    integral *= dt;
    return -0.5 * (hamiltonian(traj.states.back()) - hamiltonian(traj.states.front())) + integral;
}

inline double girsanov_density(const Trajectory& traj, double beta, double J) {
    return std::exp(girsanov_log_density(traj, beta, J));
}

// Debug dump: one line per (step, site, angle).
inline void dump_trajectory(const Trajectory& traj, std::ostream& os) {
    char buf[64];
    for (std::size_t step = 0; step < traj.states.size(); ++step)
        for (int site = 0; site < traj.states[step].n_sites(); ++site) {
            std::snprintf(buf, sizeof buf, "%zu %d %.17g\n", step, site,
                          traj.states[step][site]);
            os << buf;
        }
}

// Conservative constant for the pathwise bound
//   |Phi_A| <= C * (t + sup_{j in A} circular displacement of X_j).
// sup|phi'| = sup|phi''| = beta*J per coordinate, two sites, two gradient
// products.
inline double phibound_constant(double beta, double J) {
    const double bj = beta * J;
    return std::max(2.0 * bj + 0.5 * bj * bj, bj);
}

// True iff the pathwise bound holds for this edge (hard check, not
// statistical).
inline bool phibound_holds(int i, int j, const Trajectory& traj, double beta, double J,
                           double phi_value) {
    const SpinConfig& a = traj.states.front();
    const SpinConfig& b = traj.states.back();
    double disp = std::max(circular_distance(b[i], a[i]), circular_distance(b[j], a[j]));
    return std::fabs(phi_value) <=
           phibound_constant(beta, J) * (traj.grid.t_final + disp) + 1e-12;
}

} // namespace rotor
