#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rotor/angle.hpp"
#include "rotor/circle_kernel.hpp"
#include "rotor/lattice.hpp"
#include "rotor/rotor_model.hpp"

namespace rotor {

// Parameters of the two-layer conditioned model: the time-zero rotor system
// seen through conditioning the freely evolved layer at time t.  Derived
// quantities: field amplitude h = 2 e^{-t} and the ground-state tilt
// epsilon_t = arcsin(h / (8 beta J)), defined while h <= 8 beta J.
struct ConditionedParams {
    double beta = 1.0;
    double J = 1.0;
    double t = 1.0;

    ConditionedParams() = default;
    ConditionedParams(double beta_, double J_, double t_) : beta(beta_), J(J_), t(t_) {
        if (!(beta > 0.0) || !(J >= 0.0) || !(t > 0.0))
            throw std::invalid_argument("ConditionedParams: need beta > 0, J >= 0, t > 0");
    }

    double coupling() const { return beta * J; }
    double field() const { return kernel::effective_field(t); }

    bool epsilon_defined() const { return field() <= 8.0 * coupling(); }

    double epsilon() const {
        double ratio = field() / (8.0 * coupling());
        if (!(ratio <= 1.0))
            throw std::domain_error(
                "epsilon_t undefined: field dominates coupling; low-temperature analysis inapplicable");
        return std::asin(ratio);
    }

    XYParams xy() const { return XYParams(beta, J); }
};

// The alternating target configuration: angle 0 on the even sublattice
// (row+col even), pi on the odd one.  Every nearest-neighbour pair differs
// by pi.
inline SpinConfig make_yspec(const LatticeShape& shape) {
    SpinConfig y(shape);
    for (int i = 0; i < shape.n_sites(); ++i)
        y[i] = shape.parity_sign(i) > 0 ? 0.0 : pi;
    return y;
}

// Field spec induced by conditioning on the alternating configuration:
// uniform magnitude h(t), targets from make_yspec.
inline FieldSpec make_yspec_fields(const LatticeShape& shape, const ConditionedParams& p) {
    SpinConfig y = make_yspec(shape);
    return FieldSpec(std::vector<double>(shape.n_sites(), p.field()), y.angles);
}

enum class HamiltonianForm { exact, field_approx };

// Conditioned time-zero Hamiltonian given the evolved layer equals y:
//   exact:        -beta*J sum_bonds cos(x_i-x_j) - sum_i ln(2 pi K_t(x_i-y_i))
//   field_approx: -beta*J sum_bonds cos(x_i-x_j) - sum_i h(t) cos(x_i-y_i)
// The approximation keeps only the first Fourier mode of the kernel; the gap
// per site decays like e^{-2t}.
inline double conditioned_hamiltonian(const SpinConfig& x, const SpinConfig& y,
                                      const ConditionedParams& p, HamiltonianForm form) {
    if (x.shape != y.shape)
        throw std::invalid_argument("conditioned_hamiltonian: shape mismatch");
    double e = energy_total(x, p.xy());
    if (form == HamiltonianForm::field_approx) {
        const double h = p.field();
        for (int i = 0; i < x.n_sites(); ++i) e -= h * std::cos(x[i] - y[i]);
    } else {
        const double log_two_pi = std::log(two_pi);
        for (int i = 0; i < x.n_sites(); ++i)
            e -= log_two_pi + kernel::log_density(x[i] - y[i], p.t);
    }
    return e;
}

// Two-angle cell function of one nearest-neighbour pair,
//   Phi(z, y) = -beta*J cos(z-y) + s * (h/4) (cos z - cos y),
// where s = +1 orients z on the even sublattice and s = -1 on the odd one
// (the alternating field flips sign between the two orientations; they are
// exchanged by swapping the arguments).  Minima sit at (pi/2 + s*eps,
// pi/2 - s*eps) and (3pi/2 + s*eps, 3pi/2 - s*eps).
inline double cell_energy(double z, double y, const ConditionedParams& p, int parity_sign = 1) {
    return -p.coupling() * std::cos(z - y) +
           parity_sign * 0.25 * p.field() * (std::cos(z) - std::cos(y));
}

inline std::pair<double, double> cell_gradient(double z, double y, const ConditionedParams& p,
                                               int parity_sign = 1) {
    const double c = p.coupling(), h4 = parity_sign * 0.25 * p.field();
    return {c * std::sin(z - y) - h4 * std::sin(z), -c * std::sin(z - y) + h4 * std::sin(y)};
}

struct CellMinimum {
    double z = 0.0;
    double y = 0.0;
    double value = 0.0;
};

namespace detail {

// Local descent over the 8 axis and diagonal directions with shrinking
// steps.  Diagonals matter because the valley of the cell runs along
// z + y = const when the field is weak.
inline CellMinimum descend_cell(CellMinimum start, const ConditionedParams& p) {
    const int dz[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    CellMinimum best = start;
    double s = 0.01;
    while (s > 1e-12) {
        bool improved = false;
        for (int k = 0; k < 8; ++k) {
            double cz = best.z + s * dz[k];
            double cy = best.y + s * dy[k];
            double v = cell_energy(cz, cy, p);
            if (v < best.value) {
                best = {cz, cy, v};
                improved = true;
            }
        }
        if (!improved) s *= 0.5;
    }
    return best;
}

} // namespace detail

// Brute-force minimization of the cell function: uniform grid scan over
// [0,2pi)^2 followed by local descent with shrinking steps.  The whole
// diagonal z = y shares the grid minimum -beta*J when the field is weak and
// contains the saddle at (0,0), so the descent is launched from every
// near-tied grid point, not only the first.
inline CellMinimum minimize_cell(const ConditionedParams& p, int grid_n = 400) {
    const double step = two_pi / grid_n;
    double grid_min = cell_energy(0.0, 0.0, p);
    std::vector<std::pair<double, double>> starts;
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            double v = cell_energy(i * step, j * step, p);
            if (v < grid_min) grid_min = v;
        }
    const double tie = 1e-9 * (1.0 + std::fabs(grid_min));
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j)
            if (cell_energy(i * step, j * step, p) <= grid_min + tie)
                starts.emplace_back(i * step, j * step);
    CellMinimum best;
    best.value = grid_min + 1.0;
    for (auto [z, y] : starts) {
        CellMinimum c = detail::descend_cell({z, y, cell_energy(z, y, p)}, p);
        if (c.value < best.value) best = c;
    }
    best.z = wrap_angle(best.z);
    best.y = wrap_angle(best.y);
    return best;
}

// The two ground states of the conditioned model and their common plaquette
// energy m.  With the aligning field convention the even sublattice tilts
// toward its target: x_ri has pi/2 - eps on even sites and pi/2 + eps on odd
// ones; x_le is its left-right mirror.
struct GroundStatePair {
    SpinConfig x_ri;
    SpinConfig x_le;
    double epsilon = 0.0;
    double m = 0.0; // minimal plaquette energy
};

inline GroundStatePair ground_states(const ConditionedParams& p, const LatticeShape& shape) {
    if (!(p.field() < 8.0 * p.coupling()))
        throw std::domain_error(
            "ground_states: field dominates coupling; low-temperature analysis inapplicable");
    GroundStatePair g;
    g.epsilon = p.epsilon();
    g.x_ri = SpinConfig(shape);
    g.x_le = SpinConfig(shape);
    for (int i = 0; i < shape.n_sites(); ++i) {
        double tilt = shape.parity_sign(i) * g.epsilon;
        g.x_ri[i] = wrap_angle(0.5 * pi - tilt);
        g.x_le[i] = reflect_angle(g.x_ri[i]);
    }
    FieldSpec fields = make_yspec_fields(shape, p);
    g.m = plaquette_energy(g.x_ri, 0, p.xy(), &fields);

    // Cross-check against the grid + descent oracle: the cell minimum must
    // match the closed form (the plaquette carries two cells' worth).
    CellMinimum oracle = minimize_cell(p);
    double closed = -p.coupling() * std::cos(2.0 * g.epsilon) -
                    0.5 * p.field() * std::sin(g.epsilon);
    if (!(oracle.value >= closed - 1e-9) || std::fabs(2.0 * oracle.value - g.m) > 1e-8)
        throw std::logic_error("ground_states: closed form disagrees with minimization oracle");
    return g;
}

enum class StationaryType { minimum, maximum, saddle, degenerate };

// Classify a stationary point of the cell function by its numerically
// evaluated Hessian (central differences) -- the closed-form determinant is
// not trusted.  Rejects points whose gradient norm exceeds 1e-8.  The pair
// orientation matters: the anti-aligned points (0, pi) and (pi, 0) exchange
// their types (maximum vs saddle) between the even and odd orientations.
inline StationaryType classify_stationary(double z, double y, const ConditionedParams& p,
                                          int parity_sign = 1) {
    auto [gz, gy] = cell_gradient(z, y, p, parity_sign);
    double gnorm = std::sqrt(gz * gz + gy * gy);
    if (gnorm > 1e-8)
        throw std::invalid_argument("classify_stationary: point is not stationary, |grad| = " +
                                    std::to_string(gnorm));
    const double d = 1e-5;
    auto f = [&](double a, double b) { return cell_energy(a, b, p, parity_sign); };
    double fzz = (f(z + d, y) - 2.0 * f(z, y) + f(z - d, y)) / (d * d);
    double fyy = (f(z, y + d) - 2.0 * f(z, y) + f(z, y - d)) / (d * d);
    double fzy = (f(z + d, y + d) - f(z + d, y - d) - f(z - d, y + d) + f(z - d, y - d)) /
                 (4.0 * d * d);
    // eigenvalues of the symmetric 2x2 Hessian
    double tr = fzz + fyy;
    double det = fzz * fyy - fzy * fzy;
    double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    double l1 = 0.5 * tr + disc;
    double l2 = 0.5 * tr - disc;
    if (std::fabs(l1) < 1e-12 || std::fabs(l2) < 1e-12) return StationaryType::degenerate;
    if (l1 > 0.0 && l2 > 0.0) return StationaryType::minimum;
    if (l1 < 0.0 && l2 < 0.0) return StationaryType::maximum;
    return StationaryType::saddle;
}

} // namespace rotor
