#pragma once

#include <array>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rotor/angle.hpp"
#include "rotor/rng.hpp"

namespace rotor {

// Periodic L x L square lattice, sites indexed row-major.  L must be even:
// the alternating target pattern and the plaquette reflections are only
// consistent across the seam on even tori.
struct LatticeShape {
    int side = 0;

    LatticeShape() = default;
    explicit LatticeShape(int L) : side(L) {
        if (L < 2 || L % 2 != 0)
            throw std::invalid_argument("LatticeShape: side must be even and >= 2");
    }

    int n_sites() const { return side * side; }

    int index(int row, int col) const {
        int r = ((row % side) + side) % side;
        int c = ((col % side) + side) % side;
        return r * side + c;
    }

    int row(int idx) const { return idx / side; }
    int col(int idx) const { return idx % side; }

    // +1 on the even sublattice (row+col even), -1 on the odd one.
    int parity_sign(int idx) const { return (row(idx) + col(idx)) % 2 == 0 ? 1 : -1; }

    // The four nearest neighbours; on L = 2 the periodic wrap makes left and
    // right (and up and down) coincide, which doubles the incident bonds.
    std::array<int, 4> neighbors(int idx) const {
        int r = row(idx), c = col(idx);
        return {index(r, c + 1), index(r, c - 1), index(r + 1, c), index(r - 1, c)};
    }

    bool operator==(const LatticeShape&) const = default;
};

// Every nearest-neighbour bond, one entry per directed step to the right or
// down from each site.  This is the multigraph convention: on L = 2 each
// unordered pair appears twice, so there are always 2 L^2 bonds.
inline std::vector<std::pair<int, int>> lattice_edges(const LatticeShape& shape) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(2 * shape.n_sites());
    for (int r = 0; r < shape.side; ++r)
        for (int c = 0; c < shape.side; ++c) {
            edges.emplace_back(shape.index(r, c), shape.index(r, c + 1));
            edges.emplace_back(shape.index(r, c), shape.index(r + 1, c));
        }
    return edges;
}

// One angle in [0, 2pi) per site.
struct SpinConfig {
    LatticeShape shape;
    std::vector<double> angles;

    SpinConfig() = default;
    explicit SpinConfig(const LatticeShape& s, double value = 0.0)
        : shape(s), angles(s.n_sites(), wrap_angle(value)) {}

    static SpinConfig uniform_random(const LatticeShape& s, Rng& rng) {
        SpinConfig c(s);
        for (double& a : c.angles) a = rng.uniform(0.0, two_pi);
        return c;
    }

    double& operator[](int idx) { return angles[idx]; }
    double operator[](int idx) const { return angles[idx]; }
    int n_sites() const { return shape.n_sites(); }
};

// Mirror every spin through the left-right reflection x -> (2pi - x) mod 2pi.
inline SpinConfig reflect(const SpinConfig& config) {
    SpinConfig out = config;
    for (double& a : out.angles) a = reflect_angle(a);
    return out;
}

// Text format: header "L=<int>", then one angle per line in row-major order,
// 17 significant digits.
inline void save_config(const SpinConfig& config, std::ostream& os) {
    os << "L=" << config.shape.side << "\n";
    char buf[64];
    for (double a : config.angles) {
        std::snprintf(buf, sizeof buf, "%.17g\n", a);
        os << buf;
    }
}

inline SpinConfig load_config(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("L=", 0) != 0)
        throw std::runtime_error("load_config: missing L= header");
    int L = std::stoi(header.substr(2));
    SpinConfig config{LatticeShape(L)};
    for (double& a : config.angles) {
        if (!(is >> a)) throw std::runtime_error("load_config: truncated angle list");
        a = wrap_angle(a);
    }
    return config;
}

} // namespace rotor
