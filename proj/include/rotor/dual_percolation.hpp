#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rotor/conditioned_model.hpp"
#include "rotor/lattice.hpp"
#include "rotor/rotor_model.hpp"

namespace rotor {

// Dual-lattice sites are the elementary plaquettes, one per base site (the
// plaquette whose lower-left corner it is), so the dual torus has the same
// indexing and adjacency as the base torus.

struct LowEnergyGraph {
    LatticeShape shape;
    std::vector<char> in_set; // dual site is in V_delta
    double delta = 0.0;
    double m = 0.0;

    int n_vertices() const {
        int n = 0;
        for (char c : in_set) n += c;
        return n;
    }
};

// V_delta = { dual sites a : plaquette_energy(a) <= m + delta }, edges between
// nearest-neighbour dual sites that are both in the set.  m must be the
// minimal plaquette energy of the same (params, fields); for uniform-field
// specs this is cross-checked against the closed form and a mismatch is a
// usage error.
inline LowEnergyGraph build_low_energy_graph(const SpinConfig& config, const XYParams& params,
                                             const FieldSpec& fields, double delta, double m) {
    if (delta < 0.0) throw std::invalid_argument("build_low_energy_graph: delta must be >= 0");
    if (!fields.empty() && fields.size() != static_cast<std::size_t>(config.n_sites()))
        throw std::invalid_argument("build_low_energy_graph: field spec size mismatch");
    if (!fields.empty()) {
        double h = fields.h[0];
        bool uniform = std::all_of(fields.h.begin(), fields.h.end(),
                                   [&](double v) { return v == h; });
        if (uniform && h > 0.0 && h < 8.0 * params.coupling()) {
            double eps = std::asin(h / (8.0 * params.coupling()));
            double m_expected =
                -2.0 * params.coupling() * std::cos(2.0 * eps) - h * std::sin(eps);
            if (std::fabs(m - m_expected) > 1e-6 * std::max(1.0, std::fabs(m_expected)))
                throw std::invalid_argument(
                    "build_low_energy_graph: m does not match (params, fields)");
        }
    }
    LowEnergyGraph g;
    g.shape = config.shape;
    g.delta = delta;
    g.m = m;
    g.in_set.resize(config.n_sites());
    for (int a = 0; a < config.n_sites(); ++a)
        g.in_set[a] = plaquette_energy(config, a, params, &fields) <= m + delta ? 1 : 0;
    return g;
}

enum class Orientation { ri, le, mixed };

inline const char* orientation_name(Orientation o) {
    switch (o) {
        case Orientation::ri: return "ri";
        case Orientation::le: return "le";
        default: return "mixed";
    }
}

struct ClusterReport {
    std::vector<int> labels;        // per dual site: cluster id, or -1
    std::vector<int> sizes;         // per cluster
    std::vector<char> wraps;        // per cluster: wraps the torus in some direction
    std::vector<Orientation> orientations; // per cluster (filled by classify_clusters)
    double largest_fraction = 0.0;  // largest cluster size / L^2
    bool spans = false;             // largest cluster wraps the torus
    int largest_cluster = -1;

    int n_clusters() const { return static_cast<int>(sizes.size()); }
};

namespace detail {

// Union-find over dual sites carrying the displacement of each node relative
// to its parent.  When a union closes a loop whose accumulated displacement
// is not the geometric one, the cluster wraps the torus.
class OffsetUnionFind {
public:
    explicit OffsetUnionFind(int n) : parent_(n), size_(n, 1), dx_(n, 0), dy_(n, 0), wrap_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int v) {
        if (parent_[v] == v) return v;
        int root = find(parent_[v]);
        dx_[v] += dx_[parent_[v]];
        dy_[v] += dy_[parent_[v]];
        parent_[v] = root;
        return root;
    }

    // Join a and b where b sits at displacement (ddx, ddy) from a.
    void merge(int a, int b, int ddx, int ddy) {
        int ra = find(a), rb = find(b);
        if (ra == rb) {
            // implied displacement of b relative to its root vs recorded one
            long ex = dx_[a] + ddx, ey = dy_[a] + ddy;
            if (ex != dx_[b] || ey != dy_[b]) wrap_[ra] = 1;
            return;
        }
        if (size_[ra] < size_[rb]) {
            std::swap(ra, rb);
            std::swap(a, b);
            ddx = -ddx;
            ddy = -ddy;
        }
        // attach rb under ra; offset of rb = offset(a) + dd - offset(b)
        parent_[rb] = ra;
        dx_[rb] = dx_[a] + ddx - dx_[b];
        dy_[rb] = dy_[a] + ddy - dy_[b];
        size_[ra] += size_[rb];
        wrap_[ra] |= wrap_[rb];
    }

    bool wraps(int v) { return wrap_[find(v)] != 0; }

private:
    std::vector<int> parent_, size_;
    std::vector<long> dx_, dy_;
    std::vector<char> wrap_;
};

} // namespace detail

// Connected components of the low-energy graph with sizes, torus-wrap flags
// and the spanning proxy for the largest cluster.
inline ClusterReport connected_clusters(const LowEnergyGraph& g) {
    const LatticeShape& s = g.shape;
    const int n = s.n_sites();
    detail::OffsetUnionFind uf(n);
    for (int a = 0; a < n; ++a) {
        if (!g.in_set[a]) continue;
        int r = s.row(a), c = s.col(a);
        int right = s.index(r, c + 1);
        int down = s.index(r + 1, c);
        if (g.in_set[right]) uf.merge(a, right, 1, 0);
        if (g.in_set[down]) uf.merge(a, down, 0, 1);
    }
    ClusterReport report;
    report.labels.assign(n, -1);
    std::vector<int> root_to_id(n, -1);
    for (int a = 0; a < n; ++a) {
        if (!g.in_set[a]) continue;
        int root = uf.find(a);
        if (root_to_id[root] < 0) {
            root_to_id[root] = report.n_clusters();
            report.sizes.push_back(0);
            report.wraps.push_back(uf.wraps(root) ? 1 : 0);
        }
        int id = root_to_id[root];
        report.labels[a] = id;
        report.sizes[id] += 1;
    }
    for (int id = 0; id < report.n_clusters(); ++id)
        if (report.largest_cluster < 0 || report.sizes[id] > report.sizes[report.largest_cluster])
            report.largest_cluster = id;
    if (report.largest_cluster >= 0) {
        report.largest_fraction = static_cast<double>(report.sizes[report.largest_cluster]) / n;
        report.spans = report.wraps[report.largest_cluster] != 0;
    }
    return report;
}

// Orientation of one cluster: the per-plaquette mean of sin over the four
// corners must be positive on every dual site for "ri", negative on every one
// for "le"; anything else is mixed.
inline Orientation classify_cluster(const SpinConfig& config, const std::vector<int>& dual_sites) {
    if (dual_sites.empty())
        throw std::invalid_argument("classify_cluster: empty cluster");
    const LatticeShape& s = config.shape;
    bool all_pos = true, all_neg = true;
    for (int a : dual_sites) {
        int r = s.row(a), c = s.col(a);
        double sa = std::sin(config[s.index(r, c)]) + std::sin(config[s.index(r, c + 1)]) +
                    std::sin(config[s.index(r + 1, c)]) + std::sin(config[s.index(r + 1, c + 1)]);
        sa *= 0.25;
        all_pos &= sa > 0.0;
        all_neg &= sa < 0.0;
    }
    if (all_pos) return Orientation::ri;
    if (all_neg) return Orientation::le;
    return Orientation::mixed;
}

// Fill in the per-cluster orientations of a report.
inline void classify_clusters(const SpinConfig& config, ClusterReport& report) {
    std::vector<std::vector<int>> members(report.n_clusters());
    for (int a = 0; a < static_cast<int>(report.labels.size()); ++a)
        if (report.labels[a] >= 0) members[report.labels[a]].push_back(a);
    report.orientations.resize(report.n_clusters());
    for (int id = 0; id < report.n_clusters(); ++id)
        report.orientations[id] = classify_cluster(config, members[id]);
}

// Full analysis of one configuration at one delta.
inline ClusterReport analyze_low_energy(const SpinConfig& config, const XYParams& params,
                                        const FieldSpec& fields, double delta, double m) {
    LowEnergyGraph g = build_low_energy_graph(config, params, fields, delta, m);
    ClusterReport report = connected_clusters(g);
    classify_clusters(config, report);
    return report;
}

// Largest delta from the candidate grid such that every cluster of every
// sampled configuration is purely ri or purely le for all grid deltas up to
// it.  Returns 0 if even the smallest candidate produces a mixed cluster.
inline double find_stability_delta(const std::vector<SpinConfig>& configs, const XYParams& params,
                                   const FieldSpec& fields, double m,
                                   const std::vector<double>& delta_grid) {
    std::vector<double> grid = delta_grid;
    std::sort(grid.begin(), grid.end());
    double best = 0.0;
    for (double delta : grid) {
        bool pure = true;
        for (const SpinConfig& config : configs) {
            ClusterReport r = analyze_low_energy(config, params, fields, delta, m);
            for (Orientation o : r.orientations)
                if (o == Orientation::mixed) {
                    pure = false;
                    break;
                }
            if (!pure) break;
        }
        if (!pure) break;
        best = delta;
    }
    return best;
}

} // namespace rotor
