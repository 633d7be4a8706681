#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rotor::polymer {

// Abstract polymer: an id and a nonempty support of abstract site indices.
// Two polymers are incompatible iff their supports intersect; every polymer
// is incompatible with itself.
struct Polymer {
    int id = 0;
    std::vector<int> support; // kept sorted and unique

    Polymer() = default;
    Polymer(int id_, std::vector<int> support_) : id(id_), support(std::move(support_)) {
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
        if (support.empty()) throw std::invalid_argument("Polymer: support must be nonempty");
    }
};

inline bool incompatible(const Polymer& a, const Polymer& b) {
    std::size_t i = 0, j = 0;
    while (i < a.support.size() && j < b.support.size()) {
        if (a.support[i] == b.support[j]) return true;
        if (a.support[i] < b.support[j]) ++i;
        else ++j;
    }
    return false;
}

struct PolymerSystem {
    std::vector<Polymer> polymers;
    std::vector<double> weights; // aligned with polymers

    PolymerSystem() = default;
    PolymerSystem(std::vector<Polymer> ps, std::vector<double> ws)
        : polymers(std::move(ps)), weights(std::move(ws)) {
        if (polymers.size() != weights.size())
            throw std::invalid_argument("PolymerSystem: weight count mismatch");
        for (double w : weights)
            if (!std::isfinite(w)) throw std::invalid_argument("PolymerSystem: non-finite weight");
    }

    std::size_t size() const { return polymers.size(); }
};

// Incompatibility bitmask per polymer (bit k set iff polymer k overlaps),
// including the polymer itself.
inline std::vector<std::uint32_t> incompatibility_masks(const PolymerSystem& sys) {
    const std::size_t n = sys.size();
    if (n > 20) throw std::invalid_argument("polymer system too large for enumeration (> 20)");
    std::vector<std::uint32_t> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (incompatible(sys.polymers[i], sys.polymers[j])) mask[i] |= 1u << j;
    return mask;
}

struct KpResult {
    bool holds = false;
    double worst_ratio = 0.0;
};

// Convergence criterion for the cluster expansion: with weight functions
// a > 0 and d >= 0 on polymers, require for every polymer gamma
//   sum_{gamma' incompatible with gamma} |w(gamma')| e^{a(gamma')+d(gamma')}
//     <= a(gamma).
// Defaults a = support size, d = 0 recover the bound |w| e^{#gamma'} <= #gamma.
template <typename AFn, typename DFn>
KpResult kp_check(const PolymerSystem& sys, AFn&& a_fn, DFn&& d_fn) {
    KpResult r;
    r.holds = true;
    r.worst_ratio = 0.0;
    const std::size_t n = sys.size();
    for (std::size_t g = 0; g < n; ++g) {
        double a_g = a_fn(sys.polymers[g]);
        if (!(a_g > 0.0)) throw std::invalid_argument("kp_check: a must be > 0 on all polymers");
        double lhs = 0.0;
        for (std::size_t g2 = 0; g2 < n; ++g2) {
            if (!incompatible(sys.polymers[g], sys.polymers[g2])) continue;
            lhs += std::fabs(sys.weights[g2]) *
                   std::exp(a_fn(sys.polymers[g2]) + d_fn(sys.polymers[g2]));
        }
        r.worst_ratio = std::max(r.worst_ratio, lhs / a_g);
    }
    r.holds = r.worst_ratio <= 1.0;
    return r;
}

inline KpResult kp_check(const PolymerSystem& sys) {
    return kp_check(
        sys, [](const Polymer& p) { return static_cast<double>(p.support.size()); },
        [](const Polymer&) { return 0.0; });
}

// Polynomial coefficients of Z(lambda) = sum over pairwise-compatible subsets
// of prod (lambda w): coeffs[k] collects subsets of size k.
inline std::vector<double> partition_polynomial(const PolymerSystem& sys) {
    const std::size_t n = sys.size();
    std::vector<std::uint32_t> mask = incompatibility_masks(sys);
    std::vector<double> coeffs(n + 1, 0.0);
    coeffs[0] = 1.0;
    const std::uint32_t total = 1u << n;
    for (std::uint32_t subset = 1; subset < total; ++subset) {
        bool ok = true;
        double prod = 1.0;
        for (std::size_t k = 0; k < n && ok; ++k) {
            if (!(subset & (1u << k))) continue;
            if (mask[k] & subset & ~(1u << k)) ok = false;
            else prod *= sys.weights[k];
        }
        if (ok) coeffs[static_cast<std::size_t>(__builtin_popcount(subset))] += prod;
    }
    std::size_t deg = coeffs.size();
    while (deg > 1 && coeffs[deg - 1] == 0.0) --deg;
    coeffs.resize(deg);
    return coeffs;
}

// ln Z by direct enumeration of all pairwise-compatible subsets (the empty
// set contributes 1).  A nonpositive Z means the weights are outside any
// meaningful range.
inline double brute_force_logZ(const PolymerSystem& sys) {
    std::vector<double> coeffs = partition_polynomial(sys);
    double z = 0.0;
    for (double c : coeffs) z += c;
    if (!(z > 0.0)) throw std::domain_error("brute_force_logZ: partition function <= 0");
    return std::log(z);
}

namespace detail {

// Coefficients of log(1 + sum_{k>=1} z_k lambda^k) as a formal power series,
// up to max_order.  Standard recurrence c_k = z_k - (1/k) sum_j j c_j z_{k-j}.
inline std::vector<double> log_series(const std::vector<double>& z, int max_order) {
    std::vector<double> c(max_order + 1, 0.0);
    auto zc = [&](int k) {
        return k < static_cast<int>(z.size()) ? z[k] : 0.0;
    };
    for (int k = 1; k <= max_order; ++k) {
        double acc = zc(k);
        for (int j = 1; j < k; ++j) acc -= (static_cast<double>(j) / k) * c[j] * zc(k - j);
        c[k] = acc;
    }
    return c;
}

// Connected components of the incompatibility graph.
inline std::vector<std::vector<std::size_t>> overlap_components(const PolymerSystem& sys) {
    const std::size_t n = sys.size();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (comp[seed] >= 0) continue;
        std::vector<std::size_t> stack{seed}, members;
        comp[seed] = static_cast<int>(out.size());
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            members.push_back(v);
            for (std::size_t u = 0; u < n; ++u)
                if (comp[u] < 0 && incompatible(sys.polymers[v], sys.polymers[u])) {
                    comp[u] = comp[seed];
                    stack.push_back(u);
                }
        }
        out.push_back(std::move(members));
    }
    return out;
}

inline PolymerSystem subsystem(const PolymerSystem& sys, const std::vector<std::size_t>& idx) {
    std::vector<Polymer> ps;
    std::vector<double> ws;
    for (std::size_t k : idx) {
        ps.push_back(sys.polymers[k]);
        ws.push_back(sys.weights[k]);
    }
    return PolymerSystem(std::move(ps), std::move(ws));
}

} // namespace detail

// Partial sum of the cluster expansion of ln Z through clusters of at most
// max_order polymers: the weights are graded by an auxiliary lambda, ln Z of
// each overlap-connected component is taken as a formal power series (the
// logarithm-composition identity), and orders 1..max_order are summed.
inline double truncated_expansion(const PolymerSystem& sys, int max_order) {
    if (max_order < 1) throw std::invalid_argument("truncated_expansion: max_order must be >= 1");
    double total = 0.0;
    for (const auto& members : detail::overlap_components(sys)) {
        PolymerSystem sub = detail::subsystem(sys, members);
        std::vector<double> zpoly = partition_polynomial(sub);
        std::vector<double> c = detail::log_series(zpoly, max_order);
        for (int k = 1; k <= max_order; ++k) total += c[k];
    }
    return total;
}

// Independent route for small orders: the explicit connected-graph (Ursell)
// sum over ordered tuples,
//   ln Z = sum_{n>=1} (1/n!) sum_{(g_1..g_n)} phi_T(g_1..g_n) prod w(g_i),
// phi_T = sum over connected spanning subgraphs of the tuple's
// incompatibility graph of (-1)^{#edges}.  Exponential in n; capped at 4.
inline double truncated_expansion_ursell(const PolymerSystem& sys, int max_order) {
    if (max_order < 1 || max_order > 4)
        throw std::invalid_argument("truncated_expansion_ursell: order must be in [1, 4]");
    const std::size_t n = sys.size();
    double total = 0.0;
    std::vector<std::size_t> tuple;
    double factorial[5] = {1, 1, 2, 6, 24};
    for (int order = 1; order <= max_order; ++order) {
        tuple.assign(order, 0);
        while (true) {
            // edges of the incompatibility graph on tuple positions
            std::vector<std::pair<int, int>> edges;
            for (int p = 0; p < order; ++p)
                for (int q = p + 1; q < order; ++q)
                    if (incompatible(sys.polymers[tuple[p]], sys.polymers[tuple[q]]))
                        edges.emplace_back(p, q);
            double phi_t = 0.0;
            if (order == 1) {
                phi_t = 1.0;
            } else {
                const std::size_t ne = edges.size();
                for (std::uint32_t es = 0; es < (1u << ne); ++es) {
                    // connectivity of (tuple, selected edges)
                    std::vector<int> root(order);
                    for (int v = 0; v < order; ++v) root[v] = v;
                    std::function<int(int)> find = [&](int v) {
                        while (root[v] != v) v = root[v] = root[root[v]];
                        return v;
                    };
                    int parts = order;
                    int bits = 0;
                    for (std::size_t e = 0; e < ne; ++e) {
                        if (!(es & (1u << e))) continue;
                        ++bits;
                        int a = find(edges[e].first), b = find(edges[e].second);
                        if (a != b) {
                            root[a] = b;
                            --parts;
                        }
                    }
                    if (parts == 1) phi_t += bits % 2 == 0 ? 1.0 : -1.0;
                }
            }
            if (phi_t != 0.0) {
                double prod = 1.0;
                for (int p = 0; p < order; ++p) prod *= sys.weights[tuple[p]];
                total += phi_t * prod / factorial[order];
            }
            int d = order - 1;
            while (d >= 0 && ++tuple[d] == n) tuple[d--] = 0;
            if (d < 0) break;
        }
    }
    return total;
}

// Text format, one polymer per line: "id: s1,s2,... : weight".
inline PolymerSystem parse_system(std::istream& is) {
    std::vector<Polymer> ps;
    std::vector<double> ws;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::size_t c1 = line.find(':');
        std::size_t c2 = line.find(':', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::runtime_error("parse_system: malformed line: " + line);
        int id = std::stoi(line.substr(0, c1));
        std::vector<int> support;
        std::stringstream sites(line.substr(c1 + 1, c2 - c1 - 1));
        std::string tok;
        while (std::getline(sites, tok, ','))
            if (tok.find_first_not_of(" \t") != std::string::npos) support.push_back(std::stoi(tok));
        double w = std::stod(line.substr(c2 + 1));
        ps.emplace_back(id, std::move(support));
        ws.push_back(w);
    }
    return PolymerSystem(std::move(ps), std::move(ws));
}

inline void format_system(const PolymerSystem& sys, std::ostream& os) {
    for (std::size_t k = 0; k < sys.size(); ++k) {
        os << sys.polymers[k].id << ": ";
        for (std::size_t s = 0; s < sys.polymers[k].support.size(); ++s) {
            if (s) os << ",";
            os << sys.polymers[k].support[s];
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", sys.weights[k]);
        os << " : " << buf << "\n";
    }
}

} // namespace rotor::polymer
