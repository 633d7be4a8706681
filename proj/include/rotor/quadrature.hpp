#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rotor {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre nodes and weights on [a, b].  Nodes are found by Newton
// iteration on the Legendre polynomial from the Chebyshev initial guess;
// converges to machine precision in a handful of steps.
inline QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence for P_n(x) and P_{n-1}(x)
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        double w = 2.0 * half / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

// Midpoint rule on [a, b); spectrally accurate for smooth periodic integrands.
inline QuadratureRule midpoint_rule(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("midpoint_rule: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.assign(n, (b - a) / n);
    for (int i = 0; i < n; ++i)
        rule.nodes[i] = a + (i + 0.5) * (b - a) / n;
    return rule;
}

} // namespace rotor
