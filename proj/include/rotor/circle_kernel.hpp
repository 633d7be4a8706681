#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "rotor/angle.hpp"
#include "rotor/rng.hpp"

namespace rotor::kernel {

// Transition density of Brownian motion on the circle, normalized so that the
// Fourier coefficients are exp(-n^2 t):
//
//   K_t(d) = (1/2pi) * (1 + 2 * sum_{n>=1} exp(-n^2 t) cos(n d))
//          = (1/sqrt(4 pi t)) * sum_{n in Z} exp(-(d - 2 pi n)^2 / (4 t))
//
// The two series are Poisson-summation partners (wrapped Gaussian of variance
// 2t).  Each side converges fastest on one side of t* = pi, so evaluation
// switches representation there.  Series are truncated when the next term
// drops below 1e-16 in magnitude; a 64-term cap guards against misuse and is
// unreachable for t > 1e-3.

inline constexpr double series_cutoff = 1e-16;
inline constexpr int series_max_terms = 64;
inline constexpr double series_crossover = pi;

namespace detail {

inline void check_time(double t, const char* who) {
    if (!std::isfinite(t) || t <= 0.0)
        throw std::domain_error(std::string(who) + ": diffusion time must be finite and > 0");
}

// Fold the angle difference to [0, pi].  fabs first, so that +d and -d take a
// bit-identical evaluation path.
inline double fold(double delta) {
    double d = std::fabs(delta);
    d = std::fmod(d, two_pi);
    if (d > pi) d = two_pi - d;
    return d;
}

// sum_{n in Z} exp(-(d - 2 pi n)^2 / (4 t)) for folded d.
inline double wrapped_gaussian_sum(double d, double t) {
    const double inv4t = 1.0 / (4.0 * t);
    double sum = std::exp(-d * d * inv4t);
    for (int n = 1; n <= series_max_terms; ++n) {
        double a = d - two_pi * n;
        double b = d + two_pi * n;
        double term = std::exp(-a * a * inv4t) + std::exp(-b * b * inv4t);
        sum += term;
        if (term < series_cutoff) return sum;
    }
    throw std::logic_error("circle kernel: wrapped-Gaussian series cap reached");
}

// u(d) = 2 * sum_{n>=1} exp(-n^2 t) cos(n d), so 2 pi K_t = 1 + u.
inline double fourier_sum(double d, double t) {
    double sum = 0.0;
    for (int n = 1; n <= series_max_terms; ++n) {
        double amp = 2.0 * std::exp(-static_cast<double>(n) * n * t);
        sum += amp * std::cos(n * d);
        if (amp < series_cutoff) return sum;
    }
    throw std::logic_error("circle kernel: Fourier series cap reached");
}

} // namespace detail

// Density of the increment after time t, w.r.t. dx on [0, 2pi).
inline double density(double delta, double t) {
    detail::check_time(t, "kernel density");
    const double d = detail::fold(delta);
    if (t < series_crossover)
        return detail::wrapped_gaussian_sum(d, t) / std::sqrt(4.0 * pi * t);
    return (1.0 + detail::fourier_sum(d, t)) / two_pi;
}

// log K_t(delta) without cancellation: for t >= t* the Fourier correction u is
// small and log1p keeps full precision; below t* the dominant Gaussian image
// is factored out of the sum.
inline double log_density(double delta, double t) {
    detail::check_time(t, "kernel log-density");
    const double d = detail::fold(delta);
    if (t >= series_crossover)
        return -std::log(two_pi) + std::log1p(detail::fourier_sum(d, t));
    const double inv4t = 1.0 / (4.0 * t);
    double rest = 0.0; // images relative to the n = 0 peak
    for (int n = 1; n <= series_max_terms; ++n) {
        double a = d - two_pi * n;
        double b = d + two_pi * n;
        double term = std::exp(-(a * a - d * d) * inv4t) + std::exp(-(b * b - d * d) * inv4t);
        rest += term;
        if (term < series_cutoff) break;
    }
    return -0.5 * std::log(4.0 * pi * t) - d * d * inv4t + std::log1p(rest);
}

// Exact sampling of one increment: Gaussian of variance 2t wrapped onto the
// circle.  t = 0 is the degenerate identity kernel.
inline double sample_increment(double t, Rng& rng) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::domain_error("sample_increment: time must be finite and >= 0");
    if (t == 0.0) return 0.0;
    return wrap_angle(std::sqrt(2.0 * t) * rng.gaussian());
}

// Maximal relative fluctuation of the kernel around equilibrium over [T, inf):
//   eps(T) = sup_{t>=T} sup_{a,b} |2 pi K_t(a-b) - 1| = 2 sum_{n>=1} e^{-n^2 T},
// the supremum being attained at t = T, zero angle difference.
inline double fluctuation(double T) {
    detail::check_time(T, "kernel fluctuation");
    double sum = 0.0;
    for (int n = 1; n <= series_max_terms; ++n) {
        double term = 2.0 * std::exp(-static_cast<double>(n) * n * T);
        if (term < series_cutoff) break;
        sum += term;
    }
    return sum;
}

// Amplitude h(t) = 2 e^{-t} of the first Fourier mode; the single-site field
// induced at time zero by conditioning the evolved layer.  The alternating
// sign pattern is applied per site by the lattice model, not here.
inline double effective_field(double t) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::domain_error("effective_field: time must be finite and >= 0");
    return 2.0 * std::exp(-t);
}

// CDF of the increment on [0, 2pi]:
//   F_t(x) = x/2pi + (1/pi) * sum_{n>=1} e^{-n^2 t} sin(n x) / n.
// Used by goodness-of-fit tests and the kernel table tool.  Needs t large
// enough for the Fourier series to be practical (t >= 0.005).
inline double cdf(double x, double t) {
    detail::check_time(t, "kernel cdf");
    if (t < 0.005)
        throw std::domain_error("kernel cdf: t below supported range");
    double sum = x / two_pi;
    for (int n = 1; n <= 512; ++n) {
        double amp = std::exp(-static_cast<double>(n) * n * t);
        if (amp / n < series_cutoff) break;
        sum += amp * std::sin(n * x) / (pi * n);
    }
    return sum;
}

} // namespace rotor::kernel
