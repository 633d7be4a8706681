#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rotor {

struct MeanErr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

inline MeanErr mean_stderr(const std::vector<double>& xs) {
    MeanErr r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / r.n;
    if (r.n < 2) return r;
    double v = 0.0;
    for (double x : xs) v += (x - r.mean) * (x - r.mean);
    r.stderr_ = std::sqrt(v / (r.n * (r.n - 1.0)));
    return r;
}

// Batch-means standard error for correlated (MCMC) series.  Splits the series
// into n_batches contiguous blocks and uses the spread of block means.
inline MeanErr batch_means(const std::vector<double>& xs, int n_batches = 50) {
    if (n_batches < 2) throw std::invalid_argument("batch_means: need >= 2 batches");
    MeanErr r;
    r.n = xs.size();
    if (xs.size() < static_cast<std::size_t>(2 * n_batches)) return mean_stderr(xs);
    std::size_t bs = xs.size() / n_batches;
    std::vector<double> bm(n_batches);
    for (int b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < bs; ++k) s += xs[b * bs + k];
        bm[b] = s / bs;
    }
    MeanErr inner = mean_stderr(bm);
    r.mean = inner.mean;
    r.stderr_ = inner.stderr_;
    return r;
}

// One-sample Kolmogorov-Smirnov statistic against a cdf given as callable.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max(d, std::fabs(f - (i + 1) / n));
        d = std::max(d, std::fabs(f - i / n));
    }
    return d;
}

// KS critical value at the given significance, with the usual finite-sample
// correction; alpha = 0.01 gives the 99% band.
inline double ks_critical(std::size_t n, double alpha = 0.01) {
    double c;
    if (alpha <= 0.01) c = 1.628;
    else if (alpha <= 0.05) c = 1.358;
    else c = 1.224;
    double sn = std::sqrt(static_cast<double>(n));
    return c / (sn + 0.12 + 0.11 / sn);
}

// Chi-square upper quantile via the Wilson-Hilferty approximation; good to a
// fraction of a percent for the large dof we use.
inline double chi2_critical(int dof, double alpha = 0.01) {
    double z;
    if (alpha <= 0.01) z = 2.3263478740408408;
    else if (alpha <= 0.05) z = 1.6448536269514722;
    else z = 1.2815515655446004;
    double k = static_cast<double>(dof);
    double u = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * u * u * u;
}

// Length of the mean resultant vector of circular data; near 0 for uniform
// samples (fluctuations ~ n^{-1/2}), near 1 for concentrated ones.
inline double circular_resultant(const std::vector<double>& angles) {
    double c = 0.0, s = 0.0;
    for (double a : angles) {
        c += std::cos(a);
        s += std::sin(a);
    }
    double n = static_cast<double>(angles.size());
    return std::sqrt(c * c + s * s) / n;
}

} // namespace rotor
