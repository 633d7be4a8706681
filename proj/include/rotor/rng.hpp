#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rotor/angle.hpp"

namespace rotor {

// All randomness in the library flows through this generator so that runs are
// reproducible from a single 64-bit seed.  Uniform and Gaussian draws are
// hand-rolled (not std::*_distribution) so the byte stream does not depend on
// the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Derive an independent stream: base seed plus a stable index.  Used for
    // replicas, paths and chains running in parallel.
    static Rng stream(std::uint64_t base_seed, std::uint64_t index) {
        return Rng(base_seed + 0x9e3779b97f4a7c15ULL * (index + 1));
    }

    std::uint64_t raw() { return engine_(); }

    // Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard Gaussian via Box-Muller.  Always consumes exactly two uniforms
    // so the stream position is predictable.
    double gaussian() {
        double u1 = 1.0 - uniform(); // (0, 1], keeps the log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace rotor
