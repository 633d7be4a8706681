#pragma once

#include <cmath>

namespace rotor {

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double pi = 3.1415926535897932384626433832795;

// Wrap any real angle into [0, 2*pi).
inline double wrap_angle(double a) {
    double w = std::fmod(a, two_pi);
    if (w < 0.0) w += two_pi;
    if (w >= two_pi) w = 0.0;
    return w;
}

// Smallest signed representative of a-b, in [-pi, pi).
inline double wrap_signed(double d) {
    double w = std::fmod(d, two_pi);
    if (w < -pi) w += two_pi;
    if (w >= pi) w -= two_pi;
    return w;
}

// Circular distance, in [0, pi].
inline double circular_distance(double a, double b) {
    double d = std::fabs(std::fmod(a - b, two_pi));
    if (d > pi) d = two_pi - d;
    return d;
}

// Reflection x -> (2*pi - x) mod 2*pi; the left-right mirror of the circle.
inline double reflect_angle(double a) { return wrap_angle(two_pi - a); }

// cos with an evaluation path that is bit-identical under argument negation.
inline double cos_even(double d) { return std::cos(std::fabs(d)); }

// sin with an evaluation path that negates bit-exactly under argument negation.
inline double sin_odd(double a) {
    return a < 0.0 ? -std::sin(-a) : std::sin(a);
}

} // namespace rotor
