#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "nhrotor/numeric.hpp"
#include "nhrotor/params.hpp"

namespace nhrotor {

// Phase-space point of the classical rotor pair.
struct ClassicalPoint {
    double theta1 = 0.0;
    double p1 = 0.0;
    double theta2 = 0.0;
    double p2 = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform double in [0, 1) from a (seed, index) pair; order-independent, so
// ensembles are reproducible regardless of sampling loop structure.
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t z = splitmix64(seed ^ splitmix64(index));
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Ensemble matching the quantum ground product state: both momenta exactly
// zero, both angles independently uniform on [0, 2*pi).
inline std::vector<ClassicalPoint> sample_ensemble(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample_ensemble: ensemble must be non-empty");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<ClassicalPoint> pts(n);
    for (std::size_t t = 0; t < n; ++t) {
        pts[t].theta1 = two_pi * detail::uniform01(seed, 2 * t);
        pts[t].theta2 = two_pi * detail::uniform01(seed, 2 * t + 1);
    }
    return pts;
}

// One period of the classical limit of the kicked pair: momentum kicks from
// the cos(theta) potentials (including the eps*hbar coupling), then free
// streaming of the angles for one period. lambda plays no role here; this is
// the trajectory map of the Hermitian part. Angles are wrapped to [0, 2*pi),
// momenta are unbounded.
inline void classical_step_in_place(ClassicalPoint& pt, const SystemParams& par) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double s1 = std::sin(pt.theta1);
    const double s2 = std::sin(pt.theta2);
    const double c1 = std::cos(pt.theta1);
    const double c2 = std::cos(pt.theta2);
    pt.p1 += par.k1 * s1 + par.eps * par.hbar * s1 * c2;
    pt.p2 += par.k2 * s2 + par.eps * par.hbar * c1 * s2;
    pt.theta1 = std::fmod(pt.theta1 + pt.p1, two_pi);
    if (pt.theta1 < 0.0) pt.theta1 += two_pi;
    pt.theta2 = std::fmod(pt.theta2 + pt.p2, two_pi);
    if (pt.theta2 < 0.0) pt.theta2 += two_pi;
}

inline ClassicalPoint classical_step(ClassicalPoint pt, const SystemParams& par) {
    classical_step_in_place(pt, par);
    return pt;
}

// Ensemble mean of p1^2, accumulated pairwise in index order (deterministic).
inline double ensemble_p1_squared(std::span<const ClassicalPoint> pts) {
    if (pts.empty()) throw std::invalid_argument("ensemble_p1_squared: empty ensemble");
    std::vector<double> sq(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) sq[i] = pts[i].p1 * pts[i].p1;
    return pairwise_sum(sq) / static_cast<double>(pts.size());
}

// <p1^2> time series over n_steps periods, entry 0 being the initial
// ensemble. The ensemble is advanced in place.
inline std::vector<double> classical_p1_squared_series(std::span<ClassicalPoint> pts,
                                                       int n_steps,
                                                       const SystemParams& par) {
    if (n_steps < 1) throw std::invalid_argument("classical series: n_steps must be >= 1");
    std::vector<double> series;
    series.reserve(static_cast<std::size_t>(n_steps) + 1);
    series.push_back(ensemble_p1_squared(pts));
    for (int t = 1; t <= n_steps; ++t) {
        for (ClassicalPoint& pt : pts) classical_step_in_place(pt, par);
        series.push_back(ensemble_p1_squared(pts));
    }
    return series;
}

}  // namespace nhrotor
