#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>

namespace nhrotor {

using cplx = std::complex<double>;

namespace detail {

inline double pairwise_sum_impl(const double* x, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum_impl(x, h) + pairwise_sum_impl(x + h, n - h);
}

inline double plain_sumsq_impl(const cplx* x, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double re = x[i].real();
            const double im = x[i].imag();
            s += re * re + im * im;
        }
        return s;
    }
    const std::size_t h = n / 2;
    return plain_sumsq_impl(x, h) + plain_sumsq_impl(x + h, n - h);
}

inline double scaled_sumsq_impl(const cplx* x, std::size_t n, double scale) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double re = x[i].real() / scale;
            const double im = x[i].imag() / scale;
            s += re * re + im * im;
        }
        return s;
    }
    const std::size_t h = n / 2;
    return scaled_sumsq_impl(x, h, scale) + scaled_sumsq_impl(x + h, n - h, scale);
}

}  // namespace detail

// Pairwise (cascade) summation: deterministic with O(eps * log n) relative error.
inline double pairwise_sum(std::span<const double> x) {
    return detail::pairwise_sum_impl(x.data(), x.size());
}

// Largest absolute real/imaginary component over the array; 0 for an empty span.
// NaN anywhere propagates to the result.
inline double max_abs_component(std::span<const cplx> a) {
    double m = 0.0;
    for (const cplx& z : a) {
        const double re = std::fabs(z.real());
        const double im = std::fabs(z.imag());
        if (std::isnan(re) || std::isnan(im)) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        if (re > m) m = re;
        if (im > m) m = im;
    }
    return m;
}

// Euclidean norm of a complex array, overflow-safe for component magnitudes up
// to ~1e300. Uses pairwise accumulation; falls back to a prescaled pass only
// when components leave the comfortably representable range.
inline double stable_norm(std::span<const cplx> a) {
    const double m = max_abs_component(a);
    if (m == 0.0) return 0.0;
    if (std::isnan(m) || std::isinf(m)) return m;
    if (m > 1e-140 && m < 1e140) {
        return std::sqrt(detail::plain_sumsq_impl(a.data(), a.size()));
    }
    return m * std::sqrt(detail::scaled_sumsq_impl(a.data(), a.size(), m));
}

// Squared Euclidean norm, same accumulation strategy as stable_norm.
inline double stable_norm_squared(std::span<const cplx> a) {
    const double m = max_abs_component(a);
    if (m == 0.0) return 0.0;
    if (std::isnan(m) || std::isinf(m)) return m;
    if (m > 1e-140 && m < 1e140) {
        return detail::plain_sumsq_impl(a.data(), a.size());
    }
    const double s = detail::scaled_sumsq_impl(a.data(), a.size(), m);
    return m * m * s;
}

}  // namespace nhrotor
