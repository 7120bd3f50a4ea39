#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "nhrotor/numeric.hpp"
#include "nhrotor/observables.hpp"

namespace nhrotor {

struct FitResult {
    double value = 0.0;      // fitted parameter: D, zeta, or sigma
    double intercept = 0.0;  // ordinate intercept on the fitted scale
    double r2 = 0.0;         // coefficient of determination on the fitted scale
    double window_lo = 0.0;  // abscissa range actually used (t, or |p|)
    double window_hi = 0.0;
    int n_points = 0;
    bool low_dynamic_range = false;  // profile fits: < 4 decades of probability span
    bool model_mismatch = false;     // profile fits: the competing shape family fits
                                     // this data better; diffusion fit: R^2 < 0.96
};

namespace detail {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y,
                                  bool free_intercept) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit fit;
    const double dn = static_cast<double>(n);
    if (free_intercept) {
        const double det = dn * sxx - sx * sx;
        fit.slope = (dn * sxy - sx * sy) / det;
        fit.intercept = (sy - fit.slope * sx) / dn;
    } else {
        fit.slope = sxy / sxx;
        fit.intercept = 0.0;
    }
    const double mean_y = sy / dn;
    double ss_res = 0, ss_tot = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (fit.intercept + fit.slope * x[i]);
        const double d = y[i] - mean_y;
        ss_res += e * e;
        ss_tot += d * d;
        syy += y[i] * y[i];
    }
    // A series whose variation is pure roundoff (relative std below ~1e-12) is
    // perfectly described by a flat line; the usual ratio would divide noise by
    // noise and report garbage.
    if (ss_tot <= 1e-24 * syy) {
        fit.r2 = 1.0;
    } else {
        fit.r2 = 1.0 - ss_res / ss_tot;
    }
    return fit;
}

// Floor-filtered profile points, kept in parallel so the exponential and
// Gaussian models can be compared on identical data.
struct ProfilePoints {
    std::vector<double> ap;   // |p|
    std::vector<double> psq;  // p^2
    std::vector<double> lp;   // ln P
    double pmax = 0.0;
    double pmin = std::numeric_limits<double>::infinity();
};

inline ProfilePoints collect_profile(const MomentumMarginal& marg, double floor) {
    ProfilePoints pts;
    for (int i = 0; i < marg.size(); ++i) {
        if (marg.prob[i] > floor) {
            const double p = marg.momentum(i);
            pts.ap.push_back(std::fabs(p));
            pts.psq.push_back(p * p);
            pts.lp.push_back(std::log(marg.prob[i]));
            pts.pmax = std::max(pts.pmax, marg.prob[i]);
            pts.pmin = std::min(pts.pmin, marg.prob[i]);
        }
    }
    return pts;
}

}  // namespace detail

// Slope of <p^2>(t) over the step window [t_lo, t_hi] (indices into the
// series). NaN entries (unsampled steps) are skipped. With free_intercept the
// early-time transient is absorbed into the intercept; otherwise the line is
// forced through the origin.
inline FitResult fit_linear_diffusion(std::span<const double> p2_series, int t_lo, int t_hi,
                                      bool free_intercept = true) {
    t_lo = std::max(t_lo, 0);
    t_hi = std::min<int>(t_hi, static_cast<int>(p2_series.size()) - 1);
    std::vector<double> x, y;
    for (int t = t_lo; t <= t_hi; ++t) {
        if (std::isnan(p2_series[t])) continue;
        x.push_back(static_cast<double>(t));
        y.push_back(p2_series[t]);
    }
    if (x.size() < 3) {
        throw std::invalid_argument("fit_linear_diffusion: fewer than 3 usable points in window");
    }
    const auto line = detail::least_squares_line(x, y, free_intercept);
    FitResult out;
    out.value = line.slope;
    out.intercept = line.intercept;
    out.r2 = line.r2;
    out.window_lo = x.front();
    out.window_hi = x.back();
    out.n_points = static_cast<int>(x.size());
    out.model_mismatch = line.r2 < 0.96;  // window not well described by a line
    return out;
}

// Localization length zeta of an exponentially localized profile
// P(p) ~ exp(-|p|/zeta), from least squares of ln P against |p|. Sites with
// P <= floor are ignored. The central core |p| < zeta is excluded using a
// first-pass estimate of zeta (one refinement); the core rounds off and would
// otherwise bias the tail slope. model_mismatch is set when ln P against p^2
// describes the same points better than the exponential model does (or the
// profile does not decay at all).
inline FitResult fit_exponential_localization(const MomentumMarginal& marg,
                                              double floor = 1e-12) {
    auto pts = detail::collect_profile(marg, floor);
    if (pts.ap.size() < 10) {
        throw std::invalid_argument("fit_exponential_localization: positive mass on fewer than 10 sites");
    }

    auto line = detail::least_squares_line(pts.ap, pts.lp, true);
    if (line.slope < 0.0) {
        const double core = -1.0 / line.slope;  // first-pass zeta
        std::vector<double> ap2, psq2, lp2;
        for (std::size_t i = 0; i < pts.ap.size(); ++i) {
            if (pts.ap[i] >= core) {
                ap2.push_back(pts.ap[i]);
                psq2.push_back(pts.psq[i]);
                lp2.push_back(pts.lp[i]);
            }
        }
        if (ap2.size() >= 10) {
            pts.ap = std::move(ap2);
            pts.psq = std::move(psq2);
            pts.lp = std::move(lp2);
            line = detail::least_squares_line(pts.ap, pts.lp, true);
        }
    }
    const auto rival = detail::least_squares_line(pts.psq, pts.lp, true);

    FitResult out;
    out.value = line.slope < 0.0 ? -1.0 / line.slope
                                 : std::numeric_limits<double>::infinity();
    out.intercept = line.intercept;
    out.r2 = line.r2;
    const auto [lo, hi] = std::minmax_element(pts.ap.begin(), pts.ap.end());
    out.window_lo = *lo;
    out.window_hi = *hi;
    out.n_points = static_cast<int>(pts.ap.size());
    out.low_dynamic_range = std::log10(pts.pmax / pts.pmin) < 4.0;
    out.model_mismatch = !(line.slope < 0.0) || rival.r2 > line.r2;
    return out;
}

// Gaussian width sigma of a diffusive profile P(p) ~ exp(-p^2/sigma), from
// least squares of ln P against p^2. Same floor and flags as the exponential
// fit; no core exclusion (the Gaussian model covers the core). model_mismatch
// mirrors the exponential fit: set when ln P against |p| wins on the same
// points.
inline FitResult fit_gaussian(const MomentumMarginal& marg, double floor = 1e-12) {
    const auto pts = detail::collect_profile(marg, floor);
    if (pts.psq.size() < 10) {
        throw std::invalid_argument("fit_gaussian: positive mass on fewer than 10 sites");
    }
    const auto line = detail::least_squares_line(pts.psq, pts.lp, true);
    const auto rival = detail::least_squares_line(pts.ap, pts.lp, true);
    FitResult out;
    out.value = line.slope < 0.0 ? -1.0 / line.slope
                                 : std::numeric_limits<double>::infinity();
    out.intercept = line.intercept;
    out.r2 = line.r2;
    const auto [lo, hi] = std::minmax_element(pts.ap.begin(), pts.ap.end());
    out.window_lo = *lo;
    out.window_hi = *hi;
    out.n_points = static_cast<int>(pts.psq.size());
    out.low_dynamic_range = std::log10(pts.pmax / pts.pmin) < 4.0;
    out.model_mismatch = !(line.slope < 0.0) || rival.r2 > line.r2;
    return out;
}

struct SaturationResult {
    double mean = 0.0;   // mean over the trailing window
    double drift = 0.0;  // fitted relative change across the trailing window
    bool saturated = false;
};

// Plateau detector: mean over the trailing `tail_fraction` of the series and
// the relative linear drift across that window; |drift| < 5% is "saturated".
// NaN entries (unsampled steps) are ignored.
inline SaturationResult saturation_value(std::span<const double> series,
                                         double tail_fraction = 0.2) {
    if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
        throw std::invalid_argument("saturation_value: tail_fraction must be in (0, 1]");
    }
    std::vector<double> clean;
    clean.reserve(series.size());
    for (double v : series) {
        if (!std::isnan(v)) clean.push_back(v);
    }
    if (clean.size() < 10) {
        throw std::invalid_argument("saturation_value: fewer than 10 usable points");
    }
    const std::size_t k = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::floor(clean.size() * tail_fraction)));
    std::span<const double> tail(clean.data() + (clean.size() - k), k);

    SaturationResult out;
    out.mean = pairwise_sum(tail) / static_cast<double>(k);
    std::vector<double> x(k);
    for (std::size_t i = 0; i < k; ++i) x[i] = static_cast<double>(i);
    const auto line = detail::least_squares_line(x, tail, true);
    const double change = line.slope * static_cast<double>(k - 1);
    if (out.mean != 0.0) {
        out.drift = change / std::fabs(out.mean);
    } else {
        out.drift = (change == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    }
    out.saturated = std::fabs(out.drift) < 0.05;
    return out;
}

}  // namespace nhrotor
