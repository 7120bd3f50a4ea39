#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "nhrotor/errors.hpp"
#include "nhrotor/grid.hpp"
#include "nhrotor/params.hpp"
#include "nhrotor/state.hpp"
#include "nhrotor/transform.hpp"

namespace nhrotor {

// Precomputed one-period tables for the split propagator.
//
// A period is: kick in the angle representation, then free rotation in the
// momentum representation. The kick factor at angle node (k1, k2) is
//   exp[ (l1*c1 + l2*c2)/hbar ] * exp[ -i (k1_*c1 + k2_*c2 + eps*hbar*c1*c2)/hbar ]
// with c_j = cos(theta_j); the free factor at momentum (n1, n2) is
//   exp[ -i hbar (n1^2 + n2^2) / 2 ],
// which factorizes, so only a one-axis table is stored for it. The kick table
// is genuinely two-dimensional because of the eps coupling.
class PrecomputedPropagator {
public:
    // exp(x) overflows double just above x = 709; leave headroom below that.
    static constexpr double max_kick_exponent = 700.0;

    PrecomputedPropagator(const SystemParams& params, const MomentumGrid& grid)
        : params_(params), grid_(grid) {
        params_.validate();
        const double gain = params_.kick_log_gain();
        if (gain > max_kick_exponent) {
            throw NumericError(
                "propagator: per-kick gain exponent (lambda1+lambda2)/hbar = " +
                std::to_string(gain) + " exceeds " +
                std::to_string(max_kick_exponent) +
                "; the kick table would overflow double precision");
        }

        const int n = grid_.size();
        std::vector<double> c(n);
        for (int k = 0; k < n; ++k) c[k] = std::cos(grid_.theta(k));

        kick_.resize(static_cast<std::size_t>(n) * n);
        const double inv_h = 1.0 / params_.hbar;
        for (int k1 = 0; k1 < n; ++k1) {
            const double c1 = c[k1];
            for (int k2 = 0; k2 < n; ++k2) {
                const double c2 = c[k2];
                const double grow = (params_.lambda1 * c1 + params_.lambda2 * c2) * inv_h;
                const double phase = -(params_.k1 * c1 + params_.k2 * c2 +
                                       params_.eps * params_.hbar * c1 * c2) * inv_h;
                kick_[static_cast<std::size_t>(k1) * n + k2] =
                    std::polar(std::exp(grow), phase);
            }
        }

        free_axis_.resize(n);
        for (int row = 0; row < n; ++row) {
            const double nn = static_cast<double>(grid_.momentum_at(row));
            free_axis_[row] = std::polar(1.0, -params_.hbar * nn * nn / 2.0);
        }
    }

    const SystemParams& params() const noexcept { return params_; }
    const MomentumGrid& grid() const noexcept { return grid_; }
    double kick_log_gain() const noexcept { return params_.kick_log_gain(); }

    // Kick factor at angle nodes (k1, k2).
    cplx kick_field(int k1, int k2) const {
        const int n = grid_.size();
        return kick_[static_cast<std::size_t>(k1) * n + k2];
    }
    // Free factor at momentum indices (n1, n2).
    cplx free_phase(int n1, int n2) const {
        return free_axis_[grid_.row_of(n1)] * free_axis_[grid_.row_of(n2)];
    }

    std::span<const cplx> kick_table() const noexcept { return kick_; }
    std::span<const cplx> free_axis() const noexcept { return free_axis_; }

private:
    SystemParams params_;
    MomentumGrid grid_;
    std::vector<cplx> kick_;       // angle-space, size (2M)^2
    std::vector<cplx> free_axis_;  // momentum-space, per axis, size 2M
};

inline PrecomputedPropagator build_propagator(const SystemParams& params,
                                              const MomentumGrid& grid) {
    return PrecomputedPropagator(params, grid);
}

// Applies one raw period (kick, then free rotation) without renormalizing.
// gain_scale multiplies every kick factor; passing exp(-(l1+l2)/hbar) turns
// the period map into its norm-tamed version for spectral work.
inline void apply_period_in_place(TwoRotorState& psi,
                                  const PrecomputedPropagator& prop,
                                  double gain_scale = 1.0) {
    if (psi.grid() != prop.grid()) {
        throw std::invalid_argument("apply_period: state and propagator grids differ");
    }
    if (psi.representation() != Representation::momentum) {
        throw std::invalid_argument("apply_period: state is not in the momentum representation");
    }
    const int n = psi.grid().size();
    cplx* a = psi.amps().data();

    to_angle_in_place(psi);
    const cplx* kick = prop.kick_table().data();
    const std::size_t total = static_cast<std::size_t>(n) * n;
    if (gain_scale == 1.0) {
        for (std::size_t i = 0; i < total; ++i) a[i] *= kick[i];
    } else {
        for (std::size_t i = 0; i < total; ++i) a[i] *= kick[i] * gain_scale;
    }
    to_momentum_in_place(psi);

    const cplx* f = prop.free_axis().data();
    for (int i = 0; i < n; ++i) {
        const cplx fi = f[i];
        cplx* row = a + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) row[j] *= fi * f[j];
    }
}

// One Floquet period with renormalization; returns the shed log-norm
// increment ln||U psi||. Non-finite or vanished norms surface as NumericError.
inline double step_in_place(TwoRotorState& psi, const PrecomputedPropagator& prop) {
    apply_period_in_place(psi, prop);
    return psi.renormalize();
}

inline TwoRotorState step(TwoRotorState psi, const PrecomputedPropagator& prop) {
    step_in_place(psi, prop);
    return psi;
}

}  // namespace nhrotor
