#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhrotor/errors.hpp"
#include "nhrotor/grid.hpp"
#include "nhrotor/numeric.hpp"

namespace nhrotor {

enum class Representation { momentum, angle };

// Joint state of the two rotors on the truncated product basis.
//
// Amplitudes are stored flat and row-major: entry (i, j) = i * size + j where
// i indexes rotor 1 and j rotor 2. In the momentum representation row i holds
// momentum index n1 = i - M; in the angle representation it holds angle node
// theta_i. The stored vector is kept unit-norm by the stepping layer; the
// amplification shed by non-unitary evolution is accounted for in log_norm.
class TwoRotorState {
public:
    explicit TwoRotorState(const MomentumGrid& grid,
                           Representation rep = Representation::momentum)
        : grid_(grid),
          rep_(rep),
          amps_(static_cast<std::size_t>(grid.size()) * grid.size()) {}

    const MomentumGrid& grid() const noexcept { return grid_; }
    Representation representation() const noexcept { return rep_; }
    void set_representation(Representation rep) noexcept { rep_ = rep; }

    // Cumulative natural log of the norm shed by renormalize() since t0.
    double log_norm() const noexcept { return log_norm_; }
    void add_log_norm(double delta) noexcept { log_norm_ += delta; }

    std::span<cplx> amps() noexcept { return amps_; }
    std::span<const cplx> amps() const noexcept { return amps_; }

    // Access by signed momentum indices; valid in the momentum representation.
    cplx& at(int n1, int n2) {
        return amps_[flat_index(n1, n2)];
    }
    const cplx& at(int n1, int n2) const {
        return amps_[const_cast<TwoRotorState*>(this)->flat_index(n1, n2)];
    }

    std::size_t flat_index(int n1, int n2) const {
        const int m = grid_.half_width();
        if (n1 < -m || n1 >= m || n2 < -m || n2 >= m) {
            throw std::out_of_range("TwoRotorState: momentum index outside [-M, M-1]");
        }
        return static_cast<std::size_t>(n1 + m) * grid_.size() +
               static_cast<std::size_t>(n2 + m);
    }

    // Overflow-safe Euclidean norm of the stored amplitudes.
    double norm() const { return stable_norm(amps_); }

    // Scales the amplitudes back to unit norm, accrues the shed factor into
    // log_norm, and returns the log increment. Throws NumericError when the
    // norm is zero or non-finite (blow-up / total decay).
    double renormalize() {
        const double s = norm();
        if (s == 0.0) {
            throw NumericError("renormalize: state norm vanished");
        }
        if (!std::isfinite(s)) {
            throw NumericError("renormalize: state norm is non-finite (norm = " +
                               std::to_string(s) + ")");
        }
        const double inv = 1.0 / s;
        for (cplx& z : amps_) z *= inv;
        const double inc = std::log(s);
        log_norm_ += inc;
        return inc;
    }

private:
    MomentumGrid grid_;
    Representation rep_;
    std::vector<cplx> amps_;
    double log_norm_ = 0.0;
};

// Product state with both rotors in the p = 0 momentum eigenstate.
inline TwoRotorState ground_product_state(const MomentumGrid& grid) {
    TwoRotorState psi(grid);
    psi.at(0, 0) = 1.0;
    return psi;
}

// Correlated two-rotor Gaussian ridge: amplitude exp(-n^2 / sigma) on the
// diagonal pairs (n1, n2) = (n, n+1), zero elsewhere, normalized after
// truncation. sigma is in units of squared momentum index. Throws
// std::invalid_argument when the truncation drops more than 1e-8 of the
// untruncated weight; the message reports the actual dropped mass.
inline TwoRotorState entangled_gaussian_state(const MomentumGrid& grid, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("entangled_gaussian_state: sigma must be positive and finite");
    }
    const int m = grid.half_width();

    // Untruncated weight, summed over enough of the tail to exhaust doubles:
    // terms fall below 1e-22 once |n| > 5*sqrt(sigma).
    const long long n_ext = std::max<long long>(
        m + 2, static_cast<long long>(std::ceil(5.0 * std::sqrt(sigma))));
    double total = 0.0;
    for (long long n = -n_ext; n <= n_ext; ++n) {
        const double w = std::exp(-static_cast<double>(n) * n / sigma);
        total += w * w;
    }

    // Kept weight: pairs (n, n+1) need both indices in [-M, M-1].
    double kept = 0.0;
    TwoRotorState psi(grid);
    for (int n = -m; n <= m - 2; ++n) {
        const double w = std::exp(-static_cast<double>(n) * n / sigma);
        psi.at(n, n + 1) = w;
        kept += w * w;
    }

    const double dropped = std::max(0.0, 1.0 - kept / total);
    if (dropped > 1e-8) {
        throw std::invalid_argument(
            "entangled_gaussian_state: grid truncates " + std::to_string(dropped) +
            " of the state weight (limit 1e-8); enlarge the grid or shrink sigma");
    }

    const double s = psi.norm();
    const double inv = 1.0 / s;
    for (cplx& z : psi.amps()) z *= inv;
    return psi;
}

}  // namespace nhrotor
