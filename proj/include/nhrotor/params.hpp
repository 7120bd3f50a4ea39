#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace nhrotor {

// Physical parameters of the kicked rotor pair.
//
// The per-kick potential of rotor j is (k_j + i*lambda_j) * cos(theta_j):
// k_j drives the usual momentum diffusion while lambda_j >= 0 is the strength
// of the non-Hermitian (gain/loss) part. eps couples the rotors through an
// eps*hbar*cos(theta_1)*cos(theta_2) term applied at the kicks, and hbar is
// the effective Planck constant (momentum spacing of the integer basis).
struct SystemParams {
    double k1 = 5.0;
    double k2 = 5.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double eps = 0.3;
    double hbar = 0.06;

    void validate() const {
        if (!(hbar > 0.0) || !std::isfinite(hbar)) {
            throw std::invalid_argument("SystemParams: hbar must be positive and finite");
        }
        for (double v : {k1, k2, eps}) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("SystemParams: kick/coupling strengths must be finite");
            }
        }
        for (double l : {lambda1, lambda2}) {
            if (!(l >= 0.0) || !std::isfinite(l)) {
                throw std::invalid_argument("SystemParams: lambda must be >= 0 and finite, got " +
                                            std::to_string(l));
            }
        }
    }

    // Natural log of the largest per-kick amplitude gain, exp((l1+l2)/hbar).
    double kick_log_gain() const noexcept { return (lambda1 + lambda2) / hbar; }

    static SystemParams symmetric(double k, double lambda, double eps, double hbar) {
        return SystemParams{k, k, lambda, lambda, eps, hbar};
    }
};

}  // namespace nhrotor
