#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nhrotor {

// Truncated momentum basis for a single rotor. Integer indices n run over
// [-M, M-1] so the basis has 2M sites; physical momentum is p = n * hbar.
// The conjugate angle grid has the same number of nodes, theta_k = 2*pi*k/(2M).
// 2M is kept a power of two so angle<->momentum transforms stay radix-2.
class MomentumGrid {
public:
    MomentumGrid(int half_width, double hbar) : m_(half_width), hbar_(hbar) {
        if (m_ < 2 || (m_ & (m_ - 1)) != 0) {
            throw std::invalid_argument(
                "MomentumGrid: half width must be a power of two >= 2, got " +
                std::to_string(m_));
        }
        if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) {
            throw std::invalid_argument("MomentumGrid: hbar must be positive and finite");
        }
    }

    int half_width() const noexcept { return m_; }
    // Sites per rotor (= 2M).
    int size() const noexcept { return 2 * m_; }
    double hbar() const noexcept { return hbar_; }

    // Physical momentum of index n in [-M, M-1].
    double momentum(int n) const noexcept { return n * hbar_; }
    // Angle node k in [0, 2M).
    double theta(int k) const noexcept {
        return 2.0 * std::numbers::pi * k / static_cast<double>(size());
    }

    // Storage row of momentum index n (row 0 holds n = -M).
    int row_of(int n) const noexcept { return n + m_; }
    // Momentum index stored at row i.
    int momentum_at(int row) const noexcept { return row - m_; }

    bool operator==(const MomentumGrid&) const = default;

private:
    int m_;
    double hbar_;
};

inline MomentumGrid make_grid(int half_width, double hbar) {
    return MomentumGrid(half_width, hbar);
}

}  // namespace nhrotor
