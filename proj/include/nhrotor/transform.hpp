#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "nhrotor/state.hpp"

namespace nhrotor {
namespace detail {

// Process-lifetime cache of in-place 2D FFTW plans keyed by (edge size, sign).
// FFTW_ESTIMATE keeps planning deterministic; FFTW_UNALIGNED lets one plan
// serve any buffer so plans are reusable across states of the same size.
inline fftw_plan fft_plan_2d(int n, int sign) {
    static std::map<std::pair<int, int>, fftw_plan> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find({n, sign});
    if (it != cache.end()) return it->second;

    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    if (!buf) throw std::bad_alloc();
    fftw_plan plan = fftw_plan_dft_2d(n, n, buf, buf, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan) throw std::runtime_error("fftw_plan_dft_2d failed");
    cache.emplace(std::pair{n, sign}, plan);
    return plan;
}

}  // namespace detail

// Momentum -> angle, in place. The angle-side amplitudes are
//   psi(k1,k2) = (1/2M) sum_{n1,n2} psi_{n1,n2} exp(i n1 th_k1 + i n2 th_k2),
// evaluated with a radix-2 FFT; the (-1)^(k1+k2) factor absorbs the index
// offset n = row - M. The map is unitary on the stored amplitudes.
inline void to_angle_in_place(TwoRotorState& psi) {
    if (psi.representation() != Representation::momentum) {
        throw std::invalid_argument("to_angle: state is not in the momentum representation");
    }
    const int n = psi.grid().size();
    fftw_complex* buf = reinterpret_cast<fftw_complex*>(psi.amps().data());
    fftw_execute_dft(detail::fft_plan_2d(n, FFTW_BACKWARD), buf, buf);

    const double scale = 1.0 / n;
    cplx* a = psi.amps().data();
    for (int k1 = 0; k1 < n; ++k1) {
        for (int k2 = 0; k2 < n; ++k2) {
            a[static_cast<std::size_t>(k1) * n + k2] *=
                ((k1 + k2) & 1) ? -scale : scale;
        }
    }
    psi.set_representation(Representation::angle);
}

// Angle -> momentum, in place. Exact inverse of to_angle_in_place.
inline void to_momentum_in_place(TwoRotorState& psi) {
    if (psi.representation() != Representation::angle) {
        throw std::invalid_argument("to_momentum: state is not in the angle representation");
    }
    const int n = psi.grid().size();
    const double scale = 1.0 / n;
    cplx* a = psi.amps().data();
    for (int k1 = 0; k1 < n; ++k1) {
        for (int k2 = 0; k2 < n; ++k2) {
            a[static_cast<std::size_t>(k1) * n + k2] *=
                ((k1 + k2) & 1) ? -scale : scale;
        }
    }
    fftw_complex* buf = reinterpret_cast<fftw_complex*>(psi.amps().data());
    fftw_execute_dft(detail::fft_plan_2d(n, FFTW_FORWARD), buf, buf);
    psi.set_representation(Representation::momentum);
}

inline TwoRotorState to_angle(TwoRotorState psi) {
    to_angle_in_place(psi);
    return psi;
}

inline TwoRotorState to_momentum(TwoRotorState psi) {
    to_momentum_in_place(psi);
    return psi;
}

}  // namespace nhrotor
