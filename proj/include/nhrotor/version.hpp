#pragma once

namespace nhrotor {

inline constexpr const char* version = "0.1.0";

// Bump these when a file layout changes; every artifact records its own.
inline constexpr int timeseries_schema = 1;
inline constexpr int marginal_schema = 1;
inline constexpr int rho_spectrum_schema = 1;
inline constexpr int spectral_schema = 1;
inline constexpr int fits_schema = 1;
inline constexpr int scan_schema = 1;

}  // namespace nhrotor
