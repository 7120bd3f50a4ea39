#pragma once

// Shared helpers for the test suites: deterministic random states, comparison
// utilities, and scratch directories.

#include <unistd.h>

#include <atomic>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>

#include "nhrotor/state.hpp"

namespace testsupport {

using nhrotor::cplx;

// Deterministic random two-rotor state with unit norm.
inline nhrotor::TwoRotorState random_state(const nhrotor::MomentumGrid& grid,
                                           std::uint64_t seed,
                                           nhrotor::Representation rep =
                                               nhrotor::Representation::momentum) {
    nhrotor::TwoRotorState psi(grid, rep);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (cplx& z : psi.amps()) z = cplx(dist(rng), dist(rng));
    const double inv = 1.0 / psi.norm();
    for (cplx& z : psi.amps()) z *= inv;
    return psi;
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

// Unique scratch directory, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        dir_ = std::filesystem::temp_directory_path() /
               ("nhrotor_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(dir_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }

private:
    std::filesystem::path dir_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace testsupport
