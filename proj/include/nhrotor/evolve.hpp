#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nhrotor/propagator.hpp"
#include "nhrotor/state.hpp"

namespace nhrotor {

// Scalar diagnostic sampled every `period` steps (step 0 included).
// period <= 0 disables the observer; its column is all NaN.
struct ScalarObserver {
    std::string name;
    int period = 1;
    std::function<double(const TwoRotorState&)> eval;
};

// Side-effect observer (file writers, spectra) sampled every `period` steps.
struct SnapshotObserver {
    int period = 10;
    std::function<void(int step, const TwoRotorState&)> visit;
};

struct TrajectoryRecord {
    int step = 0;
    double log_norm = 0.0;
    // One slot per scalar observer, NaN where the observer was not sampled.
    std::vector<double> values;
};

struct EvolveOptions {
    // Abort threshold for the truncation guard: the run stops once the
    // probability in the outer 5% momentum band of either rotor exceeds this.
    // 1.0 (or more) disables the guard.
    double alias_threshold = 0.01;
};

struct EvolveResult {
    std::vector<TrajectoryRecord> records;
    TwoRotorState state;       // final state, or the state at the abort step
    int aborted_at = -1;       // step where the guard tripped; -1 = completed
    double peak_band_mass = 0.0;
};

// Probability in the outer 5% momentum band, per rotor axis. A diffusing
// wavepacket that reaches the grid edge wraps around (the transform is
// periodic in the index), so edge mass is the truncation-error signal.
inline std::pair<double, double> edge_band_mass(const TwoRotorState& psi) {
    if (psi.representation() != Representation::momentum) {
        throw std::invalid_argument("edge_band_mass: state is not in the momentum representation");
    }
    const int m = psi.grid().half_width();
    const int n = psi.grid().size();
    const int cut = static_cast<int>(std::ceil(0.95 * m));  // band: |n| >= cut
    const cplx* a = psi.amps().data();

    std::vector<double> row_mass(n, 0.0), col_mass(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const cplx* row = a + static_cast<std::size_t>(i) * n;
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            const double w = std::norm(row[j]);
            s += w;
            col_mass[j] += w;
        }
        row_mass[i] = s;
    }
    double band1 = 0.0, band2 = 0.0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(i - m) >= cut) {
            band1 += row_mass[i];
            band2 += col_mass[i];
        }
    }
    return {band1, band2};
}

// Drives `n_steps` renormalized periods, sampling observers on their periods
// (step 0 is always recorded). The truncation guard is evaluated after every
// step; when it trips, the run stops with the offending step recorded and
// aborted_at set. All sampling and reductions are sequential, so repeated
// runs with identical inputs produce bitwise-identical records.
inline EvolveResult evolve(TwoRotorState psi, int n_steps,
                           const PrecomputedPropagator& prop,
                           std::vector<ScalarObserver> observers,
                           std::vector<SnapshotObserver> snapshots = {},
                           EvolveOptions opts = {}) {
    if (n_steps < 1) {
        throw std::invalid_argument("evolve: n_steps must be >= 1");
    }
    if (psi.representation() != Representation::momentum) {
        throw std::invalid_argument("evolve: state is not in the momentum representation");
    }
    if (!(opts.alias_threshold > 0.0)) {
        throw std::invalid_argument("evolve: alias_threshold must be positive");
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    EvolveResult result{{}, std::move(psi)};
    result.records.reserve(static_cast<std::size_t>(n_steps) + 1);

    auto sample = [&](int step) {
        TrajectoryRecord rec;
        rec.step = step;
        rec.log_norm = result.state.log_norm();
        rec.values.reserve(observers.size());
        for (const ScalarObserver& obs : observers) {
            const bool due = obs.period > 0 && step % obs.period == 0;
            rec.values.push_back(due ? obs.eval(result.state) : nan);
        }
        result.records.push_back(std::move(rec));
        for (const SnapshotObserver& snap : snapshots) {
            if (snap.period > 0 && step % snap.period == 0) {
                snap.visit(step, result.state);
            }
        }
    };

    sample(0);
    for (int t = 1; t <= n_steps; ++t) {
        step_in_place(result.state, prop);
        const auto [band1, band2] = edge_band_mass(result.state);
        const double band = std::max(band1, band2);
        if (band > result.peak_band_mass) result.peak_band_mass = band;
        sample(t);
        if (opts.alias_threshold < 1.0 && band > opts.alias_threshold) {
            result.aborted_at = t;
            break;
        }
    }
    return result;
}

}  // namespace nhrotor
