#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nhrotor/classical.hpp"
#include "nhrotor/config.hpp"
#include "nhrotor/evolve.hpp"
#include "nhrotor/fit.hpp"
#include "nhrotor/floquet.hpp"
#include "nhrotor/observables.hpp"
#include "nhrotor/version.hpp"

namespace nhrotor {

namespace detail {

inline void atomic_write(const std::filesystem::path& dir, const std::string& name,
                         const std::string& content) {
    const std::filesystem::path tmp = dir / (".tmp_" + name);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw std::runtime_error("failed to write " + tmp.string());
    }
    std::filesystem::rename(tmp, dir / name);
}

inline std::string csv_field(double v) {
    if (std::isnan(v)) return "";  // unsampled
    return fmt_double(v);
}

inline nlohmann::json fit_to_json(const FitResult& fit, const char* value_name) {
    return {{value_name, fit.value},
            {"intercept", fit.intercept},
            {"r2", fit.r2},
            {"window", {fit.window_lo, fit.window_hi}},
            {"n_points", fit.n_points},
            {"low_dynamic_range", fit.low_dynamic_range},
            {"model_mismatch", fit.model_mismatch}};
}

inline nlohmann::json saturation_to_json(const SaturationResult& sat) {
    return {{"mean", sat.mean}, {"drift", sat.drift}, {"saturated", sat.saturated}};
}

}  // namespace detail

struct RunResult {
    std::filesystem::path dir;
    std::string config_hash;
    int aborted_at = -1;  // -1 = completed
    double peak_band_mass = 0.0;
    // Per-step series (index = step; NaN where the observer was off-cadence).
    std::vector<double> p1_sq;
    std::vector<double> entropy;
    std::optional<MomentumMarginal> final_marginal;
    ExperimentConfig config;
};

// Executes one experiment and persists every artifact into `dir`:
//   resolved_config.ini       exact configuration + hash (written first)
//   timeseries.csv            step, log_norm, p1_sq, entropy[, classical_p1_sq]
//   marginal_t<N>.csv         rotor-1 momentum profile at sampled steps + final
//   rho_spectrum_t<N>.csv     reduced-density eigenvalues at sampled steps
//   spectral.json             eigenpairs + fidelity series (when enabled)
//   fits.json                 diffusion/localization/width fits + saturation
//   run_meta.json             status, versions, hash, file list (written last)
// Every file carries the resolved config hash. Writes are atomic
// (temp + rename). A truncation-guard abort stops the evolution, keeps the
// artifacts produced so far, and is flagged in run_meta.json.
inline RunResult run_experiment(const ExperimentConfig& cfg_in,
                                const std::filesystem::path& dir) {
    ExperimentConfig cfg = cfg_in;
    cfg.validate();
    std::filesystem::create_directories(dir);

    const std::string hash = cfg.hash();
    std::vector<std::string> files;
    auto emit = [&](const std::string& name, const std::string& content) {
        detail::atomic_write(dir, name, content);
        files.push_back(name);
    };

    emit("resolved_config.ini",
         "# nhrotor " + std::string(version) + " resolved config\n# hash = " + hash + "\n" +
             cfg.canonical_text());

    const MomentumGrid grid = make_grid(cfg.m, cfg.params.hbar);
    TwoRotorState psi = cfg.initial == InitialStateKind::ground_product
                            ? ground_product_state(grid)
                            : entangled_gaussian_state(grid, cfg.sigma);
    auto prop = std::make_shared<const PrecomputedPropagator>(cfg.params, grid);

    // Spectral analysis runs before the evolution so the dominant mode can be
    // tracked as a fidelity observer along the trajectory.
    nlohmann::json spectral_json;
    std::shared_ptr<Eigen::VectorXcd> dominant;
    if (cfg.spectral.enabled) {
        spectral_json["schema"] = spectral_schema;
        spectral_json["config"] = hash;
        spectral_json["log_scale"] = cfg.params.kick_log_gain();
        nlohmann::json pairs_json = nlohmann::json::array();
        if (cfg.spectral.mode == SpectralMode::full) {
            const FloquetMatrix fm = build_floquet_matrix(cfg.params, grid, cfg.spectral.cap);
            std::vector<EigenPair> pairs = eig_full(fm);
            for (const EigenPair& p : pairs) {
                pairs_json.push_back({{"mu_re", p.mu.real()},
                                      {"mu_im", p.mu.imag()},
                                      {"eps_r", p.eps_r},
                                      {"eps_i", p.eps_i},
                                      {"residual", p.residual}});
            }
            dominant = std::make_shared<Eigen::VectorXcd>(std::move(pairs.front().vector));
        } else {
            const double scale = std::exp(-cfg.params.kick_log_gain());
            EigenPair top = dominant_eigenpair(make_period_action(prop, scale),
                                               grid.size() * grid.size(),
                                               cfg.params.kick_log_gain());
            pairs_json.push_back({{"mu_re", top.mu.real()},
                                  {"mu_im", top.mu.imag()},
                                  {"eps_r", top.eps_r},
                                  {"eps_i", top.eps_i},
                                  {"residual", top.residual},
                                  {"degenerate", top.degenerate}});
            dominant = std::make_shared<Eigen::VectorXcd>(std::move(top.vector));
        }
        spectral_json["eigenpairs"] = std::move(pairs_json);
    }

    // Scalar observers; slot order fixes the timeseries columns.
    std::vector<ScalarObserver> scalars;
    const int p1_slot = static_cast<int>(scalars.size());
    scalars.push_back({"p1_sq", cfg.observers.p1_sq_every,
                       [](const TwoRotorState& s) { return mean_p1_squared(s); }});
    const int entropy_slot = static_cast<int>(scalars.size());
    scalars.push_back({"entropy", cfg.observers.entropy_every,
                       [](const TwoRotorState& s) { return linear_entropy(reduced_density(s)); }});
    int fid_slot = -1;
    if (dominant) {
        fid_slot = static_cast<int>(scalars.size());
        scalars.push_back({"fidelity", 1, [dominant](const TwoRotorState& s) {
                               return fidelity(*dominant, s.amps());
                           }});
    }

    auto marginal_csv = [&](const MomentumMarginal& marg) {
        std::ostringstream out;
        out << "# schema=marginal.v" << marginal_schema << " config=" << hash << "\n"
            << "n,p,prob\n";
        for (int i = 0; i < marg.size(); ++i) {
            out << (i - marg.half_width) << "," << detail::fmt_double(marg.momentum(i)) << ","
                << detail::fmt_double(marg.prob[i]) << "\n";
        }
        return out.str();
    };
    std::set<int> marginal_steps;
    std::vector<SnapshotObserver> snapshots;
    if (cfg.observers.marginal_every > 0) {
        snapshots.push_back({cfg.observers.marginal_every, [&](int t, const TwoRotorState& s) {
                                 emit("marginal_t" + std::to_string(t) + ".csv",
                                      marginal_csv(momentum_marginal(s, 1)));
                                 marginal_steps.insert(t);
                             }});
    }
    if (cfg.observers.rho_spectrum_every > 0) {
        snapshots.push_back({cfg.observers.rho_spectrum_every, [&](int t, const TwoRotorState& s) {
                                 const RhoSpectrum spec = rho_spectrum(reduced_density(s));
                                 std::ostringstream out;
                                 out << "# schema=rho_spectrum.v" << rho_spectrum_schema
                                     << " config=" << hash << "\nrank,xi\n";
                                 for (std::size_t r = 0; r < spec.values.size(); ++r) {
                                     out << (r + 1) << "," << detail::fmt_double(spec.values[r])
                                         << "\n";
                                 }
                                 emit("rho_spectrum_t" + std::to_string(t) + ".csv", out.str());
                             }});
    }

    EvolveResult ev = evolve(std::move(psi), cfg.steps, *prop, std::move(scalars),
                             std::move(snapshots), {cfg.alias_threshold});
    const int last_step = ev.records.back().step;

    // Final momentum profile (written even when periodic marginals are off,
    // and on abort: fits and any post-hoc analysis need it).
    MomentumMarginal final_marg = momentum_marginal(ev.state, 1);
    if (!marginal_steps.contains(last_step)) {
        emit("marginal_t" + std::to_string(last_step) + ".csv", marginal_csv(final_marg));
    }

    std::vector<double> classical_series;
    if (cfg.classical.enabled) {
        std::vector<ClassicalPoint> ensemble =
            sample_ensemble(static_cast<std::size_t>(cfg.classical.n_trajectories),
                            cfg.classical.seed);
        classical_series = classical_p1_squared_series(ensemble, cfg.steps, cfg.params);
    }

    {
        std::ostringstream out;
        out << "# schema=timeseries.v" << timeseries_schema << " config=" << hash << "\n";
        out << "step,log_norm,p1_sq,entropy";
        if (cfg.classical.enabled) out << ",classical_p1_sq";
        if (fid_slot >= 0) out << ",fidelity";
        out << "\n";
        for (const TrajectoryRecord& rec : ev.records) {
            out << rec.step << "," << detail::fmt_double(rec.log_norm) << ","
                << detail::csv_field(rec.values[p1_slot]) << ","
                << detail::csv_field(rec.values[entropy_slot]);
            if (cfg.classical.enabled) {
                out << "," << detail::fmt_double(classical_series[rec.step]);
            }
            if (fid_slot >= 0) out << "," << detail::csv_field(rec.values[fid_slot]);
            out << "\n";
        }
        emit("timeseries.csv", out.str());
    }

    RunResult result;
    result.dir = dir;
    result.config_hash = hash;
    result.aborted_at = ev.aborted_at;
    result.peak_band_mass = ev.peak_band_mass;
    result.config = cfg;
    result.p1_sq.resize(ev.records.size());
    result.entropy.resize(ev.records.size());
    for (std::size_t i = 0; i < ev.records.size(); ++i) {
        result.p1_sq[i] = ev.records[i].values[p1_slot];
        result.entropy[i] = ev.records[i].values[entropy_slot];
    }

    {
        nlohmann::json fits;
        fits["schema"] = fits_schema;
        fits["config"] = hash;
        try {
            const FitResult d = fit_linear_diffusion(result.p1_sq, 5, 30);
            fits["diffusion"] = detail::fit_to_json(d, "D");
        } catch (const std::invalid_argument& e) {
            fits["diffusion"] = nullptr;
            fits["diffusion_note"] = e.what();
        }
        try {
            fits["exponential"] = detail::fit_to_json(fit_exponential_localization(final_marg), "zeta");
        } catch (const std::invalid_argument& e) {
            fits["exponential"] = nullptr;
            fits["exponential_note"] = e.what();
        }
        try {
            fits["gaussian"] = detail::fit_to_json(fit_gaussian(final_marg), "sigma");
        } catch (const std::invalid_argument& e) {
            fits["gaussian"] = nullptr;
            fits["gaussian_note"] = e.what();
        }
        nlohmann::json sat;
        try {
            sat["p1_sq"] = detail::saturation_to_json(saturation_value(result.p1_sq));
        } catch (const std::invalid_argument& e) {
            sat["p1_sq"] = nullptr;
            sat["p1_sq_note"] = e.what();
        }
        try {
            sat["entropy"] = detail::saturation_to_json(saturation_value(result.entropy));
        } catch (const std::invalid_argument& e) {
            sat["entropy"] = nullptr;
            sat["entropy_note"] = e.what();
        }
        fits["saturation"] = std::move(sat);
        emit("fits.json", fits.dump(2) + "\n");
    }

    if (cfg.spectral.enabled) {
        nlohmann::json fid_series = nlohmann::json::array();
        for (const TrajectoryRecord& rec : ev.records) {
            fid_series.push_back({{"step", rec.step}, {"fidelity", rec.values[fid_slot]}});
        }
        spectral_json["fidelity"] = std::move(fid_series);
        emit("spectral.json", spectral_json.dump(2) + "\n");
    }

    {
        const char* threads = std::getenv("OPENBLAS_NUM_THREADS");
        nlohmann::json meta;
        meta["version"] = version;
        meta["config"] = hash;
        meta["schemas"] = {{"timeseries", timeseries_schema},
                           {"marginal", marginal_schema},
                           {"rho_spectrum", rho_spectrum_schema},
                           {"spectral", spectral_schema},
                           {"fits", fits_schema}};
        meta["status"] = ev.aborted_at >= 0 ? "aborted" : "ok";
        meta["aborted_at"] = ev.aborted_at;
        meta["peak_band_mass"] = ev.peak_band_mass;
        meta["alias_threshold"] = cfg.alias_threshold;
        meta["threads"] = threads ? threads : "unset";
        if (cfg.classical.enabled) meta["classical_seed"] = cfg.classical.seed;
        meta["files"] = files;
        detail::atomic_write(dir, "run_meta.json", meta.dump(2) + "\n");
    }

    result.final_marginal = std::move(final_marg);
    return result;
}

struct ScanRow {
    double lambda = 0.0;
    std::string status;  // "ok", "aborted@<t>", or "failed: <reason>"
    double saturation_entropy = std::numeric_limits<double>::quiet_NaN();
    bool entropy_saturated = false;
    double saturation_p1_sq = std::numeric_limits<double>::quiet_NaN();
    bool p1_sq_saturated = false;
    double zeta = std::numeric_limits<double>::quiet_NaN();
    std::string run_hash;
};

// Runs the base experiment once per lambda (applied symmetrically to both
// rotors), writing each run under out_root/lambda_<i>_<value>/ and a summary
// scan.csv in out_root. Failed runs are recorded and the scan continues.
inline std::vector<ScanRow> lambda_scan(ExperimentConfig base,
                                        std::span<const double> lambdas,
                                        const std::filesystem::path& out_root) {
    if (lambdas.size() < 2) {
        throw ConfigError("scan: need at least 2 lambda values");
    }
    // The scan's whole point is the saturation columns, so make sure the
    // observers feeding them are on.
    if (base.observers.p1_sq_every == 0) base.observers.p1_sq_every = 1;
    if (base.observers.entropy_every == 0) base.observers.entropy_every = 1;

    std::filesystem::create_directories(out_root);
    std::vector<ScanRow> rows;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        ScanRow row;
        row.lambda = lambdas[i];
        ExperimentConfig cfg = base;
        cfg.params.lambda1 = lambdas[i];
        cfg.params.lambda2 = lambdas[i];
        char sub[64];
        std::snprintf(sub, sizeof sub, "lambda_%02zu_%g", i, lambdas[i]);
        try {
            const RunResult run = run_experiment(cfg, out_root / sub);
            row.run_hash = run.config_hash;
            row.status = run.aborted_at >= 0 ? "aborted@" + std::to_string(run.aborted_at) : "ok";
            try {
                const SaturationResult s = saturation_value(run.entropy);
                row.saturation_entropy = s.mean;
                row.entropy_saturated = s.saturated;
            } catch (const std::invalid_argument&) {}
            try {
                const SaturationResult s = saturation_value(run.p1_sq);
                row.saturation_p1_sq = s.mean;
                row.p1_sq_saturated = s.saturated;
            } catch (const std::invalid_argument&) {}
            if (run.final_marginal) {
                try {
                    row.zeta = fit_exponential_localization(*run.final_marginal).value;
                } catch (const std::invalid_argument&) {}
            }
        } catch (const std::exception& e) {
            std::string reason = e.what();
            for (char& c : reason) {
                if (c == ',' || c == '\n') c = ';';
            }
            row.status = "failed: " + reason;
        }
        rows.push_back(std::move(row));
    }

    std::ostringstream out;
    out << "# schema=scan.v" << scan_schema << " base_config=" << base.hash() << "\n";
    out << "lambda,status,saturation_entropy,entropy_saturated,saturation_p1_sq,"
           "p1_sq_saturated,zeta,run_hash\n";
    for (const ScanRow& r : rows) {
        out << detail::fmt_double(r.lambda) << "," << r.status << ","
            << detail::csv_field(r.saturation_entropy) << ","
            << (r.entropy_saturated ? "true" : "false") << ","
            << detail::csv_field(r.saturation_p1_sq) << ","
            << (r.p1_sq_saturated ? "true" : "false") << "," << detail::csv_field(r.zeta) << ","
            << r.run_hash << "\n";
    }
    detail::atomic_write(out_root, "scan.csv", out.str());
    return rows;
}

}  // namespace nhrotor
