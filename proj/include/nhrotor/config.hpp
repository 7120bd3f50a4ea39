#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nhrotor/errors.hpp"
#include "nhrotor/params.hpp"

namespace nhrotor {

enum class InitialStateKind { ground_product, entangled_gaussian };
enum class SpectralMode { full, dominant };

// Sampling cadences in steps; 0 disables an observer. The final-step
// marginal is always written regardless of marginal_every.
struct ObserverConfig {
    int p1_sq_every = 1;
    int entropy_every = 0;
    int marginal_every = 0;
    int rho_spectrum_every = 0;
};

struct ClassicalConfig {
    bool enabled = false;
    long long n_trajectories = 100000;
    std::uint64_t seed = 1;
};

struct SpectralConfig {
    bool enabled = false;
    SpectralMode mode = SpectralMode::full;
    int cap = 4096;
};

// Fully resolved description of one experiment. The canonical text rendering
// doubles as the reproducibility record: its hash is stamped on every
// artifact the run produces.
struct ExperimentConfig {
    SystemParams params;
    int m = 1024;        // momentum half-width per rotor
    int steps = 100;
    InitialStateKind initial = InitialStateKind::ground_product;
    double sigma = 12000.0;  // entangled_gaussian width
    double alias_threshold = 0.01;
    ObserverConfig observers;
    ClassicalConfig classical;
    SpectralConfig spectral;
    std::string out_dir;  // empty = derived by the CLI; never part of the hash

    void validate() const {
        try {
            params.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        if (m < 2 || (m & (m - 1)) != 0) {
            throw ConfigError("config: grid.m must be a power of two >= 2, got " +
                              std::to_string(m));
        }
        if (steps < 1) throw ConfigError("config: run.steps must be >= 1");
        if (!(alias_threshold > 0.0)) {
            throw ConfigError("config: run.alias_threshold must be positive (1.0 disables the guard)");
        }
        if (initial == InitialStateKind::entangled_gaussian &&
            (!(sigma > 0.0) || !std::isfinite(sigma))) {
            throw ConfigError("config: initial.sigma must be positive and finite");
        }
        for (int v : {observers.p1_sq_every, observers.entropy_every,
                      observers.marginal_every, observers.rho_spectrum_every}) {
            if (v < 0) throw ConfigError("config: observer cadences must be >= 0 (0 = off)");
        }
        if (classical.enabled && classical.n_trajectories < 1) {
            throw ConfigError("config: classical.n_trajectories must be >= 1");
        }
        if (spectral.enabled) {
            if (spectral.cap < 1) throw ConfigError("config: spectral.cap must be >= 1");
            const long long dim = 4LL * m * m;
            if (dim > spectral.cap) {
                throw ConfigError("config: spectral dimension (2m)^2 = " + std::to_string(dim) +
                                  " exceeds spectral.cap " + std::to_string(spectral.cap));
            }
        }
    }

    std::string canonical_text() const;
    std::string hash() const;
};

namespace detail {

// Shortest text that parses back to exactly v.
inline std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline double parse_double(std::string_view key, std::string_view v) {
    double out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw ConfigError("config: key '" + std::string(key) + "' expects a number, got '" +
                          std::string(v) + "'");
    }
    return out;
}

inline long long parse_int(std::string_view key, std::string_view v) {
    long long out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw ConfigError("config: key '" + std::string(key) + "' expects an integer, got '" +
                          std::string(v) + "'");
    }
    return out;
}

inline std::uint64_t parse_u64(std::string_view key, std::string_view v) {
    std::uint64_t out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw ConfigError("config: key '" + std::string(key) +
                          "' expects an unsigned integer, got '" + std::string(v) + "'");
    }
    return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: key '" + std::string(key) + "' expects true/false, got '" +
                      std::string(v) + "'");
}

// Single dispatch point for file keys and --set overrides, so both paths
// share the schema and its error messages.
inline void set_key(ExperimentConfig& cfg, std::string_view section, std::string_view key,
                    std::string_view value) {
    const std::string full = std::string(section) + "." + std::string(key);
    auto& c = cfg;
    if (section == "system") {
        if (key == "k1") c.params.k1 = parse_double(full, value);
        else if (key == "k2") c.params.k2 = parse_double(full, value);
        else if (key == "lambda1") c.params.lambda1 = parse_double(full, value);
        else if (key == "lambda2") c.params.lambda2 = parse_double(full, value);
        else if (key == "eps") c.params.eps = parse_double(full, value);
        else if (key == "hbar") c.params.hbar = parse_double(full, value);
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "grid") {
        if (key == "m") c.m = static_cast<int>(parse_int(full, value));
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "run") {
        if (key == "steps") c.steps = static_cast<int>(parse_int(full, value));
        else if (key == "alias_threshold") c.alias_threshold = parse_double(full, value);
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "initial") {
        if (key == "type") {
            if (value == "ground_product") c.initial = InitialStateKind::ground_product;
            else if (value == "entangled_gaussian") c.initial = InitialStateKind::entangled_gaussian;
            else throw ConfigError("config: initial.type must be ground_product or "
                                   "entangled_gaussian, got '" + std::string(value) + "'");
        } else if (key == "sigma") {
            c.sigma = parse_double(full, value);
        } else {
            throw ConfigError("config: unknown key '" + full + "'");
        }
    } else if (section == "observers") {
        if (key == "p1_sq_every") c.observers.p1_sq_every = static_cast<int>(parse_int(full, value));
        else if (key == "entropy_every") c.observers.entropy_every = static_cast<int>(parse_int(full, value));
        else if (key == "marginal_every") c.observers.marginal_every = static_cast<int>(parse_int(full, value));
        else if (key == "rho_spectrum_every") c.observers.rho_spectrum_every = static_cast<int>(parse_int(full, value));
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "classical") {
        if (key == "enabled") c.classical.enabled = parse_bool(full, value);
        else if (key == "n_trajectories") c.classical.n_trajectories = parse_int(full, value);
        else if (key == "seed") c.classical.seed = parse_u64(full, value);
        else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "spectral") {
        if (key == "enabled") c.spectral.enabled = parse_bool(full, value);
        else if (key == "mode") {
            if (value == "full") c.spectral.mode = SpectralMode::full;
            else if (value == "dominant") c.spectral.mode = SpectralMode::dominant;
            else throw ConfigError("config: spectral.mode must be full or dominant, got '" +
                                   std::string(value) + "'");
        } else if (key == "cap") {
            c.spectral.cap = static_cast<int>(parse_int(full, value));
        } else {
            throw ConfigError("config: unknown key '" + full + "'");
        }
    } else if (section == "output") {
        if (key == "dir") c.out_dir = std::string(value);
        else throw ConfigError("config: unknown key '" + full + "'");
    } else {
        throw ConfigError("config: unknown section '" + std::string(section) + "'");
    }
}

}  // namespace detail

// Fixed-order INI covering every key that affects the computation. output.dir
// deliberately does not appear: the experiment's identity (and so its hash)
// must not depend on where the artifacts happen to land.
inline std::string ExperimentConfig::canonical_text() const {
    using detail::fmt_double;
    std::ostringstream out;
    out << "[system]\n"
        << "k1 = " << fmt_double(params.k1) << "\n"
        << "k2 = " << fmt_double(params.k2) << "\n"
        << "lambda1 = " << fmt_double(params.lambda1) << "\n"
        << "lambda2 = " << fmt_double(params.lambda2) << "\n"
        << "eps = " << fmt_double(params.eps) << "\n"
        << "hbar = " << fmt_double(params.hbar) << "\n"
        << "\n[grid]\n"
        << "m = " << m << "\n"
        << "\n[run]\n"
        << "steps = " << steps << "\n"
        << "alias_threshold = " << fmt_double(alias_threshold) << "\n"
        << "\n[initial]\n"
        << "type = "
        << (initial == InitialStateKind::ground_product ? "ground_product" : "entangled_gaussian")
        << "\n"
        << "sigma = " << fmt_double(sigma) << "\n"
        << "\n[observers]\n"
        << "p1_sq_every = " << observers.p1_sq_every << "\n"
        << "entropy_every = " << observers.entropy_every << "\n"
        << "marginal_every = " << observers.marginal_every << "\n"
        << "rho_spectrum_every = " << observers.rho_spectrum_every << "\n"
        << "\n[classical]\n"
        << "enabled = " << (classical.enabled ? "true" : "false") << "\n"
        << "n_trajectories = " << classical.n_trajectories << "\n"
        << "seed = " << classical.seed << "\n"
        << "\n[spectral]\n"
        << "enabled = " << (spectral.enabled ? "true" : "false") << "\n"
        << "mode = " << (spectral.mode == SpectralMode::full ? "full" : "dominant") << "\n"
        << "cap = " << spectral.cap << "\n";
    return out.str();
}

// FNV-1a 64-bit over the canonical text, as 16 hex digits.
inline std::string ExperimentConfig::hash() const {
    const std::string text = canonical_text();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Strict INI-style parser: '#'/';' comments, [section] headers, key = value
// lines. Unknown sections/keys, duplicate keys, and junk lines are errors.
inline ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::string section;
    std::map<std::string, bool> seen;
    int line_no = 0;
    int keys_set = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        line = detail::trim(line);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("config: malformed section header at line " +
                                  std::to_string(line_no));
            }
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config: expected 'key = value' at line " + std::to_string(line_no) +
                              ": '" + std::string(line) + "'");
        }
        const std::string_view key = detail::trim(line.substr(0, eq));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config: empty key at line " + std::to_string(line_no));
        }
        if (section.empty()) {
            throw ConfigError("config: key '" + std::string(key) + "' before any [section] at line " +
                              std::to_string(line_no));
        }
        const std::string full = section + "." + std::string(key);
        if (seen[full]) {
            throw ConfigError("config: duplicate key '" + full + "' at line " +
                              std::to_string(line_no));
        }
        seen[full] = true;
        detail::set_key(cfg, section, key, value);
        ++keys_set;
    }
    if (keys_set == 0) {
        throw ConfigError("config: no keys set; an empty config does not describe an experiment");
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

// "section.key=value" override, as accepted by the CLI's --set.
inline void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("config: override must look like section.key=value, got '" +
                          std::string(assignment) + "'");
    }
    const std::string_view path = detail::trim(assignment.substr(0, eq));
    const std::string_view value = detail::trim(assignment.substr(eq + 1));
    const std::size_t dot = path.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == path.size()) {
        throw ConfigError("config: override key must look like section.key, got '" +
                          std::string(path) + "'");
    }
    detail::set_key(cfg, path.substr(0, dot), path.substr(dot + 1), value);
}

inline std::vector<std::string> preset_names() {
    return {"fig1a_lambda0", "fig1a_lambda0.05", "fig1a_lambda0.07", "fig1a_lambda0.1",
            "fig1a_lambda2.0", "fig1b_profiles", "fig2_ground", "fig2_maxent", "fig3_spectral"};
}

// Canned experiments at desk scale. Grid sizes are chosen per run so the
// evolving packet never reaches the truncation guard within the horizon:
// wider spreads (small lambda) get larger grids, localized runs smaller ones.
inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;  // K=5, eps=0.3, hbar=0.06 defaults
    auto lam = [&](double l) {
        cfg.params.lambda1 = l;
        cfg.params.lambda2 = l;
    };
    if (name == "fig1a_lambda0") {
        lam(0.0);
        cfg.m = 2048;
        cfg.steps = 100;
        cfg.classical.enabled = true;
    } else if (name == "fig1a_lambda0.05") {
        lam(0.05);
        cfg.m = 1024;
        cfg.steps = 100;
    } else if (name == "fig1a_lambda0.07") {
        lam(0.07);
        cfg.m = 1024;
        cfg.steps = 100;
    } else if (name == "fig1a_lambda0.1") {
        lam(0.1);
        cfg.m = 512;
        cfg.steps = 100;
    } else if (name == "fig1a_lambda2.0") {
        lam(2.0);
        cfg.m = 512;
        cfg.steps = 100;
    } else if (name == "fig1b_profiles") {
        lam(0.05);
        cfg.m = 1024;
        cfg.steps = 100;
        cfg.observers.marginal_every = 10;
    } else if (name == "fig2_ground") {
        lam(0.05);
        cfg.m = 1024;
        cfg.steps = 30;
        cfg.observers.entropy_every = 1;
        cfg.observers.rho_spectrum_every = 30;
    } else if (name == "fig2_maxent" || name == "fig2e_maxent") {
        lam(0.1);
        cfg.m = 512;
        cfg.steps = 50;
        cfg.initial = InitialStateKind::entangled_gaussian;
        cfg.sigma = 12000.0;
        cfg.observers.entropy_every = 1;
        cfg.observers.rho_spectrum_every = 50;
    } else if (name == "fig3_spectral") {
        lam(2.0);
        cfg.m = 16;
        cfg.steps = 100;
        cfg.spectral.enabled = true;
        cfg.spectral.mode = SpectralMode::full;
        // The dense eigensolve and the evolution are the same operator on
        // this small periodic grid; the truncated model is the object of
        // study, so the outer-band guard does not apply. 1.0 disables it.
        cfg.alias_threshold = 1.0;
    } else {
        std::string msg = "unknown preset '" + name + "'; available:";
        for (const std::string& p : preset_names()) msg += " " + p;
        throw ConfigError(msg);
    }
    return cfg;
}

}  // namespace nhrotor
