// Command-line front end: run experiments from config files or presets,
// sweep lambda, and persist CSV/JSON artifacts.
//
// Exit codes: 0 ok, 2 bad configuration, 3 truncation-guard abort,
// 4 numeric/convergence failure, 1 unexpected internal error.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nhrotor/runner.hpp"

namespace {

// Parsed by hand rather than through a CLI11 vector option so that the
// positional config path after --lambda is never swallowed.
std::vector<double> parse_lambda_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
            throw nhrotor::ConfigError("--lambda: '" + item + "' is not a number");
        }
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

int execute_run(const nhrotor::ExperimentConfig& cfg, const std::filesystem::path& out) {
    const nhrotor::RunResult res = nhrotor::run_experiment(cfg, out);
    if (res.aborted_at >= 0) {
        std::cerr << "truncation guard tripped at step " << res.aborted_at
                  << " (outer-band probability " << res.peak_band_mass
                  << " > threshold " << res.config.alias_threshold
                  << "); partial artifacts in " << res.dir.string() << "\n";
        return 3;
    }
    std::cout << "ok: artifacts in " << res.dir.string() << " (config " << res.config_hash
              << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nhrotor: coupled quantum kicked rotors with non-Hermitian driving"};
    app.require_subcommand(1);

    int threads = 1;
    app.add_option("--threads", threads, "BLAS thread count (default 1, deterministic)")
        ->check(CLI::PositiveNumber);

    std::string config_path, preset_name, out_dir;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string lambda_list;
    bool print_only = false;

    CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment from a config file");
    run_cmd->add_option("config", config_path, "config file (INI-style, see README)")->required();

    CLI::App* preset_cmd = app.add_subcommand("preset", "execute a named canned experiment");
    preset_cmd->add_option("name", preset_name, "preset name (see README for the list)")
        ->required();
    preset_cmd->add_flag("--print", print_only, "print the resolved config instead of running");

    CLI::App* scan_cmd =
        app.add_subcommand("scan", "run a config once per lambda and summarize");
    scan_cmd->add_option("--lambda", lambda_list, "comma-separated lambda values (>= 2)")
        ->required();
    scan_cmd->add_option("config", config_path, "base config file")->required();

    for (CLI::App* sub : {run_cmd, preset_cmd, scan_cmd}) {
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--set", overrides, "override config values, section.key=value");
        sub->add_option("--seed", seed, "classical ensemble seed override");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    // Pin BLAS threading before the first numeric call; recorded in run_meta.
    const std::string t = std::to_string(threads);
    setenv("OPENBLAS_NUM_THREADS", t.c_str(), 1);
    setenv("OMP_NUM_THREADS", t.c_str(), 1);

    try {
        nhrotor::ExperimentConfig cfg;
        std::string default_out;
        if (run_cmd->parsed() || scan_cmd->parsed()) {
            cfg = nhrotor::load_config(config_path);
            const std::string stem = std::filesystem::path(config_path).stem().string();
            default_out = (scan_cmd->parsed() ? "nhrotor_out/scan_" : "nhrotor_out/") + stem;
        } else {
            cfg = nhrotor::preset(preset_name);
            default_out = "nhrotor_out/" + preset_name;
        }
        for (const std::string& s : overrides) nhrotor::apply_override(cfg, s);
        if (seed) cfg.classical.seed = *seed;

        if (preset_cmd->parsed() && print_only) {
            std::cout << cfg.canonical_text();
            return 0;
        }

        const std::filesystem::path out(!out_dir.empty()      ? out_dir
                                        : !cfg.out_dir.empty() ? cfg.out_dir
                                                               : default_out);
        if (scan_cmd->parsed()) {
            const auto rows = nhrotor::lambda_scan(cfg, parse_lambda_list(lambda_list), out);
            std::cout << "scan: " << rows.size() << " runs summarized in "
                      << (out / "scan.csv").string() << "\n";
            for (const nhrotor::ScanRow& r : rows) {
                std::cout << "  lambda=" << r.lambda << " " << r.status << "\n";
            }
            return 0;
        }
        return execute_run(cfg, out);
    } catch (const nhrotor::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nhrotor::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const nhrotor::ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        if (!e.diagnostics().empty()) std::cerr << e.diagnostics();
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
