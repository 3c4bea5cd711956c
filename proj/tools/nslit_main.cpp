// nslit: n-slit interference trajectory simulator.
//
// Subcommands:
//   run       integrate an ensemble for a config or preset, write artifacts
//   presets   list the built-in scenario presets
//   diagnose  emit residual / quantum-potential diagnostic tables
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or guard failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nslit/config.hpp"
#include "nslit/scenario.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool check_oracle = false;
    bool emit_fields = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    auto* cfg = cmd->add_option("--config", args.config_path, "path to a JSON config file");
    auto* preset = cmd->add_option("--preset", args.preset, "name of a built-in preset");
    cfg->excludes(preset);
    cmd->add_option("--out-dir", args.out_dir,
                    "output directory (default: config value, or $NSLIT_OUT_DIR prefix)");
    cmd->add_option("--seed", args.seed, "override the ensemble seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads (0 = all available)");
}

nslit::ExperimentConfig load_config(const CommonArgs& args) {
    if (!args.preset.empty()) return nslit::preset_config(args.preset);
    if (args.config_path.empty())
        throw nslit::ConfigError({"cli: either --config or --preset is required"});
    std::ifstream is(args.config_path);
    if (!is)
        throw nslit::ConfigError({"cli: cannot read config file \"" + args.config_path + "\""});
    std::ostringstream buf;
    buf << is.rdbuf();
    return nslit::parse_config(buf.str());
}

nslit::RunOptions make_options(const CommonArgs& args) {
    nslit::RunOptions opt;
    opt.out_dir = args.out_dir;
    opt.has_seed = args.seed_set;
    opt.seed = args.seed;
    opt.threads = args.threads;
    opt.check_oracle = args.check_oracle;
    opt.emit_fields = args.emit_fields;
    return opt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"n-slit interference trajectory simulator"};
    app.require_subcommand(1);

    CommonArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run a scenario and write artifacts");
    add_common(run, run_args);
    run->add_flag("--check-oracle", run_args.check_oracle,
                  "abort when channel and grid-oracle velocities diverge");
    run->add_flag("--emit-fields", run_args.emit_fields, "also write the (t, x) intensity grid");

    CLI::App* presets = app.add_subcommand("presets", "list built-in presets");

    CommonArgs diag_args;
    CLI::App* diagnose = app.add_subcommand("diagnose", "write diagnostic tables and a summary");
    add_common(diagnose, diag_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const nslit::ExperimentConfig cfg = load_config(run_args);
            const nslit::RunManifest manifest = nslit::run_scenario(cfg, make_options(run_args));
            std::cout << "wrote " << manifest.artifacts.size() << " artifacts (seed "
                      << manifest.seed << ", " << manifest.elapsed_seconds << " s)\n";
            for (const auto& a : manifest.artifacts)
                std::cout << "  " << a.name << "  " << a.bytes << " bytes  fnv1a64 "
                          << a.fnv1a64_hex << "\n";
            for (const auto& line : manifest.momentum_kick_summary)
                std::cout << "  " << line << "\n";
            return 0;
        }
        if (presets->parsed()) {
            for (const auto& p : nslit::list_presets())
                std::cout << p.name << "  -  " << p.description << "\n";
            return 0;
        }
        if (diagnose->parsed()) {
            const nslit::ExperimentConfig cfg = load_config(diag_args);
            std::cout << nslit::run_diagnostics(cfg, make_options(diag_args));
            return 0;
        }
    } catch (const nslit::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        // library-level validation (zero field, bad event target, ...)
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nslit::GuardError& e) {
        std::cerr << "guard failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
