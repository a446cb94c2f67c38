// Command-line front end: solve, validate, propagate, spectra, pulse-dump,
// convergence-scan. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure, 4 stale or corrupt cache.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pspace/commands.hpp"
#include "pspace/parallel.hpp"
#include "pspace/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir = ".";
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file (overlays the preset)");
    cmd->add_option("--preset", args.preset, "built-in parameter preset");
    cmd->add_option("--output-dir", args.out_dir, "directory for all outputs");
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware default)");
}

pspace::RunConfig resolve_config(const CommonArgs& args) {
    if (args.preset.empty() && args.config_path.empty())
        throw pspace::ConfigError("one of --preset or --config is required");
    pspace::RunConfig cfg;
    if (!args.preset.empty()) cfg = pspace::preset_config(args.preset);
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw pspace::ConfigError("cannot open config file: " + args.config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        pspace::parse_config_into(cfg, ss.str(), args.config_path);
    }
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Momentum-space eigensets and strong-field TDSE for single-active-electron atoms"};
    app.set_version_flag("--version", pspace::version_string);
    app.require_subcommand(1);

    CommonArgs args;
    bool resume = false;
    std::size_t pulse_samples = 2000;
    std::string scan_kind;
    std::vector<double> scan_values;

    auto* solve = app.add_subcommand("solve", "build the eigenset cache and level table");
    add_common(solve, args);
    auto* validate = app.add_subcommand("validate", "hydrogen error tables (dE and rms)");
    add_common(validate, args);
    auto* propagate = app.add_subcommand("propagate", "run the configured laser pulse");
    add_common(propagate, args);
    propagate->add_flag("--resume", resume, "continue from the existing checkpoint");
    auto* spectra = app.add_subcommand("spectra", "ATI and PAD from the final checkpoint");
    add_common(spectra, args);
    auto* pulse_dump = app.add_subcommand("pulse-dump", "write a (t, E, A) table");
    add_common(pulse_dump, args);
    pulse_dump->add_option("--samples", pulse_samples, "number of output rows");
    auto* scan = app.add_subcommand("convergence-scan", "sweep n, dt, or lmax");
    add_common(scan, args);
    scan->add_option("--sweep", scan_kind, "what to sweep: n, dt, lmax")->required();
    scan->add_option("--values", scan_values, "sweep values")->required()->expected(-1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        pspace::set_num_threads(args.threads);
        const pspace::RunConfig cfg = resolve_config(args);
        pspace::CommandContext ctx;
        ctx.out_dir = args.out_dir;

        if (solve->parsed()) pspace::cmd_solve(cfg, ctx);
        else if (validate->parsed()) pspace::cmd_validate(cfg, ctx);
        else if (propagate->parsed()) pspace::cmd_propagate(cfg, ctx, resume);
        else if (spectra->parsed()) pspace::cmd_spectra(cfg, ctx);
        else if (pulse_dump->parsed()) pspace::cmd_pulse_dump(cfg, ctx, pulse_samples);
        else if (scan->parsed()) pspace::cmd_convergence_scan(cfg, ctx, scan_kind, scan_values);
        return 0;
    } catch (const pspace::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const pspace::UnsupportedConfiguration& e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const pspace::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const pspace::StaleCache& e) {
        std::cerr << "stale cache: " << e.what() << "\n";
        return 4;
    } catch (const pspace::FormatError& e) {
        std::cerr << "file format error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
