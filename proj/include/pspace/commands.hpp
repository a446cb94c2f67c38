#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pspace/config.hpp"
#include "pspace/eigenset.hpp"
#include "pspace/errors.hpp"
#include "pspace/hydrogen.hpp"
#include "pspace/propagator.hpp"
#include "pspace/spectra.hpp"
#include "pspace/version.hpp"

namespace pspace {

struct CommandContext {
    std::filesystem::path out_dir = ".";
    std::ostream* log = &std::cout;

    std::ostream& log_stream() const { return *log; }
    std::filesystem::path resolve(const std::string& name) const { return out_dir / name; }
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline void ensure_out_dir(const CommandContext& ctx) {
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + ctx.out_dir.string());
}

inline std::ofstream open_text(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot open for writing: " + p.string());
    return out;
}

inline double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// Loads the configured eigenset cache if present and matching; builds and
/// saves it otherwise (when `build` allows), throws StaleCache when the
/// file exists but belongs to different parameters.
inline Eigenset obtain_eigenset(const RunConfig& cfg, const CommandContext& ctx, bool build) {
    const auto path = ctx.resolve(cfg.eigenset.cache);
    const std::uint64_t want =
        eigenset_content_hash(cfg.grid.n, cfg.grid.p_max, cfg.grid.scale, cfg.grid.beta,
                              cfg.grid.convention, cfg.make_model(), cfg.eigenset.l_max,
                              cfg.make_quadrature());
    if (std::filesystem::exists(path)) {
        Eigenset set = load_eigenset(path);
        if (set.content_hash == want) {
            ctx.log_stream() << "eigenset: loaded cache " << path.string() << "\n";
            return set;
        }
        if (!build)
            throw StaleCache("eigenset cache " + path.string() +
                             " does not match the configuration (rerun solve)");
        ctx.log_stream() << "eigenset: cache is stale, rebuilding\n";
    } else if (!build) {
        throw StaleCache("eigenset cache " + path.string() + " not found (run solve first)");
    }
    const auto t0 = std::chrono::steady_clock::now();
    Eigenset set = build_eigenset(cfg.make_grid(), cfg.make_model(), cfg.eigenset.l_max,
                                  cfg.make_quadrature());
    ctx.log_stream() << "eigenset: built in " << detail::fmt(detail::elapsed_s(t0), "%.1f")
                     << " s\n";
    save_eigenset(set, path);
    return set;
}

/// solve: builds (or reuses) the eigenset cache and writes a level table.
inline void cmd_solve(const RunConfig& cfg, const CommandContext& ctx) {
    detail::ensure_out_dir(ctx);
    Eigenset set = obtain_eigenset(cfg, ctx, true);

    auto out = detail::open_text(ctx.resolve("levels.txt"));
    out << "# energies (hartree) per angular momentum; grid n = " << cfg.grid.n
        << ", p_max = " << detail::fmt(cfg.grid.p_max, "%g") << "\n";
    const bool hydro = cfg.hydrogenic();
    for (std::size_t l = 0; l <= set.l_max; ++l) {
        const auto& b = set.block(l);
        out << "# l = " << l << ", bound states: " << b.bound_count << "\n";
        const std::size_t show = std::min<std::size_t>(8, b.energies.size());
        for (std::size_t s = 0; s < show; ++s) {
            out << l << " " << s << " " << detail::fmt(b.energies[s], "%.15e");
            if (hydro && b.energies[s] < 0.0) {
                const double n = static_cast<double>(s + l + 1);
                out << " " << detail::fmt(std::abs(b.energies[s] + 0.5 / (n * n)), "%.3e");
            }
            out << "\n";
        }
    }
    ctx.log_stream() << "solve: wrote " << ctx.resolve("levels.txt").string() << "\n";

    if (cfg.output.export_functions) {
        auto fx = detail::open_text(ctx.resolve("eigenset-functions.txt"));
        fx << "# bound-state radial momentum functions chi_nl(p_j)\n";
        for (std::size_t l = 0; l <= set.l_max; ++l) {
            const auto& b = set.block(l);
            fx << "# l = " << l << "\n";
            for (std::size_t j = 0; j < set.grid.n_points; ++j) {
                fx << detail::fmt(set.grid.p_nodes[j]);
                for (std::size_t s = 0; s < b.bound_count; ++s)
                    fx << " " << detail::fmt(b.chi(s, j));
                fx << "\n";
            }
        }
    }
}

/// validate: error tables of the lowest four states of l = 0..3 against
/// the analytic hydrogen solution.
inline void cmd_validate(const RunConfig& cfg, const CommandContext& ctx) {
    if (!cfg.hydrogenic())
        throw UnsupportedConfiguration(
            "validate needs the hydrogen potential (z = 1, no short-range terms); "
            "no analytic reference exists otherwise");
    detail::ensure_out_dir(ctx);
    RunConfig c = cfg;
    c.eigenset.l_max = std::max<std::size_t>(cfg.eigenset.l_max, 3);
    Eigenset set = obtain_eigenset(c, ctx, true);

    auto out = detail::open_text(ctx.resolve("validate.txt"));
    out << "# hydrogen validation, n = " << c.grid.n << ", p_max = "
        << detail::fmt(c.grid.p_max, "%g") << "\n";
    out << "# |E - E_exact| for the lowest four states of each l\n";
    std::ostream& log = ctx.log_stream();
    for (std::size_t l = 0; l <= 3; ++l) {
        out << "L=" << l;
        log << "dE  L=" << l;
        for (std::size_t s = 0; s < 4; ++s) {
            const double n = static_cast<double>(s + l + 1);
            const double err = std::abs(set.block(l).energies[s] + 0.5 / (n * n));
            out << " " << detail::fmt(err, "%.3e");
            log << "  " << detail::fmt(err, "%.3e");
        }
        out << "\n";
        log << "\n";
    }
    out << "# rms deviation of chi_nl against the analytic functions\n";
    for (std::size_t l = 0; l <= 3; ++l) {
        out << "L=" << l;
        log << "dchi L=" << l;
        for (std::size_t s = 0; s < 4; ++s) {
            const auto exact = hydrogen_chi_exact(s + l + 1, l, set.grid);
            const double dev = rms_deviation(set.block(l), s, exact, set.grid);
            out << " " << detail::fmt(dev, "%.3e");
            log << "  " << detail::fmt(dev, "%.3e");
        }
        out << "\n";
        log << "\n";
    }
    log << "validate: wrote " << ctx.resolve("validate.txt").string() << "\n";
}

/// propagate: runs the configured pulse from the ground state. With
/// `resume`, continues from the checkpoint written by an interrupted run.
inline void cmd_propagate(const RunConfig& cfg, const CommandContext& ctx, bool resume = false) {
    detail::ensure_out_dir(ctx);
    Eigenset set = obtain_eigenset(cfg, ctx, false);
    const PulseConfig pulse = cfg.make_pulse();

    PropagationOptions opt;
    opt.dt = cfg.propagation.dt;
    opt.observer_stride = cfg.propagation.observer_stride;
    opt.merged_halfsteps = cfg.propagation.merged_halfsteps;
    opt.checkpoint_path = ctx.resolve(cfg.propagation.checkpoint);

    Wavepacket wp0 = Wavepacket::from_eigenstate(set, 0, 0, cfg.eigenset.l_max);
    const std::uint64_t run_hash = propagation_run_hash(set.content_hash, pulse, opt, wp0.l_max);

    if (resume) {
        if (!std::filesystem::exists(opt.checkpoint_path))
            throw StaleCache("no checkpoint to resume at " + opt.checkpoint_path.string());
        WavepacketFile f = load_wavepacket(opt.checkpoint_path);
        if (f.run_hash != run_hash)
            throw StaleCache("checkpoint " + opt.checkpoint_path.string() +
                             " belongs to a different run configuration");
        wp0 = std::move(f.wp);
        opt.start_step = f.step;
        ctx.log_stream() << "propagate: resuming from step " << f.step << "\n";
    }

    auto obs_file = std::ofstream(ctx.resolve("observer.txt"),
                                  resume ? std::ios::app : std::ios::out);
    if (!obs_file) throw ConfigError("cannot open observer output");
    if (!resume) obs_file << "# t norm ground_population bound_population\n";
    const Observer obs = [&](const ObserverFrame& fr) {
        obs_file << detail::fmt(fr.t) << " " << detail::fmt(fr.norm2) << " "
                 << detail::fmt(fr.ground_population) << " " << detail::fmt(fr.bound_population)
                 << "\n";
    };

    const auto t0 = std::chrono::steady_clock::now();
    Wavepacket wf = propagate(wp0, set, pulse, opt, obs);
    const double norm = wavepacket_norm2(wf, set.grid);
    ctx.log_stream() << "propagate: " << detail::fmt(detail::elapsed_s(t0), "%.1f")
                     << " s, final norm = " << detail::fmt(norm, "%.12f")
                     << ", checkpoint = " << opt.checkpoint_path.string() << "\n";
}

/// spectra: ATI and PAD files from the final checkpoint.
inline void cmd_spectra(const RunConfig& cfg, const CommandContext& ctx) {
    detail::ensure_out_dir(ctx);
    Eigenset set = obtain_eigenset(cfg, ctx, false);
    const PulseConfig pulse = cfg.make_pulse();

    PropagationOptions opt;
    opt.dt = cfg.propagation.dt;
    opt.observer_stride = cfg.propagation.observer_stride;
    opt.merged_halfsteps = cfg.propagation.merged_halfsteps;
    const auto ckpt = ctx.resolve(cfg.propagation.checkpoint);
    if (!std::filesystem::exists(ckpt))
        throw StaleCache("checkpoint not found: " + ckpt.string() + " (run propagate first)");
    WavepacketFile f = load_wavepacket(ckpt);
    const std::uint64_t want = propagation_run_hash(set.content_hash, pulse, opt, f.wp.l_max);
    if (f.run_hash != want)
        throw StaleCache("checkpoint " + ckpt.string() + " does not match the configuration");
    const std::size_t n_steps = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(pulse.duration / opt.dt)));
    if (f.step != n_steps)
        throw StaleCache("checkpoint holds an unfinished run (step " + std::to_string(f.step) +
                         " of " + std::to_string(n_steps) + "); resume propagate first");

    const ContinuumPacket cp = project_out_bound(f.wp, set);
    const double pion = ionization_probability(cp, set.grid);
    const double norm = wavepacket_norm2(f.wp, set.grid);
    const double bound = bound_population(set, f.wp);
    ctx.log_stream() << "spectra: P_ion = " << detail::fmt(pion, "%.8e")
                     << ", bound = " << detail::fmt(bound, "%.8e")
                     << ", |Psi|^2 = " << detail::fmt(norm, "%.10f") << "\n";

    const AtiSpectrum ati = ati_spectrum(cp, set.grid);
    {
        auto out = detail::open_text(ctx.resolve("ati.txt"));
        out << "# energy_hartree energy_eV dP/de_hartree\n";
        for (std::size_t j = 0; j < ati.energy.size(); ++j)
            out << detail::fmt(ati.energy[j]) << " "
                << detail::fmt(ati.energy[j] * units::hartree_ev) << " "
                << detail::fmt(ati.density[j]) << "\n";
    }
    if (cfg.output.ati_resample_bins > 1) {
        const AtiSpectrum u = ati_spectrum_resampled(cp, set.grid, cfg.output.ati_resample_bins,
                                                     0.5 * cfg.output.pad_p_limit * cfg.output.pad_p_limit);
        auto out = detail::open_text(ctx.resolve("ati-uniform.txt"));
        out << "# energy_hartree energy_eV dP/de_hartree\n";
        for (std::size_t j = 0; j < u.energy.size(); ++j)
            out << detail::fmt(u.energy[j]) << " " << detail::fmt(u.energy[j] * units::hartree_ev)
                << " " << detail::fmt(u.density[j]) << "\n";
    }

    const PadResult pd = pad(cp, set.grid, cfg.output.pad_n_par, cfg.output.pad_n_perp,
                             cfg.output.pad_p_limit);
    {
        auto out = detail::open_text(ctx.resolve("pad.txt"));
        out << "# p_parallel p_perpendicular d2P/dp_par/dp_perp\n";
        for (std::size_t i = 0; i < pd.p_par.size(); ++i)
            for (std::size_t k = 0; k < pd.p_perp.size(); ++k)
                out << detail::fmt(pd.p_par[i]) << " " << detail::fmt(pd.p_perp[k]) << " "
                    << detail::fmt(pd.density(i, k)) << "\n";
    }
    if (cfg.output.pad_binary) {
        // rectangular matrix of doubles, row-major over p_par
        std::ofstream out(ctx.resolve("pad.bin"), std::ios::binary);
        const std::uint64_t npar = pd.p_par.size(), nperp = pd.p_perp.size();
        out.write(reinterpret_cast<const char*>(&npar), sizeof npar);
        out.write(reinterpret_cast<const char*>(&nperp), sizeof nperp);
        out.write(reinterpret_cast<const char*>(pd.density.data()),
                  static_cast<std::streamsize>(npar * nperp * sizeof(double)));
    }
    ctx.log_stream() << "spectra: wrote ati.txt and pad.txt\n";
}

/// pulse-dump: (t, E, A) table for plotting.
inline void cmd_pulse_dump(const RunConfig& cfg, const CommandContext& ctx,
                           std::size_t samples = 2000) {
    detail::ensure_out_dir(ctx);
    const PulseConfig pulse = cfg.make_pulse();
    auto out = detail::open_text(ctx.resolve("pulse.txt"));
    out << "# t electric_field vector_potential\n";
    for (std::size_t i = 0; i <= samples; ++i) {
        const double t = pulse.duration * static_cast<double>(i) / static_cast<double>(samples);
        out << detail::fmt(t) << " " << detail::fmt(electric_field(pulse, t)) << " "
            << detail::fmt(vector_potential(pulse, t)) << "\n";
    }
    ctx.log_stream() << "pulse-dump: wrote " << ctx.resolve("pulse.txt").string() << "\n";
}

/// convergence-scan: sweeps one knob (n, dt, or lmax) and tabulates the
/// tracked quantity (lowest levels for n; ionization probability for dt
/// and lmax).
inline void cmd_convergence_scan(const RunConfig& cfg, const CommandContext& ctx,
                                 const std::string& kind, const std::vector<double>& values) {
    detail::ensure_out_dir(ctx);
    if (values.empty()) throw ConfigError("convergence-scan: no sweep values given");
    auto out = detail::open_text(ctx.resolve("scan-" + kind + ".txt"));
    std::ostream& log = ctx.log_stream();

    if (kind == "n") {
        out << "# n  E(l,0) for l = 0.." << cfg.eigenset.l_max << "\n";
        for (double v : values) {
            RunConfig c = cfg;
            c.grid.n = static_cast<std::size_t>(v);
            c.validate();
            Eigenset set = build_eigenset(c.make_grid(), c.make_model(), c.eigenset.l_max,
                                          c.make_quadrature());
            out << c.grid.n;
            log << "n = " << c.grid.n << ":";
            for (std::size_t l = 0; l <= set.l_max; ++l) {
                out << " " << detail::fmt(set.block(l).energies[0], "%.15e");
                log << " " << detail::fmt(set.block(l).energies[0], "%.10f");
            }
            out << "\n";
            log << "\n";
        }
        return;
    }

    if (kind != "dt" && kind != "lmax")
        throw ConfigError("convergence-scan: kind must be one of n, dt, lmax");

    out << "# " << kind << "  ionization_probability\n";
    for (double v : values) {
        RunConfig c = cfg;
        PropagationOptions opt;
        opt.observer_stride = 0;
        opt.merged_halfsteps = c.propagation.merged_halfsteps;
        opt.dt = c.propagation.dt;
        if (kind == "dt") opt.dt = v;
        if (kind == "lmax") c.eigenset.l_max = static_cast<std::size_t>(v);
        Eigenset set = build_eigenset(c.make_grid(), c.make_model(), c.eigenset.l_max,
                                      c.make_quadrature());
        const PulseConfig pulse = c.make_pulse();
        Wavepacket wp0 = Wavepacket::from_eigenstate(set, 0, 0, c.eigenset.l_max);
        Wavepacket wf = propagate(wp0, set, pulse, opt);
        const double pion = ionization_probability(project_out_bound(wf, set), set.grid);
        out << detail::fmt(v, "%g") << " " << detail::fmt(pion, "%.12e") << "\n";
        log << kind << " = " << detail::fmt(v, "%g") << ": P = " << detail::fmt(pion, "%.8e")
            << "\n";
    }
}

} // namespace pspace
