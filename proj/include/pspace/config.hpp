#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pspace/errors.hpp"
#include "pspace/grid.hpp"
#include "pspace/kernel.hpp"
#include "pspace/pulse.hpp"

namespace pspace {

/// Run configuration, one section per pipeline stage. Parsed from a
/// sectioned key = value text file; unknown keys are rejected with the
/// offending line.
struct RunConfig {
    struct Grid {
        std::size_t n = 512;
        double p_max = 50.0;
        double scale = 1.0;  ///< mapping L
        double beta = 0.0;
        WeightConvention convention = WeightConvention::standard;
    } grid;

    struct Potential {
        double z = 1.0;
        std::array<double, 6> a{0, 0, 0, 0, 0, 0};
        double r_cutoff = 200.0;
        std::size_t quad_panel_order = 32;
        double quad_points_per_period = 4.0;
    } potential;

    struct EigensetSection {
        std::size_t l_max = 3;
        std::string cache = "eigenset.bin";
    } eigenset;

    struct Pulse {
        std::string envelope = "efield";  ///< efield | apot
        std::optional<double> wavelength_nm, omega;
        std::optional<double> intensity, peak_field;
        std::optional<double> cycles, duration_au, fwhm_fs;
        double cep = 0.0;
    } pulse;

    struct Propagation {
        double dt = 0.05;
        std::size_t observer_stride = 50;
        std::string checkpoint = "wavepacket.bin";
        bool merged_halfsteps = true;
    } propagation;

    struct Output {
        std::size_t pad_n_par = 201;
        std::size_t pad_n_perp = 101;
        double pad_p_limit = 1.0;
        std::size_t ati_resample_bins = 0;  ///< 0 = native grid only
        bool pad_binary = false;
        bool export_functions = false;
    } output;

    RadialGrid make_grid() const {
        return build_grid(grid.n, grid.p_max, grid.scale, grid.beta, grid.convention);
    }

    PotentialModel make_model() const {
        return PotentialModel{potential.z, potential.a, potential.r_cutoff};
    }

    KernelQuadrature make_quadrature() const {
        return KernelQuadrature::make(potential.quad_panel_order, potential.quad_points_per_period);
    }

    bool hydrogenic() const {
        return potential.a[0] == 0.0 && potential.a[2] == 0.0 && potential.a[4] == 0.0 &&
               potential.z == 1.0;
    }

    /// Resolves the pulse alternatives into physical parameters, enforcing
    /// that exactly one member of each pair (field/intensity,
    /// frequency/wavelength, duration/cycles/fwhm) was given.
    PulseConfig make_pulse() const {
        const auto one_of = [](const char* what, auto&&... opts) {
            if ((int(bool(opts)) + ...) != 1)
                throw ConfigError(std::string("pulse: exactly one of ") + what + " must be set");
        };
        one_of("omega / wavelength_nm", pulse.omega, pulse.wavelength_nm);
        one_of("peak_field / intensity", pulse.peak_field, pulse.intensity);
        one_of("duration_au / cycles / fwhm_fs", pulse.duration_au, pulse.cycles, pulse.fwhm_fs);

        PulseConfig p;
        p.omega = pulse.omega ? *pulse.omega : units::nm_to_omega / *pulse.wavelength_nm;
        p.peak_field =
            pulse.peak_field ? *pulse.peak_field : std::sqrt(*pulse.intensity / units::intensity_au_wcm2);
        if (pulse.duration_au)
            p.duration = *pulse.duration_au;
        else if (pulse.cycles)
            p.duration = duration_from_cycles(*pulse.cycles, p.omega);
        else
            p.duration = duration_from_fwhm_fs(*pulse.fwhm_fs);
        p.cep = pulse.cep;
        if (pulse.envelope == "efield")
            p.envelope = EnvelopeTarget::electric_field;
        else if (pulse.envelope == "apot")
            p.envelope = EnvelopeTarget::vector_potential;
        else
            throw ConfigError("pulse: envelope must be 'efield' or 'apot', got '" + pulse.envelope + "'");
        p.validate();
        return p;
    }

    void validate() const {
        if (grid.n < 2) throw ConfigError("grid: n must be >= 2");
        if (!(grid.p_max > 0.0)) throw ConfigError("grid: p_max must be positive");
        if (!(grid.scale > 0.0)) throw ConfigError("grid: scale must be positive");
        if (grid.beta < 0.0) throw ConfigError("grid: beta must be >= 0");
        if (!(potential.z > 0.0)) throw ConfigError("potential: z must be positive");
        if (!(potential.r_cutoff > 0.0)) throw ConfigError("potential: r_cutoff must be positive");
        if (potential.quad_panel_order < 2) throw ConfigError("potential: quad_panel_order must be >= 2");
        if (!(potential.quad_points_per_period > 0.0))
            throw ConfigError("potential: quad_points_per_period must be positive");
        if (!(propagation.dt > 0.0)) throw ConfigError("propagation: dt must be positive");
        if (eigenset.cache.empty()) throw ConfigError("eigenset: cache path must not be empty");
        if (output.pad_n_par < 2 || output.pad_n_perp < 2)
            throw ConfigError("output: pad raster needs >= 2 points per axis");
        if (!(output.pad_p_limit > 0.0)) throw ConfigError("output: pad_p_limit must be positive");
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ConfigError(where + ": expected a number, got '" + v + "'");
    }
}

inline std::size_t parse_size(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size() || d < 0) throw std::invalid_argument("");
        return static_cast<std::size_t>(d);
    } catch (...) {
        throw ConfigError(where + ": expected a nonnegative integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(where + ": expected true/false, got '" + v + "'");
}

} // namespace detail

/// Parses config text into an existing RunConfig (so presets can be
/// overlaid by a user file). `origin` names the source in error messages.
inline void parse_config_into(RunConfig& cfg, std::string_view text, const std::string& origin) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(where + ": malformed section header '" + t + "'");
            section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
            if (section != "grid" && section != "potential" && section != "eigenset" &&
                section != "pulse" && section != "propagation" && section != "output")
                throw ConfigError(where + ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(t).substr(0, eq));
        const std::string val = detail::trim(std::string_view(t).substr(eq + 1));
        if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside any section");
        const std::string fq = section + "." + key;

        if (section == "grid") {
            if (key == "n") cfg.grid.n = detail::parse_size(val, where);
            else if (key == "p_max") cfg.grid.p_max = detail::parse_double(val, where);
            else if (key == "scale") cfg.grid.scale = detail::parse_double(val, where);
            else if (key == "beta") cfg.grid.beta = detail::parse_double(val, where);
            else if (key == "weight_convention") {
                if (val == "standard") cfg.grid.convention = WeightConvention::standard;
                else if (val == "paper") cfg.grid.convention = WeightConvention::paper_literal;
                else throw ConfigError(where + ": weight_convention must be 'standard' or 'paper'");
            } else throw ConfigError(where + ": unknown key '" + fq + "'");
        } else if (section == "potential") {
            if (key == "z") cfg.potential.z = detail::parse_double(val, where);
            else if (key == "a1") cfg.potential.a[0] = detail::parse_double(val, where);
            else if (key == "a2") cfg.potential.a[1] = detail::parse_double(val, where);
            else if (key == "a3") cfg.potential.a[2] = detail::parse_double(val, where);
            else if (key == "a4") cfg.potential.a[3] = detail::parse_double(val, where);
            else if (key == "a5") cfg.potential.a[4] = detail::parse_double(val, where);
            else if (key == "a6") cfg.potential.a[5] = detail::parse_double(val, where);
            else if (key == "r_cutoff") cfg.potential.r_cutoff = detail::parse_double(val, where);
            else if (key == "quad_panel_order") cfg.potential.quad_panel_order = detail::parse_size(val, where);
            else if (key == "quad_points_per_period")
                cfg.potential.quad_points_per_period = detail::parse_double(val, where);
            else throw ConfigError(where + ": unknown key '" + fq + "'");
        } else if (section == "eigenset") {
            if (key == "l_max") cfg.eigenset.l_max = detail::parse_size(val, where);
            else if (key == "cache") cfg.eigenset.cache = val;
            else throw ConfigError(where + ": unknown key '" + fq + "'");
        } else if (section == "pulse") {
            if (key == "envelope") cfg.pulse.envelope = val;
            else if (key == "wavelength_nm") cfg.pulse.wavelength_nm = detail::parse_double(val, where);
            else if (key == "omega") cfg.pulse.omega = detail::parse_double(val, where);
            else if (key == "intensity") cfg.pulse.intensity = detail::parse_double(val, where);
            else if (key == "peak_field") cfg.pulse.peak_field = detail::parse_double(val, where);
            else if (key == "cycles") cfg.pulse.cycles = detail::parse_double(val, where);
            else if (key == "duration_au") cfg.pulse.duration_au = detail::parse_double(val, where);
            else if (key == "fwhm_fs") cfg.pulse.fwhm_fs = detail::parse_double(val, where);
            else if (key == "cep") cfg.pulse.cep = detail::parse_double(val, where);
            else throw ConfigError(where + ": unknown key '" + fq + "'");
        } else if (section == "propagation") {
            if (key == "dt") cfg.propagation.dt = detail::parse_double(val, where);
            else if (key == "observer_stride") cfg.propagation.observer_stride = detail::parse_size(val, where);
            else if (key == "checkpoint") cfg.propagation.checkpoint = val;
            else if (key == "merged_halfsteps") cfg.propagation.merged_halfsteps = detail::parse_bool(val, where);
            else throw ConfigError(where + ": unknown key '" + fq + "'");
        } else {  // output
            if (key == "pad_n_par") cfg.output.pad_n_par = detail::parse_size(val, where);
            else if (key == "pad_n_perp") cfg.output.pad_n_perp = detail::parse_size(val, where);
            else if (key == "pad_p_limit") cfg.output.pad_p_limit = detail::parse_double(val, where);
            else if (key == "ati_resample_bins") cfg.output.ati_resample_bins = detail::parse_size(val, where);
            else if (key == "pad_binary") cfg.output.pad_binary = detail::parse_bool(val, where);
            else if (key == "export_functions") cfg.output.export_functions = detail::parse_bool(val, where);
            else throw ConfigError(where + ": unknown key '" + fq + "'");
        }
    }
}

inline RunConfig parse_config(std::string_view text, const std::string& origin) {
    RunConfig cfg;
    parse_config_into(cfg, text, origin);
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    RunConfig cfg;
    parse_config_into(cfg, ss.str(), path.filename().string());
    cfg.validate();
    return cfg;
}

/// Built-in presets reproducing the validation tables and the two pulse
/// scenarios (full scale and a desk-scale variant of each).
inline const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> p = {
        {"hydrogen-512", R"([grid]
n = 512
p_max = 50
[eigenset]
l_max = 3
cache = hydrogen-512.eig
)"},
        {"hydrogen-1024", R"([grid]
n = 1024
p_max = 50
[eigenset]
l_max = 3
cache = hydrogen-1024.eig
)"},
        {"helium-512", R"([grid]
n = 512
p_max = 100
[potential]
z = 1
a1 = 1.231
a2 = 0.662
a3 = -1.325
a4 = 1.236
a5 = -0.231
a6 = 0.480
[eigenset]
l_max = 3
cache = helium-512.eig
)"},
        {"helium-1024", R"([grid]
n = 1024
p_max = 100
[potential]
z = 1
a1 = 1.231
a2 = 0.662
a3 = -1.325
a4 = 1.236
a5 = -0.231
a6 = 0.480
[eigenset]
l_max = 3
cache = helium-1024.eig
)"},
        {"fig1", R"(# 800 nm, FWHM 10 fs, 1e14 W/cm^2, sin^2 envelope on the electric field.
# Full-scale run; expect hours of wall time.
[grid]
n = 1024
p_max = 50
[eigenset]
l_max = 31
cache = fig1.eig
[pulse]
envelope = efield
wavelength_nm = 800
intensity = 1e14
fwhm_fs = 10
cep = 0
[propagation]
dt = 0.05
observer_stride = 200
checkpoint = fig1-wavepacket.bin
[output]
pad_p_limit = 0.8
pad_n_par = 321
pad_n_perp = 161
)"},
        {"fig1-desk", R"(# Reduced-scale variant of the 800 nm scenario: 5 cycles, smaller grid.
[grid]
n = 512
p_max = 25
[eigenset]
l_max = 32
cache = fig1-desk.eig
[pulse]
envelope = efield
wavelength_nm = 800
intensity = 1e14
cycles = 5
cep = 0
[propagation]
dt = 0.05
observer_stride = 200
checkpoint = fig1-desk-wavepacket.bin
[output]
pad_p_limit = 0.8
pad_n_par = 321
pad_n_perp = 161
)"},
        {"fig2", R"(# 535 nm, 20 cycles, 2e13 W/cm^2, sin^2 envelope on the vector potential.
[grid]
n = 1024
p_max = 50
[eigenset]
l_max = 24
cache = fig2.eig
[pulse]
envelope = apot
wavelength_nm = 535
intensity = 2e13
cycles = 20
cep = 0
[propagation]
dt = 0.05
observer_stride = 200
checkpoint = fig2-wavepacket.bin
[output]
pad_p_limit = 0.7
)"},
        {"fig2-desk", R"(# Reduced-scale variant of the 535 nm scenario.
[grid]
n = 256
p_max = 20
[eigenset]
l_max = 16
cache = fig2-desk.eig
[pulse]
envelope = apot
wavelength_nm = 535
intensity = 2e13
cycles = 20
cep = 0
[propagation]
dt = 0.05
observer_stride = 200
checkpoint = fig2-desk-wavepacket.bin
[output]
pad_p_limit = 0.7
)"},
    };
    return p;
}

inline RunConfig preset_config(const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) {
        std::string known;
        for (const auto& [k, v] : presets()) known += known.empty() ? k : ", " + k;
        throw ConfigError("unknown preset '" + name + "' (available: " + known + ")");
    }
    RunConfig cfg;
    parse_config_into(cfg, it->second, "preset:" + name);
    cfg.validate();
    return cfg;
}

} // namespace pspace
