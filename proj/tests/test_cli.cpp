#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pspace/commands.hpp"
#include "pspace/config.hpp"

using namespace pspace;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pspace_cli_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* tiny_config = R"(
[grid]
n = 48
p_max = 10
[potential]
z = 1
r_cutoff = 100
[eigenset]
l_max = 2
cache = tiny.eig
[pulse]
envelope = efield
omega = 0.5
peak_field = 0.03
cycles = 2
[propagation]
dt = 0.1
observer_stride = 20
checkpoint = tiny-wp.bin
[output]
pad_n_par = 41
pad_n_perp = 21
pad_p_limit = 2.0
)";

} // namespace

TEST_CASE("config parsing", "[cli]") {
    SECTION("round trip of representative keys") {
        const auto cfg = parse_config(tiny_config, "inline");
        CHECK(cfg.grid.n == 48);
        CHECK(cfg.grid.p_max == 10.0);
        CHECK(cfg.eigenset.l_max == 2);
        CHECK(cfg.eigenset.cache == "tiny.eig");
        CHECK(cfg.pulse.omega.value() == 0.5);
        CHECK(cfg.propagation.dt == 0.1);
        CHECK(cfg.output.pad_n_par == 41);
    }
    SECTION("unknown keys are rejected with the line number") {
        try {
            parse_config("[grid]\nn = 32\nfoo = 1\n", "bad.ini");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("bad.ini:3") != std::string::npos);
            CHECK(std::string(e.what()).find("grid.foo") != std::string::npos);
        }
    }
    SECTION("unknown sections and malformed lines") {
        CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n", "t"), ConfigError);
        CHECK_THROWS_AS(parse_config("[grid]\nn 32\n", "t"), ConfigError);
        CHECK_THROWS_AS(parse_config("n = 32\n", "t"), ConfigError);  // key outside section
        CHECK_THROWS_AS(parse_config("[grid]\nn = abc\n", "t"), ConfigError);
    }
    SECTION("validation rejects degenerate grids before any computation") {
        CHECK_THROWS_AS(parse_config("[grid]\nn = 1\n", "t"), ConfigError);
    }
    SECTION("comments and blank lines are ignored") {
        const auto cfg = parse_config("# header\n[grid]\n\nn = 32  # trailing\n", "t");
        CHECK(cfg.grid.n == 32);
    }
}

TEST_CASE("pulse alternative resolution", "[cli]") {
    SECTION("exactly one of each pair") {
        RunConfig cfg = parse_config(tiny_config, "inline");
        cfg.pulse.wavelength_nm = 800.0;  // now both omega and wavelength set
        CHECK_THROWS_AS(cfg.make_pulse(), ConfigError);
        cfg.pulse.wavelength_nm.reset();
        cfg.pulse.omega.reset();
        CHECK_THROWS_AS(cfg.make_pulse(), ConfigError);
    }
    SECTION("wavelength and intensity route") {
        RunConfig cfg;
        parse_config_into(cfg,
                          "[pulse]\nenvelope = apot\nwavelength_nm = 800\nintensity = 1e14\n"
                          "cycles = 5\n",
                          "t");
        const auto p = cfg.make_pulse();
        CHECK(p.omega == Catch::Approx(0.05695419).epsilon(1e-6));
        CHECK(p.peak_field == Catch::Approx(0.05338027).epsilon(1e-6));
        CHECK(p.duration == Catch::Approx(5.0 * 2.0 * std::numbers::pi / p.omega).epsilon(1e-12));
        CHECK(p.envelope == EnvelopeTarget::vector_potential);
    }
    SECTION("fwhm route uses the sin^2 intensity-envelope relation") {
        RunConfig cfg;
        parse_config_into(cfg, "[pulse]\nomega = 0.057\npeak_field = 0.05\nfwhm_fs = 10\n", "t");
        const auto p = cfg.make_pulse();
        CHECK(p.duration * sin2_intensity_fwhm_ratio() ==
              Catch::Approx(10.0 * units::fs_to_au).epsilon(1e-12));
    }
    SECTION("bad envelope name") {
        RunConfig cfg;
        parse_config_into(cfg, "[pulse]\nenvelope = circular\nomega = 1\npeak_field = 0.1\ncycles = 1\n", "t");
        CHECK_THROWS_AS(cfg.make_pulse(), ConfigError);
    }
}

TEST_CASE("presets", "[cli]") {
    SECTION("every preset parses and validates") {
        for (const auto& [name, text] : presets()) {
            const RunConfig cfg = preset_config(name);
            CHECK(cfg.grid.n >= 256);
        }
    }
    SECTION("unknown preset lists the available ones") {
        try {
            preset_config("nope");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("hydrogen-512") != std::string::npos);
        }
    }
    SECTION("helium presets carry the model parameters") {
        const auto cfg = preset_config("helium-512");
        CHECK(cfg.potential.a[0] == 1.231);
        CHECK(cfg.potential.a[5] == 0.480);
        CHECK(cfg.grid.p_max == 100.0);
        CHECK_FALSE(cfg.hydrogenic());
    }
}

TEST_CASE("command pipeline on a miniature problem", "[cli]") {
    TempDir tmp;
    RunConfig cfg = parse_config(tiny_config, "inline");
    CommandContext ctx;
    ctx.out_dir = tmp.path;
    std::ostringstream log;
    ctx.log = &log;

    SECTION("solve writes the cache and level table; reruns reuse the cache") {
        cmd_solve(cfg, ctx);
        REQUIRE(fs::exists(tmp.path / "tiny.eig"));
        REQUIRE(fs::exists(tmp.path / "levels.txt"));
        const auto levels_a = read_file(tmp.path / "levels.txt");
        const auto t0 = fs::last_write_time(tmp.path / "tiny.eig");
        cmd_solve(cfg, ctx);
        CHECK(fs::last_write_time(tmp.path / "tiny.eig") == t0);  // untouched
        CHECK(read_file(tmp.path / "levels.txt") == levels_a);    // byte-identical
        CHECK(log.str().find("loaded cache") != std::string::npos);
    }
    SECTION("propagate requires a matching cache") {
        CHECK_THROWS_AS(cmd_propagate(cfg, ctx), StaleCache);
        cmd_solve(cfg, ctx);
        RunConfig other = cfg;
        other.eigenset.l_max = 1;  // invalidates the content hash
        CHECK_THROWS_AS(cmd_propagate(other, ctx), StaleCache);
    }
    SECTION("full pipeline: solve, propagate, spectra") {
        cmd_solve(cfg, ctx);
        cmd_propagate(cfg, ctx);
        REQUIRE(fs::exists(tmp.path / "tiny-wp.bin"));
        REQUIRE(fs::exists(tmp.path / "observer.txt"));
        cmd_spectra(cfg, ctx);
        REQUIRE(fs::exists(tmp.path / "ati.txt"));
        REQUIRE(fs::exists(tmp.path / "pad.txt"));
        // the observer file has the header plus one row per sync frame
        std::istringstream obs(read_file(tmp.path / "observer.txt"));
        std::string line;
        std::size_t rows = 0;
        while (std::getline(obs, line))
            if (!line.empty() && line[0] != '#') ++rows;
        CHECK(rows >= 3);
        // determinism: a second propagate + spectra reproduce identical bytes
        const auto ati_a = read_file(tmp.path / "ati.txt");
        const auto pad_a = read_file(tmp.path / "pad.txt");
        cmd_propagate(cfg, ctx);
        cmd_spectra(cfg, ctx);
        CHECK(read_file(tmp.path / "ati.txt") == ati_a);
        CHECK(read_file(tmp.path / "pad.txt") == pad_a);
    }
    SECTION("spectra rejects a checkpoint from different propagation settings") {
        cmd_solve(cfg, ctx);
        cmd_propagate(cfg, ctx);
        RunConfig other = cfg;
        other.propagation.dt = 0.05;
        CHECK_THROWS_AS(cmd_spectra(other, ctx), StaleCache);
    }
    SECTION("validate needs a hydrogenic potential") {
        RunConfig he = cfg;
        he.potential.a = {1.231, 0.662, -1.325, 1.236, -0.231, 0.480};
        CHECK_THROWS_AS(cmd_validate(he, ctx), UnsupportedConfiguration);
    }
    SECTION("pulse-dump writes a three-column table") {
        cmd_pulse_dump(cfg, ctx, 100);
        const auto text = read_file(tmp.path / "pulse.txt");
        CHECK(text.find("# t electric_field vector_potential") != std::string::npos);
        std::istringstream in(text);
        std::string line;
        std::size_t rows = 0;
        while (std::getline(in, line))
            if (!line.empty() && line[0] != '#') ++rows;
        CHECK(rows == 101);
    }
}

#ifdef PSPACE_CLI
TEST_CASE("cli process exit codes", "[cli]") {
    TempDir tmp;
    const std::string bin = PSPACE_CLI;
    const auto run = [&](const std::string& args) {
        const std::string cmd = bin + " " + args + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    SECTION("missing subcommand or preset is a usage error") {
        CHECK(run("") == 2);
        CHECK(run("solve --preset no-such-preset --output-dir " + tmp.path.string()) == 2);
        CHECK(run("solve") == 2);  // neither --preset nor --config
    }
    SECTION("config validation failures") {
        const auto bad = tmp.path / "bad.ini";
        std::ofstream(bad) << "[grid]\nn = 1\n";
        CHECK(run("solve --config " + bad.string() + " --output-dir " + tmp.path.string()) == 2);
    }
    SECTION("missing cache is a stale-cache failure") {
        const auto ini = tmp.path / "tiny.ini";
        std::ofstream(ini) << tiny_config;
        CHECK(run("propagate --config " + ini.string() + " --output-dir " + tmp.path.string()) ==
              4);
    }
    SECTION("the miniature pipeline succeeds end to end") {
        const auto ini = tmp.path / "tiny.ini";
        std::ofstream(ini) << tiny_config;
        const std::string common = " --config " + ini.string() + " --output-dir " + tmp.path.string();
        CHECK(run("solve" + common) == 0);
        CHECK(run("propagate" + common) == 0);
        CHECK(run("spectra" + common) == 0);
        CHECK(run("pulse-dump" + common) == 0);
        CHECK(fs::exists(tmp.path / "ati.txt"));
    }
}
#endif
