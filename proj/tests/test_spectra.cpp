#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "pspace/eigenset.hpp"
#include "pspace/hydrogen.hpp"
#include "pspace/propagator.hpp"
#include "pspace/spectra.hpp"

using namespace pspace;

namespace {

const Eigenset& small_set() {
    static const Eigenset set = build_eigenset(build_grid(96, 12.0), PotentialModel::hydrogen(),
                                               4, KernelQuadrature::make());
    return set;
}

/// Smooth normalized two-channel packet centred near p = 0.5.
Wavepacket smooth_packet(const Eigenset& set) {
    Wavepacket wp;
    wp.l_max = 2;
    wp.f = Matrix<cplx>(3, set.grid.n_points);
    for (std::size_t j = 0; j < set.grid.n_points; ++j) {
        const double p = set.grid.p_nodes[j];
        const double env = p * std::exp(-3.0 * (p - 0.5) * (p - 0.5));
        wp.f(0, j) = env;
        wp.f(1, j) = cplx(0.3, 0.4) * env;
    }
    const double n = std::sqrt(wavepacket_norm2(wp, set.grid));
    for (auto& c : wp.f.storage()) c /= n;
    return wp;
}

} // namespace

TEST_CASE("bound-state projection", "[spectra]") {
    const Eigenset& set = small_set();
    const RadialGrid& g = set.grid;

    SECTION("pure ground state projects to nothing") {
        const Wavepacket wp = Wavepacket::from_eigenstate(set, 0, 0, 2);
        const auto cp = project_out_bound(wp, set);
        for (std::size_t l = 0; l <= 2; ++l)
            for (std::size_t j = 0; j < g.n_points; ++j)
                CHECK(std::abs(cp.g(l, j)) < 1e-10);
    }
    SECTION("continuum eigenstates pass through unchanged") {
        const std::size_t idx = set.block(1).bound_count + 3;
        const Wavepacket wp = Wavepacket::from_eigenstate(set, 1, idx, 2);
        const auto cp = project_out_bound(wp, set);
        for (std::size_t j = 0; j < g.n_points; ++j)
            CHECK(std::abs(cp.g(1, j) - wp.f(1, j)) < 1e-10);
    }
    SECTION("projection is idempotent") {
        const Wavepacket wp = smooth_packet(set);
        const auto cp1 = project_out_bound(wp, set);
        Wavepacket as_wp;
        as_wp.l_max = cp1.l_max;
        as_wp.f = cp1.g;
        const auto cp2 = project_out_bound(as_wp, set);
        for (std::size_t l = 0; l <= cp1.l_max; ++l)
            for (std::size_t j = 0; j < g.n_points; ++j)
                CHECK(std::abs(cp2.g(l, j) - cp1.g(l, j)) < 1e-12);
    }
    SECTION("result is orthogonal to every bound state") {
        const auto cp = project_out_bound(smooth_packet(set), set);
        for (std::size_t l = 0; l <= cp.l_max; ++l)
            for (std::size_t nb = 0; nb < set.block(l).bound_count; ++nb) {
                cplx ov = 0.0;
                for (std::size_t j = 0; j < g.n_points; ++j)
                    ov += g.quad_weights[j] * set.block(l).chi(nb, j) * cp.g(l, j);
                CHECK(std::abs(ov) < 1e-10);
            }
    }
}

TEST_CASE("ionization probability", "[spectra]") {
    const Eigenset& set = small_set();
    const RadialGrid& g = set.grid;

    SECTION("zero packet") {
        ContinuumPacket cp;
        cp.l_max = 1;
        cp.g = Matrix<cplx>(2, g.n_points);
        CHECK(ionization_probability(cp, g) == 0.0);
    }
    SECTION("unit continuum packet") {
        const std::size_t idx = set.block(0).bound_count + 5;
        const Wavepacket wp = Wavepacket::from_eigenstate(set, 0, idx, 1);
        const auto cp = project_out_bound(wp, set);
        CHECK(ionization_probability(cp, g) == Catch::Approx(1.0).margin(1e-10));
    }
    SECTION("projection never raises the norm") {
        const Wavepacket wp = smooth_packet(set);
        const auto cp = project_out_bound(wp, set);
        CHECK(ionization_probability(cp, g) <= wavepacket_norm2(wp, g) + 1e-12);
    }
    SECTION("parseval chain closes") {
        const Wavepacket wp = smooth_packet(set);
        const auto cp = project_out_bound(wp, set);
        const double lhs = wavepacket_norm2(wp, g);
        const double rhs = ionization_probability(cp, g) + bound_population(set, wp);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12));
    }
}

TEST_CASE("ati spectrum", "[spectra]") {
    const Eigenset& set = small_set();
    const RadialGrid& g = set.grid;
    const auto cp = project_out_bound(smooth_packet(set), set);

    SECTION("native grid: energies ascend, jacobian closes the integral") {
        const auto s = ati_spectrum(cp, g);
        for (std::size_t j = 0; j + 1 < s.energy.size(); ++j) CHECK(s.energy[j] < s.energy[j + 1]);
        // int dP/de de = sum_j (dP/de)_j p_j w_j = P by the change of variable
        double total = 0.0;
        for (std::size_t j = 0; j < s.energy.size(); ++j)
            total += s.density[j] * g.p_nodes[j] * g.quad_weights[j];
        CHECK(total == Catch::Approx(ionization_probability(cp, g)).epsilon(1e-12));
    }
    SECTION("single-channel packet reduces to |g|^2 / p") {
        ContinuumPacket one;
        one.l_max = 1;
        one.g = Matrix<cplx>(2, g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j) one.g(1, j) = cp.g(1, j);
        const auto s = ati_spectrum(one, g);
        for (std::size_t j = 0; j < g.n_points; ++j)
            CHECK(s.density[j] ==
                  Catch::Approx(std::norm(cp.g(1, j)) / g.p_nodes[j]).margin(1e-300));
    }
    SECTION("uniform resampling conserves the integral for a compact packet") {
        // bandlimited synthetic packet, no bound subtraction, so the whole
        // spectrum sits below eps_max
        ContinuumPacket comp;
        comp.l_max = 1;
        comp.g = Matrix<cplx>(2, g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double p = g.p_nodes[j];
            const double env = p * std::exp(-4.0 * (p - 0.6) * (p - 0.6));
            comp.g(0, j) = env;
            comp.g(1, j) = cplx(0.1, 0.7) * env;
        }
        const auto u = ati_spectrum_resampled(comp, g, 4000, 4.0);
        double total = 0.0;
        const double de = u.energy[1] - u.energy[0];
        for (std::size_t j = 0; j < u.energy.size(); ++j) total += u.density[j] * de;
        CHECK(total == Catch::Approx(ionization_probability(comp, g)).epsilon(1e-5));
    }
}

TEST_CASE("cardinal interpolation", "[spectra]") {
    SECTION("reproduces samples at the nodes exactly") {
        const auto g = build_grid(96, 12.0);
        std::vector<cplx> samples(g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j)
            samples[j] = cplx(std::sin(g.p_nodes[j]), std::cos(g.p_nodes[j]));
        for (std::size_t j : {0ul, 7ul, 50ul, 95ul})
            CHECK(std::abs(interpolate_radial(g, samples, g.p_nodes[j]) - samples[j]) == 0.0);
    }
    SECTION("smooth function off-grid at production resolution") {
        const auto g = build_grid(512, 50.0);
        std::vector<cplx> samples(g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j)
            samples[j] = g.p_nodes[j] * hydrogen_momentum_F(1, 0, g.p_nodes[j]);
        CardinalBasis basis(g);
        RadialInterpolant interp(basis, samples);
        double worst = 0.0;
        for (std::size_t j = 0; j + 1 < g.n_points; j += 3) {
            const double p = 0.5 * (g.p_nodes[j] + g.p_nodes[j + 1]);
            const double exact = p * hydrogen_momentum_F(1, 0, p);
            worst = std::max(worst, std::abs(interp(p).real() - exact));
        }
        CHECK(worst < 1e-8);
    }
    SECTION("no spurious oscillation at the outer edge for a decayed function") {
        const auto g = build_grid(512, 50.0);
        std::vector<cplx> samples(g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j)
            samples[j] = std::exp(-g.p_nodes[j]);
        CardinalBasis basis(g);
        RadialInterpolant interp(basis, samples);
        for (double p = 0.90 * g.p_max; p < 0.999 * g.p_max; p += 0.01 * g.p_max)
            CHECK(std::abs(interp(p)) < 1e-6);
    }
    SECTION("momenta outside (0, p_max] are rejected") {
        const auto g = build_grid(64, 10.0);
        std::vector<cplx> samples(g.n_points, 1.0);
        CHECK_THROWS_AS(interpolate_radial(g, samples, 0.0), std::out_of_range);
        CHECK_THROWS_AS(interpolate_radial(g, samples, 10.5), std::out_of_range);
        CHECK_NOTHROW(interpolate_radial(g, samples, 10.0));
    }
}

TEST_CASE("photoelectron angular distribution", "[spectra]") {
    const Eigenset& set = small_set();
    const RadialGrid& g = set.grid;

    SECTION("pure s-wave packet is isotropic") {
        ContinuumPacket cp;
        cp.l_max = 0;
        cp.g = Matrix<cplx>(1, g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double p = g.p_nodes[j];
            cp.g(0, j) = p * std::exp(-2.0 * (p - 0.6) * (p - 0.6));
        }
        const auto pd = pad(cp, g, 81, 41, 2.0);
        // pick a ring p = 1.0 and compare density / p_perp at two angles
        const auto val = [&](std::size_t i, std::size_t k) {
            return pd.density(i, k) / (2.0 * std::numbers::pi * pd.p_perp[k]);
        };
        // (p_par, p_perp) = (0.6, 0.8) and (0.8, 0.6) both sit on p = 1
        const auto find = [&](const std::vector<double>& v, double x) {
            std::size_t best = 0;
            for (std::size_t i = 0; i < v.size(); ++i)
                if (std::abs(v[i] - x) < std::abs(v[best] - x)) best = i;
            return best;
        };
        const double va = val(find(pd.p_par, 0.6), find(pd.p_perp, 0.8));
        const double vb = val(find(pd.p_par, 0.8), find(pd.p_perp, 0.6));
        CHECK(va == Catch::Approx(vb).epsilon(1e-10));
        // and mirror symmetry in p_par
        const double vc = val(find(pd.p_par, -0.6), find(pd.p_perp, 0.8));
        CHECK(va == Catch::Approx(vc).epsilon(1e-12));
    }
    SECTION("even-l packets are symmetric under p_par reflection") {
        ContinuumPacket cp;
        cp.l_max = 2;
        cp.g = Matrix<cplx>(3, g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double p = g.p_nodes[j];
            const double env = p * std::exp(-2.0 * (p - 0.7) * (p - 0.7));
            cp.g(0, j) = env;
            cp.g(2, j) = cplx(0.2, -0.5) * env;
        }
        const auto pd = pad(cp, g, 101, 51, 2.0);
        for (std::size_t i = 0; i < pd.p_par.size() / 2; ++i)
            for (std::size_t k = 0; k < pd.p_perp.size(); k += 7)
                CHECK(pd.density(i, k) ==
                      Catch::Approx(pd.density(pd.p_par.size() - 1 - i, k)).margin(1e-14));
    }
    SECTION("cells beyond the momentum cap are zero") {
        const auto cp = project_out_bound(smooth_packet(set), set);
        const auto pd = pad(cp, g, 61, 31, 1.5);
        for (std::size_t i = 0; i < pd.p_par.size(); ++i)
            for (std::size_t k = 0; k < pd.p_perp.size(); ++k)
                if (std::hypot(pd.p_par[i], pd.p_perp[k]) > 1.5)
                    CHECK(pd.density(i, k) == 0.0);
    }
    SECTION("2d quadrature of the pad recovers the ionization probability") {
        // compact synthetic packet so the raster covers all of its support
        ContinuumPacket cp;
        cp.l_max = 2;
        cp.g = Matrix<cplx>(3, g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double p = g.p_nodes[j];
            const double env = p * std::exp(-4.0 * (p - 0.6) * (p - 0.6));
            cp.g(0, j) = env;
            cp.g(1, j) = cplx(0.3, 0.4) * env;
            cp.g(2, j) = cplx(-0.2, 0.1) * env;
        }
        const auto pd = pad(cp, g, 301, 151, 3.0);
        const double dpar = pd.p_par[1] - pd.p_par[0];
        const double dperp = pd.p_perp[1] - pd.p_perp[0];
        double total = 0.0;
        for (std::size_t i = 0; i < pd.p_par.size(); ++i)
            for (std::size_t k = 0; k < pd.p_perp.size(); ++k) {
                double w = dpar * dperp;
                if (i == 0 || i + 1 == pd.p_par.size()) w *= 0.5;
                if (k == 0 || k + 1 == pd.p_perp.size()) w *= 0.5;
                total += w * pd.density(i, k);
            }
        CHECK(total == Catch::Approx(ionization_probability(cp, g)).epsilon(1e-3));
    }
}
