#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pspace/grid.hpp"
#include "pspace/hydrogen.hpp"
#include "pspace/specfun.hpp"

using namespace pspace;

TEST_CASE("legendre polynomials", "[specfun]") {
    SECTION("low orders at x = 0.5") {
        const auto P = legendre_P_all(2, 0.5);
        CHECK(P[0] == 1.0);
        CHECK(P[1] == 0.5);
        CHECK(P[2] == Catch::Approx(-0.125).epsilon(1e-15));
    }
    SECTION("P_l(1) = 1") {
        const auto P = legendre_P_all(20, 1.0);
        for (double v : P) CHECK(v == Catch::Approx(1.0).epsilon(1e-13));
    }
    SECTION("odd orders vanish at the origin") {
        const auto P = legendre_P_all(15, 0.0);
        for (std::size_t l = 1; l < P.size(); l += 2) CHECK(P[l] == 0.0);
    }
    SECTION("domain check") { CHECK_THROWS_AS(legendre_P_all(3, 1.5), std::invalid_argument); }
    SECTION("orthogonality under gauss-legendre quadrature") {
        const auto rule = gauss_legendre(24);
        for (std::size_t a = 0; a <= 10; ++a)
            for (std::size_t b = a; b <= 10; ++b) {
                double acc = 0.0;
                for (std::size_t k = 0; k < rule.order; ++k) {
                    const auto P = legendre_P_all(b, rule.nodes[k]);
                    acc += rule.weights[k] * P[a] * P[b];
                }
                const double expect = a == b ? 2.0 / (2.0 * a + 1.0) : 0.0;
                CHECK(acc == Catch::Approx(expect).margin(1e-14));
            }
    }
}

TEST_CASE("gauss-legendre rules", "[specfun]") {
    SECTION("order one") {
        const auto r = gauss_legendre(1);
        REQUIRE(r.order == 1);
        CHECK(r.nodes[0] == 0.0);
        CHECK(r.weights[0] == Catch::Approx(2.0).epsilon(1e-15));
    }
    SECTION("degree-four monomial integrated exactly at order five") {
        const auto r = gauss_legendre(5);
        double acc = 0.0;
        for (std::size_t k = 0; k < r.order; ++k)
            acc += r.weights[k] * std::pow(r.nodes[k], 4);
        CHECK(acc == Catch::Approx(0.4).epsilon(1e-14));
    }
    SECTION("weights sum to two at order 64") {
        const auto r = gauss_legendre(64);
        double acc = 0.0;
        for (double w : r.weights) acc += w;
        CHECK(acc == Catch::Approx(2.0).epsilon(1e-14));
    }
    SECTION("nodes strictly interior and ascending") {
        for (std::size_t m : {2, 7, 32, 101}) {
            const auto r = gauss_legendre(m);
            CHECK(r.nodes.front() > -1.0);
            CHECK(r.nodes.back() < 1.0);
            for (std::size_t k = 0; k + 1 < m; ++k) CHECK(r.nodes[k] < r.nodes[k + 1]);
        }
    }
}

TEST_CASE("spherical bessel functions", "[specfun]") {
    SECTION("limit values at z = 0") {
        const auto j = spherical_bessel_j_all(6, 0.0);
        CHECK(j[0] == 1.0);
        for (std::size_t k = 1; k <= 6; ++k) CHECK(j[k] == 0.0);
    }
    SECTION("j_0 vanishes at z = pi") {
        const auto j = spherical_bessel_j_all(0, std::numbers::pi);
        CHECK(std::abs(j[0]) < 1e-15);
    }
    SECTION("small-argument values against the power series") {
        const auto j = spherical_bessel_j_all(10, 0.3);
        for (std::size_t k = 0; k <= 10; ++k) {
            const double ref = oracles::bessel_series(k, 0.3);
            CHECK(j[k] == Catch::Approx(ref).epsilon(1e-12));
        }
    }
    SECTION("three-term recurrence holds in the oscillatory region") {
        for (double z : {2.7, 11.3, 47.0, 301.5}) {
            const auto j = spherical_bessel_j_all(24, z);
            for (std::size_t k = 1; k < 24; ++k) {
                const double lhs = j[k - 1] + j[k + 1];
                const double rhs = (2.0 * k + 1.0) * j[k] / z;
                CHECK(lhs == Catch::Approx(rhs).margin(1e-10 * std::abs(j[k]) + 1e-14));
            }
        }
    }
    SECTION("negative arguments follow the parity rule") {
        const auto jp = spherical_bessel_j_all(8, 1.7);
        const auto jm = spherical_bessel_j_all(8, -1.7);
        for (std::size_t k = 0; k <= 8; ++k)
            CHECK(jm[k] == Catch::Approx((k % 2 ? -1.0 : 1.0) * jp[k]).margin(1e-300));
    }
    SECTION("deep tail underflows to zero without poisoning low orders") {
        const auto j = spherical_bessel_j_all(96, 0.01);
        CHECK(j[0] == Catch::Approx(oracles::bessel_series(0, 0.01)).epsilon(1e-14));
        CHECK(j[96] == 0.0);  // far below 1e-300
        CHECK(j[3] == Catch::Approx(oracles::bessel_series(3, 0.01)).epsilon(1e-12));
    }
}

TEST_CASE("wigner 3j symbols at zero projection", "[specfun]") {
    SECTION("frozen values") {
        CHECK(wigner3j_zero(0, 0, 0) == 1.0);
        CHECK(wigner3j_zero(1, 1, 0) == Catch::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
        CHECK(wigner3j_zero(1, 1, 1) == 0.0);  // odd sum
        CHECK(wigner3j_zero(2, 3, 7) == 0.0);  // triangle violated
    }
    SECTION("squares against the legendre-product integral") {
        for (std::size_t l = 0; l <= 8; ++l)
            for (std::size_t l1 = 0; l1 <= 8; ++l1)
                for (std::size_t l2 = (l + l1) % 2; l2 <= 8; l2 += 2) {
                    const double w = wigner3j_zero(l, l1, l2);
                    const double ref = oracles::wigner3j_zero_squared(l, l1, l2);
                    CHECK(w * w == Catch::Approx(ref).margin(1e-14));
                }
    }
    SECTION("sign alternates with the half-sum") {
        CHECK(wigner3j_zero(2, 2, 2) < 0.0);  // g = 3
        CHECK(wigner3j_zero(2, 2, 0) > 0.0);  // g = 2
    }
    SECTION("orthogonality sum rule") {
        for (std::size_t l = 0; l <= 6; ++l)
            for (std::size_t l1 = 0; l1 <= 6; ++l1) {
                double acc = 0.0;
                for (std::size_t l2 = 0; l2 <= l + l1; ++l2) {
                    const double w = wigner3j_zero(l, l1, l2);
                    acc += (2.0 * l2 + 1.0) * w * w;
                }
                CHECK(acc == Catch::Approx(1.0).epsilon(1e-13));
            }
    }
    SECTION("large angular momenta stay finite through log-factorials") {
        const double w = wigner3j_zero(90, 88, 6);
        CHECK(std::isfinite(w));
        CHECK(std::abs(w) > 0.0);
        CHECK(std::abs(w) < 1.0);
    }
}

TEST_CASE("hydrogen momentum functions", "[specfun]") {
    SECTION("ground state matches the closed form") {
        for (double p : {0.1, 0.7, 2.0, 9.0}) {
            const double expect = std::sqrt(32.0 / std::numbers::pi) / std::pow(1.0 + p * p, 2);
            CHECK(hydrogen_momentum_F(1, 0, p) == Catch::Approx(expect).epsilon(1e-14));
        }
    }
    SECTION("2p against the coordinate-space hankel transform") {
        for (double p : {0.15, 0.4, 0.9, 1.8}) {
            const double ref = oracles::hydrogen_F21_hankel(p);
            const double val = hydrogen_momentum_F(2, 1, p);
            CHECK(std::abs(val) == Catch::Approx(std::abs(ref)).epsilon(1e-10));
        }
    }
    SECTION("grid-sampled chi is unit normalized and positive at the first node") {
        const auto g = build_grid(512, 50.0);
        for (auto [n, l] : std::vector<std::pair<std::size_t, std::size_t>>{
                 {1, 0}, {2, 0}, {2, 1}, {4, 3}}) {
            const auto chi = hydrogen_chi_exact(n, l, g);
            double norm = 0.0;
            for (std::size_t j = 0; j < g.n_points; ++j)
                norm += g.quad_weights[j] * chi[j] * chi[j];
            CHECK(norm == Catch::Approx(1.0).epsilon(1e-13));
            // first sample above the noise floor is positive
            for (std::size_t j = 0; j < g.n_points; ++j)
                if (std::abs(chi[j]) > 1e-12) {
                    CHECK(chi[j] > 0.0);
                    break;
                }
        }
    }
    SECTION("oracle orthonormality on the default grid") {
        const auto g = build_grid(512, 50.0);
        for (std::size_t l = 0; l <= 3; ++l)
            for (std::size_t n = l + 1; n <= 4; ++n)
                for (std::size_t m = n; m <= 4; ++m) {
                    const auto a = hydrogen_chi_exact(n, l, g);
                    const auto b = hydrogen_chi_exact(m, l, g);
                    double ov = 0.0;
                    for (std::size_t j = 0; j < g.n_points; ++j)
                        ov += g.quad_weights[j] * a[j] * b[j];
                    CHECK(ov == Catch::Approx(n == m ? 1.0 : 0.0).margin(1e-5));
                }
    }
    SECTION("invalid quantum numbers") {
        CHECK_THROWS_AS(hydrogen_momentum_F(1, 1, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(hydrogen_momentum_F(0, 0, 0.5), std::invalid_argument);
    }
}
