#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "pspace/grid.hpp"

namespace pspace {

/// Radial momentum wave function F_nl(p) of hydrogen (Z = 1) in the
/// Gegenbauer-polynomial closed form, normalized as int F^2 p^2 dp = 1.
/// For the ground state this reduces to sqrt(32/pi) / (1 + p^2)^2.
inline double hydrogen_momentum_F(std::size_t n, std::size_t l, double p) {
    if (n < 1 || l >= n)
        throw std::invalid_argument("hydrogen_momentum_F: need 1 <= n and l < n, got n = " +
                                    std::to_string(n) + ", l = " + std::to_string(l));
    const double nd = static_cast<double>(n);
    const double np = nd * p;
    const double denom = np * np + 1.0;
    const double y = (np * np - 1.0) / denom;  // Gegenbauer argument

    // C^{(l+1)}_{n-l-1}(y) by recurrence
    const double a = static_cast<double>(l) + 1.0;
    const std::size_t k_top = n - l - 1;
    double ckm1 = 1.0, ck = 2.0 * a * y;
    double C = (k_top == 0) ? 1.0 : ck;
    for (std::size_t k = 2; k <= k_top; ++k) {
        const double c = (2.0 * (k + a - 1.0) * y * ck - (k + 2.0 * a - 2.0) * ckm1) / k;
        ckm1 = ck;
        ck = c;
        C = c;
    }

    // prefactor n^2 2^{2l+2} l! sqrt(2 (n-l-1)! / (pi (n+l)!))
    const double lg = 2.0 * std::log(nd) + (2.0 * l + 2.0) * std::log(2.0) +
                      std::lgamma(static_cast<double>(l) + 1.0) +
                      0.5 * (std::log(2.0) + std::lgamma(nd - l) - std::log(std::numbers::pi) -
                             std::lgamma(nd + l + 1.0));
    const double radial =
        std::pow(np, static_cast<double>(l)) / std::pow(denom, static_cast<double>(l) + 2.0);
    return std::exp(lg) * radial * C;
}

/// chi_nl(p_j) = p_j F_nl(p_j) sampled on the grid, renormalized so the
/// grid quadrature gives sum_j w_j chi_j^2 = 1, with the first nonzero
/// sample made positive. This matches the sign and normalization
/// conventions of the numerically computed eigenvectors.
inline std::vector<double> hydrogen_chi_exact(std::size_t n, std::size_t l,
                                              const RadialGrid& grid) {
    if (n < 1 || l >= n)
        throw std::invalid_argument("hydrogen_chi_exact: need 1 <= n and l < n, got n = " +
                                    std::to_string(n) + ", l = " + std::to_string(l));
    std::vector<double> chi(grid.n_points);
    for (std::size_t j = 0; j < grid.n_points; ++j)
        chi[j] = grid.p_nodes[j] * hydrogen_momentum_F(n, l, grid.p_nodes[j]);
    double norm2 = 0.0, amax = 0.0;
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        norm2 += grid.quad_weights[j] * chi[j] * chi[j];
        amax = std::max(amax, std::abs(chi[j]));
    }
    double scale = 1.0 / std::sqrt(norm2);
    // same sign rule as the computed eigenvectors: first sample above the
    // noise floor made positive
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        if (std::abs(chi[j]) > 1e-8 * amax) {
            if (chi[j] < 0.0) scale = -scale;
            break;
        }
    }
    for (double& c : chi) c *= scale;
    return chi;
}

} // namespace pspace
