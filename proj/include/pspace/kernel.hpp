#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "pspace/grid.hpp"
#include "pspace/matrix.hpp"
#include "pspace/parallel.hpp"
#include "pspace/specfun.hpp"

namespace pspace {

/// Effective single-active-electron potential: nuclear Coulomb -Z/r plus
/// the short-range screening term
///   V_short(r) = -(a1 e^{-a2 r} + a3 r e^{-a4 r} + a5 e^{-a6 r}) / r.
/// The radial Fourier integral is cut off at r = R_m, beyond which every
/// bound state of interest has decayed.
struct PotentialModel {
    double nuclear_charge = 1.0;                       ///< Z
    std::array<double, 6> short_range{0, 0, 0, 0, 0, 0};  ///< a1..a6
    double r_cutoff = 200.0;                           ///< R_m, bohr

    bool has_short_range() const {
        return short_range[0] != 0.0 || short_range[2] != 0.0 || short_range[4] != 0.0;
    }

    static PotentialModel hydrogen(double r_cutoff = 200.0) {
        return PotentialModel{1.0, {0, 0, 0, 0, 0, 0}, r_cutoff};
    }

    /// Tong-Lin model parameters for helium; the active electron sees an
    /// asymptotic +1 charge, so Z = 1 with these corrections.
    static PotentialModel sae_helium(double r_cutoff = 200.0) {
        return PotentialModel{1.0, {1.231, 0.662, -1.325, 1.236, -0.231, 0.480}, r_cutoff};
    }
};

/// Fourier transform of the short-range potential,
///   W_short(Q^2) = -(1/2pi^2) [ a1/(a2^2+Q^2) + 2 a3 a4/(a4^2+Q^2)^2 + a5/(a6^2+Q^2) ].
inline double w_short(double Q_squared, const PotentialModel& model) {
    const auto& a = model.short_range;
    double s = 0.0;
    if (a[0] != 0.0) s += a[0] / (a[1] * a[1] + Q_squared);
    if (a[2] != 0.0) {
        const double d = a[3] * a[3] + Q_squared;
        s += 2.0 * a[2] * a[3] / (d * d);
    }
    if (a[4] != 0.0) s += a[4] / (a[5] * a[5] + Q_squared);
    return -s / (2.0 * std::numbers::pi * std::numbers::pi);
}

namespace detail {
/// (cos(u R) - 1) evaluated as -2 sin^2(uR/2); avoids cancellation for
/// small phase.
inline double cos_minus_one(double phase) {
    const double s = std::sin(0.5 * phase);
    return -2.0 * s * s;
}
} // namespace detail

/// Integrand of the Coulomb coefficient a_l in the xi variable,
///   Z/(8 pi^2 p q) P_l(xi) [cos(sqrt(2pq(z-xi)) R_m) - 1] / (z - xi),
/// with the xi -> z limit -Z R_m^2 P_l(xi) / (8 pi^2) taken analytically.
inline double coulomb_integrand(double p, double q, double xi, std::size_t l,
                                const PotentialModel& model) {
    const double z = (p * p + q * q) / (2.0 * p * q);
    const double pref = model.nuclear_charge /
                        (8.0 * std::numbers::pi * std::numbers::pi * p * q);
    const double Pl = legendre_P_all(l, std::clamp(xi, -1.0, 1.0))[l];
    const double dz = z - xi;
    const double R = model.r_cutoff;
    if (dz <= 0.0 || 2.0 * p * q * dz * R * R < 1e-24)
        return -model.nuclear_charge * R * R * Pl / (8.0 * std::numbers::pi * std::numbers::pi);
    return pref * Pl * detail::cos_minus_one(std::sqrt(2.0 * p * q * dz) * R) / dz;
}

/// a_l(p, q) by direct application of one quadrature rule in xi. The rule's
/// interior nodes never touch xi = 1, so the z = 1 singular point is
/// stepped over. Deterministic for a fixed rule.
inline double a_l(double p, double q, std::size_t l, const PotentialModel& model,
                  const GaussLegendreRule& rule) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.order; ++k)
        acc += rule.weights[k] * coulomb_integrand(p, q, rule.nodes[k], l, model);
    return acc;
}

/// b_l(p, q) = 1/2 int P_l(xi) W_short(2pq(z-xi)) dxi with the same rule.
inline double b_l(double p, double q, std::size_t l, const PotentialModel& model,
                  const GaussLegendreRule& rule) {
    const double z = (p * p + q * q) / (2.0 * p * q);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.order; ++k) {
        const double xi = rule.nodes[k];
        const double Pl = legendre_P_all(l, xi)[l];
        acc += rule.weights[k] * 0.5 * Pl * w_short(2.0 * p * q * (z - xi), model);
    }
    return acc;
}

/// Quadrature policy for kernel assembly: composite Gauss-Legendre panels
/// laid out uniformly in the phase variable u = sqrt(2pq(z-xi)), in which
/// the cos(u R_m) factor oscillates with a fixed period. The panel count
/// follows the oscillation estimate R_m (u_max - u_min) / (2 pi) plus an
/// allowance for the Legendre factor, at points_per_period nodes per
/// period; a short-range potential adds panels so the smallest a_i scale
/// stays resolved.
struct KernelQuadrature {
    std::size_t panel_order = 32;
    double points_per_period = 4.0;
    GaussLegendreRule panel_rule;

    static KernelQuadrature make(std::size_t panel_order = 32, double points_per_period = 4.0) {
        KernelQuadrature q;
        q.panel_order = panel_order;
        q.points_per_period = points_per_period;
        q.panel_rule = gauss_legendre(panel_order);
        return q;
    }
};

/// Computes a_l(p,q) for l = 0..l_max (and b_l when the model has a
/// short-range part) in one pass over the quadrature nodes, sharing the
/// cos/W_short evaluations across all l through the Legendre recurrence.
///
/// In the u variable,
///   a_l = Z/(4 pi^2 p q) int_{|p-q|}^{p+q} P_l(xi(u)) (cos(u R_m) - 1) du / u,
///   b_l = 1/(2 p q)      int_{|p-q|}^{p+q} P_l(xi(u)) W_short(u^2) u du,
/// with xi(u) = z - u^2/(2pq). Both integrands are analytic, so the
/// uniform panels converge superexponentially once the oscillation is
/// resolved.
inline void legendre_kernel_coeffs(double p, double q, std::size_t l_max,
                                   const PotentialModel& model, const KernelQuadrature& quad,
                                   std::span<double> a_out, std::span<double> b_out) {
    if (p <= 0.0 || q <= 0.0) throw std::invalid_argument("legendre_kernel_coeffs: p, q > 0");
    const double u_lo = std::abs(p - q);
    const double u_hi = p + q;
    const double du = u_hi - u_lo;
    const double R = model.r_cutoff;
    const double z = (p * p + q * q) / (2.0 * p * q);
    const bool with_short = model.has_short_range();

    double periods = R * du / (2.0 * std::numbers::pi) + 0.6 * static_cast<double>(l_max);
    std::size_t panels = static_cast<std::size_t>(
        std::ceil(periods * quad.points_per_period / static_cast<double>(quad.panel_order)));
    if (with_short) {
        double scale = std::numeric_limits<double>::infinity();
        if (model.short_range[0] != 0.0) scale = std::min(scale, model.short_range[1]);
        if (model.short_range[2] != 0.0) scale = std::min(scale, model.short_range[3]);
        if (model.short_range[4] != 0.0) scale = std::min(scale, model.short_range[5]);
        panels = std::max(panels, static_cast<std::size_t>(std::ceil(du / (0.5 * scale))));
    }
    panels = std::max<std::size_t>(panels, 1);

    std::fill(a_out.begin(), a_out.end(), 0.0);
    if (with_short) std::fill(b_out.begin(), b_out.end(), 0.0);

    const double inv2pq = 1.0 / (2.0 * p * q);
    const double h = du / static_cast<double>(panels);
    for (std::size_t panel = 0; panel < panels; ++panel) {
        const double left = u_lo + h * static_cast<double>(panel);
        const double mid = left + 0.5 * h;
        for (std::size_t k = 0; k < quad.panel_order; ++k) {
            const double u = mid + 0.5 * h * quad.panel_rule.nodes[k];
            const double wq = 0.5 * h * quad.panel_rule.weights[k];
            const double xi = std::clamp(z - u * u * inv2pq, -1.0, 1.0);
            const double fa = wq * detail::cos_minus_one(u * R) / u;
            const double fb = with_short ? wq * w_short(u * u, model) * u : 0.0;
            // Legendre recurrence accumulating every order at this node
            double Pm1 = 1.0, P = xi;
            a_out[0] += fa;
            if (with_short) b_out[0] += fb;
            if (l_max >= 1) {
                a_out[1] += fa * P;
                if (with_short) b_out[1] += fb * P;
            }
            for (std::size_t l = 2; l <= l_max; ++l) {
                const double Pl =
                    ((2.0 * l - 1.0) * xi * P - (l - 1.0) * Pm1) / static_cast<double>(l);
                Pm1 = P;
                P = Pl;
                a_out[l] += fa * Pl;
                if (with_short) b_out[l] += fb * Pl;
            }
        }
    }

    const double ca = model.nuclear_charge / (4.0 * std::numbers::pi * std::numbers::pi * p * q);
    for (std::size_t l = 0; l <= l_max; ++l) a_out[l] *= ca;
    if (with_short) {
        const double cb = inv2pq;
        for (std::size_t l = 0; l <= l_max; ++l) b_out[l] *= cb;
    } else {
        std::fill(b_out.begin(), b_out.end(), 0.0);
    }
}

/// Per-angular-momentum kernel matrix k_ij = a_l(p_i, p_j) + b_l(p_i, p_j).
/// Symmetric by construction: only the upper triangle is computed.
struct KernelBlock {
    std::size_t l = 0;
    Matrix<double> k;
    std::size_t n_points = 0;  ///< grid stamp
    double p_max = 0.0;
};

/// Builds kernel blocks for every l = 0..l_max in one sweep over the node
/// pairs (the Legendre recurrence makes all orders nearly free once the
/// oscillatory factor is evaluated). Pairs are independent, so the loop
/// parallelizes without affecting the result.
inline std::vector<KernelBlock> build_kernel_blocks(const RadialGrid& grid, std::size_t l_max,
                                                    const PotentialModel& model,
                                                    const KernelQuadrature& quad) {
    const std::size_t n = grid.n_points;
    std::vector<KernelBlock> blocks(l_max + 1);
    for (std::size_t l = 0; l <= l_max; ++l)
        blocks[l] = KernelBlock{l, Matrix<double>(n, n), n, grid.p_max};

    // one task per row of the upper triangle; dynamic scheduling evens out
    // the shrinking row lengths
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> a(l_max + 1), b(l_max + 1);
        for (std::size_t j = i; j < n; ++j) {
            legendre_kernel_coeffs(grid.p_nodes[i], grid.p_nodes[j], l_max, model, quad, a, b);
            for (std::size_t l = 0; l <= l_max; ++l) {
                const double v = a[l] + b[l];
                blocks[l].k(i, j) = v;
                blocks[l].k(j, i) = v;
            }
        }
    });
    return blocks;
}

/// Single-l variant of the above (the sweep cost is the same, since the
/// recurrence has to climb to l anyway).
inline KernelBlock build_kernel_block(const RadialGrid& grid, std::size_t l,
                                      const PotentialModel& model, const KernelQuadrature& quad) {
    return std::move(build_kernel_blocks(grid, l, model, quad)[l]);
}

} // namespace pspace
