#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pspace/errors.hpp"

namespace pspace {

/// Parameters of the nonlinear map p(x) = L (1 + x + beta) / (1 - x + alpha)
/// taking the Chebyshev interval x in (-1, 1] to momenta p in (0, p_max].
struct MappingParams {
    double scale = 1.0;  ///< L, momentum units
    double alpha = 0.0;  ///< solved from the endpoint condition p(x_N) = p_max
    double beta = 0.0;

    double p_of_x(double x) const { return scale * (1.0 + x + beta) / (1.0 - x + alpha); }

    double dp_dx(double x) const {
        const double d = 1.0 - x + alpha;
        return scale * (2.0 + alpha + beta) / (d * d);
    }

    /// Analytic inverse of p_of_x.
    double x_of_p(double p) const {
        return (p * (1.0 + alpha) - scale * (1.0 + beta)) / (p + scale);
    }
};

/// Radial quadrature weight convention. `standard` is Gauss-Chebyshev with
/// the sqrt(1-x^2) factor restored; `paper_literal` keeps w_j = W_t * p'_j
/// with no such factor. Validation against exact hydrogen levels selects
/// `standard`; the literal variant is kept behind this switch.
enum class WeightConvention { standard, paper_literal };

inline const char* to_string(WeightConvention c) {
    return c == WeightConvention::standard ? "standard" : "paper";
}

/// Momentum grid on the roots of T_N under the nonlinear mapping, together
/// with the radial quadrature rule int_0^{p_max} f(p) dp ~ sum_j w_j f(p_j).
/// Immutable after construction; safe to share across threads.
struct RadialGrid {
    std::size_t n_points = 0;
    std::vector<double> x_nodes;       ///< ascending, all in (-1, 1)
    std::vector<double> p_nodes;       ///< strictly increasing, in (0, p_max]
    std::vector<double> dp_dx;         ///< p'(x_j)
    std::vector<double> quad_weights;  ///< w_j > 0
    double p_max = 0.0;
    MappingParams mapping;
    double chebyshev_weight = 0.0;     ///< W_t = pi / N
    WeightConvention convention = WeightConvention::standard;

    std::size_t size() const { return n_points; }
};

/// Roots of the Chebyshev polynomial T_N, cos((2i-1) pi / (2N)) for
/// i = 1..N, reordered ascending. Exactly antisymmetric about 0.
inline std::vector<double> chebyshev_nodes(std::size_t n_points) {
    if (n_points < 2)
        throw std::invalid_argument("chebyshev_nodes: need at least 2 points, got " +
                                    std::to_string(n_points));
    const std::size_t n = n_points;
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n / 2; ++k) {
        // k-th root counted from x = +1 side; mirror to keep x_j = -x_{N-1-j} exact
        const double c = std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * n));
        x[n - 1 - k] = c;
        x[k] = -c;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
    return x;
}

/// Builds the mapped grid. alpha follows from requiring p(x_N) = p_max at
/// the largest node, which has the closed form
///   alpha = L (1 + x_N + beta) / p_max - (1 - x_N).
inline RadialGrid build_grid(std::size_t n_points, double p_max, double scale = 1.0,
                             double beta = 0.0,
                             WeightConvention convention = WeightConvention::standard) {
    if (p_max <= 0.0) throw std::invalid_argument("build_grid: p_max must be positive");
    if (scale <= 0.0) throw std::invalid_argument("build_grid: mapping scale L must be positive");
    if (beta < 0.0) throw std::invalid_argument("build_grid: beta must be nonnegative");

    RadialGrid g;
    g.n_points = n_points;
    g.x_nodes = chebyshev_nodes(n_points);
    g.p_max = p_max;
    g.chebyshev_weight = std::numbers::pi / static_cast<double>(n_points);
    g.convention = convention;

    const double x_top = g.x_nodes.back();
    const double alpha = scale * (1.0 + x_top + beta) / p_max - (1.0 - x_top);
    if (!(alpha > 0.0))
        throw InfeasibleMapping("build_grid: no alpha > 0 reaches p_max = " +
                                std::to_string(p_max) + " with L = " + std::to_string(scale) +
                                ", beta = " + std::to_string(beta) +
                                "; increase L or the number of points");
    g.mapping = MappingParams{scale, alpha, beta};

    g.p_nodes.resize(n_points);
    g.dp_dx.resize(n_points);
    g.quad_weights.resize(n_points);
    for (std::size_t j = 0; j < n_points; ++j) {
        const double x = g.x_nodes[j];
        g.p_nodes[j] = g.mapping.p_of_x(x);
        g.dp_dx[j] = g.mapping.dp_dx(x);
        const double cheb = convention == WeightConvention::standard
                                ? std::sqrt(1.0 - x * x)
                                : 1.0;
        g.quad_weights[j] = g.chebyshev_weight * cheb * g.dp_dx[j];
    }
    // endpoint condition is exact up to rounding; pin it
    g.p_nodes.back() = p_max;
    return g;
}

/// sum_j w_j f(p_j) for samples f(p_j) given on the grid.
inline double radial_integrate(const RadialGrid& grid, std::span<const double> samples) {
    if (samples.size() != grid.n_points)
        throw std::invalid_argument("radial_integrate: sample count " +
                                    std::to_string(samples.size()) + " != grid size " +
                                    std::to_string(grid.n_points));
    double acc = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) acc += grid.quad_weights[j] * samples[j];
    return acc;
}

} // namespace pspace
