#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pspace {

/// Gauss-Legendre rule on (-1, 1). All nodes are strictly interior, which
/// is what lets the kernel quadrature step over the xi = 1 singular point.
struct GaussLegendreRule {
    std::size_t order = 0;
    std::vector<double> nodes;    ///< ascending, in (-1, 1)
    std::vector<double> weights;  ///< positive, sum to 2
};

/// P_0(x) .. P_{l_max}(x) by the three-term recurrence.
inline std::vector<double> legendre_P_all(std::size_t l_max, double x) {
    if (std::abs(x) > 1.0)
        throw std::invalid_argument("legendre_P_all: |x| must be <= 1, got " + std::to_string(x));
    std::vector<double> P(l_max + 1);
    P[0] = 1.0;
    if (l_max >= 1) P[1] = x;
    for (std::size_t l = 2; l <= l_max; ++l)
        P[l] = ((2.0 * l - 1.0) * x * P[l - 1] - (l - 1.0) * P[l - 2]) / static_cast<double>(l);
    return P;
}

/// Spherical Bessel functions j_0(z) .. j_{k_max}(z).
///
/// Upward recurrence is unstable for k > z, so the orders are generated by
/// downward (Miller) recurrence from a start index above both k_max and z,
/// normalized with sum_k (2k+1) j_k^2 = 1. The overall sign comes from
/// j_0 = sin(z)/z (or j_1 when z sits near a zero of the sine). Negative z
/// is mapped through j_k(-z) = (-1)^k j_k(z).
inline std::vector<double> spherical_bessel_j_all(std::size_t k_max, double z) {
    std::vector<double> j(k_max + 1, 0.0);
    const double az = std::abs(z);
    if (az == 0.0) {
        j[0] = 1.0;
        return j;
    }
    if (az < 1e-7) {
        // two-term series; z^2 corrections below double precision get dropped
        double pref = 1.0;  // z^k / (2k+1)!!
        for (std::size_t k = 0; k <= k_max; ++k) {
            j[k] = pref * (1.0 - az * az / (2.0 * (2.0 * k + 3.0)));
            pref *= az / (2.0 * k + 3.0);
            if (pref == 0.0) break;
        }
    } else {
        const std::size_t start =
            std::max(k_max, static_cast<std::size_t>(std::ceil(az))) + 18 +
            static_cast<std::size_t>(2.0 * std::cbrt(az)) +
            static_cast<std::size_t>(std::sqrt(40.0 * static_cast<double>(k_max + 1)));
        std::vector<double> b(start + 2, 0.0);
        b[start + 1] = 0.0;
        b[start] = 1e-10;
        for (std::size_t k = start; k-- > 0;) {
            b[k] = (2.0 * k + 3.0) / az * b[k + 1] - b[k + 2];
            if (std::abs(b[k]) > 1e260) {
                for (std::size_t m = k; m <= start + 1; ++m) b[m] *= 1e-260;
            }
        }
        double bmax = 0.0;
        for (std::size_t k = 0; k <= start + 1; ++k) bmax = std::max(bmax, std::abs(b[k]));
        double sum = 0.0;
        for (std::size_t k = start + 1; k-- > 0;) {
            const double r = b[k] / bmax;  // keeps the squares in range
            sum += (2.0 * k + 1.0) * r * r;
        }
        double scale = 1.0 / (bmax * std::sqrt(sum));
        // fix the global sign against a directly evaluated low order
        const double j0 = std::sin(az) / az;
        const double j1 = std::sin(az) / (az * az) - std::cos(az) / az;
        const double ref = std::abs(j0) >= std::abs(j1) ? j0 : j1;
        const double app = std::abs(j0) >= std::abs(j1) ? b[0] : b[1];
        if (ref * app * scale < 0.0) scale = -scale;
        for (std::size_t k = 0; k <= k_max; ++k) j[k] = b[k] * scale;
        j[0] = j0;
        // the explicit j_1 cancels badly below z ~ 0.1; keep the Miller value there
        if (k_max >= 1 && az >= 0.1) j[1] = j1;
    }
    if (z < 0.0)
        for (std::size_t k = 1; k <= k_max; k += 2) j[k] = -j[k];
    return j;
}

/// Wigner 3j symbol (l l1 l2; 0 0 0). Zero when l + l1 + l2 is odd or the
/// triangle inequality fails; otherwise the closed form evaluated through
/// log-factorials so angular momenta well past l ~ 85 stay finite.
inline double wigner3j_zero(std::size_t l, std::size_t l1, std::size_t l2) {
    const std::size_t J = l + l1 + l2;
    if (J % 2 != 0) return 0.0;
    if (l1 + l2 < l || l + l2 < l1 || l + l1 < l2) return 0.0;
    const std::size_t g = J / 2;
    const auto lf = [](std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); };
    const double log_val = 0.5 * (lf(J - 2 * l) + lf(J - 2 * l1) + lf(J - 2 * l2) - lf(J + 1)) +
                           lf(g) - lf(g - l) - lf(g - l1) - lf(g - l2);
    const double sign = (g % 2 == 0) ? 1.0 : -1.0;
    return sign * std::exp(log_val);
}

/// Nodes and weights by Newton iteration on P_M. Nodes are strictly
/// interior and come out ascending.
inline GaussLegendreRule gauss_legendre(std::size_t order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    GaussLegendreRule rule;
    rule.order = order;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const std::size_t half = (order + 1) / 2;
    for (std::size_t k = 0; k < half; ++k) {
        // Tricomi-style initial guess for the k-th root from the top
        double x = std::cos(std::numbers::pi * (k + 0.75) / (order + 0.5));
        double dP = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // evaluate P_order and its derivative at x
            double pm1 = 1.0, p = x;
            for (std::size_t l = 2; l <= order; ++l) {
                const double pl = ((2.0 * l - 1.0) * x * p - (l - 1.0) * pm1) / l;
                pm1 = p;
                p = pl;
            }
            dP = order * (x * p - pm1) / (x * x - 1.0);
            const double dx = p / dP;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // refresh derivative at the converged node for the weight
        {
            double pm1 = 1.0, p = x;
            for (std::size_t l = 2; l <= order; ++l) {
                const double pl = ((2.0 * l - 1.0) * x * p - (l - 1.0) * pm1) / l;
                pm1 = p;
                p = pl;
            }
            dP = order * (x * p - pm1) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dP * dP);
        rule.nodes[order - 1 - k] = x;
        rule.weights[order - 1 - k] = w;
        rule.nodes[k] = -x;
        rule.weights[k] = w;
    }
    if (order % 2 == 1) {
        rule.nodes[order / 2] = 0.0;
        // weight at x = 0 already set by the loop (k = half-1 hits x ~ 0)
    }
    return rule;
}

} // namespace pspace
