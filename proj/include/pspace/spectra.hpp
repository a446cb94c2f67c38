#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "pspace/eigenset.hpp"
#include "pspace/matrix.hpp"
#include "pspace/parallel.hpp"
#include "pspace/propagator.hpp"
#include "pspace/specfun.hpp"

namespace pspace {

/// Wavepacket with every bound component projected out; orthogonal to all
/// chi_nl with E < 0 under the grid quadrature.
struct ContinuumPacket {
    std::size_t l_max = 0;
    Matrix<cplx> g;  ///< row l, column j
};

/// g_l(p) = f_l(p) - sum_n chi^bound_nl(p) <chi^bound_nl | f_l>.
inline ContinuumPacket project_out_bound(const Wavepacket& wp, const Eigenset& set) {
    if (wp.f.cols() != set.grid.n_points || wp.l_max > set.l_max)
        throw std::invalid_argument("project_out_bound: wavepacket does not match eigenset");
    const RadialGrid& grid = set.grid;
    const std::size_t n = grid.n_points;
    ContinuumPacket cp;
    cp.l_max = wp.l_max;
    cp.g = wp.f;
    for (std::size_t l = 0; l <= wp.l_max; ++l) {
        cplx* gl = cp.g.row(l);
        for (std::size_t s = 0; s < set.block(l).bound_count; ++s) {
            const double* chi = set.block(l).chi.row(s);
            cplx ov = 0.0;
            for (std::size_t j = 0; j < n; ++j) ov += grid.quad_weights[j] * chi[j] * gl[j];
            for (std::size_t j = 0; j < n; ++j) gl[j] -= chi[j] * ov;
        }
    }
    return cp;
}

/// P = sum_l sum_j w_j |g_l(p_j)|^2.
inline double ionization_probability(const ContinuumPacket& cp, const RadialGrid& grid) {
    double acc = 0.0;
    for (std::size_t l = 0; l <= cp.l_max; ++l) {
        const cplx* gl = cp.g.row(l);
        for (std::size_t j = 0; j < grid.n_points; ++j)
            acc += grid.quad_weights[j] * std::norm(gl[j]);
    }
    return acc;
}

/// Energy-differential ionization probability on the native grid:
/// epsilon_j = p_j^2/2, dP/de = sum_l |g_l(p_j)|^2 / p_j.
struct AtiSpectrum {
    std::vector<double> energy;   ///< ascending, hartree
    std::vector<double> density;  ///< dP/de, 1/hartree
};

inline AtiSpectrum ati_spectrum(const ContinuumPacket& cp, const RadialGrid& grid) {
    AtiSpectrum s;
    s.energy.resize(grid.n_points);
    s.density.assign(grid.n_points, 0.0);
    for (std::size_t j = 0; j < grid.n_points; ++j)
        s.energy[j] = 0.5 * grid.p_nodes[j] * grid.p_nodes[j];
    for (std::size_t l = 0; l <= cp.l_max; ++l) {
        const cplx* gl = cp.g.row(l);
        for (std::size_t j = 0; j < grid.n_points; ++j)
            s.density[j] += std::norm(gl[j]) / grid.p_nodes[j];
    }
    return s;
}

/// Chebyshev cardinal basis g_j(x) = T_N(x) / (T'_N(x_j) (x - x_j)) on the
/// grid nodes; g_j(x_k) = delta_jk, so grid samples are reproduced exactly.
class CardinalBasis {
  public:
    explicit CardinalBasis(const RadialGrid& grid) : grid_(&grid) {
        const std::size_t n = grid.n_points;
        inv_dT_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double x = grid.x_nodes[j];
            // T'_N(x_j) = N sin(N theta_j)/sin(theta_j) with sin(N theta_j) = +-1
            const double s = std::sin(static_cast<double>(n) * std::acos(x));
            const double sign = s >= 0.0 ? 1.0 : -1.0;
            inv_dT_[j] = std::sqrt(1.0 - x * x) * sign / static_cast<double>(n);
        }
    }

    const RadialGrid& grid() const { return *grid_; }

    /// sum_j c_j g_j(x); snaps to the sample when x coincides with a node.
    cplx eval(std::span<const cplx> coeffs, double x) const {
        const auto& xs = grid_->x_nodes;
        const auto it = std::lower_bound(xs.begin(), xs.end(), x);
        for (auto cand : {it, it == xs.begin() ? it : it - 1}) {
            if (cand != xs.end() && std::abs(*cand - x) < 1e-14)
                return coeffs[static_cast<std::size_t>(cand - xs.begin())];
        }
        const double tn = std::cos(static_cast<double>(xs.size()) * std::acos(std::clamp(x, -1.0, 1.0)));
        cplx acc = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j)
            acc += coeffs[j] * (inv_dT_[j] / (x - xs[j]));
        return tn * acc;
    }

  private:
    const RadialGrid* grid_;
    std::vector<double> inv_dT_;
};

/// Off-grid evaluator for one radial channel. The cardinal expansion acts
/// on the sqrt(dp/dx)-weighted samples (the u-representation), and the
/// result is rescaled back.
class RadialInterpolant {
  public:
    RadialInterpolant(const CardinalBasis& basis, std::span<const cplx> samples)
        : basis_(&basis), samples_(samples.begin(), samples.end()) {
        const RadialGrid& g = basis.grid();
        if (samples.size() != g.n_points)
            throw std::invalid_argument("RadialInterpolant: sample count does not match grid");
        u_.resize(g.n_points);
        for (std::size_t j = 0; j < g.n_points; ++j)
            u_[j] = samples[j] * std::sqrt(g.dp_dx[j]);
    }

    cplx operator()(double p) const {
        const RadialGrid& g = basis_->grid();
        if (!(p > 0.0) || p > g.p_max)
            throw std::out_of_range("interpolate_radial: p outside (0, p_max]");
        // grid nodes reproduce the sample itself (cardinal property)
        const auto it = std::lower_bound(g.p_nodes.begin(), g.p_nodes.end(), p);
        for (auto cand : {it, it == g.p_nodes.begin() ? it : it - 1})
            if (cand != g.p_nodes.end() && std::abs(*cand - p) <= 1e-13 * (1.0 + std::abs(p)))
                return samples_[static_cast<std::size_t>(cand - g.p_nodes.begin())];
        const double x = g.mapping.x_of_p(p);
        return basis_->eval(u_, x) / std::sqrt(g.mapping.dp_dx(x));
    }

  private:
    const CardinalBasis* basis_;
    std::vector<cplx> samples_;
    std::vector<cplx> u_;
};

/// One-off cardinal interpolation of a radial channel at momentum p.
inline cplx interpolate_radial(const RadialGrid& grid, std::span<const cplx> samples, double p) {
    CardinalBasis basis(grid);
    return RadialInterpolant(basis, samples)(p);
}

/// Continuum amplitude sum_l g~_l(p) Y_l0(cos theta) / p for m = 0.
inline cplx angular_amplitude(const std::vector<RadialInterpolant>& channels, double p,
                              double cos_theta) {
    const auto Pl = legendre_P_all(channels.size() - 1, cos_theta);
    cplx acc = 0.0;
    for (std::size_t l = 0; l < channels.size(); ++l)
        acc += channels[l](p) * std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi)) * Pl[l];
    return acc / p;
}

/// 2D photoelectron momentum distribution d^2P / dp_par dp_perp =
/// 2 pi p_perp |Psi(p)|^2 on a rectangular (p_par, p_perp) raster; the phi
/// integral contributes 2 pi at m = 0. Cells with p = 0 or p > p_limit are
/// zero.
struct PadResult {
    std::vector<double> p_par;   ///< n_par values in [-p_limit, p_limit]
    std::vector<double> p_perp;  ///< n_perp values in [0, p_limit]
    Matrix<double> density;      ///< (i_par, k_perp)
};

inline PadResult pad(const ContinuumPacket& cp, const RadialGrid& grid, std::size_t n_par,
                     std::size_t n_perp, double p_limit) {
    if (cp.g.cols() != grid.n_points)
        throw std::invalid_argument("pad: packet does not match grid");
    if (n_par < 2 || n_perp < 2) throw std::invalid_argument("pad: raster needs >= 2 points per axis");
    if (!(p_limit > 0.0) || p_limit > grid.p_max)
        throw std::invalid_argument("pad: p_limit must lie in (0, p_max]");

    CardinalBasis basis(grid);
    std::vector<RadialInterpolant> channels;
    channels.reserve(cp.l_max + 1);
    for (std::size_t l = 0; l <= cp.l_max; ++l)
        channels.emplace_back(basis, std::span<const cplx>(cp.g.row(l), grid.n_points));

    PadResult out;
    out.p_par.resize(n_par);
    out.p_perp.resize(n_perp);
    out.density = Matrix<double>(n_par, n_perp);
    for (std::size_t i = 0; i < n_par; ++i)
        out.p_par[i] = -p_limit + 2.0 * p_limit * static_cast<double>(i) / static_cast<double>(n_par - 1);
    for (std::size_t k = 0; k < n_perp; ++k)
        out.p_perp[k] = p_limit * static_cast<double>(k) / static_cast<double>(n_perp - 1);

    parallel_for(n_par, [&](std::size_t i) {
        for (std::size_t k = 0; k < n_perp; ++k) {
            const double p = std::hypot(out.p_par[i], out.p_perp[k]);
            if (p == 0.0 || p > p_limit) {
                out.density(i, k) = 0.0;
                continue;
            }
            const cplx amp = angular_amplitude(channels, p, out.p_par[i] / p);
            out.density(i, k) = 2.0 * std::numbers::pi * out.p_perp[k] * std::norm(amp);
        }
    });
    return out;
}

/// ATI spectrum resampled to a uniform energy grid through the cardinal
/// interpolants (epsilon_i = i * eps_max / (n_bins - 1), the zero bin at
/// p = 0 excluded).
inline AtiSpectrum ati_spectrum_resampled(const ContinuumPacket& cp, const RadialGrid& grid,
                                          std::size_t n_bins, double eps_max) {
    if (n_bins < 2) throw std::invalid_argument("ati_spectrum_resampled: need >= 2 bins");
    CardinalBasis basis(grid);
    std::vector<RadialInterpolant> channels;
    for (std::size_t l = 0; l <= cp.l_max; ++l)
        channels.emplace_back(basis, std::span<const cplx>(cp.g.row(l), grid.n_points));
    AtiSpectrum s;
    s.energy.resize(n_bins - 1);
    s.density.assign(n_bins - 1, 0.0);
    for (std::size_t i = 1; i < n_bins; ++i) {
        const double eps = eps_max * static_cast<double>(i) / static_cast<double>(n_bins - 1);
        const double p = std::sqrt(2.0 * eps);
        s.energy[i - 1] = eps;
        double d = 0.0;
        for (const auto& ch : channels) d += std::norm(ch(p));
        s.density[i - 1] = d / p;
    }
    return s;
}

} // namespace pspace
