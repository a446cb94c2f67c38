#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pspace/eigenset.hpp"
#include "pspace/errors.hpp"
#include "pspace/io.hpp"
#include "pspace/matrix.hpp"
#include "pspace/parallel.hpp"
#include "pspace/pulse.hpp"
#include "pspace/specfun.hpp"

namespace pspace {

/// Wavepacket in the momentum-radial representation: complex coefficients
/// f_l(p_j) for l = 0..l_max at fixed m (only m = 0 is implemented).
/// norm2 = sum_l sum_j w_j |f_l(p_j)|^2.
struct Wavepacket {
    std::size_t l_max = 0;
    int m = 0;
    Matrix<cplx> f;  ///< row l, column j
    double t = 0.0;

    static Wavepacket from_eigenstate(const Eigenset& set, std::size_t l, std::size_t state,
                                      std::size_t l_max) {
        if (l > l_max) throw std::invalid_argument("from_eigenstate: l exceeds l_max");
        Wavepacket wp;
        wp.l_max = l_max;
        wp.f = Matrix<cplx>(l_max + 1, set.grid.n_points);
        const double* row = set.block(l).chi.row(state);
        for (std::size_t j = 0; j < set.grid.n_points; ++j) wp.f(l, j) = row[j];
        return wp;
    }
};

inline double wavepacket_norm2(const Wavepacket& wp, const RadialGrid& grid) {
    double acc = 0.0;
    for (std::size_t l = 0; l <= wp.l_max; ++l) {
        const cplx* row = wp.f.row(l);
        for (std::size_t j = 0; j < grid.n_points; ++j)
            acc += grid.quad_weights[j] * std::norm(row[j]);
    }
    return acc;
}

inline cplx wavepacket_overlap(const Wavepacket& a, const Wavepacket& b, const RadialGrid& grid) {
    if (a.l_max != b.l_max) throw std::invalid_argument("wavepacket_overlap: l_max mismatch");
    cplx acc = 0.0;
    for (std::size_t l = 0; l <= a.l_max; ++l) {
        const cplx* ra = a.f.row(l);
        const cplx* rb = b.f.row(l);
        for (std::size_t j = 0; j < grid.n_points; ++j)
            acc += grid.quad_weights[j] * std::conj(ra[j]) * rb[j];
    }
    return acc;
}

/// |<chi_nl | f_l>|^2 over the given states of one l.
inline double projection_population(const Eigenset& set, std::size_t l, std::size_t state,
                                    const Wavepacket& wp) {
    const RadialGrid& g = set.grid;
    const double* chi = set.block(l).chi.row(state);
    cplx ov = 0.0;
    for (std::size_t j = 0; j < g.n_points; ++j)
        ov += g.quad_weights[j] * chi[j] * wp.f(l, j);
    return std::norm(ov);
}

/// Total population in E < 0 eigenstates.
inline double bound_population(const Eigenset& set, const Wavepacket& wp) {
    double acc = 0.0;
    const std::size_t l_top = std::min(wp.l_max, set.l_max);
    for (std::size_t l = 0; l <= l_top; ++l)
        for (std::size_t nb = 0; nb < set.block(l).bound_count; ++nb)
            acc += projection_population(set, l, nb, wp);
    return acc;
}

/// Field-free evolution operators, factored through the eigenset:
/// applying A^(l) is chi^T -> phases -> chi with the quadrature weight
/// folded in, which keeps the half step exactly unitary in the discrete
/// norm. dense(l) materializes the literal matrix
///   A^(l)_{jk} = sum_n e^{-i E_nl dt_half} chi_nl(p_j) chi_nl(p_k) w_k
/// for verification at small N.
struct HalfstepMatrices {
    double dt = 0.0;  ///< full step
    const Eigenset* eigenset = nullptr;
    std::vector<std::vector<cplx>> half_phase;  ///< e^{-i E dt/2} per l
    std::vector<std::vector<cplx>> full_phase;  ///< e^{-i E dt} per l

    Matrix<cplx> dense(std::size_t l) const {
        const RadialGrid& g = eigenset->grid;
        const std::size_t n = g.n_points;
        const Matrix<double>& chi = eigenset->block(l).chi;
        Matrix<cplx> a(n, n);
        for (std::size_t s = 0; s < n; ++s) {
            const double* row = chi.row(s);
            const cplx ph = half_phase[l][s];
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    a(j, k) += ph * row[j] * row[k] * g.quad_weights[k];
        }
        return a;
    }
};

inline HalfstepMatrices build_halfstep_matrices(const Eigenset& set, double dt) {
    HalfstepMatrices h;
    h.dt = dt;
    h.eigenset = &set;
    h.half_phase.resize(set.l_max + 1);
    h.full_phase.resize(set.l_max + 1);
    for (std::size_t l = 0; l <= set.l_max; ++l) {
        const auto& e = set.block(l).energies;
        h.half_phase[l].resize(e.size());
        h.full_phase[l].resize(e.size());
        for (std::size_t n = 0; n < e.size(); ++n) {
            h.half_phase[l][n] = std::polar(1.0, -e[n] * 0.5 * dt);
            h.full_phase[l][n] = std::polar(1.0, -e[n] * dt);
        }
    }
    return h;
}

namespace detail {
/// One field-free substep on a single l channel: f <- X P X^T W f with
/// X = chi rows, P the phase diagonal, W the weight diagonal.
inline void spectral_apply(const Eigenset& set, std::size_t l, std::span<const cplx> phase,
                           cplx* f, std::vector<cplx>& scratch_v, std::vector<cplx>& scratch_t) {
    const RadialGrid& g = set.grid;
    const std::size_t n = g.n_points;
    const Matrix<double>& chi = set.block(l).chi;
    scratch_v.resize(n);
    scratch_t.resize(n);
    for (std::size_t j = 0; j < n; ++j) scratch_v[j] = g.quad_weights[j] * f[j];
    for (std::size_t s = 0; s < n; ++s) {
        const double* row = chi.row(s);
        double re = 0.0, im = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            re += row[j] * scratch_v[j].real();
            im += row[j] * scratch_v[j].imag();
        }
        scratch_t[s] = phase[s] * cplx(re, im);
    }
    for (std::size_t j = 0; j < n; ++j) f[j] = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const double* row = chi.row(s);
        const cplx c = scratch_t[s];
        for (std::size_t j = 0; j < n; ++j) f[j] += row[j] * c;
    }
}

inline void field_free_step(Wavepacket& wp, const HalfstepMatrices& mats, bool full) {
    const Eigenset& set = *mats.eigenset;
    if (wp.f.cols() != set.grid.n_points || wp.l_max > set.l_max)
        throw std::invalid_argument("field-free step: wavepacket does not match eigenset");
    parallel_for(wp.l_max + 1, [&](std::size_t l) {
        std::vector<cplx> v, t;
        spectral_apply(set, l, full ? mats.full_phase[l] : mats.half_phase[l], wp.f.row(l), v, t);
    });
}
} // namespace detail

/// e^{-i H_0 dt/2} applied in place.
inline void apply_field_free_halfstep(Wavepacket& wp, const HalfstepMatrices& mats) {
    detail::field_free_step(wp, mats, false);
}

/// Angular-mixing coefficients of the velocity-gauge interaction step at
/// m = 0:
///   f'_l(p) = sum_{l1,l2} (-i)^{l1} j_{l1}(A p dt) (2 l1 + 1)
///             sqrt((2l+1)(2l2+1)) (3j)^2 f_{l2}(p).
/// The (3j)^2 factor enforces the parity selection l + l1 + l2 even, which
/// also makes the mixing matrix complex symmetric; only l <= l2 is stored.
class InteractionTable {
  public:
    explicit InteractionTable(std::size_t l_max) : l_max_(l_max) {
        offsets_.resize((l_max + 1) * (l_max + 1), 0);
        for (std::size_t l = 0; l <= l_max; ++l)
            for (std::size_t l2 = l; l2 <= l_max; ++l2) {
                offsets_[l * (l_max + 1) + l2] = coef_.size();
                const double pref = std::sqrt((2.0 * l + 1.0) * (2.0 * l2 + 1.0));
                for (std::size_t l1 = l2 - l; l1 <= l + l2; l1 += 2) {
                    if (l1 == 0) {
                        // (2l+1) (l 0 l; 0 0 0)^2 = 1 exactly; keeps the
                        // zero-field step an exact identity
                        coef_.push_back(1.0);
                        continue;
                    }
                    const double w = wigner3j_zero(l, l1, l2);
                    coef_.push_back((2.0 * l1 + 1.0) * pref * w * w);
                }
            }
    }

    std::size_t l_max() const { return l_max_; }

    /// Mixes the l channels at one grid point. bessel must hold j_0..j_{2 l_max}
    /// of the local argument; orders with |j| < 1e-16 from some index on are
    /// skipped (superexponential decay makes the tail irrelevant).
    void apply(std::span<const double> bessel, std::span<const cplx> fin,
               std::span<cplx> fout) const {
        std::size_t k_eff = 2 * l_max_;
        while (k_eff > 0 && std::abs(bessel[k_eff]) < 1e-16) --k_eff;
        for (std::size_t l = 0; l <= l_max_; ++l) fout[l] = 0.0;
        for (std::size_t l = 0; l <= l_max_; ++l) {
            for (std::size_t l2 = l; l2 <= l_max_; ++l2) {
                const double* c = coef_.data() + offsets_[l * (l_max_ + 1) + l2];
                double re = 0.0, im = 0.0;
                std::size_t idx = 0;
                for (std::size_t l1 = l2 - l; l1 <= l + l2 && l1 <= k_eff; l1 += 2, ++idx) {
                    const double term = c[idx] * bessel[l1];
                    switch (l1 % 4) {  // (-i)^{l1}
                        case 0: re += term; break;
                        case 1: im -= term; break;
                        case 2: re -= term; break;
                        default: im += term; break;
                    }
                }
                const cplx mix(re, im);
                fout[l] += mix * fin[l2];
                if (l2 != l) fout[l2] += mix * fin[l];
            }
        }
    }

  private:
    std::size_t l_max_;
    std::vector<double> coef_;
    std::vector<std::size_t> offsets_;
};

/// e^{-i A(t') p cos(theta) dt} applied in place via the Rayleigh
/// expansion; a_mid = A(t + dt/2). Grid points are independent.
inline void apply_interaction(Wavepacket& wp, const RadialGrid& grid, double a_mid, double dt,
                              const InteractionTable& table) {
    if (wp.m != 0)
        throw UnsupportedConfiguration("interaction step is implemented for m = 0 only");
    if (wp.l_max != table.l_max())
        throw std::invalid_argument("apply_interaction: table built for another l_max");
    const std::size_t n = grid.n_points;
    const std::size_t nl = wp.l_max + 1;
    parallel_for_chunked(n, 16, [&](std::size_t j) {
        std::vector<cplx> fin(nl), fout(nl);
        for (std::size_t l = 0; l < nl; ++l) fin[l] = wp.f(l, j);
        const auto bessel = spherical_bessel_j_all(2 * wp.l_max, a_mid * grid.p_nodes[j] * dt);
        table.apply(bessel, fin, fout);
        for (std::size_t l = 0; l < nl; ++l) wp.f(l, j) = fout[l];
    });
}

struct ObserverFrame {
    std::size_t step = 0;       ///< completed steps
    double t = 0.0;
    double norm2 = 0.0;
    double ground_population = 0.0;
    double bound_population = 0.0;
};

using Observer = std::function<void(const ObserverFrame&)>;

struct PropagationOptions {
    double dt = 0.05;
    std::size_t observer_stride = 50;  ///< sync cadence in steps; 0 disables interior syncs
    bool merged_halfsteps = true;      ///< fuse adjacent half steps between syncs
    std::filesystem::path checkpoint_path;  ///< empty = no checkpoints
    std::size_t start_step = 0;        ///< resume point (wp0 is the state at that step)
};

inline constexpr char wavepacket_magic[9] = "PSPWPK1\0";
inline constexpr std::uint32_t wavepacket_format_version = 1;

/// Hash tying a checkpoint to the exact run that can consume it.
inline std::uint64_t propagation_run_hash(std::uint64_t eigenset_hash, const PulseConfig& pulse,
                                          const PropagationOptions& opt, std::size_t wp_l_max) {
    HashAccumulator h;
    h.u64(eigenset_hash);
    h.f64(pulse.peak_field);
    h.f64(pulse.omega);
    h.f64(pulse.duration);
    h.f64(pulse.cep);
    h.u32(pulse.envelope == EnvelopeTarget::electric_field ? 0 : 1);
    h.f64(opt.dt);
    h.u64(opt.observer_stride);
    h.u32(opt.merged_halfsteps ? 1 : 0);
    h.u64(wp_l_max);
    return h.value();
}

inline void save_wavepacket(const Wavepacket& wp, std::uint64_t run_hash, std::size_t step,
                            const std::filesystem::path& path) {
    BinaryWriter w(path, wavepacket_magic);
    w.u32(wavepacket_format_version);
    w.u64(run_hash);
    w.u64(step);
    w.f64(wp.t);
    w.u64(wp.l_max);
    w.u32(static_cast<std::uint32_t>(wp.m));
    w.u64(wp.f.cols());
    w.raw(wp.f.data(), wp.f.storage().size() * sizeof(cplx));
    w.finish();
}

struct WavepacketFile {
    Wavepacket wp;
    std::uint64_t run_hash = 0;
    std::size_t step = 0;
};

inline WavepacketFile load_wavepacket(const std::filesystem::path& path) {
    BinaryReader r(path, wavepacket_magic);
    const std::uint32_t version = r.u32();
    if (version != wavepacket_format_version)
        throw FormatError("wavepacket format version " + std::to_string(version) + " not supported");
    WavepacketFile f;
    f.run_hash = r.u64();
    f.step = r.u64();
    f.wp.t = r.f64();
    f.wp.l_max = r.u64();
    f.wp.m = static_cast<int>(r.u32());
    const std::size_t n = r.u64();
    f.wp.f = Matrix<cplx>(f.wp.l_max + 1, n);
    r.raw(f.wp.f.data(), f.wp.f.storage().size() * sizeof(cplx));
    r.finish();
    return f;
}

/// Runs the split-operator march over the whole pulse:
///   e^{-i H_0 dt/2} e^{-i H'(t+dt/2) dt} e^{-i H_0 dt/2}
/// per step, with adjacent half steps merged into full steps between sync
/// points. At every sync (observer stride, and always at the last step)
/// the pending half step is closed so the observer and checkpoints see the
/// true state; the close/reopen schedule depends only on the options, so
/// resumed runs reproduce uninterrupted ones bit for bit.
inline Wavepacket propagate(const Wavepacket& wp0, const Eigenset& set, const PulseConfig& pulse,
                            const PropagationOptions& opt, const Observer& observer = {}) {
    pulse.validate();
    if (wp0.m != 0) throw UnsupportedConfiguration("propagation is implemented for m = 0 only");
    const std::size_t n_steps = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(pulse.duration / opt.dt)));
    const double dt = pulse.duration / static_cast<double>(n_steps);
    const std::uint64_t run_hash = propagation_run_hash(set.content_hash, pulse, opt, wp0.l_max);

    HalfstepMatrices mats = build_halfstep_matrices(set, dt);
    InteractionTable table(wp0.l_max);

    Wavepacket wp = wp0;
    const auto sync_frame = [&](std::size_t done) {
        ObserverFrame fr;
        fr.step = done;
        fr.t = dt * static_cast<double>(done);
        fr.norm2 = wavepacket_norm2(wp, set.grid);
        if (!std::isfinite(fr.norm2))
            throw NumericalFailure("non-finite norm during propagation", done);
        fr.ground_population = projection_population(set, 0, 0, wp);
        fr.bound_population = bound_population(set, wp);
        if (!opt.checkpoint_path.empty()) save_wavepacket(wp, run_hash, done, opt.checkpoint_path);
        if (observer) observer(fr);
    };

    if (opt.start_step == 0) sync_frame(0);
    if (opt.start_step >= n_steps) {
        wp.t = pulse.duration;
        return wp;
    }

    apply_field_free_halfstep(wp, mats);  // open
    for (std::size_t s = opt.start_step; s < n_steps; ++s) {
        const double a_mid = vector_potential(pulse, (static_cast<double>(s) + 0.5) * dt);
        apply_interaction(wp, set.grid, a_mid, dt, table);
        const std::size_t done = s + 1;
        const bool last = done == n_steps;
        const bool sync = last || (opt.observer_stride != 0 && done % opt.observer_stride == 0);
        if (sync || !opt.merged_halfsteps) {
            apply_field_free_halfstep(wp, mats);  // close
            wp.t = dt * static_cast<double>(done);
            if (sync) sync_frame(done);
            if (!last) apply_field_free_halfstep(wp, mats);  // reopen
        } else {
            detail::field_free_step(wp, mats, true);
        }
    }
    wp.t = pulse.duration;
    return wp;
}

} // namespace pspace
