#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pspace/errors.hpp"
#include "pspace/grid.hpp"
#include "pspace/io.hpp"
#include "pspace/kernel.hpp"
#include "pspace/matrix.hpp"

extern "C" {
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork,
             int* info);
}

namespace pspace {

/// Full spectrum of one angular momentum: energies ascending and the
/// radial momentum functions chi_nl(p_j), discretely orthonormal under the
/// grid quadrature (sum_j w_j chi_n chi_n' = delta_nn').
struct EigensetL {
    std::size_t l = 0;
    std::vector<double> energies;     ///< ascending, hartree
    Matrix<double> chi;               ///< row n = chi_nl over grid points
    std::size_t bound_count = 0;      ///< number of E < 0 states
};

/// The numerically complete eigenset for l = 0..l_max on one grid.
struct Eigenset {
    RadialGrid grid;
    PotentialModel model;
    std::size_t l_max = 0;
    std::vector<EigensetL> blocks;
    std::uint64_t content_hash = 0;   ///< identifies (grid, model, l_max, quadrature)

    const EigensetL& block(std::size_t l) const { return blocks.at(l); }
};

inline constexpr std::uint32_t eigenset_format_version = 1;

/// Hash identifying everything that determines an eigenset's contents.
/// Any change here must invalidate cache files.
inline std::uint64_t eigenset_content_hash(std::size_t n_points, double p_max, double scale,
                                           double beta, WeightConvention convention,
                                           const PotentialModel& model, std::size_t l_max,
                                           const KernelQuadrature& quad) {
    HashAccumulator h;
    h.u32(eigenset_format_version);
    h.u64(n_points);
    h.f64(p_max);
    h.f64(scale);
    h.f64(beta);
    h.u32(convention == WeightConvention::standard ? 0 : 1);
    h.f64(model.nuclear_charge);
    for (double a : model.short_range) h.f64(a);
    h.f64(model.r_cutoff);
    h.u64(l_max);
    h.u64(quad.panel_order);
    h.f64(quad.points_per_period);
    return h.value();
}

/// Discretized Hamiltonian for one l:
///   M_ij = (p_i^2 / 2) delta_ij + 4 pi p_i p_j sqrt(w_i w_j) k_ij,
/// where w_j is the grid's full radial weight. Exactly symmetric because
/// every factor is assembled commutatively.
inline Matrix<double> assemble_hamiltonian(const RadialGrid& grid, const KernelBlock& block) {
    if (block.n_points != grid.n_points || block.p_max != grid.p_max)
        throw std::invalid_argument("assemble_hamiltonian: kernel block built on another grid");
    const std::size_t n = grid.n_points;
    Matrix<double> m(n, n);
    std::vector<double> psw(n);
    for (std::size_t j = 0; j < n; ++j)
        psw[j] = grid.p_nodes[j] * std::sqrt(grid.quad_weights[j]);
    const double four_pi = 4.0 * std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = four_pi * (psw[i] * psw[j]) * block.k(i, j);
        m(i, i) += 0.5 * grid.p_nodes[i] * grid.p_nodes[i];
    }
    return m;
}

struct SymmetricEigenResult {
    std::vector<double> energies;  ///< ascending
    Matrix<double> vectors;        ///< row k = k-th orthonormal eigenvector
};

/// Full spectrum of a real symmetric matrix (LAPACK dsyevd). Row-major
/// input reinterpreted as column-major is its own transpose here, so no
/// copy gymnastics are needed; eigenvectors come back as rows.
inline SymmetricEigenResult diagonalize_symmetric(const Matrix<double>& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("diagonalize_symmetric: matrix not square");
    const int n = static_cast<int>(m.rows());
    SymmetricEigenResult r;
    r.energies.resize(m.rows());
    r.vectors = m;

    int info = 0;
    int lwork = -1, liwork = -1;
    double work_query = 0.0;
    int iwork_query = 0;
    dsyevd_("V", "L", &n, r.vectors.data(), &n, r.energies.data(), &work_query, &lwork,
            &iwork_query, &liwork, &info);
    if (info != 0) throw NumericalFailure("dsyevd workspace query failed", static_cast<std::size_t>(-info));
    lwork = static_cast<int>(work_query);
    liwork = iwork_query;
    std::vector<double> work(static_cast<std::size_t>(lwork));
    std::vector<int> iwork(static_cast<std::size_t>(liwork));
    dsyevd_("V", "L", &n, r.vectors.data(), &n, r.energies.data(), work.data(), &lwork,
            iwork.data(), &liwork, &info);
    if (info > 0)
        throw NumericalFailure("eigensolver failed to converge", static_cast<std::size_t>(info));
    if (info < 0)
        throw std::logic_error("dsyevd: illegal argument " + std::to_string(-info));
    return r;
}

namespace detail {
/// Flips the row sign so the first sample above a noise floor is
/// positive; eigenvector sign is otherwise arbitrary. The floor sits well
/// above the eigensolver backtransform noise (~eps |H| / gap), which the
/// 1/sqrt(w_j) rescaling amplifies at the smallest-weight nodes.
inline void fix_sign(double* row, std::size_t n) {
    double amax = 0.0;
    for (std::size_t j = 0; j < n; ++j) amax = std::max(amax, std::abs(row[j]));
    if (amax == 0.0) return;
    const double floor = 1e-8 * amax;
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(row[j]) > floor) {
            if (row[j] < 0.0)
                for (std::size_t k = 0; k < n; ++k) row[k] = -row[k];
            return;
        }
    }
}
} // namespace detail

/// Builds the complete eigenset: kernel blocks for all l in one sweep,
/// then per-l assembly and diagonalization. chi_nl(p_j) = u_nl(x_j) /
/// sqrt(w_j), which carries the discrete orthonormality of the
/// eigenvectors over to the radial quadrature.
inline Eigenset build_eigenset(const RadialGrid& grid, const PotentialModel& model,
                               std::size_t l_max, const KernelQuadrature& quad) {
    Eigenset set;
    set.grid = grid;
    set.model = model;
    set.l_max = l_max;
    set.content_hash = eigenset_content_hash(grid.n_points, grid.p_max, grid.mapping.scale,
                                             grid.mapping.beta, grid.convention, model, l_max, quad);

    auto kernels = build_kernel_blocks(grid, l_max, model, quad);
    const std::size_t n = grid.n_points;
    std::vector<double> inv_sw(n);
    for (std::size_t j = 0; j < n; ++j) inv_sw[j] = 1.0 / std::sqrt(grid.quad_weights[j]);

    set.blocks.resize(l_max + 1);
    for (std::size_t l = 0; l <= l_max; ++l) {
        Matrix<double> h = assemble_hamiltonian(grid, kernels[l]);
        kernels[l].k = Matrix<double>();  // free as we go; N=1024 blocks are 8 MB each
        SymmetricEigenResult eig = diagonalize_symmetric(h);

        EigensetL& b = set.blocks[l];
        b.l = l;
        b.energies = std::move(eig.energies);
        b.chi = std::move(eig.vectors);
        for (std::size_t s = 0; s < n; ++s) {
            double* row = b.chi.row(s);
            for (std::size_t j = 0; j < n; ++j) row[j] *= inv_sw[j];
            detail::fix_sign(row, n);
        }
        b.bound_count = static_cast<std::size_t>(
            std::count_if(b.energies.begin(), b.energies.end(), [](double e) { return e < 0.0; }));
    }
    return set;
}

/// Paper-style rms deviation between a computed radial function and a
/// reference sampled on the same grid:
///   sqrt( (1/N) sum_j w_j (chi_j - exact_j)^2 ).
inline double rms_deviation(const EigensetL& block, std::size_t state,
                            std::span<const double> exact, const RadialGrid& grid) {
    if (exact.size() != grid.n_points)
        throw std::invalid_argument("rms_deviation: reference length does not match grid");
    const double* row = block.chi.row(state);
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double d = row[j] - exact[j];
        acc += grid.quad_weights[j] * d * d;
    }
    return std::sqrt(acc / static_cast<double>(grid.n_points));
}

inline constexpr char eigenset_magic[9] = "PSPEIGS1";

inline void save_eigenset(const Eigenset& set, const std::filesystem::path& path) {
    BinaryWriter w(path, eigenset_magic);
    w.u32(eigenset_format_version);
    w.u64(set.content_hash);
    const RadialGrid& g = set.grid;
    w.u64(g.n_points);
    w.f64(g.p_max);
    w.f64(g.mapping.scale);
    w.f64(g.mapping.alpha);
    w.f64(g.mapping.beta);
    w.u32(g.convention == WeightConvention::standard ? 0 : 1);
    w.f64(g.chebyshev_weight);
    w.f64_span(g.x_nodes);
    w.f64_span(g.p_nodes);
    w.f64_span(g.dp_dx);
    w.f64_span(g.quad_weights);
    w.f64(set.model.nuclear_charge);
    for (double a : set.model.short_range) w.f64(a);
    w.f64(set.model.r_cutoff);
    w.u64(set.l_max);
    for (const EigensetL& b : set.blocks) {
        w.u64(b.l);
        w.u64(b.bound_count);
        w.f64_span(b.energies);
        w.f64_span(b.chi.storage());
    }
    w.finish();
}

inline Eigenset load_eigenset(const std::filesystem::path& path) {
    BinaryReader r(path, eigenset_magic);
    const std::uint32_t version = r.u32();
    if (version != eigenset_format_version)
        throw FormatError("eigenset format version " + std::to_string(version) +
                          " not supported (expected " + std::to_string(eigenset_format_version) + ")");
    Eigenset set;
    set.content_hash = r.u64();
    RadialGrid& g = set.grid;
    g.n_points = r.u64();
    g.p_max = r.f64();
    g.mapping.scale = r.f64();
    g.mapping.alpha = r.f64();
    g.mapping.beta = r.f64();
    g.convention = r.u32() == 0 ? WeightConvention::standard : WeightConvention::paper_literal;
    g.chebyshev_weight = r.f64();
    g.x_nodes.resize(g.n_points);
    g.p_nodes.resize(g.n_points);
    g.dp_dx.resize(g.n_points);
    g.quad_weights.resize(g.n_points);
    r.f64_span(g.x_nodes);
    r.f64_span(g.p_nodes);
    r.f64_span(g.dp_dx);
    r.f64_span(g.quad_weights);
    set.model.nuclear_charge = r.f64();
    for (double& a : set.model.short_range) a = r.f64();
    set.model.r_cutoff = r.f64();
    set.l_max = r.u64();
    set.blocks.resize(set.l_max + 1);
    for (EigensetL& b : set.blocks) {
        b.l = r.u64();
        b.bound_count = r.u64();
        b.energies.resize(g.n_points);
        r.f64_span(b.energies);
        b.chi = Matrix<double>(g.n_points, g.n_points);
        r.f64_span(b.chi.storage());
    }
    r.finish();
    return set;
}

} // namespace pspace
