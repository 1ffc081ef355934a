#ifndef UFRBF_DIAGNOSTICS_HPP
#define UFRBF_DIAGNOSTICS_HPP

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ufrbf/pipeline.hpp"

namespace ufrbf {

enum class SvdMode { Dense, Iterative, Auto };

struct SingularExtremes
{
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

/// Matrices with at most this many entries are handled by a dense SVD in Auto mode.
inline constexpr double dense_svd_cutoff = 4e6;

namespace detail {

/// Largest eigenvalue of a symmetric positive semi-definite operator by
/// Lanczos with full reorthogonalization. Converged when the Ritz residual
/// |beta_k s_k| falls below rel_tol times the Ritz value. The basis grows on
/// demand and the Ritz check runs every few steps once the basis is long.
inline double lanczos_largest(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, Index n,
                              double rel_tol, Index max_steps)
{
    max_steps = std::min(max_steps, n);
    Eigen::MatrixXd basis(n, std::min<Index>(max_steps + 1, 64));
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    Eigen::VectorXd q(n);
    for (Index i = 0; i < n; ++i) q[i] = dist(rng);
    q.normalize();
    basis.col(0) = q;
    std::vector<double> alpha, beta;
    double estimate = 0.0;
    for (Index k = 0; k < max_steps; ++k) {
        Eigen::VectorXd w = apply(basis.col(k));
        const double a = basis.col(k).dot(w);
        alpha.push_back(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * w);
        const double b = w.norm();

        const Index m = k + 1;
        const bool last = b <= 1e-300 || m == n || m == max_steps;
        if (last || m < 32 || m % std::max<Index>(1, m / 16) == 0) {
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
            for (Index i = 0; i < m; ++i) {
                t(i, i) = alpha[i];
                if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
            estimate = es.eigenvalues()[m - 1];
            const double residual = std::abs(b * es.eigenvectors()(m - 1, m - 1));
            if (residual <= rel_tol * std::abs(estimate) || b <= 1e-300 || m == n) return estimate;
        }
        if (m == max_steps) break;
        beta.push_back(b);
        if (basis.cols() <= m) basis.conservativeResize(Eigen::NoChange, std::min<Index>(max_steps + 1, 2 * basis.cols()));
        basis.col(m) = w / b;
    }
    throw ConvergenceError("diagnostics", "Lanczos did not converge in " + std::to_string(max_steps) + " steps",
                           estimate);
}

} // namespace detail

/// Smallest and largest singular value of a (tall) sparse matrix.
/// Iterative mode: sigma_max from Lanczos on A^T A; sigma_min from Lanczos
/// on (A^T A)^{-1} applied through the R factor of a sparse QR. A matrix
/// with numerical rank below its column count reports sigma_min = 0.
inline SingularExtremes singular_extremes(const SparseMatrix& a, SvdMode mode = SvdMode::Auto, double rel_tol = 1e-6,
                                          Index max_steps = 10000)
{
    if (a.rows() == 0 || a.cols() == 0) throw ParameterError("singular_extremes: empty matrix");
    if (mode == SvdMode::Auto)
        mode = static_cast<double>(a.rows()) * static_cast<double>(a.cols()) <= dense_svd_cutoff ? SvdMode::Dense
                                                                                                  : SvdMode::Iterative;
    SingularExtremes out;
    if (mode == SvdMode::Dense) {
        const Eigen::MatrixXd dense(a);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
        const auto& s = svd.singularValues();
        out.sigma_max = s[0];
        out.sigma_min = a.rows() >= a.cols() ? s[s.size() - 1] : 0.0;
        return out;
    }

    const Index n = a.cols();
    auto normal = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a.transpose() * (a * x); };
    out.sigma_max = std::sqrt(detail::lanczos_largest(normal, n, rel_tol, max_steps));
    if (a.rows() < a.cols()) return out;

    Eigen::SparseMatrix<double> col_major(a);
    col_major.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr(col_major);
    if (qr.info() != Eigen::Success || qr.rank() < n) return out; // sigma_min = 0
    const Eigen::SparseMatrix<double> r = qr.matrixR().topLeftCorner(n, n);
    const auto perm = qr.colsPermutation();
    auto inverse_normal = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        // (A^T A)^{-1} = P R^{-1} R^{-T} P^T for A P = Q R.
        Eigen::VectorXd y = perm.transpose() * x;
        y = r.transpose().triangularView<Eigen::Lower>().solve(y);
        y = r.triangularView<Eigen::Upper>().solve(y);
        return perm * y;
    };
    const double largest_inverse = detail::lanczos_largest(inverse_normal, n, rel_tol, max_steps);
    out.sigma_min = largest_inverse > 0.0 ? 1.0 / std::sqrt(largest_inverse) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Stability and conditioning
// ---------------------------------------------------------------------------

struct StabilityReport
{
    double sigma_min_E = 0.0, sigma_max_E = 0.0;
    double sigma_min_D = 0.0, sigma_max_D = 0.0;
    double stability_norm = 0.0; // sigma_max(E) / (sqrt(M) sigma_min(D))
    double condition_D = 0.0;    // sigma_max(D) / sigma_min(D)
};

inline StabilityReport stability_report(const SparseMatrix& eval, const SparseMatrix& pde, Index rows,
                                        SvdMode mode = SvdMode::Auto)
{
    if (eval.cols() != pde.cols()) throw ParameterError("stability_report: E_h and D_h column counts differ");
    StabilityReport r;
    const auto e = singular_extremes(eval, mode);
    const auto d = singular_extremes(pde, mode);
    r.sigma_min_E = e.sigma_min;
    r.sigma_max_E = e.sigma_max;
    r.sigma_min_D = d.sigma_min;
    r.sigma_max_D = d.sigma_max;
    const double inf = std::numeric_limits<double>::infinity();
    r.stability_norm = d.sigma_min > 0.0 ? e.sigma_max / (std::sqrt(static_cast<double>(rows)) * d.sigma_min) : inf;
    r.condition_D = d.sigma_min > 0.0 ? d.sigma_max / d.sigma_min : inf;
    return r;
}

// ---------------------------------------------------------------------------
// Support sweeps: sigma_min(E_h) as the domain edge slides over the
// outermost stencil of a fixed lattice.
// ---------------------------------------------------------------------------

struct SupportSweepConfig
{
    int degree = 2;
    int cells = 10;        // lattice cells across [-1, 1]; spacing = 2 / cells
    int oversampling = 5;
    int steps = 40;
    int probes_per_cell = 40; // 1D; 2D uses a quarter of this per axis
    std::uint64_t seed = 1;
};

struct SupportSweepRow
{
    double offset = 0.0;            // distance of the outermost lattice column outside x = -1
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double stencil_inside = 0.0;    // fraction of outermost stencil nodes in the closed domain
    double support_fraction = 0.0;  // fraction of the outermost cardinal support inside the domain
    double support_area = 0.0;      // integral of |Psi_outermost| over the domain
    Index N = 0, M = 0;

    bool singular() const { return sigma_min <= 1e-12 * sigma_max; }
};

namespace detail {

template <int Dim>
SupportSweepRow support_sweep_point(const SupportSweepConfig& cfg, double offset)
{
    const double s = 2.0 / cfg.cells;
    const auto geometry = box_domain<Dim>(Point<Dim>::Constant(-1.0), Point<Dim>::Constant(1.0));
    const auto stencil_cfg = StencilConfig::make(cfg.degree, Dim);

    // Lattice: axis 0 starts `offset` left of the domain, other axes fitted.
    InterpolationGrid<Dim> grid;
    grid.spacing = s;
    const double x0 = -1.0 - offset;
    const int columns = static_cast<int>(std::floor((1.0 + 0.5 * s - x0) / s)) + 1;
    std::array<int, Dim> count;
    count[0] = columns;
    for (int a = 1; a < Dim; ++a) count[a] = cfg.cells + 1;
    std::array<int, Dim> k{};
    Index outer = -1;
    for (;;) {
        Point<Dim> p;
        p[0] = x0 + k[0] * s;
        for (int a = 1; a < Dim; ++a) p[a] = -1.0 + k[a] * s;
        bool is_outer = k[0] == 0;
        for (int a = 1; a < Dim; ++a) is_outer = is_outer && k[a] == cfg.cells / 2;
        if (is_outer) outer = static_cast<Index>(grid.points.size());
        grid.points.push_back(p);
        int a = Dim - 1;
        while (a >= 0 && ++k[a] >= count[a]) k[a--] = 0;
        if (a < 0) break;
    }

    auto eval_pts = generate_evaluation_points(geometry, grid, cfg.oversampling, cfg.seed);
    PointSets<Dim> ps;
    ps.nodes = grid.points;
    ps.interior = std::move(eval_pts.interior);
    ps.dirichlet = std::move(eval_pts.dirichlet);
    ps.neumann = std::move(eval_pts.neumann);
    const SpatialIndex<Dim> index(ps.nodes);
    const auto stencils = build_all_stencils(index, stencil_cfg);
    const auto e = assemble_operator(index, stencils, ps.evaluation_points(), Operator<Dim>::eval());

    SupportSweepRow row;
    row.offset = offset;
    row.N = ps.N();
    row.M = ps.M();
    const auto sv = singular_extremes(e.matrix, SvdMode::Dense);
    row.sigma_min = sv.sigma_min;
    row.sigma_max = sv.sigma_max;

    const auto& outer_stencil = stencils[outer];
    int inside = 0;
    for (Index j : outer_stencil.neighbors())
        if (geometry.classify(index.point(j)) != Location::Exterior) ++inside;
    row.stencil_inside = static_cast<double>(inside) / static_cast<double>(outer_stencil.size());

    // Tensor probe grid over a box around the outermost node, clipped on the
    // left to the lattice hull; trapezoid weights per axis.
    const double half = 2.0 * neighbor_reach(stencil_cfg.size, s, Dim) + s;
    const int per_cell = Dim == 1 ? cfg.probes_per_cell : std::max(4, cfg.probes_per_cell / 4);
    const Point<Dim> centre = index.point(outer);
    std::array<std::vector<double>, Dim> axis_pts, axis_w;
    for (int a = 0; a < Dim; ++a) {
        const double lo = a == 0 ? centre[a] - 0.5 * s : centre[a] - half;
        const double hi = centre[a] + half;
        const int m = std::max(2, static_cast<int>(std::ceil((hi - lo) / s * per_cell)));
        const double d = (hi - lo) / m;
        for (int i = 0; i <= m; ++i) {
            axis_pts[a].push_back(lo + i * d);
            axis_w[a].push_back((i == 0 || i == m) ? 0.5 * d : d);
        }
    }
    double support = 0.0, support_inside = 0.0;
    std::array<std::size_t, Dim> idx{};
    for (;;) {
        Point<Dim> z;
        double w = 1.0;
        for (int a = 0; a < Dim; ++a) {
            z[a] = axis_pts[a][idx[a]];
            w *= axis_w[a][idx[a]];
        }
        const Index st = index.nearest(z);
        const auto& nb = stencils[st].neighbors();
        const auto it = std::find(nb.begin(), nb.end(), outer);
        if (it != nb.end()) {
            const double psi = stencils[st].weights(z, Operator<Dim>::eval())[it - nb.begin()];
            if (std::abs(psi) > 1e-12) {
                const bool in = geometry.classify(z) != Location::Exterior;
                support += w;
                if (in) {
                    support_inside += w;
                    row.support_area += w * std::abs(psi);
                }
            }
        }
        int a = Dim - 1;
        while (a >= 0 && ++idx[a] >= axis_pts[a].size()) idx[a--] = 0;
        if (a < 0) break;
    }
    row.support_fraction = support > 0.0 ? support_inside / support : 0.0;
    return row;
}

template <int Dim>
std::vector<SupportSweepRow> support_sweep(const SupportSweepConfig& cfg, int threads)
{
    if (cfg.steps < 2) throw ParameterError("support sweep: need at least two steps");
    if (cfg.cells < 2) throw ParameterError("support sweep: need at least two cells");
    const double s = 2.0 / cfg.cells;
    const double reach = 2.0 * neighbor_reach(stencil_size(cfg.degree, Dim), s, Dim) + s;
    // Offsets decrease from beyond the outermost support to a grid nearly
    // aligned with the domain edge; the 0.37 shift keeps the domain edge off
    // lattice and cell-face positions.
    std::vector<SupportSweepRow> rows(cfg.steps);
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const double t = reach * (1.0 - (static_cast<double>(i) + 0.37) / cfg.steps);
        rows[i] = support_sweep_point<Dim>(cfg, t);
    });
    return rows;
}

} // namespace detail

inline std::vector<SupportSweepRow> support_sweep_1d(const SupportSweepConfig& cfg = {}, int threads = 1)
{
    return detail::support_sweep<1>(cfg, threads);
}

inline std::vector<SupportSweepRow> support_sweep_2d(const SupportSweepConfig& cfg = {}, int threads = 1)
{
    return detail::support_sweep<2>(cfg, threads);
}

// ---------------------------------------------------------------------------
// Per-stencil norms
// ---------------------------------------------------------------------------

template <int Dim>
struct StencilNormRow
{
    Point<Dim> center;
    double inv_norm_inf = 0.0;
    double lebesgue_estimate = 0.0;
};

/// |A~^{-1}|_inf and the Lebesgue estimate of every built stencil, probed at
/// the stencil center and at the evaluation points that select it.
template <int Dim>
std::vector<StencilNormRow<Dim>> stencil_norms(const Discretization<Dim>& disc, int threads = 1)
{
    const auto built = disc.stencils.built();
    std::vector<std::vector<Point<Dim>>> probes(disc.stencils.node_count());
    for (const auto* st : built) probes[st->center_index()].push_back(st->center());
    for (const auto& y : disc.points.evaluation_points()) probes[disc.index.nearest(y)].push_back(y);
    std::vector<StencilNormRow<Dim>> rows(built.size());
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const auto& st = *built[i];
        rows[i] = {st.center(), st.inv_norm_inf(), lebesgue_bound(st, probes[st.center_index()]).estimate};
    });
    return rows;
}

/// max / min of |A~^{-1}|_inf over all stencils.
template <int Dim>
double inverse_norm_spread(const StencilSet<Dim>& stencils)
{
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto* s : stencils.built()) {
        lo = std::min(lo, s->inv_norm_inf());
        hi = std::max(hi, s->inv_norm_inf());
    }
    return hi / lo;
}

/// Stencils on the fitted layout: lattice nodes restricted to the closed
/// domain, so boundary stencils are one-sided.
template <int Dim>
StencilSet<Dim> fitted_lattice_stencils(const DomainGeometry<Dim>& geometry, const DiscretizationOptions<Dim>& opt)
{
    const auto cfg = StencilConfig::make(opt.degree, Dim);
    const auto grid = generate_interpolation_grid<Dim>(geometry.bounding_box(), opt.spacing, opt.tilt, cfg.size);
    PointList<Dim> inside;
    for (const auto& p : grid.points)
        if (geometry.classify(p) != Location::Exterior) inside.push_back(p);
    const SpatialIndex<Dim> index(inside);
    return build_all_stencils(index, cfg, opt.threads, opt.exact_inverse_norm);
}

} // namespace ufrbf

#endif // UFRBF_DIAGNOSTICS_HPP
