#ifndef UFRBF_SOLVER_HPP
#define UFRBF_SOLVER_HPP

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseQR>

#include <cmath>
#include <limits>
#include <string>

#include "ufrbf/assembly.hpp"

namespace ufrbf {

enum class Backend { Direct, Iterative, Auto };

inline Backend parse_backend(const std::string& s)
{
    if (s == "direct") return Backend::Direct;
    if (s == "iterative") return Backend::Iterative;
    if (s == "auto") return Backend::Auto;
    throw ParameterError("unknown solver backend '" + s + "' (expected direct, iterative or auto)");
}

inline const char* to_string(Backend b)
{
    switch (b) {
    case Backend::Direct: return "direct";
    case Backend::Iterative: return "iterative";
    default: return "auto";
    }
}

struct LsqrOptions
{
    double gradient_tol = 1e-10;  // |A^T r| / (|A| |r|)
    double residual_tol = 1e-14;  // |r| <= tol (|b| + |A| |x|): consistent systems
    Index max_iterations = 0;     // 0: 10 N
};

struct LeastSquaresResult
{
    Eigen::VectorXd x;
    Backend backend = Backend::Direct;
    Index iterations = 0;
};

namespace detail {

inline Eigen::VectorXd column_norms(const SparseMatrix& a)
{
    Eigen::VectorXd c = Eigen::VectorXd::Zero(a.cols());
    for (Index r = 0; r < a.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(a, r); it; ++it) c[it.col()] += it.value() * it.value();
    return c.cwiseSqrt();
}

inline void rank_deficient(const std::string& detail_msg)
{
    throw NumericalError("solver", "column rank deficient - check pruning of exterior nodes (" + detail_msg + ")");
}

} // namespace detail

/// Sparse Householder QR with COLAMD ordering.
inline Eigen::VectorXd solve_direct(const SparseMatrix& a, const Eigen::VectorXd& b)
{
    if (a.rows() < a.cols())
        detail::rank_deficient(std::to_string(a.rows()) + " rows for " + std::to_string(a.cols()) + " columns");
    Eigen::SparseMatrix<double> col_major(a);
    col_major.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.compute(col_major);
    if (qr.info() != Eigen::Success) detail::rank_deficient("QR factorization failed");
    if (qr.rank() < a.cols())
        detail::rank_deficient("numerical rank " + std::to_string(qr.rank()) + " < " + std::to_string(a.cols()));
    Eigen::VectorXd x = qr.solve(b);
    if (qr.info() != Eigen::Success || !x.allFinite()) detail::rank_deficient("QR solve failed");
    return x;
}

/// LSQR (Golub-Kahan bidiagonalization) on the column-equilibrated system.
/// Stops when the normalized gradient |A^T r| / (|A| |r|) or the relative
/// residual drops below tolerance.
inline Eigen::VectorXd solve_lsqr(const SparseMatrix& a, const Eigen::VectorXd& b, const LsqrOptions& opt = {},
                                  Index* iterations = nullptr)
{
    if (a.rows() < a.cols())
        detail::rank_deficient(std::to_string(a.rows()) + " rows for " + std::to_string(a.cols()) + " columns");
    const Index n = a.cols();
    const Eigen::VectorXd cn = detail::column_norms(a);
    for (Index j = 0; j < n; ++j)
        if (cn[j] == 0.0) detail::rank_deficient("column " + std::to_string(j) + " is zero");
    const Eigen::VectorXd dinv = cn.cwiseInverse();
    auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * dinv.cwiseProduct(v); };
    auto apply_t = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return dinv.cwiseProduct(a.transpose() * v);
    };

    const Index max_it = opt.max_iterations > 0 ? opt.max_iterations : 10 * n;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u = b;
    double beta = u.norm();
    if (beta == 0.0) {
        if (iterations) *iterations = 0;
        return x;
    }
    u /= beta;
    Eigen::VectorXd v = apply_t(u);
    double alpha = v.norm();
    if (alpha == 0.0) {
        if (iterations) *iterations = 0;
        return x;
    }
    v /= alpha;
    Eigen::VectorXd w = v;
    double phibar = beta, rhobar = alpha;
    double anorm2 = 0.0, xnorm = 0.0;
    const double bnorm = beta;
    double best_gradient = std::numeric_limits<double>::infinity();
    Index stalled = 0;

    Index it = 0;
    for (; it < max_it; ++it) {
        u = apply(v) - alpha * u;
        beta = u.norm();
        if (beta > 0.0) u /= beta;
        anorm2 += alpha * alpha + beta * beta;
        v = apply_t(u) - beta * v;
        alpha = v.norm();
        if (alpha > 0.0) v /= alpha;

        const double rho = std::hypot(rhobar, beta);
        const double c = rhobar / rho, s = beta / rho;
        const double theta = s * alpha;
        rhobar = -c * alpha;
        const double phi = c * phibar;
        phibar = s * phibar;
        x += (phi / rho) * w;
        w = v - (theta / rho) * w;

        xnorm = x.norm();
        const double rnorm = phibar;
        const double arnorm = phibar * alpha * std::abs(c);
        const double anorm = std::sqrt(anorm2);
        if (rnorm <= opt.residual_tol * (bnorm + anorm * xnorm)) break;
        const double gradient = arnorm / (anorm * rnorm);
        if (gradient <= opt.gradient_tol || alpha == 0.0) break;
        if (gradient < 0.5 * best_gradient) {
            best_gradient = gradient;
            stalled = 0;
        } else if (++stalled > std::max<Index>(2000, n)) {
            detail::rank_deficient("LSQR stagnated at normalized gradient " + std::to_string(gradient));
        }
    }
    if (iterations) *iterations = it + 1;
    if (it == max_it)
        throw ConvergenceError("solver", "LSQR reached " + std::to_string(max_it) + " iterations", best_gradient);
    return dinv.cwiseProduct(x);
}

inline LeastSquaresResult solve_least_squares(const SparseMatrix& a, const Eigen::VectorXd& b,
                                              Backend backend = Backend::Auto, const LsqrOptions& opt = {})
{
    if (a.rows() != b.size()) throw ParameterError("least squares: rhs length does not match rows");
    if (backend == Backend::Auto) backend = a.cols() <= 2000 ? Backend::Direct : Backend::Iterative;
    LeastSquaresResult r;
    r.backend = backend;
    if (backend == Backend::Direct) {
        r.x = solve_direct(a, b);
    } else {
        r.x = solve_lsqr(a, b, opt, &r.iterations);
    }
    return r;
}

/// max column abs sum.
inline double norm_1(const SparseMatrix& a)
{
    Eigen::VectorXd c = Eigen::VectorXd::Zero(a.cols());
    for (Index r = 0; r < a.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(a, r); it; ++it) c[it.col()] += std::abs(it.value());
    return c.size() ? c.maxCoeff() : 0.0;
}

/// |A^T r|_inf / (|A|_1 |r|_2 + 1e-300): zero for an exact least-squares residual.
inline double residual_orthogonality(const SparseMatrix& a, const Eigen::VectorXd& r)
{
    const Eigen::VectorXd g = a.transpose() * r;
    return g.cwiseAbs().maxCoeff() / (norm_1(a) * r.norm() + 1e-300);
}

inline Eigen::VectorXd evaluate_field(const SparseMatrix& eval, const Eigen::VectorXd& nodal)
{
    if (eval.cols() != nodal.size()) throw ParameterError("evaluate_field: shape mismatch");
    return eval * nodal;
}

struct ErrorNorms
{
    double rel_l1 = 0.0;
    double rel_l2 = 0.0;
    double rel_linf = 0.0;
};

inline ErrorNorms error_norms(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact)
{
    if (approx.size() != exact.size()) throw ParameterError("error_norms: length mismatch");
    if (exact.size() == 0 || exact.cwiseAbs().maxCoeff() == 0.0)
        throw ParameterError("error_norms: exact solution is zero");
    const Eigen::VectorXd e = approx - exact;
    return {e.lpNorm<1>() / exact.lpNorm<1>(), e.norm() / exact.norm(),
            e.lpNorm<Eigen::Infinity>() / exact.lpNorm<Eigen::Infinity>()};
}

} // namespace ufrbf

#endif // UFRBF_SOLVER_HPP
