#ifndef UFRBF_CONVERGENCE_HPP
#define UFRBF_CONVERGENCE_HPP

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ufrbf/diagnostics.hpp"
#include "ufrbf/io.hpp"
#include "ufrbf/pipeline.hpp"

namespace ufrbf {

struct SlopeFit
{
    double slope = 0.0;
    std::size_t first = 0; // fitting window [first, first + count)
    std::size_t count = 0;
    bool saturated = false; // every error in the window is at rounding level
};

/// Least-squares slope of log(err) against log(h) over the last `window`
/// entries (all entries when window is 0). Positive for errors that decay
/// as h shrinks.
inline SlopeFit fit_slope(const std::vector<double>& h, const std::vector<double>& err, std::size_t window = 0,
                          double saturation = 1e-11)
{
    if (h.size() != err.size()) throw ParameterError("fit_slope: length mismatch");
    if (window == 0 || window > h.size()) window = h.size();
    if (window < 2) throw ParameterError("fit_slope: need at least two points");
    SlopeFit f;
    f.first = h.size() - window;
    f.count = window;
    f.saturated = true;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = f.first; i < h.size(); ++i) {
        if (!(h[i] > 0.0)) throw ParameterError("fit_slope: h must be positive");
        if (err[i] > saturation) f.saturated = false;
        const double x = std::log(h[i]), y = std::log(std::max(err[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(window);
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw ParameterError("fit_slope: all h equal");
    f.slope = (n * sxy - sx * sy) / denom;
    return f;
}

struct ConvergenceRow
{
    double h = 0.0;          // average node distance of the pruned set
    double spacing = 0.0;    // lattice step requested
    Index N = 0, M = 0;
    ErrorNorms errors;
    double residual_orthogonality = 0.0;
    std::optional<double> stability_norm;
    std::optional<double> condition;
    PhaseTimings timings;
    Index iterations = 0;
};

struct ConvergenceTable
{
    std::vector<ConvergenceRow> rows;

    /// Slopes of the three error columns over the last `window` rows.
    std::array<SlopeFit, 3> slopes(std::size_t window = 0) const
    {
        std::vector<double> h, e1, e2, einf;
        for (const auto& r : rows) {
            h.push_back(r.h);
            e1.push_back(r.errors.rel_l1);
            e2.push_back(r.errors.rel_l2);
            einf.push_back(r.errors.rel_linf);
        }
        return {fit_slope(h, e1, window), fit_slope(h, e2, window), fit_slope(h, einf, window)};
    }

    /// Accuracy and diagnostics per level. Deterministic for a fixed seed
    /// and the direct backend; wall-clock data lives in timings_table().
    CsvTable table() const
    {
        CsvTable t({"spacing", "h", "inv_h", "N", "M", "rel_l1", "rel_l2", "rel_linf", "residual_orthogonality",
                    "stability_norm", "condition"});
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (const auto& r : rows)
            t.row() << r.spacing << r.h << 1.0 / r.h << r.N << r.M << r.errors.rel_l1 << r.errors.rel_l2
                    << r.errors.rel_linf << r.residual_orthogonality << r.stability_norm.value_or(nan)
                    << r.condition.value_or(nan);
        return t;
    }

    CsvTable timings_table() const
    {
        CsvTable t({"spacing", "N", "t_points", "t_neighbors", "t_factorization", "t_weights", "t_assembly",
                    "t_solve", "t_total", "iterations"});
        for (const auto& r : rows)
            t.row() << r.spacing << r.N << r.timings.point_generation << r.timings.neighbor_search
                    << r.timings.stencil_factorization << r.timings.weights << r.timings.assembly << r.timings.solve
                    << r.timings.total() << r.iterations;
        return t;
    }

    /// One row per error column: slope, window and saturation flag.
    CsvTable slope_table(std::size_t window = 0) const
    {
        CsvTable t({"norm", "slope", "first_row", "rows", "saturated"});
        const auto s = slopes(window);
        const char* names[] = {"rel_l1", "rel_l2", "rel_linf"};
        for (int i = 0; i < 3; ++i)
            t.row() << names[i] << s[i].slope << static_cast<int>(s[i].first) << static_cast<int>(s[i].count)
                    << (s[i].saturated ? "yes" : "no");
        return t;
    }
};

inline ConvergenceRow convergence_row(const SolveReport& rep, double spacing)
{
    ConvergenceRow r;
    r.h = rep.h;
    r.spacing = spacing;
    r.N = rep.N;
    r.M = rep.M;
    if (rep.errors) r.errors = *rep.errors;
    r.residual_orthogonality = rep.residual_orthogonality;
    r.timings = rep.timings;
    r.iterations = rep.iterations;
    return r;
}

/// Solves on every lattice step in `spacings` (must decrease strictly).
/// With `stability` set, each level also gets the stability norm and the
/// condition number of the scaled system.
template <int Dim>
ConvergenceTable run_convergence(const DomainGeometry<Dim>& geometry, const ManufacturedSolution<Dim>& solution,
                                 DiscretizationOptions<Dim> opt, const std::vector<double>& spacings,
                                 Backend backend = Backend::Auto, const LsqrOptions& lsqr = {},
                                 bool stability = false)
{
    if (spacings.size() < 2) throw ParameterError("convergence: need at least two spacings");
    for (std::size_t i = 1; i < spacings.size(); ++i)
        if (!(spacings[i] < spacings[i - 1])) throw ParameterError("convergence: spacings must decrease strictly");
    ConvergenceTable table;
    for (double s : spacings) {
        opt.spacing = s;
        const auto res = solve_poisson(geometry, solution, opt, backend, lsqr);
        auto row = convergence_row(res.report, s);
        if (stability) {
            const auto st = stability_report(res.eval.matrix, res.system.matrix, res.report.M);
            row.stability_norm = st.stability_norm;
            row.condition = st.condition_D;
        }
        table.rows.push_back(row);
    }
    return table;
}

/// Lattice steps h0, h0 / sqrt(2), ... (count entries).
inline std::vector<double> geometric_spacings(double h0, int count)
{
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(h0 / std::pow(std::sqrt(2.0), i));
    return out;
}

} // namespace ufrbf

#endif // UFRBF_CONVERGENCE_HPP
