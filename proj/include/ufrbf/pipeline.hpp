#ifndef UFRBF_PIPELINE_HPP
#define UFRBF_PIPELINE_HPP

#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>

#include "ufrbf/assembly.hpp"
#include "ufrbf/manufactured.hpp"
#include "ufrbf/pointsets.hpp"
#include "ufrbf/solver.hpp"
#include "ufrbf/stencil.hpp"

namespace ufrbf {

template <int Dim>
struct DiscretizationOptions
{
    int degree = 2;
    double spacing = 0.05;
    double tilt = 0.123;
    int oversampling = Dim == 3 ? 10 : 5;
    std::uint64_t seed = 1;
    bool prune = true;
    /// Distance the lattice extends past the bounding box; negative selects
    /// twice the radius holding n lattice points.
    double margin = -1.0;
    int threads = 1;
    bool exact_inverse_norm = true;
};

struct PhaseTimings
{
    double point_generation = 0.0;
    double neighbor_search = 0.0;
    double stencil_factorization = 0.0;
    double weights = 0.0;
    double assembly = 0.0;
    double solve = 0.0;

    double total() const
    {
        return point_generation + neighbor_search + stencil_factorization + weights + assembly + solve;
    }
};

/// Point sets, pruned node index and factorized stencils for one geometry.
template <int Dim>
struct Discretization
{
    StencilConfig config;
    InterpolationGrid<Dim> grid;      // before pruning
    std::vector<Index> grid_indices;  // grid index of each kept node
    PointSets<Dim> points;
    SpatialIndex<Dim> index;
    StencilSet<Dim> stencils;        // built at centers selected by rho(y)
    double margin = 0.0;
    PhaseTimings timings;
};

template <int Dim>
double default_margin(const StencilConfig& cfg, double spacing)
{
    return 2.0 * neighbor_reach(cfg.size, spacing, Dim);
}

template <int Dim>
Discretization<Dim> discretize(const DomainGeometry<Dim>& geometry, const DiscretizationOptions<Dim>& opt)
{
    using clock = std::chrono::steady_clock;
    Discretization<Dim> disc;
    disc.config = StencilConfig::make(opt.degree, Dim);
    if (opt.oversampling < 1) throw ParameterError("oversampling q must be >= 1");
    disc.margin = opt.margin >= 0.0 ? opt.margin : default_margin<Dim>(disc.config, opt.spacing);

    auto t0 = clock::now();
    disc.grid = generate_interpolation_grid<Dim>(geometry.bounding_box().inflated(disc.margin), opt.spacing, opt.tilt,
                                                 disc.config.size);
    auto eval = generate_evaluation_points(geometry, disc.grid, opt.oversampling, opt.seed);
    disc.points.interior = std::move(eval.interior);
    disc.points.dirichlet = std::move(eval.dirichlet);
    disc.points.neumann = std::move(eval.neumann);
    disc.points.q = opt.oversampling;
    disc.timings.point_generation += detail::seconds_since(t0);

    t0 = clock::now();
    if (opt.prune) {
        auto pr = prune_exterior_nodes(disc.grid.points, disc.points.evaluation_points(), disc.config.size,
                                       disc.config.monomials);
        disc.points.nodes = std::move(pr.kept);
        disc.grid_indices = std::move(pr.kept_indices);
    } else {
        disc.points.nodes = disc.grid.points;
        disc.grid_indices.resize(disc.points.nodes.size());
        std::iota(disc.grid_indices.begin(), disc.grid_indices.end(), Index{0});
    }
    if (disc.points.N() < disc.config.size)
        throw ParameterError("insufficient nodes for degree p: " + std::to_string(disc.points.N())
                             + " nodes for stencil size " + std::to_string(disc.config.size));
    disc.index = SpatialIndex<Dim>(disc.points.nodes);
    // Only stencils selected by some evaluation point enter the operators.
    const auto centers = selected_centers(disc.index, disc.points.evaluation_points());
    std::vector<std::vector<Index>> neighborhoods(centers.size());
    parallel_for(centers.size(), opt.threads, [&](std::size_t k) {
        neighborhoods[k] = disc.index.knn(disc.index.point(centers[k]), disc.config.size);
    });
    disc.points.h = average_spacing(disc.points.nodes);
    disc.timings.neighbor_search += detail::seconds_since(t0);

    t0 = clock::now();
    disc.stencils = StencilSet<Dim>(disc.index.size(), disc.config.size);
    parallel_for(centers.size(), opt.threads, [&](std::size_t k) {
        const Index c = centers[k];
        auto nb = std::move(neighborhoods[k]);
        auto it = std::find(nb.begin(), nb.end(), c);
        if (it == nb.end()) throw NumericalError("stencil", "center missing from its own neighborhood");
        std::rotate(nb.begin(), it, it + 1);
        typename Stencil<Dim>::Nodes nodes(Dim, disc.config.size);
        for (int j = 0; j < disc.config.size; ++j) nodes.col(j) = disc.index.point(nb[j]);
        disc.stencils.slot(c).emplace(c, std::move(nb), std::move(nodes), disc.config.degree, opt.exact_inverse_norm);
    });
    disc.timings.stencil_factorization += detail::seconds_since(t0);
    return disc;
}

/// Scalars and fields produced by one solve.
struct SolveReport
{
    Eigen::VectorXd u_nodal;
    Eigen::VectorXd u_field;    // E_h u_nodal at all evaluation points
    Eigen::VectorXd u_exact;    // empty when no exact solution is known
    Eigen::VectorXd residual;   // D_h u_nodal - F
    double residual_orthogonality = 0.0;
    std::optional<ErrorNorms> errors;
    PhaseTimings timings;
    Backend backend = Backend::Direct;
    Index iterations = 0;
    Index N = 0, M = 0, M0 = 0, M1 = 0, M2 = 0;
    double h = 0.0;
};

template <int Dim>
struct SolveResult
{
    Discretization<Dim> disc;
    PdeSystem<Dim> system;
    GlobalOperator<Dim> eval;  // E_h on all evaluation points (row order of the system)
    SolveReport report;
};

/// Full pipeline: discretize, assemble the scaled system, solve in the
/// least-squares sense and compare with the manufactured solution.
template <int Dim>
SolveResult<Dim> solve_poisson(const DomainGeometry<Dim>& geometry, const ManufacturedSolution<Dim>& solution,
                               const DiscretizationOptions<Dim>& opt, Backend backend = Backend::Auto,
                               const LsqrOptions& lsqr = {})
{
    SolveResult<Dim> res;
    res.disc = discretize(geometry, opt);
    auto& d = res.disc;
    AssemblyTimings at;
    res.system = assemble_pde_system(d.points, d.index, d.stencils, solution.pde_data(), opt.threads, &at);
    res.eval = assemble_operator(d.index, d.stencils, d.points.evaluation_points(), Operator<Dim>::eval(),
                                 opt.threads, &at);

    auto& rep = res.report;
    rep.timings = d.timings;
    rep.timings.neighbor_search += at.neighbor_search;
    rep.timings.weights += at.weights;
    rep.timings.assembly += at.assembly;

    const auto t0 = std::chrono::steady_clock::now();
    auto ls = solve_least_squares(res.system.matrix, res.system.rhs, backend, lsqr);
    rep.timings.solve = detail::seconds_since(t0);

    rep.u_nodal = std::move(ls.x);
    rep.backend = ls.backend;
    rep.iterations = ls.iterations;
    rep.residual = res.system.matrix * rep.u_nodal - res.system.rhs;
    rep.residual_orthogonality = residual_orthogonality(res.system.matrix, rep.residual);
    rep.u_field = evaluate_field(res.eval.matrix, rep.u_nodal);
    const auto ys = d.points.evaluation_points();
    rep.u_exact.resize(static_cast<Index>(ys.size()));
    for (std::size_t i = 0; i < ys.size(); ++i) rep.u_exact[static_cast<Index>(i)] = solution.value(ys[i]);
    rep.errors = error_norms(rep.u_field, rep.u_exact);
    rep.N = d.points.N();
    rep.M = d.points.M();
    rep.M0 = d.points.M0();
    rep.M1 = d.points.M1();
    rep.M2 = d.points.M2();
    rep.h = d.points.h;
    return res;
}

} // namespace ufrbf

#endif // UFRBF_PIPELINE_HPP
