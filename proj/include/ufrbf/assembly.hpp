#ifndef UFRBF_ASSEMBLY_HPP
#define UFRBF_ASSEMBLY_HPP

#include <Eigen/SparseCore>

#include <chrono>
#include <cmath>
#include <functional>
#include <vector>

#include "ufrbf/pointsets.hpp"
#include "ufrbf/stencil.hpp"

namespace ufrbf {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Wall-clock seconds spent in each assembly phase.
struct AssemblyTimings
{
    double neighbor_search = 0.0;
    double weights = 0.0;
    double assembly = 0.0;
};

template <int Dim>
struct RowTag
{
    Point<Dim> point;
    Operator<Dim> op;
    Index stencil = -1;
};

/// Sparse M_op x N operator; row i applies row_tags[i].op at row_tags[i].point.
template <int Dim>
struct GlobalOperator
{
    SparseMatrix matrix;
    std::vector<RowTag<Dim>> row_tags;

    Index rows() const { return matrix.rows(); }
    Index cols() const { return matrix.cols(); }
};

/// Stencil selection: the node closest to y, lowest index on ties.
template <int Dim>
Index stencil_of(const Point<Dim>& y, const SpatialIndex<Dim>& nodes)
{
    return nodes.nearest(y);
}

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
} // namespace detail

/// One row per tag: the weights of stencil rho(y) for the tag's operator,
/// scattered into the global columns of that stencil's nodes. Rows of the
/// same stencil are solved together.
template <int Dim>
GlobalOperator<Dim> assemble_operator(const SpatialIndex<Dim>& nodes, const StencilSet<Dim>& stencils,
                                      std::vector<RowTag<Dim>> tags, int threads = 1,
                                      AssemblyTimings* timings = nullptr)
{
    if (tags.empty()) throw ParameterError("assemble_operator: no evaluation points");
    if (stencils.node_count() != nodes.size()) throw ParameterError("assemble_operator: stencil set does not match nodes");

    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::vector<Index>> rows_of(stencils.node_count());
    for (std::size_t i = 0; i < tags.size(); ++i) {
        tags[i].stencil = stencil_of(tags[i].point, nodes);
        rows_of[tags[i].stencil].push_back(static_cast<Index>(i));
    }
    if (timings) timings->neighbor_search += detail::seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const Index n = stencils.stencil_size();
    Eigen::MatrixXd values(n, static_cast<Index>(tags.size()));
    parallel_for(stencils.node_count(), threads, [&](std::size_t s) {
        const auto& rows = rows_of[s];
        if (rows.empty()) return;
        std::vector<Point<Dim>> pts;
        std::vector<Operator<Dim>> ops;
        for (Index r : rows) {
            pts.push_back(tags[r].point);
            ops.push_back(tags[r].op);
        }
        const Eigen::MatrixXd w = stencils[static_cast<Index>(s)].weights(pts, ops);
        for (std::size_t j = 0; j < rows.size(); ++j) values.col(rows[j]) = w.col(static_cast<Index>(j));
    });
    if (timings) timings->weights += detail::seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(tags.size() * n);
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const auto& nb = stencils[tags[i].stencil].neighbors();
        for (Index j = 0; j < n; ++j)
            triplets.emplace_back(static_cast<Index>(i), nb[j], values(j, static_cast<Index>(i)));
    }
    GlobalOperator<Dim> op;
    op.matrix.resize(static_cast<Index>(tags.size()), static_cast<Index>(nodes.size()));
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    op.row_tags = std::move(tags);
    if (timings) timings->assembly += detail::seconds_since(t0);
    return op;
}

template <int Dim>
GlobalOperator<Dim> assemble_operator(const SpatialIndex<Dim>& nodes, const StencilSet<Dim>& stencils,
                                      const PointList<Dim>& points, const Operator<Dim>& op, int threads = 1,
                                      AssemblyTimings* timings = nullptr)
{
    std::vector<RowTag<Dim>> tags;
    tags.reserve(points.size());
    for (const auto& y : points) tags.push_back({y, op});
    return assemble_operator(nodes, stencils, std::move(tags), threads, timings);
}

/// Right-hand side data: Laplacian in the interior, values on the Dirichlet
/// part, normal derivative on the Neumann part.
template <int Dim>
struct PdeData
{
    std::function<double(const Point<Dim>&)> laplacian;
    std::function<double(const Point<Dim>&)> dirichlet;
    std::function<double(const Point<Dim>&, const Point<Dim>&)> neumann;
};

/// The stacked, scaled least-squares system D_h u = F with rows ordered
/// interior, Dirichlet, Neumann.
template <int Dim>
struct PdeSystem
{
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    double beta_interior = 0.0;  // 1/sqrt(M2)
    double beta_dirichlet = 0.0; // h^{-1}/sqrt(M0)
    double beta_neumann = 0.0;   // 1/sqrt(M1)
    Index interior_rows = 0, dirichlet_rows = 0, neumann_rows = 0;
    std::vector<RowTag<Dim>> row_tags;

    Index rows() const { return matrix.rows(); }
    Index cols() const { return matrix.cols(); }
    Index dirichlet_begin() const { return interior_rows; }
    Index neumann_begin() const { return interior_rows + dirichlet_rows; }
};

template <int Dim>
PdeSystem<Dim> assemble_pde_system(const PointSets<Dim>& ps, const SpatialIndex<Dim>& nodes,
                                   const StencilSet<Dim>& stencils, const PdeData<Dim>& data,
                                   int threads = 1, AssemblyTimings* timings = nullptr)
{
    if (ps.M0() == 0) throw ParameterError("pure Neumann unsupported: no Dirichlet boundary points");
    if (ps.M2() == 0) throw ParameterError("assemble_pde_system: no interior evaluation points");
    if (!(ps.h > 0.0)) throw ParameterError("assemble_pde_system: node spacing h not set");

    PdeSystem<Dim> sys;
    sys.interior_rows = ps.M2();
    sys.dirichlet_rows = ps.M0();
    sys.neumann_rows = ps.M1();
    sys.beta_interior = 1.0 / std::sqrt(static_cast<double>(ps.M2()));
    sys.beta_dirichlet = 1.0 / (ps.h * std::sqrt(static_cast<double>(ps.M0())));
    sys.beta_neumann = ps.M1() > 0 ? 1.0 / std::sqrt(static_cast<double>(ps.M1())) : 0.0;

    std::vector<RowTag<Dim>> tags;
    tags.reserve(ps.M());
    Eigen::VectorXd scale(ps.M());
    sys.rhs.resize(ps.M());
    Index row = 0;
    for (const auto& y : ps.interior) {
        tags.push_back({y, Operator<Dim>::laplacian()});
        scale[row] = sys.beta_interior;
        sys.rhs[row++] = sys.beta_interior * data.laplacian(y);
    }
    for (const auto& b : ps.dirichlet) {
        tags.push_back({b.point, Operator<Dim>::eval()});
        scale[row] = sys.beta_dirichlet;
        sys.rhs[row++] = sys.beta_dirichlet * data.dirichlet(b.point);
    }
    for (const auto& b : ps.neumann) {
        tags.push_back({b.point, Operator<Dim>::normal_derivative(b.normal)});
        scale[row] = sys.beta_neumann;
        sys.rhs[row++] = sys.beta_neumann * data.neumann(b.point, b.normal);
    }
    auto op = assemble_operator(nodes, stencils, std::move(tags), threads, timings);
    sys.matrix = scale.asDiagonal() * op.matrix;
    sys.row_tags = std::move(op.row_tags);
    return sys;
}

} // namespace ufrbf

#endif // UFRBF_ASSEMBLY_HPP
