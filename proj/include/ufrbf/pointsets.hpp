#ifndef UFRBF_POINTSETS_HPP
#define UFRBF_POINTSETS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ufrbf/geometry.hpp"
#include "ufrbf/spatial_index.hpp"

namespace ufrbf {

template <int Dim>
using Rotation = Eigen::Matrix<double, Dim, Dim>;

/// Rotation applied to the background lattice. In 3D the grid is tilted
/// about z and then about x by the same angle.
template <int Dim>
Rotation<Dim> tilt_rotation(double angle)
{
    if constexpr (Dim == 1) {
        return Rotation<1>::Identity();
    } else if constexpr (Dim == 2) {
        return Eigen::Rotation2Dd(angle).toRotationMatrix();
    } else {
        return (Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitX()) * Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()))
            .toRotationMatrix();
    }
}

/// Tilted Cartesian lattice. Cell i is the rotated cube of side `spacing`
/// centred at points[i]; for interior lattice points this is exactly the
/// Voronoi cell.
template <int Dim>
struct InterpolationGrid
{
    PointList<Dim> points;
    double spacing = 0.0;
    Rotation<Dim> rotation = Rotation<Dim>::Identity();
    Point<Dim> anchor = Point<Dim>::Zero();
};

/// Lattice with the given step, rotated by `tilt` about the box centre and
/// clipped to `box`. Throws when fewer than `min_count` points result.
template <int Dim>
InterpolationGrid<Dim> generate_interpolation_grid(const Box<Dim>& box, double spacing, double tilt,
                                                   Index min_count = 1)
{
    if (!(spacing > 0.0)) throw ParameterError("interpolation grid: spacing must be positive");
    InterpolationGrid<Dim> grid;
    grid.spacing = spacing;
    grid.rotation = tilt_rotation<Dim>(tilt);
    grid.anchor = box.center();

    const double half_diag = 0.5 * box.extent().norm();
    const long reach = static_cast<long>(std::ceil(half_diag / spacing)) + 1;
    const double tol = 1e-12 * spacing;
    std::array<long, Dim> k;
    k.fill(-reach);
    for (;;) {
        Point<Dim> offset;
        for (int a = 0; a < Dim; ++a) offset[a] = spacing * static_cast<double>(k[a]);
        const Point<Dim> p = grid.anchor + grid.rotation * offset;
        if (box.contains(p, tol)) grid.points.push_back(p);
        int a = Dim - 1;
        while (a >= 0 && ++k[a] > reach) k[a--] = -reach;
        if (a < 0) break;
    }
    if (static_cast<Index>(grid.points.size()) < min_count)
        throw ParameterError("insufficient nodes for degree p: grid has " + std::to_string(grid.points.size())
                             + " points, need at least " + std::to_string(min_count));
    return grid;
}

/// Radius of the ball expected to hold n lattice points of the given spacing.
inline double neighbor_reach(int n, double spacing, int dim)
{
    return spacing * std::pow(n / unit_ball_volume(dim), 1.0 / dim);
}

/// Halton value of `index` in the given prime base.
inline double radical_inverse(std::uint64_t index, unsigned base)
{
    double result = 0.0, f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

template <int Dim>
struct EvaluationPoints
{
    PointList<Dim> interior;
    std::vector<BoundarySample<Dim>> dirichlet;
    std::vector<BoundarySample<Dim>> neumann;
};

/// Oversampled evaluation points conforming to the domain. Each lattice cell
/// receives candidates starting with its centre and continuing along a
/// randomly shifted Halton sequence; a candidate is kept if it is strictly
/// inside the domain and in the cell's Voronoi region. Placement stops at q
/// kept points or 10 q candidates. Boundary points are spaced like the
/// interior points, spacing / q^(1/d).
template <int Dim>
EvaluationPoints<Dim> generate_evaluation_points(const DomainGeometry<Dim>& geometry, const InterpolationGrid<Dim>& grid,
                                                 int q, std::uint64_t seed)
{
    if (q < 1) throw ParameterError("evaluation points: oversampling q must be >= 1");
    if (grid.points.empty()) throw ParameterError("evaluation points: empty interpolation set");

    static constexpr unsigned primes[3] = {2, 3, 5};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point<Dim> shift;
    for (int a = 0; a < Dim; ++a) shift[a] = unit(rng);

    const SpatialIndex<Dim> index(grid.points);
    const double s = grid.spacing;
    const double skip_level = 3.0 * s * std::sqrt(static_cast<double>(Dim));

    EvaluationPoints<Dim> out;
    for (Index i = 0; i < static_cast<Index>(grid.points.size()); ++i) {
        const Point<Dim>& x = grid.points[i];
        if (geometry.level(x) > skip_level) continue;
        int kept = 0;
        for (int c = 0; c < 10 * q && kept < q; ++c) {
            Point<Dim> local = Point<Dim>::Zero();
            if (c > 0) {
                for (int a = 0; a < Dim; ++a) {
                    double u = radical_inverse(static_cast<std::uint64_t>(c), primes[a]) + shift[a];
                    local[a] = (u - std::floor(u)) - 0.5;
                }
            }
            const Point<Dim> y = x + grid.rotation * (s * local);
            if (!geometry.is_interior(y)) continue;
            if (index.nearest(y) != i) continue;
            out.interior.push_back(y);
            ++kept;
        }
    }
    if (out.interior.empty()) throw NumericalError("pointsets", "no interior evaluation points (degenerate geometry?)");

    const double boundary_spacing = s / std::pow(static_cast<double>(q), 1.0 / Dim);
    for (auto& b : geometry.sample_boundary(boundary_spacing))
        (b.label == BcType::Dirichlet ? out.dirichlet : out.neumann).push_back(b);
    return out;
}

/// All nodes X and the conforming evaluation points, split by block.
template <int Dim>
struct PointSets
{
    PointList<Dim> nodes;
    PointList<Dim> interior;
    std::vector<BoundarySample<Dim>> dirichlet;
    std::vector<BoundarySample<Dim>> neumann;
    double h = 0.0;
    int q = 1;

    Index N() const { return static_cast<Index>(nodes.size()); }
    Index M2() const { return static_cast<Index>(interior.size()); }
    Index M0() const { return static_cast<Index>(dirichlet.size()); }
    Index M1() const { return static_cast<Index>(neumann.size()); }
    Index M() const { return M2() + M0() + M1(); }

    /// Interior, then Dirichlet, then Neumann: the row order of the PDE system.
    PointList<Dim> evaluation_points() const
    {
        PointList<Dim> all = interior;
        for (const auto& b : dirichlet) all.push_back(b.point);
        for (const auto& b : neumann) all.push_back(b.point);
        return all;
    }
};

template <int Dim>
struct PruneResult
{
    PointList<Dim> kept;
    std::vector<Index> old_to_new;   // -1 for removed nodes
    std::vector<Index> kept_indices; // ascending old indices
};

/// Keeps the union over all evaluation points of their ceil(n/2) nearest
/// nodes, so every stencil retains at least half of its points near the
/// domain. Order of the kept nodes follows their old index.
template <int Dim>
PruneResult<Dim> prune_exterior_nodes(const PointList<Dim>& nodes, const PointList<Dim>& evaluation, int n,
                                      Index min_count = 1)
{
    if (n < 1) throw ParameterError("prune: stencil size must be >= 1");
    const SpatialIndex<Dim> index(nodes);
    const auto k = static_cast<std::size_t>((n + 1) / 2);
    std::vector<char> keep(nodes.size(), 0);
    for (const auto& y : evaluation)
        for (Index j : index.knn(y, k)) keep[j] = 1;

    PruneResult<Dim> r;
    r.old_to_new.assign(nodes.size(), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!keep[i]) continue;
        r.old_to_new[i] = static_cast<Index>(r.kept.size());
        r.kept_indices.push_back(static_cast<Index>(i));
        r.kept.push_back(nodes[i]);
    }
    if (static_cast<Index>(r.kept.size()) < min_count)
        throw NumericalError("pointsets", "unisolvency at risk: " + std::to_string(r.kept.size())
                                              + " nodes kept, need at least " + std::to_string(min_count));
    return r;
}

/// Mean nearest-neighbour distance h = (1/N) sum_i min_{j != i} |x_j - x_i|.
template <int Dim>
double average_spacing(const PointList<Dim>& nodes)
{
    if (nodes.size() < 2) throw ParameterError("average_spacing: need at least two nodes");
    const SpatialIndex<Dim> index(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto nn = index.knn(nodes[i], 2);
        const Index other = nn[0] == static_cast<Index>(i) ? nn[1] : nn[0];
        const double d = (nodes[other] - nodes[i]).norm();
        if (d == 0.0) throw ParameterError("coincident nodes at index " + std::to_string(i));
        sum += d;
    }
    return sum / static_cast<double>(nodes.size());
}

struct PointSetQuality
{
    double fill_estimate = 0.0;
    double separation = 0.0;
    double ratio = 0.0;
};

/// Separation radius, fill distance estimated over `probes`, and their ratio.
template <int Dim>
PointSetQuality point_set_quality(const PointList<Dim>& nodes, const PointList<Dim>& probes)
{
    if (nodes.size() < 2) throw ParameterError("point_set_quality: need at least two nodes");
    const SpatialIndex<Dim> index(nodes);
    double min_pair = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto nn = index.knn(nodes[i], 2);
        const Index other = nn[0] == static_cast<Index>(i) ? nn[1] : nn[0];
        min_pair = std::min(min_pair, (nodes[other] - nodes[i]).norm());
    }
    if (min_pair == 0.0) throw ParameterError("coincident nodes");
    PointSetQuality qlt;
    qlt.separation = 0.5 * min_pair;
    for (const auto& z : probes) qlt.fill_estimate = std::max(qlt.fill_estimate, (nodes[index.nearest(z)] - z).norm());
    qlt.ratio = qlt.fill_estimate / qlt.separation;
    return qlt;
}

/// Axis-aligned probe lattice over the bounding box, restricted to the interior.
template <int Dim>
PointList<Dim> interior_probe_grid(const DomainGeometry<Dim>& geometry, double spacing)
{
    const auto& box = geometry.bounding_box();
    std::array<long, Dim> count, k;
    for (int a = 0; a < Dim; ++a) count[a] = std::max(1L, static_cast<long>(std::ceil(box.extent()[a] / spacing)));
    k.fill(0);
    PointList<Dim> out;
    for (;;) {
        Point<Dim> p;
        for (int a = 0; a < Dim; ++a) p[a] = box.lo[a] + box.extent()[a] * static_cast<double>(k[a]) / count[a];
        if (geometry.classify(p) != Location::Exterior) out.push_back(p);
        int a = Dim - 1;
        while (a >= 0 && ++k[a] > count[a]) k[a--] = 0;
        if (a < 0) break;
    }
    return out;
}

} // namespace ufrbf

#endif // UFRBF_POINTSETS_HPP
