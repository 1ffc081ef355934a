#ifndef UFRBF_STENCIL_HPP
#define UFRBF_STENCIL_HPP

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "ufrbf/spatial_index.hpp"
#include "ufrbf/types.hpp"

namespace ufrbf {

/// Linear operator applied to the local interpolant.
template <int Dim>
struct Operator
{
    enum class Kind { Eval, Laplacian, Gradient, NormalDerivative };

    Kind kind = Kind::Eval;
    int axis = 0;                                 // Gradient
    Point<Dim> direction = Point<Dim>::Zero();    // NormalDerivative

    static Operator eval() { return {}; }
    static Operator laplacian() { return {Kind::Laplacian}; }
    static Operator gradient(int axis) { return {Kind::Gradient, axis}; }
    static Operator normal_derivative(const Point<Dim>& n) { return {Kind::NormalDerivative, 0, n}; }
};

struct StencilConfig
{
    int degree = 2;   // p
    int dim = 2;      // d
    int size = 12;    // n = 2 binom(p + d, d)
    int monomials = 6;

    static StencilConfig make(int degree, int dim)
    {
        if (degree < 1) throw ParameterError("stencil: polynomial degree must be >= 1");
        if (dim < 1 || dim > 3) throw ParameterError("stencil: dimension must be 1, 2 or 3");
        return {degree, dim, stencil_size(degree, dim), monomial_count(degree, dim)};
    }
};

/// Exponents of all monomials with total degree <= degree, ordered by degree.
template <int Dim>
std::vector<std::array<int, Dim>> monomial_exponents(int degree)
{
    std::vector<std::array<int, Dim>> out;
    for (int total = 0; total <= degree; ++total) {
        std::array<int, Dim> e{};
        // Enumerate compositions of `total` into Dim parts, first axis descending.
        auto rec = [&](auto&& self, int axis, int left) -> void {
            if (axis == Dim - 1) {
                e[axis] = left;
                out.push_back(e);
                return;
            }
            for (int k = left; k >= 0; --k) {
                e[axis] = k;
                self(self, axis + 1, left - k);
            }
        };
        rec(rec, 0, total);
    }
    return out;
}

/// Local interpolation problem on n nearest nodes of one center:
/// the saddle matrix [A P; P^T 0] with A_jl = |x_j - x_l|^3 and monomials
/// in the shifted and scaled variable (x - center) / scale.
template <int Dim>
class Stencil
{
public:
    using Nodes = Eigen::Matrix<double, Dim, Eigen::Dynamic>;

    Stencil(Index center_index, std::vector<Index> neighbors, Nodes nodes, int degree, bool exact_inverse_norm = true)
        : center_index_(center_index), neighbors_(std::move(neighbors)), nodes_(std::move(nodes)),
          exponents_(monomial_exponents<Dim>(degree))
    {
        center_ = nodes_.col(0);
        scale_ = 0.0;
        for (Index j = 0; j < size(); ++j) scale_ = std::max(scale_, (nodes_.col(j) - center_).norm());
        if (!(scale_ > 0.0)) throw NumericalError("stencil", "degenerate stencil at center " + std::to_string(center_index));

        const Index n = size(), m = monomials();
        Eigen::MatrixXd saddle = Eigen::MatrixXd::Zero(n + m, n + m);
        for (Index j = 0; j < n; ++j) {
            for (Index l = 0; l < j; ++l) {
                const double r = (nodes_.col(j) - nodes_.col(l)).norm();
                saddle(j, l) = saddle(l, j) = r * r * r;
            }
            const Point<Dim> xi = (nodes_.col(j) - center_) / scale_;
            for (Index k = 0; k < m; ++k) saddle(j, n + k) = saddle(n + k, j) = monomial(xi, k);
        }
        lu_.compute(saddle);
        const double rc = lu_.rcond();
        if (!(rc > 1e-16) || !std::isfinite(rc))
            throw NumericalError("stencil", "singular local matrix at center " + std::to_string(center_index)
                                                + " (rcond = " + std::to_string(rc) + ")");
        norm_inf_ = saddle.cwiseAbs().rowwise().sum().maxCoeff();
        if (exact_inverse_norm) {
            inv_norm_inf_ = lu_.inverse().cwiseAbs().rowwise().sum().maxCoeff();
        } else {
            // rcond is the reciprocal 1-norm condition estimate; the matrix is
            // symmetric, so 1- and inf-norms coincide.
            inv_norm_inf_ = 1.0 / (rc * norm_inf_);
        }
        inv_norm_exact_ = exact_inverse_norm;
    }

    Index center_index() const { return center_index_; }
    const std::vector<Index>& neighbors() const { return neighbors_; }
    const Nodes& nodes() const { return nodes_; }
    const Point<Dim>& center() const { return center_; }
    double scale() const { return scale_; }
    Index size() const { return static_cast<Index>(neighbors_.size()); }
    Index monomials() const { return static_cast<Index>(exponents_.size()); }
    double inv_norm_inf() const { return inv_norm_inf_; }
    bool inv_norm_exact() const { return inv_norm_exact_; }
    double norm_inf() const { return norm_inf_; }
    const Eigen::PartialPivLU<Eigen::MatrixXd>& factorization() const { return lu_; }

    /// The row [L phi_1(z) .. L phi_n(z), L p_1(z) .. L p_m(z)].
    Eigen::VectorXd basis_row(const Point<Dim>& z, const Operator<Dim>& op) const
    {
        using Kind = typename Operator<Dim>::Kind;
        const Index n = size(), m = monomials();
        Eigen::VectorXd b(n + m);
        for (Index l = 0; l < n; ++l) {
            const Point<Dim> diff = z - nodes_.col(l);
            const double r = diff.norm();
            switch (op.kind) {
            case Kind::Eval: b[l] = r * r * r; break;
            case Kind::Laplacian: b[l] = 3.0 * (Dim + 1) * r; break;
            case Kind::Gradient: b[l] = 3.0 * r * diff[op.axis]; break;
            case Kind::NormalDerivative: b[l] = 3.0 * r * diff.dot(op.direction); break;
            }
        }
        const Point<Dim> xi = (z - center_) / scale_;
        for (Index k = 0; k < m; ++k) {
            const auto& e = exponents_[k];
            switch (op.kind) {
            case Kind::Eval: b[n + k] = monomial(xi, k); break;
            case Kind::Laplacian: {
                double v = 0.0;
                for (int a = 0; a < Dim; ++a)
                    if (e[a] >= 2) v += e[a] * (e[a] - 1) * power_except(xi, e, a, 2);
                b[n + k] = v / (scale_ * scale_);
                break;
            }
            case Kind::Gradient:
                b[n + k] = e[op.axis] >= 1 ? e[op.axis] * power_except(xi, e, op.axis, 1) / scale_ : 0.0;
                break;
            case Kind::NormalDerivative: {
                double v = 0.0;
                for (int a = 0; a < Dim; ++a)
                    if (e[a] >= 1) v += op.direction[a] * e[a] * power_except(xi, e, a, 1);
                b[n + k] = v / scale_;
                break;
            }
            }
        }
        return b;
    }

    /// Local weights w(z) = (b(z) A~^{-1})_{1:n}.
    Eigen::VectorXd weights(const Point<Dim>& z, const Operator<Dim>& op) const
    {
        // A~ is symmetric, so the transposed system is A~ x = b^T.
        return lu_.solve(basis_row(z, op)).head(size());
    }

    /// Weights for several points at once; column j belongs to points[j].
    Eigen::MatrixXd weights(const std::vector<Point<Dim>>& points, const std::vector<Operator<Dim>>& ops) const
    {
        Eigen::MatrixXd rhs(size() + monomials(), static_cast<Index>(points.size()));
        for (std::size_t j = 0; j < points.size(); ++j) rhs.col(j) = basis_row(points[j], ops[j]);
        return lu_.solve(rhs).topRows(size());
    }

private:
    double monomial(const Point<Dim>& xi, Index k) const
    {
        double v = 1.0;
        for (int a = 0; a < Dim; ++a)
            for (int i = 0; i < exponents_[k][a]; ++i) v *= xi[a];
        return v;
    }

    // prod_b xi_b^{e_b} with the exponent on `axis` lowered by `drop`.
    static double power_except(const Point<Dim>& xi, const std::array<int, Dim>& e, int axis, int drop)
    {
        double v = 1.0;
        for (int a = 0; a < Dim; ++a) {
            const int p = a == axis ? e[a] - drop : e[a];
            for (int i = 0; i < p; ++i) v *= xi[a];
        }
        return v;
    }

    Index center_index_;
    std::vector<Index> neighbors_;
    Nodes nodes_;
    std::vector<std::array<int, Dim>> exponents_;
    Point<Dim> center_;
    double scale_ = 0.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double norm_inf_ = 0.0;
    double inv_norm_inf_ = 0.0;
    bool inv_norm_exact_ = true;
};

/// Stencil on the n nearest nodes of node `center` (itself included).
template <int Dim>
Stencil<Dim> build_stencil(const SpatialIndex<Dim>& index, Index center, const StencilConfig& config,
                           bool exact_inverse_norm = true)
{
    if (static_cast<Index>(index.size()) < config.size)
        throw ParameterError("stencil: need at least n = " + std::to_string(config.size) + " nodes, have "
                             + std::to_string(index.size()));
    auto neighbors = index.knn(index.point(center), static_cast<std::size_t>(config.size));
    // The center leads; with coincident nodes knn may rank another index first.
    auto it = std::find(neighbors.begin(), neighbors.end(), center);
    if (it == neighbors.end()) throw NumericalError("stencil", "center missing from its own neighborhood");
    std::rotate(neighbors.begin(), it, it + 1);
    typename Stencil<Dim>::Nodes nodes(Dim, config.size);
    for (int j = 0; j < config.size; ++j) nodes.col(j) = index.point(neighbors[j]);
    return Stencil<Dim>(center, std::move(neighbors), std::move(nodes), config.degree, exact_inverse_norm);
}

/// Stencils indexed by center node. Only some centers may be built: a
/// discretization needs exactly the stencils selected by rho(y), and far
/// exterior nodes can have non-unisolvent neighborhoods that no row uses.
template <int Dim>
class StencilSet
{
public:
    StencilSet() = default;
    StencilSet(std::size_t node_count, int stencil_size) : slots_(node_count), size_(stencil_size) {}

    std::size_t node_count() const { return slots_.size(); }
    int stencil_size() const { return size_; }
    bool contains(Index i) const { return i >= 0 && i < static_cast<Index>(slots_.size()) && slots_[i].has_value(); }

    const Stencil<Dim>& operator[](Index i) const
    {
        if (!contains(i)) throw NumericalError("stencil", "no stencil built at center " + std::to_string(i));
        return *slots_[i];
    }

    Index built_count() const
    {
        return std::count_if(slots_.begin(), slots_.end(), [](const auto& s) { return s.has_value(); });
    }

    /// Built stencils in ascending center order.
    std::vector<const Stencil<Dim>*> built() const
    {
        std::vector<const Stencil<Dim>*> out;
        for (const auto& s : slots_)
            if (s) out.push_back(&*s);
        return out;
    }

    std::optional<Stencil<Dim>>& slot(Index i) { return slots_[i]; }

private:
    std::vector<std::optional<Stencil<Dim>>> slots_;
    int size_ = 0;
};

/// Stencils at the listed centers only.
template <int Dim>
StencilSet<Dim> build_stencils(const SpatialIndex<Dim>& index, const StencilConfig& config,
                               const std::vector<Index>& centers, int threads = 1, bool exact_inverse_norm = true)
{
    StencilSet<Dim> set(index.size(), config.size);
    parallel_for(centers.size(), threads, [&](std::size_t k) {
        set.slot(centers[k]).emplace(build_stencil(index, centers[k], config, exact_inverse_norm));
    });
    return set;
}

template <int Dim>
StencilSet<Dim> build_all_stencils(const SpatialIndex<Dim>& index, const StencilConfig& config, int threads = 1,
                                   bool exact_inverse_norm = true)
{
    std::vector<Index> all(index.size());
    std::iota(all.begin(), all.end(), Index{0});
    return build_stencils(index, config, all, threads, exact_inverse_norm);
}

/// Centers selected by rho(y) for at least one of the points, ascending.
template <int Dim>
std::vector<Index> selected_centers(const SpatialIndex<Dim>& index, const PointList<Dim>& points)
{
    std::vector<char> used(index.size(), 0);
    for (const auto& y : points) used[index.nearest(y)] = 1;
    std::vector<Index> out;
    for (std::size_t i = 0; i < used.size(); ++i)
        if (used[i]) out.push_back(static_cast<Index>(i));
    return out;
}

struct LebesgueEstimate
{
    double estimate = 0.0; // max_z |w(z)|_1 over the probes
    double bound = 0.0;    // sqrt(n) max_z |b(z)|_1 |A~^{-1}|_inf
};

template <int Dim>
LebesgueEstimate lebesgue_bound(const Stencil<Dim>& stencil, const std::vector<Point<Dim>>& probes)
{
    if (probes.empty()) throw ParameterError("lebesgue_bound: no probe points");
    LebesgueEstimate e;
    double max_b = 0.0;
    for (const auto& z : probes) {
        e.estimate = std::max(e.estimate, stencil.weights(z, Operator<Dim>::eval()).cwiseAbs().sum());
        max_b = std::max(max_b, stencil.basis_row(z, Operator<Dim>::eval()).cwiseAbs().sum());
    }
    e.bound = std::sqrt(static_cast<double>(stencil.size())) * max_b * stencil.inv_norm_inf();
    return e;
}

} // namespace ufrbf

#endif // UFRBF_STENCIL_HPP
