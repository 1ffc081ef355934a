#ifndef UFRBF_GEOMETRY_HPP
#define UFRBF_GEOMETRY_HPP

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ufrbf/types.hpp"

namespace ufrbf {

enum class Location { Interior, Boundary, Exterior };

/// Axis-aligned box [lo, hi].
template <int Dim>
struct Box
{
    Point<Dim> lo;
    Point<Dim> hi;

    Point<Dim> center() const { return 0.5 * (lo + hi); }
    Point<Dim> extent() const { return hi - lo; }

    bool contains(const Point<Dim>& p, double tol = 0.0) const
    {
        return ((p - lo).array() >= -tol).all() && ((hi - p).array() >= -tol).all();
    }

    Box inflated(double margin) const
    {
        return {(lo.array() - margin).matrix(), (hi.array() + margin).matrix()};
    }
};

/// Neumann marker on the first boundary parameter. A parameter value t is
/// Neumann iff it lies in some half-open interval [a, b). Empty means
/// Dirichlet everywhere.
struct BcSegmentation
{
    std::vector<std::pair<double, double>> neumann_intervals;

    BcType label(double t) const
    {
        for (const auto& [a, b] : neumann_intervals)
            if (t >= a && t < b) return BcType::Neumann;
        return BcType::Dirichlet;
    }
};

template <int Dim>
struct BoundarySample
{
    Point<Dim> point;
    Point<Dim> normal;
    BcType label = BcType::Dirichlet;
    int component = 0;
};

/// One connected piece of the boundary. Curves (Dim = 2) take one parameter,
/// surfaces (Dim = 3) two, and the two end points of an interval (Dim = 1)
/// are indexed by a single parameter in {0, 1}.
template <int Dim>
struct BoundaryComponent
{
    static constexpr int ParamDim = Dim > 1 ? Dim - 1 : 1;
    using Param = Eigen::Matrix<double, ParamDim, 1>;

    std::function<Point<Dim>(const Param&)> position;
    std::function<Point<Dim>(const Param&)> normal;
    /// Parameters of a quasi-uniform sampling with the given spacing.
    std::function<std::vector<Param>(double)> sampler;
    BcSegmentation bc;
    bool closed = true;

    BcType label(const Param& t) const { return bc.label(t[0]); }
};

/// Implicitly described domain: a level function (negative inside) plus an
/// explicit parametrized boundary used for sampling and normals.
template <int Dim>
class DomainGeometry
{
public:
    using Level = std::function<double(const Point<Dim>&)>;

    DomainGeometry(std::string name, Box<Dim> box, Level level, std::vector<BoundaryComponent<Dim>> components)
        : name_(std::move(name)), box_(box), level_(std::move(level)), components_(std::move(components))
    {
        if (components_.empty()) throw ParameterError("geometry '" + name_ + "' has no boundary components");
    }

    static constexpr int dimension = Dim;

    const std::string& name() const { return name_; }
    const Box<Dim>& bounding_box() const { return box_; }
    const std::vector<BoundaryComponent<Dim>>& components() const { return components_; }

    double diameter() const { return box_.extent().norm(); }
    /// tau_geom: floating-point guard band around the boundary.
    double tolerance() const { return 1e-10 * diameter(); }

    double level(const Point<Dim>& p) const { return level_(p); }

    Location classify(const Point<Dim>& p) const
    {
        const double v = level_(p);
        const double tol = tolerance();
        if (v < -tol) return Location::Interior;
        if (v <= tol) return Location::Boundary;
        return Location::Exterior;
    }

    bool is_interior(const Point<Dim>& p) const { return classify(p) == Location::Interior; }

    /// Replaces the Dirichlet/Neumann split of one component.
    DomainGeometry with_bc(int component, BcSegmentation bc) const
    {
        if (component < 0 || component >= static_cast<int>(components_.size()))
            throw ParameterError("geometry '" + name_ + "': no boundary component " + std::to_string(component));
        DomainGeometry g = *this;
        g.components_[component].bc = std::move(bc);
        return g;
    }

    /// Boundary points with outward unit normals and BC labels, every
    /// component covered with roughly the requested arc-length spacing.
    std::vector<BoundarySample<Dim>> sample_boundary(double spacing) const
    {
        if (!(spacing > 0.0)) throw ParameterError("sample_boundary: spacing must be positive");
        std::vector<BoundarySample<Dim>> out;
        for (int c = 0; c < static_cast<int>(components_.size()); ++c) {
            const auto& comp = components_[c];
            for (const auto& t : comp.sampler(spacing))
                out.push_back({comp.position(t), comp.normal(t), comp.label(t), c});
        }
        return out;
    }

private:
    std::string name_;
    Box<Dim> box_;
    Level level_;
    std::vector<BoundaryComponent<Dim>> components_;
};

namespace detail {

/// Arc-length-uniform parameters for a closed or open curve t in [t0, t1].
/// Cumulative arc length is tabulated with adaptive Gauss-Kronrod on
/// `segments` sub-intervals and inverted by safeguarded Newton steps.
inline std::vector<double> arc_length_parameters(const std::function<double(double)>& speed, double t0, double t1,
                                                 double spacing, bool closed)
{
    using boost::math::quadrature::gauss_kronrod;
    constexpr int segments = 256;
    const double dt = (t1 - t0) / segments;
    std::vector<double> cumulative(segments + 1, 0.0);
    for (int s = 0; s < segments; ++s) {
        const double a = t0 + s * dt;
        cumulative[s + 1] = cumulative[s] + gauss_kronrod<double, 15>::integrate(speed, a, a + dt, 5, 1e-13);
    }
    const double length = cumulative.back();
    const int min_points = closed ? 4 : 2;
    int count = std::max(min_points, static_cast<int>(std::lround(length / spacing)));
    if (!closed) count = std::max(min_points, count + 1);
    const double step = closed ? length / count : length / (count - 1);

    std::vector<double> params;
    params.reserve(count);
    for (int k = 0; k < count; ++k) {
        const double target = std::min(length, k * step);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        int seg = std::clamp(static_cast<int>(it - cumulative.begin()) - 1, 0, segments - 1);
        const double a = t0 + seg * dt;
        const double b = a + dt;
        double lo = a, hi = b;
        double t = a + dt * (target - cumulative[seg]) / std::max(cumulative[seg + 1] - cumulative[seg], 1e-300);
        for (int iter = 0; iter < 50; ++iter) {
            const double s = cumulative[seg] + gauss_kronrod<double, 15>::integrate(speed, a, t, 5, 1e-14);
            const double f = s - target;
            if (f > 0) hi = t;
            else lo = t;
            if (std::abs(f) <= 1e-14 * std::max(1.0, length)) break;
            double next = t - f / std::max(speed(t), 1e-300);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            t = next;
        }
        params.push_back(t);
    }
    return params;
}

/// Closed planar curve component from a position map and its derivative over
/// one period [0, period). Normal = tangent rotated clockwise, which is
/// outward for counter-clockwise traversal (set `outward_left` for holes
/// traversed counter-clockwise).
inline BoundaryComponent<2> closed_curve(std::function<Point<2>(double)> pos, std::function<Point<2>(double)> deriv,
                                         double period, bool outward_left = false)
{
    using Comp = BoundaryComponent<2>;
    Comp c;
    c.closed = true;
    c.position = [pos](const Comp::Param& t) { return pos(t[0]); };
    c.normal = [deriv, outward_left](const Comp::Param& t) {
        const Point<2> d = deriv(t[0]);
        Point<2> n(d.y(), -d.x());
        if (outward_left) n = -n;
        return Point<2>(n / n.norm());
    };
    c.sampler = [deriv, period](double spacing) {
        auto speed = [deriv](double t) { return deriv(t).norm(); };
        std::vector<Comp::Param> out;
        for (double t : arc_length_parameters(speed, 0.0, period, spacing, true)) out.push_back(Comp::Param(t));
        return out;
    };
    return c;
}

/// Central finite-difference derivative for curves without an analytic one.
inline std::function<Point<2>(double)> fd_derivative(std::function<Point<2>(double)> pos, double step = 1e-6)
{
    return [pos, step](double t) { return Point<2>((pos(t + step) - pos(t - step)) / (2.0 * step)); };
}

} // namespace detail

// ---------------------------------------------------------------------------
// Named geometries
// ---------------------------------------------------------------------------

/// Radius of the butterfly boundary at polar angle theta.
inline double butterfly_radius(double theta)
{
    constexpr double pi = std::numbers::pi;
    return 0.25 * (2.0 + std::sin(2.0 * theta) - 0.01 * std::cos(5.0 * theta - pi / 2.0)
                   + 0.63 * std::sin(6.0 * theta - 0.1));
}

inline double butterfly_radius_derivative(double theta)
{
    constexpr double pi = std::numbers::pi;
    return 0.25 * (2.0 * std::cos(2.0 * theta) + 0.05 * std::sin(5.0 * theta - pi / 2.0)
                   + 3.78 * std::cos(6.0 * theta - 0.1));
}

/// Star-shaped domain bounded by a polar curve r(theta); a point is inside
/// iff its radius is below r at its angle.
inline DomainGeometry<2> polar_domain(std::string name, std::function<double(double)> r,
                                      std::function<double(double)> dr)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    auto pos = [r](double t) { return Point<2>(r(t) * std::cos(t), r(t) * std::sin(t)); };
    if (!dr) {
        dr = [r](double t) { return (r(t + 1e-6) - r(t - 1e-6)) / 2e-6; };
    }
    auto deriv = [r, dr](double t) {
        const double c = std::cos(t), s = std::sin(t);
        return Point<2>(dr(t) * c - r(t) * s, dr(t) * s + r(t) * c);
    };
    double rmax = 0.0;
    for (int k = 0; k < 4096; ++k) rmax = std::max(rmax, r(two_pi * k / 4096.0));
    const double pad = 0.02 * rmax;
    Box<2> box{Point<2>::Constant(-rmax - pad), Point<2>::Constant(rmax + pad)};
    auto level = [r](const Point<2>& p) {
        const double rp = p.norm();
        double theta = std::atan2(p.y(), p.x());
        if (theta < 0) theta += two_pi;
        return rp - r(theta);
    };
    return DomainGeometry<2>(std::move(name), box, level, {detail::closed_curve(pos, deriv, two_pi)});
}

inline DomainGeometry<2> butterfly_domain()
{
    return polar_domain("butterfly", butterfly_radius, butterfly_radius_derivative);
}

inline DomainGeometry<2> disk_domain(const Point<2>& center, double radius)
{
    if (!(radius > 0.0)) throw ParameterError("disk: radius must be positive");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    auto pos = [center, radius](double t) { return Point<2>(center + radius * Point<2>(std::cos(t), std::sin(t))); };
    auto deriv = [radius](double t) { return Point<2>(radius * Point<2>(-std::sin(t), std::cos(t))); };
    Box<2> box{(center.array() - 1.02 * radius).matrix(), (center.array() + 1.02 * radius).matrix()};
    auto level = [center, radius](const Point<2>& p) { return (p - center).norm() - radius; };
    return DomainGeometry<2>("disk", box, level, {detail::closed_curve(pos, deriv, two_pi)});
}

/// Removes disjoint holes from `outer`. Hole boundaries keep their own
/// parametrization but their normals are flipped so they point out of the
/// resulting domain (into the hole).
template <int Dim>
DomainGeometry<Dim> subtract_holes(const DomainGeometry<Dim>& outer, const std::vector<DomainGeometry<Dim>>& holes,
                                   std::string name = {})
{
    auto comps = outer.components();
    std::vector<std::function<double(const Point<Dim>&)>> hole_levels;
    for (const auto& h : holes) {
        for (auto c : h.components()) {
            auto n = c.normal;
            c.normal = [n](const typename BoundaryComponent<Dim>::Param& t) { return Point<Dim>(-n(t)); };
            comps.push_back(std::move(c));
        }
        hole_levels.push_back([h](const Point<Dim>& p) { return h.level(p); });
    }
    auto level = [outer, hole_levels](const Point<Dim>& p) {
        double v = outer.level(p);
        for (const auto& hl : hole_levels) v = std::max(v, -hl(p));
        return v;
    };
    if (name.empty()) name = outer.name() + "_with_holes";
    return DomainGeometry<Dim>(std::move(name), outer.bounding_box(), level, std::move(comps));
}

inline DomainGeometry<2> annulus_domain(const Point<2>& center, double r_in, double r_out)
{
    if (!(r_in > 0.0) || !(r_in < r_out)) throw ParameterError("annulus: need 0 < r_in < r_out");
    return subtract_holes<2>(disk_domain(center, r_out), {disk_domain(center, r_in)}, "annulus");
}

/// Butterfly with two circular holes; a multiply connected test domain.
inline DomainGeometry<2> butterfly_with_holes()
{
    return subtract_holes<2>(butterfly_domain(),
                             {disk_domain(Point<2>(0.30, 0.28), 0.10), disk_domain(Point<2>(-0.32, -0.26), 0.08)},
                             "butterfly_holes");
}

template <int Dim>
DomainGeometry<Dim> box_domain(const Point<Dim>& lo, const Point<Dim>& hi)
{
    static_assert(Dim >= 1 && Dim <= 3);
    if (!((hi - lo).array() > 0.0).all()) throw ParameterError("box: need lo < hi componentwise");
    using Comp = BoundaryComponent<Dim>;
    using Param = typename Comp::Param;
    auto level = [lo, hi](const Point<Dim>& p) { return (lo - p).cwiseMax(p - hi).maxCoeff(); };
    const Point<Dim> pad = 0.01 * (hi - lo);
    Box<Dim> box{lo - pad, hi + pad};
    std::vector<Comp> comps;

    if constexpr (Dim == 1) {
        Comp c;
        c.closed = false;
        c.position = [lo, hi](const Param& t) { return t[0] < 0.5 ? lo : hi; };
        c.normal = [](const Param& t) { return Point<1>(t[0] < 0.5 ? -1.0 : 1.0); };
        c.sampler = [](double) { return std::vector<Param>{Param(0.0), Param(1.0)}; };
        comps.push_back(std::move(c));
    } else if constexpr (Dim == 2) {
        // Counter-clockwise perimeter parametrized by arc length from lo.
        const double w = hi.x() - lo.x(), h = hi.y() - lo.y();
        const double perimeter = 2.0 * (w + h);
        auto pos = [lo, w, h, perimeter](double t) {
            t = std::fmod(std::fmod(t, perimeter) + perimeter, perimeter);
            if (t < w) return Point<2>(lo.x() + t, lo.y());
            if (t < w + h) return Point<2>(lo.x() + w, lo.y() + (t - w));
            if (t < 2 * w + h) return Point<2>(lo.x() + w - (t - w - h), lo.y() + h);
            return Point<2>(lo.x(), lo.y() + h - (t - 2 * w - h));
        };
        auto deriv = [w, h, perimeter](double t) {
            t = std::fmod(std::fmod(t, perimeter) + perimeter, perimeter);
            if (t < w) return Point<2>(1, 0);
            if (t < w + h) return Point<2>(0, 1);
            if (t < 2 * w + h) return Point<2>(-1, 0);
            return Point<2>(0, -1);
        };
        Comp c;
        c.closed = true;
        c.position = [pos](const Param& t) { return pos(t[0]); };
        c.normal = [deriv](const Param& t) {
            const Point<2> d = deriv(t[0]);
            return Point<2>(d.y(), -d.x());
        };
        // Edge midpoint sampling keeps corners, where the normal jumps, out of the set.
        c.sampler = [w, h](double spacing) {
            const double len[4] = {w, h, w, h};
            std::vector<Param> out;
            double start = 0.0;
            for (double l : len) {
                const int count = std::max(1, static_cast<int>(std::lround(l / spacing)));
                for (int k = 0; k < count; ++k) out.push_back(Param(start + l * (k + 0.5) / count));
                start += l;
            }
            return out;
        };
        comps.push_back(std::move(c));
    } else {
        // Six faces; face f = 2*axis + side, parameters (u, v) in [0,1]^2 over
        // the two remaining axes. Param[0] = f + u so BC intervals can select faces.
        for (int axis = 0; axis < 3; ++axis) {
            for (int side = 0; side < 2; ++side) {
                const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
                const int face = 2 * axis + side;
                Comp c;
                c.closed = false;
                c.position = [=](const Param& t) {
                    Point<3> p;
                    p[axis] = side == 0 ? lo[axis] : hi[axis];
                    p[a1] = lo[a1] + (t[0] - face) * (hi[a1] - lo[a1]);
                    p[a2] = lo[a2] + t[1] * (hi[a2] - lo[a2]);
                    return p;
                };
                c.normal = [=](const Param&) {
                    Point<3> n = Point<3>::Zero();
                    n[axis] = side == 0 ? -1.0 : 1.0;
                    return n;
                };
                c.sampler = [=](double spacing) {
                    const int k1 = std::max(2, static_cast<int>(std::lround((hi[a1] - lo[a1]) / spacing)));
                    const int k2 = std::max(2, static_cast<int>(std::lround((hi[a2] - lo[a2]) / spacing)));
                    std::vector<Param> out;
                    for (int i = 0; i < k1; ++i)
                        for (int j = 0; j < k2; ++j) out.push_back(Param(face + (i + 0.5) / k1, (j + 0.5) / k2));
                    return out;
                };
                comps.push_back(std::move(c));
            }
        }
    }
    return DomainGeometry<Dim>("box", box, level, std::move(comps));
}

/// Ball in 3D. The surface is sampled with a Fibonacci lattice; the
/// parameters are (polar angle, azimuth).
inline DomainGeometry<3> ball_domain_3d(const Point<3>& center, double radius)
{
    if (!(radius > 0.0)) throw ParameterError("ball: radius must be positive");
    using Comp = BoundaryComponent<3>;
    using Param = Comp::Param;
    constexpr double pi = std::numbers::pi;
    auto dir = [](const Param& t) {
        return Point<3>(std::sin(t[0]) * std::cos(t[1]), std::sin(t[0]) * std::sin(t[1]), std::cos(t[0]));
    };
    Comp c;
    c.closed = true;
    c.position = [center, radius, dir](const Param& t) { return Point<3>(center + radius * dir(t)); };
    c.normal = [dir](const Param& t) { return dir(t); };
    c.sampler = [radius](double spacing) {
        const double area = 4.0 * pi * radius * radius;
        const int count = std::max(4, static_cast<int>(std::lround(area / (spacing * spacing))));
        const double golden = pi * (3.0 - std::sqrt(5.0));
        std::vector<Param> out;
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double phi = std::fmod(golden * k, 2.0 * pi);
            out.push_back(Param(std::acos(z), phi));
        }
        return out;
    };
    Box<3> box{(center.array() - 1.02 * radius).matrix(), (center.array() + 1.02 * radius).matrix()};
    auto level = [center, radius](const Point<3>& p) { return (p - center).norm() - radius; };
    return DomainGeometry<3>("ball", box, level, {std::move(c)});
}

} // namespace ufrbf

#endif // UFRBF_GEOMETRY_HPP
