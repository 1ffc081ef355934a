#ifndef UFRBF_MANUFACTURED_HPP
#define UFRBF_MANUFACTURED_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ufrbf/assembly.hpp"

namespace ufrbf {

/// Analytic solution with closed-form gradient and Laplacian.
template <int Dim>
struct ManufacturedSolution
{
    std::string name;
    std::function<double(const Point<Dim>&)> value;
    std::function<Point<Dim>(const Point<Dim>&)> gradient;
    std::function<double(const Point<Dim>&)> laplacian;

    /// Data for Delta u = f2, u = f0, grad u . n = f1.
    PdeData<Dim> pde_data() const
    {
        return {laplacian, value, [g = gradient](const Point<Dim>& p, const Point<Dim>& n) { return g(p).dot(n); }};
    }
};

/// Franke's function: four Gaussian bumps.
inline ManufacturedSolution<2> franke()
{
    struct Term { double a, ax, ay, cx, cy; };
    static constexpr std::array<Term, 4> terms{{
        {0.75, 0.25, 0.25, 2.0, 2.0},
        {0.75, 1.0 / 49.0, 0.1, -1.0, -1.0},
        {0.5, 0.25, 0.25, 7.0, 3.0},
        {-0.2, 1.0, 1.0, 4.0, 7.0},
    }};
    // Each term is a exp(-Q) with Q = ax (9x - cx)^2 + ay (9y - cy)^2.
    auto value = [](const Point<2>& p) {
        double v = 0.0;
        for (const auto& t : terms) {
            const double dx = 9.0 * p.x() - t.cx, dy = 9.0 * p.y() - t.cy;
            v += t.a * std::exp(-(t.ax * dx * dx + t.ay * dy * dy));
        }
        return v;
    };
    auto gradient = [](const Point<2>& p) {
        Point<2> g = Point<2>::Zero();
        for (const auto& t : terms) {
            const double dx = 9.0 * p.x() - t.cx, dy = 9.0 * p.y() - t.cy;
            const double e = t.a * std::exp(-(t.ax * dx * dx + t.ay * dy * dy));
            g.x() -= 18.0 * t.ax * dx * e;
            g.y() -= 18.0 * t.ay * dy * e;
        }
        return g;
    };
    auto laplacian = [](const Point<2>& p) {
        double l = 0.0;
        for (const auto& t : terms) {
            const double dx = 9.0 * p.x() - t.cx, dy = 9.0 * p.y() - t.cy;
            const double e = t.a * std::exp(-(t.ax * dx * dx + t.ay * dy * dy));
            const double qx = 18.0 * t.ax * dx, qy = 18.0 * t.ay * dy;
            l += (qx * qx - 162.0 * t.ax + qy * qy - 162.0 * t.ay) * e;
        }
        return l;
    };
    return {"franke", value, gradient, laplacian};
}

/// Truncated series sum_{k=0..5} exp(-sqrt(2^k)) (cos 2^k x + cos 2^k y).
inline ManufacturedSolution<2> truncated_nonanalytic()
{
    auto coef = [](int k) { return std::exp(-std::sqrt(std::ldexp(1.0, k))); };
    auto value = [coef](const Point<2>& p) {
        double v = 0.0;
        for (int k = 0; k <= 5; ++k) {
            const double f = std::ldexp(1.0, k);
            v += coef(k) * (std::cos(f * p.x()) + std::cos(f * p.y()));
        }
        return v;
    };
    auto gradient = [coef](const Point<2>& p) {
        Point<2> g = Point<2>::Zero();
        for (int k = 0; k <= 5; ++k) {
            const double f = std::ldexp(1.0, k);
            g.x() -= coef(k) * f * std::sin(f * p.x());
            g.y() -= coef(k) * f * std::sin(f * p.y());
        }
        return g;
    };
    auto laplacian = [coef](const Point<2>& p) {
        double l = 0.0;
        for (int k = 0; k <= 5; ++k) {
            const double f = std::ldexp(1.0, k);
            l -= coef(k) * f * f * (std::cos(f * p.x()) + std::cos(f * p.y()));
        }
        return l;
    };
    return {"nonanalytic", value, gradient, laplacian};
}

/// u3 = sin(3 pi y^2 + 4.5 pi x) - cos(4 pi y - 3 pi x^2).
inline ManufacturedSolution<2> sprocket_u3()
{
    constexpr double pi = std::numbers::pi;
    auto value = [](const Point<2>& p) {
        const double x = p.x(), y = p.y();
        return std::sin(3 * pi * y * y + 4.5 * pi * x) - std::cos(4 * pi * y - 3 * pi * x * x);
    };
    auto gradient = [](const Point<2>& p) {
        const double x = p.x(), y = p.y();
        const double a = 3 * pi * y * y + 4.5 * pi * x, b = 4 * pi * y - 3 * pi * x * x;
        return Point<2>(std::cos(a) * 4.5 * pi + std::sin(b) * (-6 * pi * x),
                        std::cos(a) * 6 * pi * y + std::sin(b) * 4 * pi);
    };
    auto laplacian = [](const Point<2>& p) {
        const double x = p.x(), y = p.y();
        const double a = 3 * pi * y * y + 4.5 * pi * x, b = 4 * pi * y - 3 * pi * x * x;
        const double grad_a2 = 20.25 * pi * pi + 36 * pi * pi * y * y;
        const double grad_b2 = 36 * pi * pi * x * x + 16 * pi * pi;
        return -std::sin(a) * grad_a2 + std::cos(a) * 6 * pi + std::cos(b) * grad_b2 + std::sin(b) * (-6 * pi);
    };
    return {"u3", value, gradient, laplacian};
}

/// u4 = sin(k pi x y z); k = 6 is the reference frequency.
inline ManufacturedSolution<3> trig3d_u4(double k = 6.0)
{
    const double w = k * std::numbers::pi;
    auto value = [w](const Point<3>& p) { return std::sin(w * p.x() * p.y() * p.z()); };
    auto gradient = [w](const Point<3>& p) {
        const double c = std::cos(w * p.x() * p.y() * p.z());
        return Point<3>(c * w * p.y() * p.z(), c * w * p.x() * p.z(), c * w * p.x() * p.y());
    };
    auto laplacian = [w](const Point<3>& p) {
        const Point<3> g(w * p.y() * p.z(), w * p.x() * p.z(), w * p.x() * p.y());
        return -std::sin(w * p.x() * p.y() * p.z()) * g.squaredNorm();
    };
    return {"u4", value, gradient, laplacian};
}

template <int Dim>
struct PolynomialTerm
{
    std::array<int, Dim> exponents{};
    double coefficient = 0.0;
};

/// Sum of monomials; exact in any stencil trial space of sufficient degree.
template <int Dim>
ManufacturedSolution<Dim> polynomial_solution(std::vector<PolynomialTerm<Dim>> terms, std::string name = "polynomial")
{
    // prod_a x_a^{e_a}
    auto mono = [](const Point<Dim>& p, std::array<int, Dim> e) {
        double v = 1.0;
        for (int a = 0; a < Dim; ++a) v *= std::pow(p[a], e[a]);
        return v;
    };
    auto value = [terms, mono](const Point<Dim>& p) {
        double v = 0.0;
        for (const auto& t : terms) v += t.coefficient * mono(p, t.exponents);
        return v;
    };
    auto gradient = [terms, mono](const Point<Dim>& p) {
        Point<Dim> g = Point<Dim>::Zero();
        for (const auto& t : terms)
            for (int a = 0; a < Dim; ++a) {
                if (t.exponents[a] == 0) continue;
                auto e = t.exponents;
                e[a] -= 1;
                g[a] += t.coefficient * t.exponents[a] * mono(p, e);
            }
        return g;
    };
    auto laplacian = [terms, mono](const Point<Dim>& p) {
        double l = 0.0;
        for (const auto& t : terms)
            for (int a = 0; a < Dim; ++a) {
                if (t.exponents[a] < 2) continue;
                auto e = t.exponents;
                e[a] -= 2;
                l += t.coefficient * t.exponents[a] * (t.exponents[a] - 1) * mono(p, e);
            }
        return l;
    };
    return {std::move(name), value, gradient, laplacian};
}

/// Polynomial with every monomial of total degree <= degree and coefficients
/// drawn uniformly from [-1, 1]; the constant term is shifted by 2 to keep
/// relative error norms well scaled.
template <int Dim>
ManufacturedSolution<Dim> random_polynomial(int degree, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<PolynomialTerm<Dim>> terms;
    for (const auto& e : monomial_exponents<Dim>(degree)) terms.push_back({e, coef(rng)});
    terms.front().coefficient += 2.0;
    return polynomial_solution<Dim>(std::move(terms), "random_polynomial");
}

} // namespace ufrbf

#endif // UFRBF_MANUFACTURED_HPP
