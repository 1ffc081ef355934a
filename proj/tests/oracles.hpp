#ifndef UFRBF_TESTS_ORACLES_HPP
#define UFRBF_TESTS_ORACLES_HPP

// Reference computations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <Eigen/SparseCore>

namespace oracle {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;

/// Indices of the k nearest points by linear scan; ties go to the lower index.
template <int Dim>
std::vector<long> knn(const std::vector<Vec<Dim>>& pts, const Vec<Dim>& q, std::size_t k)
{
    std::vector<long> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0L);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](long a, long b) { return (pts[a] - q).squaredNorm() < (pts[b] - q).squaredNorm(); });
    idx.resize(std::min(k, idx.size()));
    return idx;
}

template <int Dim>
long nearest(const std::vector<Vec<Dim>>& pts, const Vec<Dim>& q)
{
    return knn<Dim>(pts, q, 1).front();
}

/// Central difference gradient.
template <int Dim>
Vec<Dim> fd_gradient(const std::function<double(const Vec<Dim>&)>& f, const Vec<Dim>& x, double step)
{
    Vec<Dim> g;
    for (int a = 0; a < Dim; ++a) {
        Vec<Dim> e = Vec<Dim>::Zero();
        e[a] = step;
        g[a] = (f(x + e) - f(x - e)) / (2.0 * step);
    }
    return g;
}

/// Fourth-order central difference Laplacian.
template <int Dim>
double fd_laplacian(const std::function<double(const Vec<Dim>&)>& f, const Vec<Dim>& x, double step)
{
    double l = 0.0;
    for (int a = 0; a < Dim; ++a) {
        Vec<Dim> e = Vec<Dim>::Zero();
        e[a] = step;
        l += (-f(x + 2 * e) + 16 * f(x + e) - 30 * f(x) + 16 * f(x - e) - f(x - 2 * e)) / (12.0 * step * step);
    }
    return l;
}

/// All singular values by one-sided Jacobi, descending.
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& a)
{
    return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
}

/// Number of points of the lattice {c + R(t) s k} inside [lo, hi]^2, by
/// exhaustive enumeration over a generous index range.
inline long lattice_count_2d(const Vec<2>& lo, const Vec<2>& hi, double s, double t)
{
    const Vec<2> c = 0.5 * (lo + hi);
    const long r = static_cast<long>(2.0 * (hi - lo).norm() / s) + 2;
    const double ct = std::cos(t), st = std::sin(t), tol = 1e-12 * s;
    long n = 0;
    for (long i = -r; i <= r; ++i)
        for (long j = -r; j <= r; ++j) {
            const Vec<2> p = c + s * Vec<2>(ct * i - st * j, st * i + ct * j);
            if (p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol && p.y() <= hi.y() + tol)
                ++n;
        }
    return n;
}

/// Winding number of a closed polygon around q.
inline int winding_number(const std::vector<Vec<2>>& poly, const Vec<2>& q)
{
    int w = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec<2>& a = poly[i];
        const Vec<2>& b = poly[(i + 1) % poly.size()];
        const double cross = (b.x() - a.x()) * (q.y() - a.y()) - (q.x() - a.x()) * (b.y() - a.y());
        if (a.y() <= q.y()) {
            if (b.y() > q.y() && cross > 0) ++w;
        } else if (b.y() <= q.y() && cross < 0) {
            --w;
        }
    }
    return w;
}

/// The butterfly radius written out from the polar formula.
inline double butterfly_r(double t)
{
    return 0.25 * (2 + std::sin(2 * t) - 0.01 * std::cos(5 * t - std::numbers::pi / 2) + 0.63 * std::sin(6 * t - 0.1));
}

inline double franke(const Vec<2>& p)
{
    const double x = 9 * p.x(), y = 9 * p.y();
    return 0.75 * std::exp(-0.25 * ((x - 2) * (x - 2) + (y - 2) * (y - 2)))
           + 0.75 * std::exp(-((x + 1) * (x + 1) / 49.0 + (y + 1) * (y + 1) / 10.0))
           + 0.5 * std::exp(-0.25 * ((x - 7) * (x - 7) + (y - 3) * (y - 3)))
           - 0.2 * std::exp(-((x - 4) * (x - 4) + (y - 7) * (y - 7)));
}

inline double u2(const Vec<2>& p)
{
    double v = 0;
    for (int k = 0; k <= 5; ++k) {
        const double f = std::pow(2.0, k);
        v += std::exp(-std::sqrt(f)) * (std::cos(f * p.x()) + std::cos(f * p.y()));
    }
    return v;
}

inline double u3(const Vec<2>& p)
{
    const double pi = std::numbers::pi;
    return std::sin(3 * pi * p.y() * p.y() + 4.5 * pi * p.x()) - std::cos(4 * pi * p.y() - 3 * pi * p.x() * p.x());
}

inline double u4(const Vec<3>& p, double k)
{
    return std::sin(k * std::numbers::pi * p.x() * p.y() * p.z());
}

/// Random sparse m x n matrix with roughly `per_row` entries per row.
inline Eigen::SparseMatrix<double, Eigen::RowMajor> random_sparse(int m, int n, int per_row, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> col(0, n - 1);
    std::normal_distribution<double> val;
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < per_row; ++k) t.emplace_back(i, col(rng), val(rng));
    // A scaled identity block keeps every column populated.
    for (int j = 0; j < n; ++j) t.emplace_back(j % m, j, 1.0);
    Eigen::SparseMatrix<double, Eigen::RowMajor> a(m, n);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

} // namespace oracle

#endif // UFRBF_TESTS_ORACLES_HPP
