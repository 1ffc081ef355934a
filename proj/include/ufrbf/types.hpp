#ifndef UFRBF_TYPES_HPP
#define UFRBF_TYPES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <string>
#include <thread>
#include <vector>

#include "ufrbf/error.hpp"

namespace ufrbf {

template <int Dim>
using Point = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using PointList = std::vector<Point<Dim>>;

using Index = std::ptrdiff_t;

enum class BcType { Dirichlet, Neumann };

inline const char* to_string(BcType t) { return t == BcType::Dirichlet ? "D" : "N"; }

inline long long binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Number of monomials of total degree <= degree in `dim` variables.
inline int monomial_count(int degree, int dim) { return static_cast<int>(binomial(degree + dim, dim)); }

/// Stencil size n = 2 binom(p + d, d).
inline int stencil_size(int degree, int dim) { return 2 * monomial_count(degree, dim); }

/// Volume of the unit ball in 1, 2, 3 dimensions.
inline double unit_ball_volume(int dim)
{
    constexpr double pi = 3.14159265358979323846;
    switch (dim) {
    case 1: return 2.0;
    case 2: return pi;
    default: return 4.0 * pi / 3.0;
    }
}

/// Runs body(i) for i in [0, count) over `threads` workers with static
/// contiguous chunks. Each index is visited exactly once; output order is
/// fixed by index, so results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body)
{
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, count));
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = w * chunk;
                const std::size_t hi = std::min(count, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace ufrbf

#endif // UFRBF_TYPES_HPP
