#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "stencil_checks.hpp"
#include "ufrbf/stencil.hpp"

using namespace ufrbf;
using Catch::Approx;

namespace {

/// Untilted lattice of count x count nodes, spacing h, lower corner at the origin.
PointList<2> lattice(int count, double h)
{
    PointList<2> pts;
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j) pts.emplace_back(h * i, h * j);
    return pts;
}

} // namespace

TEST_CASE("stencil sizes follow n = 2 binom(p + d, d)", "[stencil]")
{
    auto check = [](int p, int d, int n, int m) {
        const auto cfg = StencilConfig::make(p, d);
        CHECK(cfg.size == n);
        CHECK(cfg.monomials == m);
    };
    check(2, 2, 12, 6);
    check(4, 2, 30, 15);
    check(3, 3, 40, 20);

    const SpatialIndex<2> index(lattice(8, 0.1));
    const auto st = build_stencil(index, 27, StencilConfig::make(2, 2));
    CHECK(st.factorization().rows() == 18);
    CHECK(st.size() == 12);
    CHECK(st.monomials() == 6);
    CHECK(st.neighbors().front() == 27);

    CHECK_THROWS_AS(StencilConfig::make(0, 2), ParameterError);
    CHECK_THROWS_AS(build_stencil(SpatialIndex<2>(lattice(3, 0.1)), 0, StencilConfig::make(2, 2)), ParameterError);
}

TEST_CASE("neighbors are the n nearest nodes", "[stencil]")
{
    const auto pts = lattice(9, 0.1);
    const SpatialIndex<2> index(pts);
    const auto st = build_stencil(index, 40, StencilConfig::make(3, 2));
    auto want = oracle::knn<2>(pts, pts[40], 20);
    std::vector<Index> got = st.neighbors();
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(std::equal(got.begin(), got.end(), want.begin(), want.end()));
}

TEST_CASE("PHS basis rows match finite differences", "[stencil]")
{
    const SpatialIndex<2> index(lattice(8, 0.5));
    const auto st = build_stencil(index, 27, StencilConfig::make(2, 2));
    const Point<2> x0 = st.nodes().col(0);
    const Point<2> z = x0 + Point<2>(2.0, 0.0);
    const auto row = st.basis_row(z, Operator<2>::laplacian());
    CHECK(row[0] == Approx(18.0).epsilon(1e-14));

    std::function<double(const oracle::Vec<2>&)> phi = [&](const oracle::Vec<2>& p) {
        return std::pow((p - x0).norm(), 3);
    };
    CHECK(oracle::fd_laplacian<2>(phi, z, 1e-3) == Approx(row[0]).epsilon(1e-8));

    const Point<2> zg = x0 + Point<2>(0.3, -0.7);
    const auto g = oracle::fd_gradient<2>(phi, zg, 1e-6);
    CHECK(st.basis_row(zg, Operator<2>::gradient(0))[0] == Approx(g.x()).epsilon(1e-8));
    CHECK(st.basis_row(zg, Operator<2>::gradient(1))[0] == Approx(g.y()).epsilon(1e-8));

    CHECK(st.basis_row(x0, Operator<2>::laplacian())[0] == 0.0);
    CHECK(st.basis_row(x0, Operator<2>::gradient(0))[0] == 0.0);
}

TEST_CASE("eval weights are cardinal and reproduce constants", "[stencil]")
{
    const SpatialIndex<2> index(lattice(8, 0.1));
    const auto st = build_stencil(index, 27, StencilConfig::make(2, 2));
    for (Index j = 0; j < st.size(); ++j) {
        const auto w = st.weights(st.nodes().col(j), Operator<2>::eval());
        for (Index k = 0; k < st.size(); ++k) CHECK(w[k] == Approx(j == k ? 1.0 : 0.0).margin(1e-12));
    }
    const Point<2> z = st.center() + Point<2>(0.031, -0.017);
    CHECK(st.weights(z, Operator<2>::eval()).sum() == Approx(1.0).epsilon(1e-12));

    Eigen::VectorXd g(st.size());
    for (Index j = 0; j < st.size(); ++j) g[j] = st.nodes().col(j).squaredNorm();
    CHECK(st.weights(z, Operator<2>::laplacian()).dot(g) == Approx(4.0).epsilon(1e-8));
}

TEST_CASE("weight properties on random stencils", "[stencil]")
{
    for (int p = 2; p <= 6; ++p) {
        const auto rep = checks::stencil_weight_properties(p, 20, 20, 100 + p);
        for (const auto& [name, t] : rep) {
            INFO("p = " << p << ", " << name << ": " << t.passed << "/" << t.total << ", worst " << t.worst);
            CHECK(t.ok());
        }
    }
}

TEST_CASE("saddle matrix structure", "[stencil]")
{
    const auto pts = lattice(8, 0.1);
    const SpatialIndex<2> index(pts);
    const auto st = build_stencil(index, 27, StencilConfig::make(3, 2));
    const Eigen::MatrixXd a = st.factorization().reconstructedMatrix();
    const Index n = st.size();
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * a.cwiseAbs().maxCoeff());
    for (Index j = 0; j < n; ++j)
        for (Index l = 0; l < n; ++l)
            CHECK(a(j, l) == Approx(std::pow((st.nodes().col(j) - st.nodes().col(l)).norm(), 3)).margin(1e-15));
    CHECK(a.bottomRightCorner(st.monomials(), st.monomials()).cwiseAbs().maxCoeff() < 1e-15);

    const Eigen::MatrixXd inv = st.factorization().inverse();
    const double resid = (a * inv - Eigen::MatrixXd::Identity(a.rows(), a.cols())).cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(resid <= 1e-8 * st.norm_inf() * st.inv_norm_inf());
    CHECK(st.inv_norm_inf() == Approx(inv.cwiseAbs().rowwise().sum().maxCoeff()).epsilon(1e-12));

    const auto est = Stencil<2>(st.center_index(), st.neighbors(), st.nodes(), 3, false);
    CHECK_FALSE(est.inv_norm_exact());
    CHECK(est.inv_norm_inf() > 0.1 * st.inv_norm_inf());
}

TEST_CASE("Lebesgue estimate and bound", "[stencil]")
{
    const auto pts = lattice(10, 0.1);
    const SpatialIndex<2> index(pts);
    const auto cfg = StencilConfig::make(2, 2);
    const auto centered = build_stencil(index, 44, cfg);

    const auto at_node = lebesgue_bound(centered, {Point<2>(centered.nodes().col(3))});
    CHECK(at_node.estimate == Approx(1.0).epsilon(1e-12));

    std::vector<Point<2>> probes;
    for (int i = -5; i <= 5; ++i)
        for (int j = -5; j <= 5; ++j) probes.push_back(centered.center() + 0.02 * Point<2>(i, j));
    const auto lb = lebesgue_bound(centered, probes);
    CHECK(lb.estimate >= 1.0);
    CHECK(lb.estimate <= lb.bound);
    CHECK_THROWS_AS(lebesgue_bound(centered, {}), ParameterError);

    // One-sided stencil: the n nearest lattice nodes of a corner node.
    const auto skewed = build_stencil(index, 0, cfg);
    CHECK(skewed.inv_norm_inf() > centered.inv_norm_inf());
    CHECK(lebesgue_bound(skewed, {skewed.center()}).estimate <= lebesgue_bound(skewed, {skewed.center()}).bound);
}

TEST_CASE("degenerate stencils name their center", "[stencil]")
{
    Stencil<2>::Nodes line(2, 12);
    std::vector<Index> ids(12);
    for (int j = 0; j < 12; ++j) {
        line.col(j) = Point<2>(0.1 * j, 0.2 * j);
        ids[j] = j;
    }
    CHECK_THROWS_WITH(Stencil<2>(7, ids, line, 2), Catch::Matchers::ContainsSubstring("center 7"));
    CHECK_THROWS_AS(Stencil<2>(7, ids, line, 2), NumericalError);
}

TEST_CASE("stencil sets build only requested centers", "[stencil]")
{
    const auto pts = lattice(8, 0.1);
    const SpatialIndex<2> index(pts);
    const auto cfg = StencilConfig::make(2, 2);
    const auto set = build_stencils(index, cfg, {3, 27, 40}, 2);
    CHECK(set.node_count() == pts.size());
    CHECK(set.built_count() == 3);
    CHECK(set.contains(27));
    CHECK_FALSE(set.contains(28));
    CHECK_THROWS_AS(set[28], NumericalError);
    CHECK(set[27].center_index() == 27);

    const auto all = build_all_stencils(index, cfg, 2);
    CHECK(all.built_count() == static_cast<Index>(pts.size()));
    CHECK(selected_centers(index, {Point<2>(0.01, 0.0), Point<2>(0.0, 0.02), Point<2>(0.33, 0.41)})
          == std::vector<Index>{0, 28});
}
