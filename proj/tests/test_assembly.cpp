#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ufrbf/pipeline.hpp"

using namespace ufrbf;
using Catch::Approx;

namespace {

Discretization<2> disk_setup(double spacing, int degree = 2, double neumann_to = 0.0)
{
    auto g = disk_domain(Point<2>(0.1, -0.2), 1.0);
    if (neumann_to > 0.0) g = g.with_bc(0, BcSegmentation{{{0.0, neumann_to}}});
    DiscretizationOptions<2> opt;
    opt.spacing = spacing;
    opt.degree = degree;
    return discretize(g, opt);
}

Eigen::VectorXd sample(const PointList<2>& pts, const std::function<double(const Point<2>&)>& f)
{
    Eigen::VectorXd v(static_cast<Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) v[static_cast<Index>(i)] = f(pts[i]);
    return v;
}

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("stencil selection is the nearest node", "[assembly]")
{
    const PointList<2> ties{{1, 0}, {0, 1}, {-1, 0}};
    CHECK(stencil_of(Point<2>(0, 0), SpatialIndex<2>(ties)) == 0);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    PointList<2> pts(300);
    for (auto& p : pts) p = Point<2>(u(rng), u(rng));
    const SpatialIndex<2> index(pts);
    for (int i = 0; i < 200; ++i) {
        const Point<2> y(u(rng), u(rng));
        CHECK(stencil_of(y, index) == oracle::nearest<2>(pts, y));
    }
}

TEST_CASE("evaluating at the nodes gives a permutation", "[assembly]")
{
    const auto d = disk_setup(0.15);
    const auto& x = d.points.nodes;
    PointList<2> y(x.rbegin(), x.rend());
    const auto all = build_all_stencils(d.index, d.config);
    const auto e = assemble_operator(d.index, all, y, Operator<2>::eval());
    const Eigen::MatrixXd dense(e.matrix);
    const Index n = static_cast<Index>(x.size());
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) CHECK(dense(i, j) == Approx(j == n - 1 - i ? 1.0 : 0.0).margin(1e-10));
}

TEST_CASE("global operators reproduce polynomials", "[assembly]")
{
    for (int p : {2, 4}) {
        const auto d = disk_setup(0.1, p);
        const auto ys = d.points.evaluation_points();
        const auto poly = random_polynomial<2>(p, 5 + p);
        const Eigen::VectorXd u = sample(d.points.nodes, poly.value);

        const auto e = assemble_operator(d.index, d.stencils, ys, Operator<2>::eval());
        const auto l = assemble_operator(d.index, d.stencils, ys, Operator<2>::laplacian());
        const auto gx = assemble_operator(d.index, d.stencils, ys, Operator<2>::gradient(0));
        CHECK(e.rows() == static_cast<Index>(ys.size()));
        CHECK(e.cols() == d.points.N());
        CHECK(e.matrix.nonZeros() == static_cast<Index>(ys.size()) * d.config.size);

        const double tol = p == 2 ? 1e-10 : 1e-7;
        CHECK(max_abs(e.matrix * u - sample(ys, poly.value)) <= tol * max_abs(u));
        CHECK(max_abs(l.matrix * u - sample(ys, poly.laplacian)) <= 100 * tol * max_abs(u) / (d.points.h * d.points.h));
        CHECK(max_abs(gx.matrix * u - sample(ys, [&](const Point<2>& y) { return poly.gradient(y).x(); }))
              <= 10 * tol * max_abs(u) / d.points.h);

        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d.points.N());
        CHECK(max_abs(e.matrix * ones - Eigen::VectorXd::Ones(e.rows())) <= 1e-10);
        CHECK(max_abs(l.matrix * ones) <= 1e-7 / (d.points.h * d.points.h));

        const Eigen::VectorXd r2 = sample(d.points.nodes, [](const Point<2>& y) { return y.squaredNorm(); });
        CHECK(max_abs(l.matrix * r2 - Eigen::VectorXd::Constant(l.rows(), 4.0)) <= 1e-6);
    }
}

TEST_CASE("assembly does not depend on the thread count", "[assembly]")
{
    const auto d = disk_setup(0.1);
    const auto ys = d.points.evaluation_points();
    const auto a = assemble_operator(d.index, d.stencils, ys, Operator<2>::laplacian(), 1);
    const auto b = assemble_operator(d.index, d.stencils, ys, Operator<2>::laplacian(), 4);
    CHECK(Eigen::MatrixXd(a.matrix - b.matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("PDE system blocks carry their scalings", "[assembly]")
{
    const auto d = disk_setup(0.1, 2, std::numbers::pi);
    const auto& ps = d.points;
    REQUIRE(ps.M1() > 0);
    const auto sol = franke();
    const auto sys = assemble_pde_system(ps, d.index, d.stencils, sol.pde_data());
    CHECK(sys.rows() == ps.M());
    CHECK(sys.beta_interior == Approx(1.0 / std::sqrt(double(ps.M2()))));
    CHECK(sys.beta_dirichlet == Approx(1.0 / (ps.h * std::sqrt(double(ps.M0())))));
    CHECK(sys.beta_neumann == Approx(1.0 / std::sqrt(double(ps.M1()))));

    PointList<2> dir, neu;
    for (const auto& b : ps.dirichlet) dir.push_back(b.point);
    for (const auto& b : ps.neumann) neu.push_back(b.point);
    const Eigen::MatrixXd full(sys.matrix);

    const Eigen::MatrixXd e(assemble_operator(d.index, d.stencils, dir, Operator<2>::eval()).matrix);
    const Eigen::MatrixXd block = full.middleRows(sys.dirichlet_begin(), ps.M0()) / sys.beta_dirichlet;
    CHECK((block - e).cwiseAbs().maxCoeff() <= 1e-12 * e.cwiseAbs().maxCoeff());

    const Eigen::MatrixXd l(assemble_operator(d.index, d.stencils, ps.interior, Operator<2>::laplacian()).matrix);
    CHECK((full.topRows(ps.M2()) / sys.beta_interior - l).cwiseAbs().maxCoeff() <= 1e-12 * l.cwiseAbs().maxCoeff());

    for (std::size_t i = 0; i < ps.neumann.size(); ++i) {
        const auto& b = ps.neumann[i];
        const Eigen::VectorXd want =
            b.normal.x() * Eigen::MatrixXd(assemble_operator(d.index, d.stencils, {b.point}, Operator<2>::gradient(0)).matrix).row(0).transpose()
            + b.normal.y() * Eigen::MatrixXd(assemble_operator(d.index, d.stencils, {b.point}, Operator<2>::gradient(1)).matrix).row(0).transpose();
        const Eigen::VectorXd got = full.row(sys.neumann_begin() + static_cast<Index>(i)).transpose() / sys.beta_neumann;
        CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-10 * want.cwiseAbs().maxCoeff());
    }

    // Right-hand side entries are the scaled data.
    CHECK(sys.rhs[0] == Approx(sys.beta_interior * sol.laplacian(ps.interior[0])));
    CHECK(sys.rhs[sys.dirichlet_begin()] == Approx(sys.beta_dirichlet * sol.value(dir[0])));
    CHECK(sys.rhs[sys.neumann_begin()]
          == Approx(sys.beta_neumann * sol.gradient(neu[0]).dot(ps.neumann[0].normal)));
}

TEST_CASE("a Neumann row along x is the scaled x-derivative row", "[assembly]")
{
    const auto d = disk_setup(0.1);
    auto ps = d.points;
    const Point<2> y = ps.interior[7];
    ps.neumann = {BoundarySample<2>{y, Point<2>(1, 0), BcType::Neumann, 0}};
    const auto sys = assemble_pde_system(ps, d.index, d.stencils, franke().pde_data());
    const Eigen::MatrixXd gx(assemble_operator(d.index, d.stencils, {y}, Operator<2>::gradient(0)).matrix);
    const Eigen::MatrixXd row = Eigen::MatrixXd(sys.matrix).bottomRows(1);
    CHECK(sys.beta_neumann == 1.0);
    CHECK((row - sys.beta_neumann * gx).cwiseAbs().maxCoeff() <= 1e-12 * gx.cwiseAbs().maxCoeff());
}

TEST_CASE("the Dirichlet weight scales with 1/h", "[assembly]")
{
    auto d = disk_setup(0.1);
    const auto data = franke().pde_data();
    const auto a = assemble_pde_system(d.points, d.index, d.stencils, data);
    d.points.h /= 2;
    const auto b = assemble_pde_system(d.points, d.index, d.stencils, data);
    CHECK(b.beta_dirichlet == Approx(2 * a.beta_dirichlet));
    CHECK(b.beta_interior == a.beta_interior);
}

TEST_CASE("system assembly errors", "[assembly]")
{
    auto d = disk_setup(0.15);
    auto ps = d.points;
    ps.neumann = ps.dirichlet;
    ps.dirichlet.clear();
    CHECK_THROWS_WITH(assemble_pde_system(ps, d.index, d.stencils, franke().pde_data()),
                      Catch::Matchers::ContainsSubstring("pure Neumann unsupported"));
    CHECK_THROWS_AS(assemble_operator(d.index, d.stencils, PointList<2>{}, Operator<2>::eval()), ParameterError);

    const StencilSet<2> empty(d.index.size(), d.config.size);
    CHECK_THROWS_AS(assemble_operator(d.index, empty, d.points.interior, Operator<2>::eval()), NumericalError);
}

TEST_CASE("constants and polynomials are solved exactly", "[assembly]")
{
    const auto g = disk_domain(Point<2>(0.1, -0.2), 1.0).with_bc(0, BcSegmentation{{{0.5, 2.5}}});
    DiscretizationOptions<2> opt;
    opt.spacing = 0.1;

    const auto c = polynomial_solution<2>({{{0, 0}, 3.25}});
    const auto rc = solve_poisson(g, c, opt, Backend::Direct);
    CHECK(max_abs(rc.report.u_nodal - Eigen::VectorXd::Constant(rc.report.N, 3.25)) <= 1e-10);

    for (int p : {2, 3, 4}) {
        opt.degree = p;
        const auto r = solve_poisson(g, random_polynomial<2>(p, 40 + p), opt, Backend::Direct);
        INFO("p = " << p);
        CHECK(r.report.errors->rel_l2 <= 1e-8);
        CHECK(r.system.neumann_rows > 0);
    }
}
