#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "oracles.hpp"
#include "ufrbf/pipeline.hpp"

using namespace ufrbf;
using Catch::Approx;

namespace {

template <int Dim>
PointList<Dim> random_cloud(int count, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointList<Dim> pts(count);
    for (auto& p : pts)
        for (int a = 0; a < Dim; ++a) p[a] = u(rng);
    return pts;
}

template <int Dim>
std::set<Index> brute_force_prune(const PointList<Dim>& nodes, const PointList<Dim>& ys, int n)
{
    std::set<Index> keep;
    for (const auto& y : ys)
        for (long j : oracle::knn<Dim>(nodes, y, static_cast<std::size_t>((n + 1) / 2))) keep.insert(j);
    return keep;
}

} // namespace

TEST_CASE("interpolation grid on the unit box", "[pointsets]")
{
    const Box<2> box{Point<2>(0, 0), Point<2>(1, 1)};
    CHECK(generate_interpolation_grid<2>(box, 0.5, 0.0).points.size() == 9);

    const auto flat = generate_interpolation_grid<2>(box, 0.05, 0.0);
    CHECK(average_spacing(flat.points) == Approx(0.05).epsilon(1e-12));

    const auto tilted = generate_interpolation_grid<2>(box, 0.05, 0.1);
    const double ratio = static_cast<double>(tilted.points.size()) / static_cast<double>(flat.points.size());
    CHECK(ratio > 0.85);
    CHECK(ratio < 1.15);
    CHECK(static_cast<long>(tilted.points.size()) == oracle::lattice_count_2d({0, 0}, {1, 1}, 0.05, 0.1));

    CHECK_THROWS_WITH(generate_interpolation_grid<2>(box, 5.0, 0.0, 12),
                      Catch::Matchers::ContainsSubstring("insufficient nodes"));
    CHECK_THROWS_AS(generate_interpolation_grid<2>(box, 0.0, 0.0), ParameterError);
}

TEST_CASE("q = 1 places every cell centre", "[pointsets]")
{
    const auto omega = box_domain<2>(Point<2>(0, 0), Point<2>(1, 1));
    const Box<2> inner{Point<2>(0.1, 0.1), Point<2>(0.9, 0.9)};
    const auto grid = generate_interpolation_grid<2>(inner, 0.1, 0.0);
    REQUIRE(grid.points.size() == 81);
    const auto y = generate_evaluation_points(omega, grid, 1, 3);
    for (const auto& x : grid.points) {
        bool found = false;
        for (const auto& p : y.interior) found = found || (p - x).norm() < 1e-14;
        CHECK(found);
    }
}

TEST_CASE("butterfly evaluation points", "[pointsets]")
{
    const auto g = butterfly_domain();
    DiscretizationOptions<2> opt;
    opt.spacing = 0.05;
    const auto d = discretize(g, opt);
    const auto& ps = d.points;
    const double m2n = static_cast<double>(ps.M2()) / static_cast<double>(ps.N());
    CHECK(m2n >= 2.0);
    CHECK(m2n <= 5.0);
    const double mqn = static_cast<double>(ps.M()) / (5.0 * static_cast<double>(ps.N()));
    CHECK(mqn > 0.5);
    CHECK(mqn < 2.0);
    CHECK(ps.M() == ps.M0() + ps.M1() + ps.M2());

    for (const auto& y : ps.interior) CHECK(g.classify(y) == Location::Interior);
    for (const auto& b : ps.dirichlet) CHECK(g.classify(b.point) == Location::Boundary);

    // Voronoi membership against the unpruned lattice.
    const double bound = std::sqrt(2.0) / 2.0 * opt.spacing + 1e-12;
    for (const auto& y : ps.interior) {
        const long k = oracle::nearest<2>(d.grid.points, y);
        CHECK((y - d.grid.points[k]).norm() <= bound);
    }
}

TEST_CASE("evaluation points are reproducible from the seed", "[pointsets]")
{
    const auto g = butterfly_domain();
    const auto grid = generate_interpolation_grid<2>(g.bounding_box().inflated(0.2), 0.08, 0.123);
    const auto a = generate_evaluation_points(g, grid, 5, 11);
    const auto b = generate_evaluation_points(g, grid, 5, 11);
    const auto c = generate_evaluation_points(g, grid, 5, 12);
    REQUIRE(a.interior.size() == b.interior.size());
    for (std::size_t i = 0; i < a.interior.size(); ++i) CHECK(a.interior[i] == b.interior[i]);
    bool differs = a.interior.size() != c.interior.size();
    for (std::size_t i = 0; !differs && i < a.interior.size(); ++i) differs = a.interior[i] != c.interior[i];
    CHECK(differs);
}

TEST_CASE("evaluation point errors", "[pointsets]")
{
    const auto g = disk_domain(Point<2>(0, 0), 1.0);
    const auto grid = generate_interpolation_grid<2>(g.bounding_box(), 0.2, 0.0);
    CHECK_THROWS_AS(generate_evaluation_points(g, grid, 0, 1), ParameterError);

    InterpolationGrid<2> far;
    far.spacing = 1.0;
    far.points = {Point<2>(50, 50), Point<2>(51, 50)};
    CHECK_THROWS_AS(generate_evaluation_points(g, far, 5, 1), NumericalError);
}

TEST_CASE("pruning keeps the ceil(n/2) nearest with index tie breaks", "[pointsets]")
{
    const PointList<2> x{{2, 0},  {1, 0},  {0, 2},   {0, 1},   {-2, 0},
                         {-1, 0}, {0, -2}, {0, -1},  {1.2, 1.6}, {0.6, 0.8}};
    const auto r = prune_exterior_nodes<2>(x, {Point<2>(0, 0)}, 4);
    CHECK(r.kept_indices == std::vector<Index>{1, 3});
    CHECK(r.old_to_new[1] == 0);
    CHECK(r.old_to_new[3] == 1);
    CHECK(r.old_to_new[0] == -1);
    CHECK_THROWS_WITH(prune_exterior_nodes<2>(x, {Point<2>(0, 0)}, 4, 6),
                      Catch::Matchers::ContainsSubstring("unisolvency at risk"));
}

TEST_CASE("pruning keeps interior lattices intact", "[pointsets]")
{
    const auto omega = box_domain<2>(Point<2>(0, 0), Point<2>(1, 1));
    const auto grid = generate_interpolation_grid<2>({Point<2>(0.1, 0.1), Point<2>(0.9, 0.9)}, 0.1, 0.0);
    auto y = generate_evaluation_points(omega, grid, 5, 1);
    PointSets<2> ps;
    ps.interior = y.interior;
    ps.dirichlet = y.dirichlet;
    const auto ys = ps.evaluation_points();
    const auto r = prune_exterior_nodes(grid.points, ys, 12);
    const auto expect = brute_force_prune<2>(grid.points, ys, 12);
    CHECK(r.kept.size() == grid.points.size());
    CHECK(expect.size() == grid.points.size());
}

TEST_CASE("pruning matches the brute-force union and is idempotent", "[pointsets]")
{
    const auto g = butterfly_domain();
    const int n = stencil_size(2, 2);
    REQUIRE(n == 12);
    const auto grid = generate_interpolation_grid<2>(g.bounding_box().inflated(0.3), 0.08, 0.123);
    const auto y = generate_evaluation_points(g, grid, 5, 1);
    PointSets<2> ps;
    ps.interior = y.interior;
    ps.dirichlet = y.dirichlet;
    const auto ys = ps.evaluation_points();

    const auto r = prune_exterior_nodes(grid.points, ys, n);
    const auto expect = brute_force_prune<2>(grid.points, ys, n);
    CHECK(std::set<Index>(r.kept_indices.begin(), r.kept_indices.end()) == expect);
    CHECK(std::is_sorted(r.kept_indices.begin(), r.kept_indices.end()));
    CHECK(r.kept.size() < grid.points.size());

    const auto again = prune_exterior_nodes(r.kept, ys, n);
    CHECK(again.kept.size() == r.kept.size());

    // The node nearest to each y always survives.
    for (const auto& p : ys) CHECK(r.old_to_new[oracle::nearest<2>(grid.points, p)] >= 0);
}

TEST_CASE("pruned butterfly stencils stay near the domain", "[pointsets]")
{
    const auto g = butterfly_domain();
    DiscretizationOptions<2> opt;
    opt.spacing = 0.05;
    const auto d = discretize(g, opt);
    const double h = d.points.h;
    const int n = d.config.size;
    const double band = 1.5 * h * std::sqrt(static_cast<double>(n));
    const auto curve = g.sample_boundary(h / 10);
    auto distance = [&](const Point<2>& p) {
        if (g.classify(p) != Location::Exterior) return 0.0;
        double best = 1e300;
        for (const auto& b : curve) best = std::min(best, (b.point - p).norm());
        return best;
    };
    std::vector<double> dist(d.points.nodes.size());
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = distance(d.points.nodes[i]);
    for (const auto* st : d.stencils.built()) {
        int near = 0;
        for (Index j : st->neighbors()) near += dist[j] <= band;
        CHECK(near >= (n + 1) / 2);
    }
}

TEST_CASE("average spacing", "[pointsets]")
{
    CHECK(average_spacing<2>({{0, 0}, {3, 0}}) == Approx(3.0));
    CHECK(average_spacing<2>({{0, 0}, {1, 0}, {0, 2}, {1, 2}}) == Approx(1.0));
    CHECK_THROWS_WITH(average_spacing<2>({{0, 0}, {0, 0}, {1, 1}}), Catch::Matchers::ContainsSubstring("coincident"));
    CHECK_THROWS_AS(average_spacing<2>({{0, 0}}), ParameterError);
}

TEST_CASE("point set quality", "[pointsets]")
{
    const double s = 0.1;
    const Box<2> box{Point<2>(0, 0), Point<2>(1, 1)};
    const auto grid = generate_interpolation_grid<2>(box, s, 0.0);
    const auto probes = interior_probe_grid(box_domain<2>(box.lo, box.hi), s / 20);
    const auto q = point_set_quality(grid.points, probes);
    CHECK(q.separation == Approx(s / 2).epsilon(1e-12));
    CHECK(q.fill_estimate == Approx(s * std::sqrt(2.0) / 2).epsilon(0.1));

    const auto unit = interior_probe_grid(box_domain<2>(Point<2>(-1, -1), Point<2>(1, 1)), 0.01);
    for (unsigned seed = 1; seed <= 5; ++seed) CHECK(point_set_quality(random_cloud<2>(30, seed), unit).ratio >= 1.0);
}

TEST_CASE("kd-tree queries equal a linear scan", "[pointsets]")
{
    auto check = [](auto tag) {
        constexpr int Dim = decltype(tag)::value;
        const auto pts = random_cloud<Dim>(500, 17 + Dim);
        const auto queries = random_cloud<Dim>(100, 91 + Dim);
        const SpatialIndex<Dim> index(pts);
        for (const auto& q : queries) {
            for (std::size_t k : {1, 5, 12}) {
                const auto got = index.knn(q, k);
                const auto want = oracle::knn<Dim>(pts, q, k);
                REQUIRE(got.size() == want.size());
                for (std::size_t i = 0; i < k; ++i) CHECK(got[i] == want[i]);
            }
            CHECK(index.nearest(q) == oracle::nearest<Dim>(pts, q));
        }
    };
    check(std::integral_constant<int, 2>{});
    check(std::integral_constant<int, 3>{});
}

TEST_CASE("kd-tree breaks ties by index", "[pointsets]")
{
    const PointList<2> pts{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const SpatialIndex<2> index(pts);
    CHECK(index.nearest(Point<2>(0, 0)) == 0);
    CHECK(index.knn(Point<2>(0, 0), 4) == std::vector<Index>{0, 1, 2, 3});
}
