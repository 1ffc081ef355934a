#ifndef UFRBF_TOOLS_RUN_CONFIG_HPP
#define UFRBF_TOOLS_RUN_CONFIG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ufrbf/ufrbf.hpp"

namespace ufrbf::cli {

using json = nlohmann::ordered_json;

struct GeometryConfig
{
    std::string name = "butterfly";
    std::vector<double> center;          // disk, annulus, ball; empty means the origin
    double radius = 1.0;                 // disk, ball, outer radius of the annulus
    double inner_radius = 0.5;           // annulus
    std::vector<double> lo, hi;          // box; empty means the unit square
    /// Neumann intervals [a, b) on the first boundary parameter of `component`.
    std::vector<std::array<double, 2>> neumann;
    int component = 0;
};

struct TermConfig
{
    double coefficient = 0.0;
    std::vector<int> exponents;
};

struct SolutionConfig
{
    std::string name = "franke";
    int degree = 2;              // random polynomial
    std::uint64_t seed = 1;      // random polynomial
    double k = 6.0;              // u4 frequency
    std::vector<TermConfig> terms; // explicit polynomial; overrides degree and seed
};

struct DumpConfig
{
    bool points = false;         // nodes.txt, evaluation.txt
    bool boundary = false;       // boundary.txt
    bool system = false;         // D.mtx, F.mtx
    bool stencil_norms = false;  // stencil_norms.csv after solve
};

struct RunConfig
{
    GeometryConfig geometry;
    SolutionConfig solution;
    int degree = 2;
    std::vector<int> degrees{2, 3, 4, 5, 6};
    double spacing = 0.05;
    std::vector<double> spacings = geometric_spacings(0.08, 5);
    int oversampling = 0;        // 0: 5 in 2D, 10 in 3D
    double tilt = 0.123;
    std::uint64_t seed = 1;
    bool prune = true;
    double margin = -1.0;        // negative: twice the n-point reach
    std::string backend = "auto";
    int threads = 1;
    LsqrOptions lsqr;
    std::string svd = "auto";
    bool stability = false;      // converge: add stability norm and condition number
    std::string out = "out";
    DumpConfig dump;
    SupportSweepConfig sweep;

    int dimension() const;
};

inline const std::vector<std::string>& known_geometries()
{
    static const std::vector<std::string> names{"butterfly", "butterfly_holes", "disk", "annulus",
                                                "square",    "box",             "cube", "ball"};
    return names;
}

inline const std::vector<std::string>& known_solutions()
{
    static const std::vector<std::string> names{"franke", "nonanalytic", "u3", "u4", "polynomial"};
    return names;
}

inline std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
}

inline int RunConfig::dimension() const
{
    const auto& g = geometry;
    if (g.name == "ball" || g.name == "cube") return 3;
    if (g.name == "box" && !g.lo.empty()) return static_cast<int>(g.lo.size());
    return 2;
}

inline SvdMode parse_svd_mode(const std::string& s)
{
    if (s == "dense") return SvdMode::Dense;
    if (s == "iterative") return SvdMode::Iterative;
    if (s == "auto") return SvdMode::Auto;
    throw ParameterError("unknown svd mode '" + s + "' (expected dense, iterative or auto)");
}

// ---------------------------------------------------------------------------
// JSON mapping
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ParameterError("config: '" + where + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) {
            std::vector<std::string> names(ok.begin(), ok.end());
            throw ParameterError("config: unknown key '" + (where.empty() ? key : where + "." + key)
                                 + "' (allowed: " + join(names) + ")");
        }
}

template <class T>
void get(const json& j, const char* key, T& dst, const std::string& where)
{
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParameterError("config: '" + (where.empty() ? std::string(key) : where + "." + key)
                             + "' has the wrong type");
    }
}

} // namespace detail

inline json to_json(const RunConfig& c)
{
    json g{{"name", c.geometry.name},     {"center", c.geometry.center}, {"radius", c.geometry.radius},
           {"inner_radius", c.geometry.inner_radius}, {"lo", c.geometry.lo}, {"hi", c.geometry.hi},
           {"neumann", c.geometry.neumann}, {"component", c.geometry.component}};
    json terms = json::array();
    for (const auto& t : c.solution.terms) terms.push_back({{"coefficient", t.coefficient}, {"exponents", t.exponents}});
    json s{{"name", c.solution.name}, {"degree", c.solution.degree}, {"seed", c.solution.seed},
           {"k", c.solution.k},       {"terms", terms}};
    return json{{"geometry", g},
                {"solution", s},
                {"degree", c.degree},
                {"degrees", c.degrees},
                {"spacing", c.spacing},
                {"spacings", c.spacings},
                {"oversampling", c.oversampling},
                {"tilt", c.tilt},
                {"seed", c.seed},
                {"prune", c.prune},
                {"margin", c.margin},
                {"backend", c.backend},
                {"threads", c.threads},
                {"lsqr",
                 {{"gradient_tol", c.lsqr.gradient_tol},
                  {"residual_tol", c.lsqr.residual_tol},
                  {"max_iterations", c.lsqr.max_iterations}}},
                {"svd", c.svd},
                {"stability", c.stability},
                {"out", c.out},
                {"dump",
                 {{"points", c.dump.points},
                  {"boundary", c.dump.boundary},
                  {"system", c.dump.system},
                  {"stencil_norms", c.dump.stencil_norms}}},
                {"sweep",
                 {{"degree", c.sweep.degree},
                  {"cells", c.sweep.cells},
                  {"oversampling", c.sweep.oversampling},
                  {"steps", c.sweep.steps},
                  {"probes_per_cell", c.sweep.probes_per_cell},
                  {"seed", c.sweep.seed}}}};
}

/// Overlays the keys present in `j` on `c`. Unknown keys and mistyped
/// values raise ParameterError.
inline void apply_json(const json& j, RunConfig& c)
{
    using detail::get;
    detail::reject_unknown(j, "",
                           {"geometry", "solution", "degree", "degrees", "spacing", "spacings", "oversampling", "tilt",
                            "seed", "prune", "margin", "backend", "threads", "lsqr", "svd", "stability", "out", "dump",
                            "sweep"});
    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        detail::reject_unknown(g, "geometry",
                               {"name", "center", "radius", "inner_radius", "lo", "hi", "neumann", "component"});
        get(g, "name", c.geometry.name, "geometry");
        get(g, "center", c.geometry.center, "geometry");
        get(g, "radius", c.geometry.radius, "geometry");
        get(g, "inner_radius", c.geometry.inner_radius, "geometry");
        get(g, "lo", c.geometry.lo, "geometry");
        get(g, "hi", c.geometry.hi, "geometry");
        get(g, "neumann", c.geometry.neumann, "geometry");
        get(g, "component", c.geometry.component, "geometry");
    }
    if (j.contains("solution")) {
        const auto& s = j.at("solution");
        detail::reject_unknown(s, "solution", {"name", "degree", "seed", "k", "terms"});
        get(s, "name", c.solution.name, "solution");
        get(s, "degree", c.solution.degree, "solution");
        get(s, "seed", c.solution.seed, "solution");
        get(s, "k", c.solution.k, "solution");
        if (s.contains("terms")) {
            if (!s.at("terms").is_array()) throw ParameterError("config: 'solution.terms' must be an array");
            c.solution.terms.clear();
            for (const auto& t : s.at("terms")) {
                detail::reject_unknown(t, "solution.terms[]", {"coefficient", "exponents"});
                TermConfig term;
                get(t, "coefficient", term.coefficient, "solution.terms[]");
                get(t, "exponents", term.exponents, "solution.terms[]");
                c.solution.terms.push_back(term);
            }
        }
    }
    get(j, "degree", c.degree, "");
    get(j, "degrees", c.degrees, "");
    get(j, "spacing", c.spacing, "");
    get(j, "spacings", c.spacings, "");
    get(j, "oversampling", c.oversampling, "");
    get(j, "tilt", c.tilt, "");
    get(j, "seed", c.seed, "");
    get(j, "prune", c.prune, "");
    get(j, "margin", c.margin, "");
    get(j, "backend", c.backend, "");
    get(j, "threads", c.threads, "");
    if (j.contains("lsqr")) {
        const auto& l = j.at("lsqr");
        detail::reject_unknown(l, "lsqr", {"gradient_tol", "residual_tol", "max_iterations"});
        get(l, "gradient_tol", c.lsqr.gradient_tol, "lsqr");
        get(l, "residual_tol", c.lsqr.residual_tol, "lsqr");
        get(l, "max_iterations", c.lsqr.max_iterations, "lsqr");
    }
    get(j, "svd", c.svd, "");
    get(j, "stability", c.stability, "");
    get(j, "out", c.out, "");
    if (j.contains("dump")) {
        const auto& d = j.at("dump");
        detail::reject_unknown(d, "dump", {"points", "boundary", "system", "stencil_norms"});
        get(d, "points", c.dump.points, "dump");
        get(d, "boundary", c.dump.boundary, "dump");
        get(d, "system", c.dump.system, "dump");
        get(d, "stencil_norms", c.dump.stencil_norms, "dump");
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        detail::reject_unknown(s, "sweep", {"degree", "cells", "oversampling", "steps", "probes_per_cell", "seed"});
        get(s, "degree", c.sweep.degree, "sweep");
        get(s, "cells", c.sweep.cells, "sweep");
        get(s, "oversampling", c.sweep.oversampling, "sweep");
        get(s, "steps", c.sweep.steps, "sweep");
        get(s, "probes_per_cell", c.sweep.probes_per_cell, "sweep");
        get(s, "seed", c.sweep.seed, "sweep");
    }
}

inline json parse_json_text(const std::string& text, const std::string& origin)
{
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParameterError("config '" + origin + "': " + e.what());
    }
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = {})
{
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open config '" + path.string() + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    apply_json(parse_json_text(text, path.string()), base);
    return base;
}

// ---------------------------------------------------------------------------
// Validation and construction
// ---------------------------------------------------------------------------

/// Fills dimension-dependent defaults so the serialized config is complete.
inline void resolve_defaults(RunConfig& c)
{
    const int d = c.dimension();
    if (c.oversampling == 0) c.oversampling = d == 3 ? 10 : 5;
    auto& g = c.geometry;
    if ((g.name == "disk" || g.name == "annulus" || g.name == "ball") && g.center.empty())
        g.center.assign(g.name == "ball" ? 3 : 2, 0.0);
    if ((g.name == "square" || g.name == "box" || g.name == "cube") && g.lo.empty()) {
        g.lo.assign(d, 0.0);
        g.hi.assign(d, 1.0);
    }
}

inline void validate(const RunConfig& c)
{
    const auto& g = c.geometry;
    const auto& names = known_geometries();
    if (std::find(names.begin(), names.end(), g.name) == names.end())
        throw ParameterError("unknown geometry '" + g.name + "' (known geometries: " + join(names) + ")");
    const int d = c.dimension();
    if (d < 2 || d > 3) throw ParameterError("geometry '" + g.name + "': dimension must be 2 or 3");
    if (g.lo.size() != g.hi.size()) throw ParameterError("geometry: lo and hi must have the same length");
    if (!g.center.empty() && static_cast<int>(g.center.size()) != d)
        throw ParameterError("geometry: center must have " + std::to_string(d) + " coordinates");
    for (const auto& iv : g.neumann)
        if (!(iv[0] < iv[1])) throw ParameterError("geometry: Neumann interval needs a < b");

    const auto& sols = known_solutions();
    if (std::find(sols.begin(), sols.end(), c.solution.name) == sols.end())
        throw ParameterError("unknown solution '" + c.solution.name + "' (known solutions: " + join(sols) + ")");
    const bool planar = c.solution.name == "franke" || c.solution.name == "nonanalytic" || c.solution.name == "u3";
    if (planar && d != 2) throw ParameterError("solution '" + c.solution.name + "' is two-dimensional");
    if (c.solution.name == "u4" && d != 3) throw ParameterError("solution 'u4' is three-dimensional");
    for (const auto& t : c.solution.terms)
        if (static_cast<int>(t.exponents.size()) != d)
            throw ParameterError("solution: every term needs " + std::to_string(d) + " exponents");

    if (c.degree < 1) throw ParameterError("degree must be >= 1");
    if (!(c.spacing > 0.0)) throw ParameterError("spacing must be positive");
    for (double s : c.spacings)
        if (!(s > 0.0)) throw ParameterError("spacings must be positive");
    if (c.oversampling < 1) throw ParameterError("oversampling q must be >= 1");
    if (c.threads < 1) throw ParameterError("threads must be >= 1");
    parse_backend(c.backend);
    parse_svd_mode(c.svd);
}

template <int Dim>
Point<Dim> to_point(const std::vector<double>& v)
{
    Point<Dim> p = Point<Dim>::Zero();
    for (int a = 0; a < Dim && a < static_cast<int>(v.size()); ++a) p[a] = v[a];
    return p;
}

template <int Dim>
DomainGeometry<Dim> make_geometry(const GeometryConfig& g)
{
    auto build = [&]() -> DomainGeometry<Dim> {
        if constexpr (Dim == 2) {
            if (g.name == "butterfly") return butterfly_domain();
            if (g.name == "butterfly_holes") return butterfly_with_holes();
            if (g.name == "disk") return disk_domain(to_point<2>(g.center), g.radius);
            if (g.name == "annulus") return annulus_domain(to_point<2>(g.center), g.inner_radius, g.radius);
        } else {
            if (g.name == "ball") return ball_domain_3d(to_point<3>(g.center), g.radius);
        }
        if (g.name == "square" || g.name == "box" || g.name == "cube")
            return box_domain<Dim>(to_point<Dim>(g.lo), to_point<Dim>(g.hi));
        throw ParameterError("geometry '" + g.name + "' is not available in " + std::to_string(Dim) + "D");
    };
    auto geom = build();
    if (!g.neumann.empty()) {
        BcSegmentation bc;
        for (const auto& iv : g.neumann) bc.neumann_intervals.emplace_back(iv[0], iv[1]);
        geom = geom.with_bc(g.component, bc);
    }
    return geom;
}

template <int Dim>
ManufacturedSolution<Dim> make_solution(const SolutionConfig& s)
{
    if constexpr (Dim == 2) {
        if (s.name == "franke") return franke();
        if (s.name == "nonanalytic") return truncated_nonanalytic();
        if (s.name == "u3") return sprocket_u3();
    } else {
        if (s.name == "u4") return trig3d_u4(s.k);
    }
    if (s.name == "polynomial") {
        if (s.terms.empty()) return random_polynomial<Dim>(s.degree, s.seed);
        std::vector<PolynomialTerm<Dim>> terms;
        for (const auto& t : s.terms) {
            PolynomialTerm<Dim> pt;
            pt.coefficient = t.coefficient;
            for (int a = 0; a < Dim; ++a) pt.exponents[a] = t.exponents.at(a);
            terms.push_back(pt);
        }
        return polynomial_solution<Dim>(std::move(terms));
    }
    throw ParameterError("solution '" + s.name + "' is not available in " + std::to_string(Dim) + "D");
}

template <int Dim>
DiscretizationOptions<Dim> make_options(const RunConfig& c)
{
    DiscretizationOptions<Dim> o;
    o.degree = c.degree;
    o.spacing = c.spacing;
    o.tilt = c.tilt;
    o.oversampling = c.oversampling;
    o.seed = c.seed;
    o.prune = c.prune;
    o.margin = c.margin;
    o.threads = c.threads;
    return o;
}

} // namespace ufrbf::cli

#endif // UFRBF_TOOLS_RUN_CONFIG_HPP
