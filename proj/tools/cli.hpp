#ifndef UFRBF_TOOLS_CLI_HPP
#define UFRBF_TOOLS_CLI_HPP

#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "run_config.hpp"

namespace ufrbf::cli {

namespace fs = std::filesystem;

enum ExitCode { ok = 0, numerical_failure = 1, usage_error = 2 };

namespace detail {

inline CsvTable solve_report_table(const RunConfig& c, int dim, const SolveReport& r)
{
    CsvTable t({"geometry", "solution", "d", "p", "q", "spacing", "h", "N", "M", "M2", "M0", "M1", "backend",
                "iterations", "rel_l1", "rel_l2", "rel_linf", "residual_orthogonality"});
    const ErrorNorms e = r.errors.value_or(ErrorNorms{});
    t.row() << c.geometry.name << c.solution.name << dim << c.degree << c.oversampling << c.spacing << r.h << r.N
            << r.M << r.M2 << r.M0 << r.M1 << to_string(r.backend) << r.iterations << e.rel_l1 << e.rel_l2
            << e.rel_linf << r.residual_orthogonality;
    return t;
}

inline CsvTable timings_table(const PhaseTimings& t)
{
    CsvTable out({"phase", "seconds"});
    out.row() << "points" << t.point_generation;
    out.row() << "neighbors" << t.neighbor_search;
    out.row() << "factorization" << t.stencil_factorization;
    out.row() << "weights" << t.weights;
    out.row() << "assembly" << t.assembly;
    out.row() << "solve" << t.solve;
    out.row() << "total" << t.total();
    return out;
}

template <int Dim>
CsvTable stencil_norm_table(const std::vector<StencilNormRow<Dim>>& rows)
{
    static const char* axes[] = {"center_x", "center_y", "center_z"};
    std::vector<std::string> header(axes, axes + Dim);
    header.emplace_back("inv_norm_inf");
    header.emplace_back("lebesgue_estimate");
    CsvTable t(std::move(header));
    for (const auto& r : rows) {
        auto& row = t.row();
        for (int a = 0; a < Dim; ++a) row << r.center[a];
        row << r.inv_norm_inf << r.lebesgue_estimate;
    }
    return t;
}

inline CsvTable sweep_table(const std::vector<SupportSweepRow>& rows)
{
    CsvTable t({"offset", "stencil_inside", "support_fraction", "support_area", "sigma_min", "sigma_max", "singular",
                "N", "M"});
    for (const auto& r : rows)
        t.row() << r.offset << r.stencil_inside << r.support_fraction << r.support_area << r.sigma_min << r.sigma_max
                << (r.singular() ? 1 : 0) << r.N << r.M;
    return t;
}

template <int Dim>
void write_effective_config(const RunConfig& c, const fs::path& out)
{
    write_file_atomic(out / "effective_config.json", to_json(c).dump(2) + "\n");
}

template <int Dim>
int cmd_solve(const RunConfig& c, std::ostream& log)
{
    const fs::path out(c.out);
    const auto geom = make_geometry<Dim>(c.geometry);
    const auto sol = make_solution<Dim>(c.solution);
    const auto res = solve_poisson(geom, sol, make_options<Dim>(c), parse_backend(c.backend), c.lsqr);
    const auto& r = res.report;
    write_effective_config<Dim>(c, out);
    solve_report_table(c, Dim, r).write(out / "solve_report.csv");
    timings_table(r.timings).write(out / "timings.csv");
    field_table<Dim>(res.disc.points.evaluation_points(), r.u_field, r.u_exact).write(out / "field.csv");
    if (c.dump.points) {
        write_points<Dim>(out / "nodes.txt", res.disc.points.nodes, r.h);
        write_points<Dim>(out / "evaluation.txt", res.disc.points.evaluation_points(), r.h);
    }
    if (c.dump.boundary) {
        auto samples = res.disc.points.dirichlet;
        samples.insert(samples.end(), res.disc.points.neumann.begin(), res.disc.points.neumann.end());
        write_boundary_samples<Dim>(out / "boundary.txt", samples);
    }
    if (c.dump.system) {
        write_matrix_market(out / "D.mtx", res.system.matrix);
        write_matrix_market(out / "F.mtx", res.system.rhs);
    }
    if (c.dump.stencil_norms)
        stencil_norm_table<Dim>(stencil_norms(res.disc, c.threads)).write(out / "stencil_norms.csv");
    const auto e = r.errors.value_or(ErrorNorms{});
    log << "solve: N=" << r.N << " M=" << r.M << " h=" << r.h << " backend=" << to_string(r.backend)
        << " rel_l2=" << e.rel_l2 << " rel_linf=" << e.rel_linf << " t=" << r.timings.total() << "s\n";
    return ok;
}

inline void require_spacing_list(const RunConfig& c, std::size_t minimum)
{
    if (c.spacings.size() < minimum)
        throw ParameterError("need at least " + std::to_string(minimum) + " spacings, got "
                             + std::to_string(c.spacings.size()));
    for (std::size_t i = 1; i < c.spacings.size(); ++i)
        if (!(c.spacings[i] < c.spacings[i - 1])) throw ParameterError("spacings must decrease strictly");
}

template <int Dim>
int cmd_converge(const RunConfig& c, std::ostream& log)
{
    require_spacing_list(c, 3);
    const fs::path out(c.out);
    const auto table = run_convergence<Dim>(make_geometry<Dim>(c.geometry), make_solution<Dim>(c.solution),
                                            make_options<Dim>(c), c.spacings, parse_backend(c.backend), c.lsqr,
                                            c.stability);
    write_effective_config<Dim>(c, out);
    table.table().write(out / "convergence.csv");
    table.timings_table().write(out / "convergence_timings.csv");
    table.slope_table().write(out / "convergence_slopes.csv");
    const auto s = table.slopes();
    log << "converge: " << table.rows.size() << " levels, slopes l1=" << s[0].slope << " l2=" << s[1].slope
        << " linf=" << s[2].slope << (s[1].saturated ? " (saturated)" : "") << "\n";
    return ok;
}

template <int Dim>
int cmd_prefine(const RunConfig& c, std::ostream& log)
{
    if (c.degrees.empty()) throw ParameterError("prefine: empty degree list");
    for (int p : c.degrees)
        if (p < 2 || p > 6) throw ParameterError("prefine: degrees must lie in 2..6");
    const fs::path out(c.out);
    const auto geom = make_geometry<Dim>(c.geometry);
    const auto sol = make_solution<Dim>(c.solution);
    CsvTable t({"p", "spacing", "h", "N", "M", "rel_l1", "rel_l2", "rel_linf", "residual_orthogonality", "t_total"});
    for (int p : c.degrees) {
        auto opt = make_options<Dim>(c);
        opt.degree = p;
        const auto r = solve_poisson(geom, sol, opt, parse_backend(c.backend), c.lsqr).report;
        const auto e = r.errors.value_or(ErrorNorms{});
        t.row() << p << c.spacing << r.h << r.N << r.M << e.rel_l1 << e.rel_l2 << e.rel_linf
                << r.residual_orthogonality << r.timings.total();
        log << "prefine: p=" << p << " rel_l2=" << e.rel_l2 << "\n";
    }
    write_effective_config<Dim>(c, out);
    t.write(out / "prefine.csv");
    return ok;
}

template <int Dim>
int cmd_stability(const RunConfig& c, std::ostream& log)
{
    require_spacing_list(c, 2);
    const fs::path out(c.out);
    const auto geom = make_geometry<Dim>(c.geometry);
    const auto sol = make_solution<Dim>(c.solution);
    const auto mode = parse_svd_mode(c.svd);
    CsvTable t({"spacing", "h", "N", "M", "sigma_min_E", "sigma_max_E", "sigma_min_D", "sigma_max_D",
                "stability_norm", "condition"});
    for (double s : c.spacings) {
        auto opt = make_options<Dim>(c);
        opt.spacing = s;
        const auto d = discretize(geom, opt);
        const auto sys = assemble_pde_system(d.points, d.index, d.stencils, sol.pde_data(), c.threads);
        const auto e = assemble_operator(d.index, d.stencils, d.points.evaluation_points(), Operator<Dim>::eval(),
                                         c.threads);
        const auto st = stability_report(e.matrix, sys.matrix, d.points.M(), mode);
        t.row() << s << d.points.h << d.points.N() << d.points.M() << st.sigma_min_E << st.sigma_max_E
                << st.sigma_min_D << st.sigma_max_D << st.stability_norm << st.condition_D;
        log << "stability: h=" << d.points.h << " kappa=" << st.condition_D << " stability_norm=" << st.stability_norm
            << "\n";
    }
    write_effective_config<Dim>(c, out);
    t.write(out / "stability.csv");
    return ok;
}

template <int Dim>
int cmd_stencil_norms(const RunConfig& c, std::ostream& log)
{
    const fs::path out(c.out);
    const auto geom = make_geometry<Dim>(c.geometry);
    const auto opt = make_options<Dim>(c);
    const auto disc = discretize(geom, opt);
    stencil_norm_table<Dim>(stencil_norms(disc, c.threads)).write(out / "stencil_norms.csv");

    // The fitted lattice has one-sided boundary stencils: the skewed reference.
    const auto fitted = fitted_lattice_stencils(geom, opt);
    CsvTable summary({"layout", "stencils", "xi_min", "xi_max", "ratio"});
    auto add = [&](const char* name, const StencilSet<Dim>& set) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto* s : set.built()) {
            lo = std::min(lo, s->inv_norm_inf());
            hi = std::max(hi, s->inv_norm_inf());
        }
        summary.row() << name << set.built_count() << lo << hi << hi / lo;
        log << "stencil norms (" << name << "): " << set.built_count() << " stencils, xi_max/xi_min=" << hi / lo
            << "\n";
    };
    add("unfitted", disc.stencils);
    add("fitted", fitted);
    write_effective_config<Dim>(c, out);
    summary.write(out / "stencil_norms_summary.csv");
    return ok;
}

template <int Dim>
int dispatch(const std::string& command, const RunConfig& c, std::ostream& log)
{
    if (command == "solve") return cmd_solve<Dim>(c, log);
    if (command == "converge") return cmd_converge<Dim>(c, log);
    if (command == "prefine") return cmd_prefine<Dim>(c, log);
    if (command == "diagnose-stability") return cmd_stability<Dim>(c, log);
    if (command == "dump-stencil-norms") return cmd_stencil_norms<Dim>(c, log);
    throw ParameterError("unknown command '" + command + "'");
}

inline int cmd_sweep(const std::string& command, const RunConfig& c, std::ostream& log)
{
    const bool one_d = command == "diagnose-sigma-1d";
    const auto rows = one_d ? support_sweep_1d(c.sweep, c.threads) : support_sweep_2d(c.sweep, c.threads);
    const fs::path out(c.out);
    write_file_atomic(out / "effective_config.json", to_json(c).dump(2) + "\n");
    sweep_table(rows).write(out / (one_d ? "sigma_sweep_1d.csv" : "sigma_sweep_2d.csv"));
    int singular = 0;
    for (const auto& r : rows) singular += r.singular();
    log << command << ": " << rows.size() << " offsets, " << singular << " singular\n";
    return ok;
}

} // namespace detail

/// Runs the command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Unfitted RBF-FD least-squares Poisson solver"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand
    std::string config_path, out_dir, backend;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool dump_points = false, dump_system = false, dump_boundary = false, dump_norms = false;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "seed for evaluation point placement");
    app.add_option("--backend", backend, "least-squares backend")
        ->check(CLI::IsMember({"direct", "iterative", "auto"}));
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--dump-points", dump_points, "write nodes.txt and evaluation.txt");
    app.add_flag("--dump-system", dump_system, "write D.mtx and F.mtx");
    app.add_flag("--dump-boundary", dump_boundary, "write boundary.txt");
    app.add_flag("--dump-stencil-norms", dump_norms, "write stencil_norms.csv after solve");

    const std::vector<std::pair<const char*, const char*>> commands{
        {"solve", "one solve: solve_report.csv, timings.csv, field.csv"},
        {"converge", "h-refinement study: convergence.csv and fitted slopes"},
        {"prefine", "p-refinement at fixed spacing: prefine.csv"},
        {"diagnose-sigma-1d", "1D support sweep: sigma_sweep_1d.csv"},
        {"diagnose-sigma-2d", "2D support sweep: sigma_sweep_2d.csv"},
        {"diagnose-stability", "stability norm and condition number per spacing: stability.csv"},
        {"dump-stencil-norms", "per-stencil inverse norms: stencil_norms.csv"}};
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, log, err);
        return code == 0 ? ok : usage_error;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        RunConfig c;
        if (!config_path.empty()) c = load_config(config_path);
        if (!out_dir.empty()) c.out = out_dir;
        if (seed) c.seed = *seed;
        if (!backend.empty()) c.backend = backend;
        if (threads) c.threads = *threads;
        c.dump.points = c.dump.points || dump_points;
        c.dump.system = c.dump.system || dump_system;
        c.dump.boundary = c.dump.boundary || dump_boundary;
        c.dump.stencil_norms = c.dump.stencil_norms || dump_norms;
        resolve_defaults(c);
        validate(c);
        if (command == "diagnose-sigma-1d" || command == "diagnose-sigma-2d") return detail::cmd_sweep(command, c, log);
        return c.dimension() == 3 ? detail::dispatch<3>(command, c, log) : detail::dispatch<2>(command, c, log);
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return usage_error;
    } catch (const NumericalError& e) {
        err << "numerical failure in " << e.module() << ": " << e.what() << "\n";
        return numerical_failure;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return numerical_failure;
    }
}

} // namespace ufrbf::cli

#endif // UFRBF_TOOLS_CLI_HPP
