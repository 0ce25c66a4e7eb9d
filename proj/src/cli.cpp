#include "mfhp/cli.hpp"

#include "mfhp/driver.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

namespace mfhp {

namespace fs = std::filesystem;

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("cli", "CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
    const std::string& cell = rows.at(row).at(column(name));
    if (cell.empty()) return std::nan("");
    // strtod rather than stod: subnormal values set ERANGE but are valid output
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || std::isspace(static_cast<unsigned char>(cell.front())))
        throw Error("cli", "CSV cell '" + cell + "' in column '" + name + "' is not a number");
    return v;
}

CsvTable read_csv_table(std::istream& in) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream s(line);
        while (std::getline(s, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        return cells;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw Error("cli", "CSV is empty");
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw Error("cli", "CSV row " + std::to_string(t.rows.size() + 1) + " has " +
                                   std::to_string(cells.size()) + " cells, header has " +
                                   std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

namespace {

std::ofstream open_file(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw Error("cli", "cannot write " + p.string());
    f.precision(17);
    return f;
}

const char* const kAxes[] = {"x", "y", "z"};

void write_solution_csv(const fs::path& p, const ProblemSpec& pb, const NodeSet& nodes,
                        std::span<const double> u) {
    auto f = open_file(p);
    const int d = nodes.dim, C = pb.components;
    const std::vector<double> exact = pb.has_exact() ? exact_values(pb, nodes) : std::vector<double>{};
    auto name = [&](int c) { return C == 1 ? std::string("u") : std::string("u") + kAxes[c]; };
    for (int a = 0; a < d; ++a) f << kAxes[a] << ',';
    f << "type,m";
    for (int c = 0; c < C; ++c) f << ',' << name(c);
    if (!exact.empty())
        for (int c = 0; c < C; ++c) f << ',' << name(c) << "_exact";
    f << '\n';
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (int a = 0; a < d; ++a) f << nodes.pos[i][a] << ',';
        f << to_string(nodes.type[i]) << ',' << nodes.m[i];
        for (int c = 0; c < C; ++c) f << ',' << u[i * C + c];
        if (!exact.empty())
            for (int c = 0; c < C; ++c) f << ',' << exact[i * C + c];
        f << '\n';
    }
}

void write_stress_csv(const fs::path& p, const NodeSet& nodes, const StressField& s) {
    auto f = open_file(p);
    const int d = nodes.dim;
    for (int a = 0; a < d; ++a) f << kAxes[a] << ',';
    f << "sxx,syy,szz,sxy,sxz,syz,von_mises\n";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& t = s.stress[i];
        for (int a = 0; a < d; ++a) f << nodes.pos[i][a] << ',';
        f << t(0, 0) << ',' << t(1, 1) << ',' << t(2, 2) << ',' << t(0, 1) << ',' << t(0, 2) << ','
          << t(1, 2) << ',' << s.von_mises[i] << '\n';
    }
}

std::string summary_line(const IterationRecord& r) {
    char buf[256];
    int n = std::snprintf(buf, sizeof buf, "iter %3d  N %7zu  eta_max %.4e", r.iteration, r.nodes,
                          r.eta_max);
    if (r.error) n += std::snprintf(buf + n, sizeof buf - n, "  e_inf %.4e", r.error->linf);
    std::snprintf(buf + n, sizeof buf - n, "  solver %d it, residual %.2e", r.solver_iterations,
                  r.solver_residual);
    return buf;
}

// Fretting post-processing: top-edge sigma_xx and optional reference comparison.
void fretting_report(const RunConfig& cfg, const AdaptiveResult& res, const StressField& stress,
                     std::ostream& out) {
    const HertzConstants hc = hertz_constants(cfg.fretting());
    std::vector<SurfaceSample> surface;
    for (std::size_t i = 0; i < res.nodes.size(); ++i)
        if (res.nodes.face[i] == 3) surface.push_back({res.nodes.pos[i].x(), stress.stress[i](0, 0)});
    std::sort(surface.begin(), surface.end(),
              [](const SurfaceSample& a, const SurfaceSample& b) { return a.x < b.x; });
    auto f = open_file(fs::path(cfg.out) / "surface.csv");
    f << "x,sigma_xx\n";
    for (const auto& s : surface) f << s.x * 1e3 << ',' << s.sigma_xx * 1e-6 << '\n';

    if (cfg.ref.empty()) return;
    std::ifstream rf(cfg.ref);
    if (!rf) throw ConfigError("cannot read reference file '" + cfg.ref + "'");
    const auto reference = read_reference_csv(rf);
    const double diff = mean_contact_difference(surface, reference, hc.half_width);
    char buf[160];
    std::snprintf(buf, sizeof buf, "mean |dsigma_xx| over |x| <= a: %.6g MPa (%zu reference points)",
                  diff * 1e-6, reference.size());
    out << buf << '\n';
}

// ---- check ------------------------------------------------------------------

using Exponent = std::array<int, 3>;

std::vector<Exponent> monomials(int m, int d) {
    std::vector<Exponent> out;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m - i; ++j)
            for (int k = 0; k <= (d == 3 ? m - i - j : 0); ++k) out.push_back({i, j, k});
    return out;
}

double monomial_value(const Exponent& e, const Point& p) {
    return std::pow(p[0], e[0]) * std::pow(p[1], e[1]) * std::pow(p[2], e[2]);
}

// d^n/dx^n of x^e evaluated at x.
double power_derivative(int e, int n, double x) {
    if (n > e) return 0.0;
    double c = 1.0;
    for (int i = 0; i < n; ++i) c *= e - i;
    return c * std::pow(x, e - n);
}

double monomial_derivative(const Exponent& e, const Operator& op, const Point& p, int d) {
    auto partial = [&](std::array<int, 3> n) {
        double v = 1.0;
        for (int a = 0; a < 3; ++a) v *= power_derivative(e[a], n[a], p[a]);
        return v;
    };
    switch (op.kind) {
        case Operator::Kind::Identity: return monomial_value(e, p);
        case Operator::Kind::Gradient: {
            std::array<int, 3> n{};
            ++n[op.a];
            return partial(n);
        }
        case Operator::Kind::Hessian: {
            std::array<int, 3> n{};
            ++n[op.a];
            ++n[op.b];
            return partial(n);
        }
        case Operator::Kind::Laplacian: {
            double s = 0.0;
            for (int a = 0; a < d; ++a) {
                std::array<int, 3> n{};
                n[a] = 2;
                s += partial(n);
            }
            return s;
        }
    }
    return 0.0;
}

bool check_line(std::ostream& out, bool ok, const std::string& name, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    return ok;
}

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const ProblemSpec pb = cfg.make_problem();
    if (!cfg.ref.empty() && cfg.problem != "fretting")
        throw ConfigError("ref applies to the fretting problem only");

    AdaptiveOptions opt;
    opt.params = cfg.adaptivity();
    opt.h0 = SpacingField::constant(cfg.h0 * cfg.length_scale());
    opt.m0 = OrderField::constant(cfg.m0);
    opt.seed = cfg.seed;
    opt.phs_k = cfg.phs_k;
    opt.order_bump = cfg.order_bump;
    opt.solver = cfg.solver();
    opt.warm_start = cfg.warm_start;
    opt.ghost_nodes = cfg.ghost_nodes;
    opt.out_dir = cfg.out;
    opt.meta = serialize_config(cfg);

    if (cfg.problem == "fretting") {
        const HertzConstants hc = hertz_constants(cfg.fretting());
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "contact: a = %.5g mm, p0 = %.5g MPa, c = %.5g mm, e = %.5g mm, "
                      "axial margin %.4f",
                      hc.half_width * 1e3, hc.peak_pressure * 1e-6, hc.stick_half_width * 1e3,
                      hc.eccentricity * 1e3, hc.axial_margin);
        out << buf << '\n';
    }

    fs::create_directories(cfg.out);
    std::ofstream log(fs::path(cfg.out) / "summary.log");
    if (!log) throw Error("cli", "cannot write summary log in " + cfg.out);
    opt.on_iteration = [&](const IterationRecord& r) {
        const std::string line = summary_line(r);
        out << line << std::endl;
        log << line << std::endl;
        return true;
    };

    const AdaptiveResult res = adaptive_solve(pb, opt);
    out << "reported iteration " << res.reported_iteration << " (" << res.nodes.size()
        << " nodes), output in " << cfg.out << '\n';
    write_solution_csv(fs::path(cfg.out) / "solution.csv", pb, res.nodes, res.solution);

    if (pb.pde == PdeKind::NavierCauchy) {
        OperatorTableOptions wopt;
        wopt.k = cfg.phs_k;
        std::vector<Operator> grads;
        for (int a = 0; a < pb.dim(); ++a) grads.push_back(Operator::d(a));
        const WeightSet gw = build_operator_table(res.nodes, grads, wopt);
        const StressField stress = stress_and_vonmises(res.nodes, res.solution, gw, cfg.material());
        write_stress_csv(fs::path(cfg.out) / "stress.csv", res.nodes, stress);
        if (cfg.problem == "fretting") fretting_report(cfg, res, stress, out);
    }
    return 0;
}

int study_command(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const ProblemSpec pb = cfg.make_problem();
    if (!pb.has_exact()) throw ConfigError("the study needs a problem with a closed form");
    if (cfg.study_h.empty() || cfg.study_m.empty()) throw ConfigError("study_h and study_m must be set");
    std::vector<double> hs;
    for (double h : cfg.study_h) hs.push_back(h * cfg.length_scale());

    const StudyResult r = unrefined_convergence_study(pb, hs, cfg.study_m, cfg.study_seeds, cfg.seed,
                                                      cfg.solver(), cfg.phs_k, cfg.order_bump, cfg.ghost_nodes);
    fs::create_directories(cfg.out);
    auto cells = open_file(fs::path(cfg.out) / "study_cells.csv");
    cells << "h,m,seed,nodes,e_inf,eta_max,failed\n";
    for (const auto& c : r.cells)
        cells << c.h << ',' << c.m << ',' << c.seed << ',' << c.nodes << ',' << c.e_inf << ','
              << c.eta_max << ',' << (c.failed ? 1 : 0) << '\n';
    auto rows = open_file(fs::path(cfg.out) / "study.csv");
    rows << "h,m,nodes,e_inf,eta_max,failures\n";
    for (const auto& row : r.rows) {
        rows << row.h << ',' << row.m << ',' << row.nodes << ',' << row.e_inf << ',' << row.eta_max
             << ',' << row.failures << '\n';
        char buf[200];
        std::snprintf(buf, sizeof buf, "h %.4g  m %d  N %.0f  e_inf %.4e  eta_max %.4e  failures %d",
                      row.h, row.m, row.nodes, row.e_inf, row.eta_max, row.failures);
        out << buf << std::endl;
    }
    for (int m : cfg.study_m) {
        std::vector<double> x, y;
        for (const auto& row : r.rows)
            if (row.m == m && std::isfinite(row.e_inf) && row.e_inf > 0.0) {
                x.push_back(row.h);
                y.push_back(row.e_inf);
            }
        if (x.size() >= 2) out << "m " << m << ": e_inf slope vs h " << fmt("%.3f", loglog_slope(x, y)) << '\n';
    }
    for (const auto& c : r.cells)
        if (c.failed) out << "failed cell h " << c.h << " m " << c.m << " seed " << c.seed << ": " << c.error << '\n';
    return 0;
}

int check_command(std::ostream& out) {
    bool ok = true;

    const FrettingParams fp;
    const HertzConstants hc = hertz_constants(fp);
    const double a_rel = std::abs(hc.half_width - 0.2067e-3) / 0.2067e-3;
    ok &= check_line(out, a_rel <= 5e-4, "hertz half-width", fmt("a = %.6g mm (rel. dev. %.2e)", hc.half_width * 1e3, a_rel));
    {
        const int n = 200000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = -hc.half_width + (i + 0.5) * 2.0 * hc.half_width / n;
            sum += contact_tractions(hc, x).normal;
        }
        const double force = sum * 2.0 * hc.half_width / n * fp.thickness;
        const double rel = std::abs(force - fp.normal_force) / fp.normal_force;
        ok &= check_line(out, rel <= 5e-3, "hertz force balance", fmt("integral p t dx = %.6g N (rel. dev. %.2e)", force, rel));
    }
    ok &= check_line(out, hc.axial_margin <= 1.0, "loading validity",
                     fmt("axial margin %.4f, printed bound %.4f", hc.axial_margin, hc.printed_axial_bound));
    {
        const BoussinesqParams bp;
        const double szz = boussinesq_stress(bp, Point(0.0, 0.0, -1.0))(2, 2);
        const double expect = -3.0 / (2.0 * std::numbers::pi);
        ok &= check_line(out, std::abs(szz - expect) <= 1e-12, "point-load stress on axis",
                         fmt("sigma_zz(0,0,-1) = %.10f", szz));
    }
    {
        const ProblemSpec pb = peak_problem();
        const std::vector<double> hs{0.01, 0.007, 0.005};
        std::vector<double> res;
        for (double h : hs) res.push_back(closed_form_residual(pb, h, 4).max);
        const double slope = loglog_slope(hs, res);
        ok &= check_line(out, slope >= 3.0, "closed-form residual (m = 4)", fmt("slope %.3f", slope));
    }
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        double worst = 0.0;
        for (int d : {2, 3}) {
            std::vector<Operator> ops{Operator::laplacian()};
            for (int a = 0; a < d; ++a) {
                ops.push_back(Operator::d(a));
                for (int b = a; b < d; ++b) ops.push_back(Operator::d2(a, b));
            }
            for (int m : kAllowedOrders) {
                for (int trial = 0; trial < 5; ++trial) {
                    const Point c(uni(rng), uni(rng), d == 3 ? uni(rng) : 0.0);
                    const int n = stencil_size(m, d);
                    std::vector<Point> st{c};
                    while (static_cast<int>(st.size()) < n)
                        st.push_back(c + 0.1 * Point(uni(rng), uni(rng), d == 3 ? uni(rng) : 0.0));
                    const Eigen::MatrixXd w = compute_weights(c, st, ops, 3, m, d);
                    for (std::size_t o = 0; o < ops.size(); ++o)
                        for (const Exponent& e : monomials(m, d)) {
                            double s = 0.0, mag = 0.0;
                            for (int j = 0; j < n; ++j) {
                                const double t = w(j, static_cast<Index>(o)) * monomial_value(e, st[j]);
                                s += t;
                                mag += std::abs(t);
                            }
                            const double exact = monomial_derivative(e, ops[o], c, d);
                            worst = std::max(worst, std::abs(s - exact) / std::max({std::abs(exact), mag, 1e-300}));
                        }
                }
            }
        }
        ok &= check_line(out, worst <= 1e-7, "weight exactness", fmt("max relative error %.2e", worst));
    }
    return ok ? 0 : 1;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    if (const char* t = std::getenv("MFHP_THREADS")) {
#ifdef _OPENMP
        const int n = std::atoi(t);
        if (n > 0) omp_set_num_threads(n);
#else
        (void)t;
#endif
    }

    CLI::App app{"hp-adaptive RBF-FD solver for the peak, fretting and point-load benchmarks", "mfhp"};
    app.require_subcommand(1);

    struct Flags {
        std::optional<std::string> problem, config, out, ref;
        std::optional<std::uint64_t> seed;
        std::optional<int> max_iter, seeds;
        std::optional<std::size_t> n_max;
        std::optional<double> gamma;
    } flags;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--problem", flags.problem, "benchmark name")
            ->check(CLI::IsMember(kProblemNames));
        sub->add_option("--config", flags.config, "key = value configuration file")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "node generation seed");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--max-iter", flags.max_iter, "maximum adaptive iteration index (n_iter)");
        sub->add_option("--n-max", flags.n_max, "node cap");
        sub->add_option("--gamma", flags.gamma, "stop when eta_max falls by this ratio");
    };
    CLI::App* run = app.add_subcommand("run", "adaptive solve");
    add_common(run);
    run->add_option("--ref", flags.ref, "fretting reference CSV (x, sigma_xx in mm, MPa)");
    CLI::App* study = app.add_subcommand("study", "unrefined convergence study");
    add_common(study);
    study->add_option("--seeds", flags.seeds, "seeds per (h, m) cell");
    app.add_subcommand("check", "analytic self-tests");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (app.got_subcommand("check")) return check_command(out);

        std::string text;
        if (flags.config) {
            std::ifstream f(*flags.config);
            std::stringstream ss;
            ss << f.rdbuf();
            text = ss.str();
        }
        RunConfig cfg = parse_config(text, flags.problem);
        if (flags.seed) cfg.seed = *flags.seed;
        if (flags.out) cfg.out = *flags.out;
        if (flags.max_iter) cfg.n_iter = *flags.max_iter;
        if (flags.n_max) cfg.n_max = *flags.n_max;
        if (flags.gamma) cfg.gamma = *flags.gamma;
        if (flags.ref) cfg.ref = *flags.ref;
        if (flags.seeds) cfg.study_seeds = *flags.seeds;
        cfg.validate();

        if (app.got_subcommand("run")) return run_command(cfg, out);
        return study_command(cfg, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        try {
            std::rethrow_if_nested(e);
        } catch (const std::exception& inner) {
            err << "  caused by " << inner.what() << '\n';
        } catch (...) {
        }
        return 1;
    }
}

}  // namespace mfhp
