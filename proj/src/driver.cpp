#include "mfhp/driver.hpp"

#include "mfhp/approx.hpp"
#include "mfhp/interp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

namespace mfhp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point& t) {
    const auto now = Clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - t).count();
    t = now;
    return ms;
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", std::localtime(&now));
    return buf;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(p, mode);
    if (!f) throw Error("driver", "cannot write " + p.string());
    return f;
}

// Shepard (3 neighbours) transfer of every solution component to new nodes.
Eigen::VectorXd warm_guess(const NodeSet& from, std::span<const double> u, const NodeSet& to,
                           int components) {
    Eigen::VectorXd g(static_cast<Index>(to.size()) * components);
    for (int c = 0; c < components; ++c) {
        std::vector<double> vals(from.size());
        for (std::size_t i = 0; i < from.size(); ++i) vals[i] = u[i * components + c];
        const ShepardInterpolant interp(from.pos, std::move(vals), from.dim,
                                        std::min<std::size_t>(3, from.size()));
        for (std::size_t i = 0; i < to.size(); ++i)
            g[static_cast<Index>(i) * components + c] = interp(to.pos[i]);
    }
    return g;
}

// The assembled system; unknowns sit on the real nodes followed by any ghosts.
struct Discrete {
    NodeSet carriers;
    SparseSystem sys;
};

Discrete discrete_system(const ProblemSpec& pb, const NodeSet& nodes, int phs_k, bool ghosts) {
    OperatorTableOptions opt;
    opt.k = phs_k;
    opt.skip_dirichlet = true;
    if (!ghosts) return {nodes, assemble(pb, nodes, build_operator_table(nodes, pb.operators(), opt))};
    GhostedNodes g = add_ghost_nodes(nodes);
    const WeightSet w = build_ghosted_table(g, pb.operators(), opt);
    SparseSystem sys = assemble(pb, g, w);
    return {std::move(g.nodes), std::move(sys)};
}

std::vector<double> real_part(const Eigen::VectorXd& x, std::size_t nodes, int components) {
    return {x.data(), x.data() + nodes * static_cast<std::size_t>(components)};
}

}  // namespace

std::string records_csv_header() {
    return "iter,nodes,eta_max,eta_min,e1,e2,einf,solver_iters,residual,ms_discretise,"
           "ms_weights,ms_solve,ms_indicator,ms_adapt,h_min,h_max,m2,m4,m6,m8";
}

std::string to_csv_row(const IterationRecord& r) {
    std::ostringstream s;
    s.precision(10);
    s << r.iteration << ',' << r.nodes << ',' << r.eta_max << ',' << r.eta_min << ',';
    if (r.error) s << r.error->l1 << ',' << r.error->l2 << ',' << r.error->linf << ',';
    else s << ",,,";
    s << r.solver_iterations << ',' << r.solver_residual << ',' << r.ms_discretise << ','
      << r.ms_weights << ',' << r.ms_solve << ',' << r.ms_indicator << ',' << r.ms_adapt << ','
      << r.h_min << ',' << r.h_max;
    for (auto c : r.order_histogram) s << ',' << c;
    return s.str();
}

SingleSolve solve_on_nodes(const ProblemSpec& problem, const NodeSet& nodes,
                           const SolverConfig& solver, int phs_k,
                           const std::optional<Eigen::VectorXd>& guess, bool ghost_nodes) {
    const int C = problem.components;
    const Discrete d = discrete_system(problem, nodes, phs_k, ghost_nodes);
    std::optional<Eigen::VectorXd> start = guess;
    if (guess && guess->size() == static_cast<Index>(nodes.size()) * C &&
        d.carriers.size() != nodes.size())
        start = warm_guess(nodes, std::span<const double>(guess->data(), guess->size()), d.carriers, C);
    SingleSolve out;
    out.solver = solve(d.sys, solver, start);
    out.solution = real_part(out.solver.solution, nodes.size(), C);
    return out;
}

AdaptiveResult adaptive_solve(const ProblemSpec& problem, const AdaptiveOptions& opt) {
    const AdaptivityParams& prm = opt.params;
    prm.validate();
    const int C = problem.components;
    const bool write = !opt.out_dir.empty();

    std::ofstream records;
    if (write) {
        std::filesystem::create_directories(opt.out_dir);
        auto meta = open_out(opt.out_dir / "meta");
        meta << "problem = " << problem.name << "\nseed = " << opt.seed
             << "\nstarted = " << timestamp() << '\n'
             << opt.meta;
        records = open_out(opt.out_dir / "records.csv");
        records << records_csv_header() << '\n' << std::flush;
    }

    AdaptiveResult result;
    SpacingField h_field = opt.h0;
    OrderField m_field = opt.m0;
    NodeSet prev_nodes;
    std::vector<double> prev_solution;
    std::vector<double> eta_history;
    double best_error = std::numeric_limits<double>::infinity();

    for (int it = 0;; ++it) {
        IterationRecord rec;
        rec.iteration = it;
        try {
            auto t = Clock::now();
            NodeSet nodes = problem.discretise(h_field, opt.seed, 10 * prm.n_max);
            for (std::size_t i = 0; i < nodes.size(); ++i) nodes.m[i] = m_field(nodes.pos[i]);
            rec.ms_discretise = ms_since(t);

            const Discrete d = discrete_system(problem, nodes, opt.phs_k, opt.ghost_nodes);
            rec.ms_weights = ms_since(t);

            std::optional<Eigen::VectorXd> guess;
            if (opt.warm_start && !prev_solution.empty())
                guess = warm_guess(prev_nodes, prev_solution, d.carriers, C);
            const SolveResult sr = solve(d.sys, opt.solver, guess);
            std::vector<double> u = real_part(sr.solution, nodes.size(), C);
            rec.ms_solve = ms_since(t);
            rec.solver_iterations = sr.iterations;
            rec.solver_residual = sr.residual;

            IndicatorField eta = imex_indicator(problem, u, nodes, opt.order_bump, opt.phs_k);
            rec.ms_indicator = ms_since(t);

            rec.nodes = nodes.size();
            rec.eta_max = eta.max;
            rec.eta_min = eta.min;
            if (problem.has_exact()) rec.error = error_norms(u, exact_values(problem, nodes));
            const auto [hlo, hhi] = std::minmax_element(nodes.h.begin(), nodes.h.end());
            rec.h_min = *hlo;
            rec.h_max = *hhi;
            for (int m : nodes.m) {
                const auto k = std::find(kAllowedOrders.begin(), kAllowedOrders.end(), m);
                if (k != kAllowedOrders.end()) ++rec.order_histogram[k - kAllowedOrders.begin()];
            }
            eta_history.push_back(eta.max);

            if (write) {
                auto nf = open_out(opt.out_dir / ("nodes_" + std::to_string(it) + ".csv"));
                write_nodes_csv(nf, nodes, eta.eta);
                auto ef = open_out(opt.out_dir / ("indicator_" + std::to_string(it) + ".csv"));
                ef << "iter,node_id,eta\n";
                write_indicator_rows(ef, it, eta.eta);
            }

            const bool better = !problem.has_exact() || rec.error->linf < best_error;
            const bool stop = stop_check(eta_history, it, prm.n_iter, prm.gamma);
            if (!stop) {
                auto actions = enforce_caps(nodes.size(), prm.n_max, mark(eta, prm));
                const AdaptTargets tg = adapt_targets(nodes, eta, actions, prm);
                TransferredFields next = transfer_fields(nodes, tg.h, tg.m, prm.h_max, prm.orders);
                h_field = std::move(next.h);
                m_field = std::move(next.m);
                rec.ms_adapt = ms_since(t);
            }

            if (better) {
                if (problem.has_exact()) best_error = rec.error->linf;
                result.nodes = nodes;
                result.solution = u;
                result.indicator = eta;
                result.reported_iteration = it;
            }
            result.records.push_back(rec);
            if (write) records << to_csv_row(rec) << '\n' << std::flush;
            const bool keep_going = !opt.on_iteration || opt.on_iteration(rec);
            if (stop || !keep_going) break;
            prev_nodes = std::move(nodes);
            prev_solution = std::move(u);
        } catch (const Error& e) {
            std::throw_with_nested(IterationFailure(it, e.what()));
        }
    }
    if (write) {
        auto meta = open_out(opt.out_dir / "meta", std::ios::app);
        meta << "finished = " << timestamp() << "\nreported_iteration = " << result.reported_iteration
             << '\n';
    }
    return result;
}

StudyResult unrefined_convergence_study(const ProblemSpec& problem, std::span<const double> hs,
                                        std::span<const int> ms, int seeds,
                                        std::uint64_t first_seed, const SolverConfig& solver,
                                        int phs_k, int order_bump, bool ghost_nodes) {
    if (!problem.has_exact()) throw Error("driver", "convergence study needs a closed form");
    StudyResult out;
    for (double h : hs) {
        for (int m : ms) {
            std::vector<double> n, e, eta;
            StudyRow row{h, m};
            for (int s = 0; s < seeds; ++s) {
                StudyCell cell;
                cell.h = h;
                cell.m = m;
                cell.seed = first_seed + static_cast<std::uint64_t>(s);
                try {
                    NodeSet nodes = problem.discretise(SpacingField::constant(h), cell.seed,
                                                       FillOptions{}.max_nodes);
                    std::fill(nodes.m.begin(), nodes.m.end(), m);
                    const SingleSolve r = solve_on_nodes(problem, nodes, solver, phs_k, std::nullopt, ghost_nodes);
                    cell.nodes = nodes.size();
                    cell.e_inf = error_norms(r.solution, exact_values(problem, nodes)).linf;
                    cell.eta_max = imex_indicator(problem, r.solution, nodes, order_bump, phs_k).max;
                    n.push_back(static_cast<double>(cell.nodes));
                    e.push_back(cell.e_inf);
                    eta.push_back(cell.eta_max);
                } catch (const Error& err) {
                    cell.failed = true;
                    cell.error = err.what();
                    ++row.failures;
                }
                out.cells.push_back(cell);
            }
            row.nodes = median(n);
            row.e_inf = median(e);
            row.eta_max = median(eta);
            out.rows.push_back(row);
        }
    }
    return out;
}

ResidualSample closed_form_residual(const ProblemSpec& problem, double h, int m,
                                    std::uint64_t seed, int phs_k) {
    if (!problem.has_exact()) throw Error("driver", "residual check needs a closed form");
    NodeSet nodes = problem.discretise(SpacingField::constant(h), seed, FillOptions{}.max_nodes);
    std::fill(nodes.m.begin(), nodes.m.end(), m);
    OperatorTableOptions opt;
    opt.k = phs_k;
    opt.skip_dirichlet = true;
    const WeightSet w = build_operator_table(nodes, problem.operators(), opt);
    const std::vector<double> u = exact_values(problem, nodes);
    ResidualSample out;
    out.nodes = nodes.size();
    std::size_t rows = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes.type[i] != NodeType::Interior) continue;
        for (const Equation& eq : node_equations(problem, nodes, w, i)) {
            double lhs = 0.0;
            for (const auto& [col, v] : eq.terms) lhs += v * u[static_cast<std::size_t>(col)];
            const double r = std::abs(lhs - eq.rhs);
            out.max = std::max(out.max, r);
            out.rms += r * r;
            ++rows;
        }
    }
    if (rows == 0) throw Error("driver", "no interior rows");
    out.rms = std::sqrt(out.rms / static_cast<double>(rows));
    return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("driver", "slope needs two or more points");
    double mx = 0, my = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace mfhp
