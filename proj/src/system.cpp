#include "mfhp/system.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <limits>
#include <ostream>

namespace mfhp {

namespace {

std::span<const double> need(const WeightSet& w, std::size_t i, const Operator& op) {
    const int s = w.slot(op);
    if (s < 0 || i >= w.node_count() || w.stencil(i).empty()) throw AssemblyIncomplete(static_cast<Index>(i));
    return w.weights(i, s);
}

// Coefficients of traction component sum_c dir_c * (sigma n)_c on u_e at
// every stencil node.
void traction_terms(const ProblemSpec& pb, int d, const Point& n, const Point& dir,
                    std::span<const Index> st, const std::array<std::span<const double>, 3>& D,
                    Equation& eq) {
    const double lam = pb.lame_lambda, mu = pb.lame_mu;
    for (std::size_t j = 0; j < st.size(); ++j) {
        double ndj = 0.0;
        for (int b = 0; b < d; ++b) ndj += n[b] * D[b][j];
        for (int e = 0; e < d; ++e) {
            double coef = 0.0;
            for (int c = 0; c < d; ++c) {
                if (dir[c] == 0.0) continue;
                double v = lam * n[c] * D[e][j] + mu * n[e] * D[c][j];
                if (c == e) v += mu * ndj;
                coef += dir[c] * v;
            }
            if (coef != 0.0) eq.terms.emplace_back(st[j] * d + e, coef);
        }
    }
}

}  // namespace

std::vector<Equation> pde_equations(const ProblemSpec& pb, const NodeSet& nodes,
                                    const WeightSet& weights, std::size_t i) {
    const int d = nodes.dim;
    const int C = pb.components;
    const Point& x = nodes.pos[i];
    std::vector<Equation> eqs(static_cast<std::size_t>(C));
    if (i >= weights.node_count() || weights.stencil(i).empty())
        throw AssemblyIncomplete(static_cast<Index>(i));
    const auto st = weights.stencil(i);

    if (pb.pde == PdeKind::Poisson) {
        const auto w = need(weights, i, Operator::laplacian());
        for (std::size_t j = 0; j < st.size(); ++j) eqs[0].terms.emplace_back(st[j], w[j]);
        eqs[0].rhs = pb.source(x)[0];
        return eqs;
    }

    const double lam = pb.lame_lambda, mu = pb.lame_mu;
    std::array<std::array<std::span<const double>, 3>, 3> H;
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) H[a][b] = H[b][a] = need(weights, i, Operator::d2(a, b));
    const Point f = pb.source(x);
    for (int c = 0; c < C; ++c) {
        Equation& eq = eqs[c];
        for (std::size_t j = 0; j < st.size(); ++j) {
            double lap = 0.0;
            for (int a = 0; a < d; ++a) lap += H[a][a][j];
            for (int e = 0; e < d; ++e) {
                double coef = (lam + mu) * H[c][e][j];
                if (c == e) coef += mu * lap;
                eq.terms.emplace_back(st[j] * C + e, coef);
            }
        }
        eq.rhs = f[c];
    }
    return eqs;
}

std::vector<Equation> node_equations(const ProblemSpec& pb, const NodeSet& nodes,
                                     const WeightSet& weights, std::size_t i) {
    const int d = nodes.dim;
    const int C = pb.components;
    const Point& x = nodes.pos[i];
    const Point& n = nodes.normal[i];
    const NodeType type = nodes.type[i];
    std::vector<Equation> eqs(static_cast<std::size_t>(C));
    const auto self = static_cast<Index>(i);

    if (type == NodeType::Dirichlet) {
        const Point g = pb.dirichlet(x);
        for (int c = 0; c < C; ++c) eqs[c] = {{{self * C + c, 1.0}}, g[c], true};
        return eqs;
    }

    if (i >= weights.node_count() || weights.stencil(i).empty()) throw AssemblyIncomplete(self);

    if (pb.pde == PdeKind::Poisson) {
        Equation& eq = eqs[0];
        if (type == NodeType::Interior) {
            return pde_equations(pb, nodes, weights, i);
        } else if (type == NodeType::Neumann) {
            const auto st = weights.stencil(i);
            eq.terms.resize(st.size());
            for (std::size_t j = 0; j < st.size(); ++j) eq.terms[j] = {st[j], 0.0};
            for (int a = 0; a < d; ++a) {
                const auto w = need(weights, i, Operator::d(a));
                for (std::size_t j = 0; j < st.size(); ++j) eq.terms[j].second += n[a] * w[j];
            }
            eq.rhs = pb.flux(x, n)[0];
        } else {
            throw Error("system", "node type " + std::string(to_string(type)) +
                                      " is not valid for a scalar problem");
        }
        return eqs;
    }

    // Navier-Cauchy
    if (type == NodeType::Interior) return pde_equations(pb, nodes, weights, i);
    const auto st = weights.stencil(i);

    std::array<std::span<const double>, 3> D;
    for (int a = 0; a < d; ++a) D[a] = need(weights, i, Operator::d(a));

    if (type == NodeType::Traction) {
        const Point t = pb.flux(x, n);
        for (int c = 0; c < C; ++c) {
            traction_terms(pb, d, n, Point::Unit(c), st, D, eqs[c]);
            eqs[c].rhs = t[c];
        }
        return eqs;
    }

    if (type == NodeType::Symmetry) {
        int k = 0;
        for (int a = 1; a < d; ++a)
            if (std::abs(n[a]) > std::abs(n[k])) k = a;
        Equation& fix = eqs[k];
        for (int e = 0; e < d; ++e)
            if (n[e] != 0.0) fix.terms.emplace_back(self * C + e, n[e]);
        fix.rhs = 0.0;
        fix.imposed = true;
        const Point t = pb.flux(x, n);
        for (int c = 0; c < d; ++c) {
            if (c == k) continue;
            Point tau = Point::Unit(c) - n[c] * n;
            tau /= tau.norm();
            traction_terms(pb, d, n, tau, st, D, eqs[c]);
            eqs[c].rhs = tau.dot(t);
        }
        return eqs;
    }

    throw Error("system", "node type " + std::string(to_string(type)) +
                              " is not valid for an elasticity problem");
}

SparseSystem assemble(const ProblemSpec& pb, const NodeSet& nodes, const WeightSet& weights) {
    const int C = pb.components;
    const auto N = static_cast<Index>(nodes.size()) * C;
    std::vector<Eigen::Triplet<double, Index>> trip;
    trip.reserve(nodes.size() * static_cast<std::size_t>(C) * 30);
    SparseSystem sys;
    sys.components = C;
    sys.rhs.resize(N);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto eqs = node_equations(pb, nodes, weights, i);
        for (int c = 0; c < C; ++c) {
            const Index row = static_cast<Index>(i) * C + c;
            for (const auto& [col, v] : eqs[c].terms) trip.emplace_back(row, col, v);
            sys.rhs[row] = eqs[c].rhs;
        }
    }
    sys.matrix.resize(N, N);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();
    return sys;
}

bool needs_ghost(NodeType t) {
    return t == NodeType::Neumann || t == NodeType::Traction || t == NodeType::Symmetry;
}

GhostedNodes add_ghost_nodes(const NodeSet& nodes, double offset) {
    if (!(offset > 0.0)) throw Error("system", "ghost offset must be positive");
    GhostedNodes g;
    g.nodes = nodes;
    g.real = nodes.size();
    g.ghost.assign(nodes.size(), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!needs_ghost(nodes.type[i])) continue;
        g.ghost[i] = static_cast<Index>(g.nodes.size());
        g.nodes.push_back(nodes.pos[i] + offset * nodes.h[i] * nodes.normal[i], NodeType::Interior,
                          Point::Zero(), nodes.h[i], nodes.m[i], -1);
    }
    return g;
}

WeightSet build_ghosted_table(const GhostedNodes& g, const std::vector<Operator>& ops,
                              OperatorTableOptions options) {
    options.centers = g.real;
    options.skip_dirichlet = true;
    return build_operator_table(g.nodes, ops, options);
}

SparseSystem assemble(const ProblemSpec& pb, const GhostedNodes& g, const WeightSet& weights) {
    const int C = pb.components;
    const auto N = static_cast<Index>(g.nodes.size()) * C;
    std::vector<Eigen::Triplet<double, Index>> trip;
    trip.reserve(g.nodes.size() * static_cast<std::size_t>(C) * 30);
    SparseSystem sys;
    sys.components = C;
    sys.rhs.resize(N);
    auto put = [&](Index node, const std::vector<Equation>& eqs) {
        for (int c = 0; c < C; ++c) {
            const Index row = node * C + c;
            for (const auto& [col, v] : eqs[c].terms) trip.emplace_back(row, col, v);
            sys.rhs[row] = eqs[c].rhs;
        }
    };
    for (std::size_t i = 0; i < g.real; ++i) {
        put(static_cast<Index>(i), node_equations(pb, g.nodes, weights, i));
        // the governing equation at the boundary node closes the ghost unknowns
        if (g.ghost[i] >= 0) put(g.ghost[i], pde_equations(pb, g.nodes, weights, i));
    }
    sys.matrix.resize(N, N);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();
    return sys;
}

namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Divides every row (and its right-hand side) by its largest coefficient.
// Elasticity rows otherwise span many orders of magnitude.
SparseSystem equilibrated(const SparseSystem& sys) {
    SparseSystem out = sys;
    for (Index r = 0; r < out.matrix.outerSize(); ++r) {
        double mx = 0.0;
        for (RowMatrix::InnerIterator it(out.matrix, r); it; ++it) mx = std::max(mx, std::abs(it.value()));
        if (!(mx > 0.0)) continue;
        for (RowMatrix::InnerIterator it(out.matrix, r); it; ++it) it.valueRef() /= mx;
        out.rhs[r] /= mx;
    }
    return out;
}

SolveResult solve_direct(const SparseSystem& sys) {
    const Eigen::MatrixXd dense(sys.matrix);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
    SolveResult out;
    out.solution = lu.solve(sys.rhs);
    out.direct = true;
    const double bn = sys.rhs.norm();
    out.residual = (sys.rhs - sys.matrix * out.solution).norm() / (bn > 0 ? bn : 1.0);
    if (!std::isfinite(out.residual) || !out.solution.allFinite())
        throw SolverFailure("direct solve produced non-finite values", {});
    out.converged = true;
    out.history.push_back(out.residual);
    return out;
}

}  // namespace

SolveResult solve(const SparseSystem& sys, const SolverConfig& cfg,
                  const std::optional<Eigen::VectorXd>& guess) {
    const Index N = sys.unknowns();
    if (guess && guess->size() != N) throw Error("system", "initial guess has the wrong size");
    if (N == 0) return {};
    using Vec = Eigen::VectorXd;
    if (sys.rhs.norm() == 0.0) {
        SolveResult out;
        out.solution = Vec::Zero(N);
        out.converged = true;
        return out;
    }
    const SparseSystem scaled = equilibrated(sys);
    const double original_bnorm = sys.rhs.norm();
    if (N < cfg.direct_below) {
        SolveResult out = solve_direct(scaled);
        out.residual = (sys.rhs - sys.matrix * out.solution).norm() / original_bnorm;
        return out;
    }

    const auto& A = scaled.matrix;
    const Vec& b = scaled.rhs;
    SolveResult out;
    const double bnorm = b.norm();

    Eigen::IncompleteLUT<double> ilu;
    ilu.setDroptol(cfg.drop_tolerance);
    ilu.setFillfactor(cfg.fill_factor);
    ilu.compute(A);
    if (ilu.info() != Eigen::Success) throw SolverFailure("incomplete LU factorisation failed", {});

    Vec x = guess ? *guess : Vec::Zero(N);
    Vec r = b - A * x;
    Vec rhat = r;
    double rel = r.norm() / bnorm;
    out.history.push_back(rel);
    Vec best = x;
    double best_rel = rel;
    if (!std::isfinite(rel)) throw SolverFailure("non-finite initial residual", out.history);

    Vec p = Vec::Zero(N), v = Vec::Zero(N), y, z, s, t;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    const double eps2 = std::numeric_limits<double>::epsilon() * std::numeric_limits<double>::epsilon();
    bool just_restarted = false;
    bool restart_pending = false;

    int it = 0;
    while (rel > cfg.tolerance && it < cfg.max_iterations) {
        double rho_new = rhat.dot(r);
        if (restart_pending || std::abs(rho_new) <= eps2 * rhat.squaredNorm()) {
            if (just_restarted) throw SolverFailure("BiCGSTAB breakdown", out.history);
            // restart from the current iterate
            r = b - A * x;
            rhat = r;
            rho_new = r.squaredNorm();
            p.setZero();
            v.setZero();
            rho = alpha = omega = 1.0;
            just_restarted = true;
            restart_pending = false;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p = r + beta * (p - omega * v);
        y = ilu.solve(p);
        v = A * y;
        const double denom = rhat.dot(v);
        if (denom == 0.0 || !std::isfinite(denom)) {
            if (just_restarted) throw SolverFailure("BiCGSTAB breakdown", out.history);
            restart_pending = true;
            continue;
        }
        alpha = rho / denom;
        s = r - alpha * v;
        z = ilu.solve(s);
        t = A * z;
        const double tt = t.squaredNorm();
        omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
        x += alpha * y + omega * z;
        r = s - omega * t;
        ++it;
        rel = r.norm() / bnorm;
        out.history.push_back(rel);
        if (!std::isfinite(rel)) throw SolverFailure("non-finite residual", out.history);
        if (rel < best_rel) {
            best_rel = rel;
            best = x;
        }
        just_restarted = false;
        if (omega == 0.0) restart_pending = true;
    }

    out.iterations = it;
    out.solution = std::move(best);
    out.residual = (sys.rhs - sys.matrix * out.solution).norm() / original_bnorm;
    out.converged = best_rel <= cfg.tolerance;
    return out;
}

void write_matrix(std::ostream& out, const SparseSystem& sys) {
    out.precision(17);
    for (Index r = 0; r < sys.matrix.outerSize(); ++r)
        for (RowMatrix::InnerIterator itr(sys.matrix, r); itr; ++itr)
            out << itr.row() << ' ' << itr.col() << ' ' << itr.value() << '\n';
}

}  // namespace mfhp
