#include "mfhp/adapt.hpp"

#include "mfhp/approx.hpp"
#include "mfhp/system.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mfhp {

namespace {

void check_band(const AdaptBand& b, const char* tag) {
    const std::string t(tag);
    if (!(b.alpha > 0.0 && b.alpha < 1.0)) throw ConfigError("alpha_" + t + " must lie in (0, 1)");
    if (!(b.beta > 0.0 && b.beta < 1.0)) throw ConfigError("beta_" + t + " must lie in (0, 1)");
    if (b.beta > b.alpha) throw ConfigError("beta_" + t + " must not exceed alpha_" + t);
    if (!(b.lambda >= 1.0)) throw ConfigError("lambda_" + t + " must be >= 1");
    if (!(b.theta >= 1.0)) throw ConfigError("theta_" + t + " must be >= 1");
}

}  // namespace

void AdaptivityParams::validate() const {
    check_band(h, "h");
    check_band(p, "p");
    if (!(h_max > 0.0)) throw ConfigError("h_max must be positive");
    if (n_max == 0) throw ConfigError("n_max must be positive");
    if (n_iter < 0) throw ConfigError("n_iter must be non-negative");
    if (gamma && !(*gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (orders.empty()) throw ConfigError("orders must not be empty");
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (std::find(kAllowedOrders.begin(), kAllowedOrders.end(), orders[i]) == kAllowedOrders.end())
            throw ConfigError("orders must be drawn from {2,4,6,8}");
        if (i > 0 && orders[i] <= orders[i - 1]) throw ConfigError("orders must be ascending");
    }
}

IndicatorField make_indicator(std::vector<double> eta, const NodeSet& nodes) {
    IndicatorField f;
    f.eta = std::move(eta);
    bool any = false;
    for (std::size_t i = 0; i < f.eta.size(); ++i) {
        if (nodes.type[i] == NodeType::Dirichlet) continue;
        if (!any || f.eta[i] > f.max) {
            f.max = f.eta[i];
            f.argmax = i;
        }
        f.min = any ? std::min(f.min, f.eta[i]) : f.eta[i];
        any = true;
    }
    return f;
}

IndicatorField imex_indicator(const ProblemSpec& problem, std::span<const double> solution,
                              const NodeSet& nodes, int order_bump, int phs_k) {
    const auto C = static_cast<std::size_t>(problem.components);
    if (solution.size() != nodes.size() * C)
        throw Error("adapt", "solution length does not match the node set");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes.type[i] == NodeType::Dirichlet) continue;
        const int m = nodes.m[i] + order_bump;
        if (std::find(kIndicatorOrders.begin(), kIndicatorOrders.end(), m) == kIndicatorOrders.end())
            throw Error("adapt", "indicator order " + std::to_string(m) + " outside {4,6,8,10}");
    }
    OperatorTableOptions opt;
    opt.k = phs_k;
    opt.order_bump = order_bump;
    opt.skip_dirichlet = true;
    const WeightSet explicit_ops = build_operator_table(nodes, problem.operators(), opt);

    std::vector<double> eta(nodes.size(), 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes.type[i] == NodeType::Dirichlet) continue;
        double sq = 0.0;
        for (const Equation& eq : node_equations(problem, nodes, explicit_ops, i)) {
            if (eq.imposed) continue;
            double lhs = 0.0;
            for (const auto& [col, v] : eq.terms) lhs += v * solution[static_cast<std::size_t>(col)];
            sq += (eq.rhs - lhs) * (eq.rhs - lhs);
        }
        eta[i] = std::sqrt(sq);
        if (!std::isfinite(eta[i])) throw Error("adapt", "non-finite indicator at node " + std::to_string(i));
    }
    return make_indicator(std::move(eta), nodes);
}

Action mark(double eta, double eta_max, double alpha, double beta) {
    if (eta > alpha * eta_max) return Action::Refine;
    if (eta < beta * eta_max) return Action::Derefine;
    return Action::None;
}

std::vector<MarkDecision> mark(const IndicatorField& f, const AdaptivityParams& params) {
    std::vector<MarkDecision> out(f.eta.size());
    for (std::size_t i = 0; i < f.eta.size(); ++i) {
        out[i].h = mark(f.eta[i], f.max, params.h.alpha, params.h.beta);
        out[i].p = mark(f.eta[i], f.max, params.p.alpha, params.p.beta);
    }
    return out;
}

double refine_factor(double eta, double eta_max, double alpha, double lambda) {
    const double band = eta_max - alpha * eta_max;
    if (!(band > 0.0)) return lambda;
    const double t = std::clamp((eta - alpha * eta_max) / band, 0.0, 1.0);
    return t * (lambda - 1.0) + 1.0;
}

double derefine_factor(double eta, double eta_max, double eta_min, double beta, double theta) {
    const double band = beta * eta_max - eta_min;
    if (!(band > 0.0)) return 1.0 / theta;
    const double t = std::clamp((beta * eta_max - eta) / band, 0.0, 1.0);
    return t * (1.0 / theta - 1.0) + 1.0;
}

double refine_spacing(double h_old, double eta, double eta_max, double alpha, double lambda) {
    return h_old / refine_factor(eta, eta_max, alpha, lambda);
}

double derefine_spacing(double h_old, double eta, double eta_max, double eta_min, double beta,
                        double theta) {
    return h_old / derefine_factor(eta, eta_max, eta_min, beta, theta);
}

int snap_order(double target, std::span<const int> allowed) {
    if (allowed.empty()) throw Error("adapt", "empty order set");
    const auto n = static_cast<int>(std::lround(target));
    int best = allowed.front();
    for (int a : allowed)  // ascending, so ">=" resolves ties upward
        if (std::abs(a - n) <= std::abs(best - n)) best = a;
    return best;
}

int update_order(int m_old, Action action, double factor, std::span<const int> allowed) {
    if (action == Action::None) return m_old;
    return snap_order(m_old * factor, allowed);
}

std::vector<MarkDecision> enforce_caps(std::size_t node_count, std::size_t n_max,
                                       std::vector<MarkDecision> actions) {
    if (node_count < n_max) return actions;
    for (auto& a : actions)
        if (a.h == Action::Refine) a.h = Action::None;
    return actions;
}

bool stop_check(std::span<const double> history, int iteration, int n_iter,
                std::optional<double> gamma) {
    if (history.empty()) throw Error("adapt", "stop check needs a non-empty history");
    if (iteration >= n_iter) return true;
    if (gamma && history.front() > 0.0 && history.back() / history.front() <= *gamma) return true;
    return false;
}

double target_order_guess(double m0, double e0, double e_target) {
    if (!(e0 > 0.0 && e_target > 0.0)) throw Error("adapt", "errors must be positive");
    return m0 + std::log(e_target / e0);
}

double complexity_ratio(int m_target, int m0, double h_target, double h0, int dim) {
    if (!(h_target > 0.0 && h0 > 0.0)) throw Error("adapt", "spacings must be positive");
    const double ct = monomial_count(m_target, dim), c0 = monomial_count(m0, dim);
    return std::pow(ct / c0, 3) * std::pow(h0 / h_target, dim);
}

OrderField OrderField::constant(int m) {
    OrderField f;
    f.constant_ = snap_order(m);
    return f;
}

OrderField::OrderField(std::vector<Point> carriers, std::vector<double> orders, int dim,
                       std::size_t neighbours, std::vector<int> allowed)
    : shepard_(std::in_place, std::move(carriers), std::move(orders), dim, neighbours),
      allowed_(std::move(allowed)) {}

int OrderField::operator()(const Point& p) const {
    return shepard_ ? snap_order((*shepard_)(p), allowed_) : constant_;
}

TransferredFields transfer_fields(const NodeSet& old_nodes, std::span<const double> h_new,
                                  std::span<const int> m_new, double h_max,
                                  std::span<const int> allowed) {
    if (h_new.size() != old_nodes.size() || m_new.size() != old_nodes.size())
        throw Error("adapt", "one target per node required");
    std::vector<std::size_t> carriers;
    for (std::size_t i = 0; i < old_nodes.size(); ++i)
        if (old_nodes.type[i] != NodeType::Dirichlet) carriers.push_back(i);
    if (carriers.empty())
        for (std::size_t i = 0; i < old_nodes.size(); ++i) carriers.push_back(i);

    std::vector<Point> pts;
    std::vector<double> hv, mv;
    for (std::size_t i : carriers) {
        pts.push_back(old_nodes.pos[i]);
        hv.push_back(h_new[i]);
        mv.push_back(m_new[i]);
    }
    const std::size_t nh = std::min<std::size_t>(30, pts.size());
    const std::size_t nm = std::min<std::size_t>(3, pts.size());
    return {SpacingField(pts, std::move(hv), old_nodes.dim, nh, 2.0, h_max),
            OrderField(std::move(pts), std::move(mv), old_nodes.dim, nm,
                       std::vector<int>(allowed.begin(), allowed.end()))};
}

AdaptTargets adapt_targets(const NodeSet& nodes, const IndicatorField& f,
                           std::span<const MarkDecision> actions, const AdaptivityParams& prm) {
    AdaptTargets t;
    t.h.resize(nodes.size());
    t.m.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double e = f.eta[i];
        double h = nodes.h[i];
        if (actions[i].h == Action::Refine) h = refine_spacing(h, e, f.max, prm.h.alpha, prm.h.lambda);
        else if (actions[i].h == Action::Derefine)
            h = derefine_spacing(h, e, f.max, f.min, prm.h.beta, prm.h.theta);
        t.h[i] = std::min(h, prm.h_max);

        double factor = 1.0;
        if (actions[i].p == Action::Refine) factor = refine_factor(e, f.max, prm.p.alpha, prm.p.lambda);
        else if (actions[i].p == Action::Derefine)
            factor = derefine_factor(e, f.max, f.min, prm.p.beta, prm.p.theta);
        t.m[i] = update_order(nodes.m[i], actions[i].p, factor, prm.orders);
    }
    return t;
}

void write_indicator_rows(std::ostream& out, int iteration, std::span<const double> eta) {
    out.precision(17);
    for (std::size_t i = 0; i < eta.size(); ++i) out << iteration << ',' << i << ',' << eta[i] << '\n';
}

}  // namespace mfhp
