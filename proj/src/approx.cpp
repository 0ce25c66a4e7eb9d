#include "mfhp/approx.hpp"

#include <Eigen/LU>

#include <array>
#include <cmath>
#include <exception>
#include <mutex>

namespace mfhp {

namespace {

constexpr double kMaxCondition = 1e14;

using Exponents = std::array<int, 3>;

// All exponent tuples of total degree <= m, ordered by degree.
std::vector<Exponents> monomials(int m, int dim) {
    std::vector<Exponents> out;
    for (int deg = 0; deg <= m; ++deg) {
        if (dim == 2) {
            for (int i = deg; i >= 0; --i) out.push_back({i, deg - i, 0});
        } else {
            for (int i = deg; i >= 0; --i)
                for (int j = deg - i; j >= 0; --j) out.push_back({i, j, deg - i - j});
        }
    }
    return out;
}

// Operator applied to the monomial at the origin.
double monomial_at_origin(const Operator& op, const Exponents& e, int dim) {
    int total = 0;
    for (int a = 0; a < dim; ++a) total += e[a];
    switch (op.kind) {
        case Operator::Kind::Identity: return total == 0 ? 1.0 : 0.0;
        case Operator::Kind::Gradient: return (total == 1 && e[op.a] == 1) ? 1.0 : 0.0;
        case Operator::Kind::Hessian:
            if (total != 2) return 0.0;
            if (op.a == op.b) return e[op.a] == 2 ? 2.0 : 0.0;
            return (e[op.a] == 1 && e[op.b] == 1) ? 1.0 : 0.0;
        case Operator::Kind::Laplacian:
            if (total != 2) return 0.0;
            for (int a = 0; a < dim; ++a)
                if (e[a] == 2) return 2.0;
            return 0.0;
    }
    return 0.0;
}

}  // namespace

int Operator::order() const noexcept {
    switch (kind) {
        case Kind::Identity: return 0;
        case Kind::Gradient: return 1;
        case Kind::Hessian:
        case Kind::Laplacian: return 2;
    }
    return 0;
}

std::string Operator::name() const {
    static const char* axes = "xyz";
    switch (kind) {
        case Kind::Identity: return "identity";
        case Kind::Gradient: return std::string("d") + axes[a];
        case Kind::Hessian: return std::string("d") + axes[a] + axes[b];
        case Kind::Laplacian: return "laplacian";
    }
    return "?";
}

double PhsBasis::operator()(double r) const {
    if (k % 2 == 1) return std::pow(r, k);
    return r > 0.0 ? std::pow(r, k) * std::log(r) : 0.0;
}

double PhsBasis::apply(const Operator& op, const Point& v, int dim) const {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += v[a] * v[a];
    const double r = std::sqrt(r2);
    const bool odd = k % 2 == 1;
    if (op.kind == Operator::Kind::Identity) return (*this)(r);
    if (r == 0.0) return 0.0;

    const double rk2 = std::pow(r, k - 2);
    const double logr = odd ? 0.0 : std::log(r);
    // d/dx_a phi = g(r) v_a; second derivatives add (g'(r)/r) v_a v_b.
    const double g = odd ? k * rk2 : rk2 * (k * logr + 1.0);
    const double gp_over_r = odd ? k * (k - 2) * std::pow(r, k - 4)
                                 : std::pow(r, k - 4) * ((k - 2) * (k * logr + 1.0) + k);
    switch (op.kind) {
        case Operator::Kind::Gradient: return g * v[op.a];
        case Operator::Kind::Hessian:
            return (op.a == op.b ? g : 0.0) + gp_over_r * v[op.a] * v[op.b];
        case Operator::Kind::Laplacian: return dim * g + gp_over_r * r2;
        default: return 0.0;
    }
}

int monomial_count(int m, int dim) {
    // binomial(m + d, d)
    long num = 1, den = 1;
    for (int i = 1; i <= dim; ++i) {
        num *= m + i;
        den *= i;
    }
    return static_cast<int>(num / den);
}

int stencil_size(int m, int dim) { return 2 * monomial_count(m, dim); }

double phs_apply(int k, const Operator& op, const Point& center, const Point& node, int dim) {
    return PhsBasis{k}.apply(op, center - node, dim);
}

Eigen::MatrixXd compute_weights(const Point& center, std::span<const Point> stencil,
                                std::span<const Operator> ops, int k, int m, int dim,
                                Index node, double* condition) {
    const auto n = static_cast<Index>(stencil.size());
    const auto basis = monomials(m, dim);
    const auto nm = static_cast<Index>(basis.size());
    const PhsBasis phs{k};

    double scale = 0.0;
    for (const Point& p : stencil) scale = std::max(scale, (p - center).head(dim).norm());
    if (!(scale > 0.0) || n < nm) throw StencilDegenerate(node, std::numeric_limits<double>::infinity());

    std::vector<Point> y(stencil.size());
    for (Index i = 0; i < n; ++i) {
        y[i] = (stencil[i] - center) / scale;
        if (dim == 2) y[i][2] = 0.0;
    }

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + nm, n + nm);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < i; ++j) M(i, j) = M(j, i) = phs((y[i] - y[j]).norm());
    for (Index i = 0; i < n; ++i) {
        std::array<std::array<double, 16>, 3> pw{};
        for (int a = 0; a < dim; ++a) {
            pw[a][0] = 1.0;
            for (int e = 1; e <= m; ++e) pw[a][e] = pw[a][e - 1] * y[i][a];
        }
        for (Index l = 0; l < nm; ++l) {
            double v = 1.0;
            for (int a = 0; a < dim; ++a) v *= pw[a][basis[l][a]];
            M(i, n + l) = M(n + l, i) = v;
        }
    }

    Eigen::MatrixXd rhs(n + nm, static_cast<Index>(ops.size()));
    for (std::size_t o = 0; o < ops.size(); ++o) {
        const auto col = static_cast<Index>(o);
        for (Index i = 0; i < n; ++i) rhs(i, col) = phs.apply(ops[o], -y[i], dim);
        for (Index l = 0; l < nm; ++l) rhs(n + l, col) = monomial_at_origin(ops[o], basis[l], dim);
    }

    // Equilibrate the monomial block; the weights are unaffected.
    Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(n + nm);
    for (Index l = 0; l < nm; ++l) {
        const double mx = M.col(n + l).head(n).cwiseAbs().maxCoeff();
        if (mx > 0.0) col_scale[n + l] = 1.0 / mx;
    }
    M = col_scale.asDiagonal() * M * col_scale.asDiagonal();
    rhs = col_scale.asDiagonal() * rhs;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const double rcond = lu.rcond();
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (condition) *condition = cond;
    if (!(cond <= kMaxCondition)) throw StencilDegenerate(node, cond);

    Eigen::MatrixXd w = lu.solve(rhs).topRows(n);
    for (std::size_t o = 0; o < ops.size(); ++o)
        w.col(static_cast<Index>(o)) /= std::pow(scale, ops[o].order());
    if (!w.allFinite()) throw StencilDegenerate(node, cond);
    return w;
}

std::vector<double> compute_weights(const Point& center, std::span<const Point> stencil,
                                    const Operator& op, int k, int m, int dim, Index node) {
    const Eigen::MatrixXd w = compute_weights(center, stencil, std::span(&op, 1), k, m, dim, node);
    return {w.data(), w.data() + w.size()};
}

WeightSet::WeightSet(std::vector<Operator> ops, std::size_t nodes)
    : ops_(std::move(ops)), stencils_(nodes), weights_(nodes) {}

int WeightSet::slot(const Operator& op) const {
    for (std::size_t i = 0; i < ops_.size(); ++i)
        if (ops_[i] == op) return static_cast<int>(i);
    return -1;
}

bool WeightSet::has(std::size_t node, const Operator& op) const {
    return node < stencils_.size() && slot(op) >= 0 && !stencils_[node].empty();
}

std::span<const double> WeightSet::weights(std::size_t node, int s) const {
    const std::size_t n = stencils_[node].size();
    return std::span<const double>(weights_[node]).subspan(static_cast<std::size_t>(s) * n, n);
}

std::span<const double> WeightSet::weights(std::size_t node, const Operator& op) const {
    const int s = slot(op);
    if (s < 0) throw Error("approx", "operator " + op.name() + " not in weight set");
    return weights(node, s);
}

double WeightSet::apply(std::size_t node, const Operator& op,
                        std::span<const double> values) const {
    const auto w = weights(node, op);
    const auto st = stencil(node);
    double acc = 0.0;
    for (std::size_t i = 0; i < st.size(); ++i) acc += w[i] * values[static_cast<std::size_t>(st[i])];
    return acc;
}

void WeightSet::set(std::size_t node, std::vector<Index> stencil, const Eigen::MatrixXd& w) {
    stencils_[node] = std::move(stencil);
    weights_[node].assign(w.data(), w.data() + w.size());
}

WeightSet build_operator_table(const NodeSet& nodes, const std::vector<Operator>& ops,
                               const OperatorTableOptions& options) {
    WeightSet table(ops, ops.empty() ? 0 : nodes.size());
    if (ops.empty()) return table;
    const KdTree tree = nodes.tree();
    if (options.centers > nodes.size()) throw Error("approx", "more stencil centers than nodes");
    const auto count = static_cast<long>(options.centers ? options.centers : nodes.size());

    std::exception_ptr failure;
    std::mutex failure_lock;
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < count; ++i) {
        try {
            const auto node = static_cast<std::size_t>(i);
            if (options.skip_dirichlet && nodes.type[node] == NodeType::Dirichlet) continue;
            const int m = nodes.m[node] + options.order_bump;
            const auto n = static_cast<std::size_t>(stencil_size(m, nodes.dim));
            std::vector<Index> idx;
            std::vector<double> d2;
            tree.knn(nodes.pos[node], n, idx, d2);
            std::vector<Point> pts(n);
            for (std::size_t j = 0; j < n; ++j) pts[j] = nodes.pos[static_cast<std::size_t>(idx[j])];
            const Eigen::MatrixXd w =
                compute_weights(nodes.pos[node], pts, ops, options.k, m, nodes.dim, i);
            table.set(node, std::move(idx), w);
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_lock);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return table;
}

}  // namespace mfhp
