#pragma once

#include "mfhp/core.hpp"
#include "mfhp/nodegen.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace mfhp {

/// Closed set of linear differential operators evaluated at a stencil center.
struct Operator {
    enum class Kind { Identity, Gradient, Hessian, Laplacian };

    Kind kind = Kind::Identity;
    int a = 0;  // derivative axis (Gradient, Hessian)
    int b = 0;  // second axis (Hessian)

    static Operator identity() { return {Kind::Identity, 0, 0}; }
    static Operator d(int axis) { return {Kind::Gradient, axis, 0}; }
    static Operator d2(int axis_a, int axis_b) {
        return {Kind::Hessian, std::min(axis_a, axis_b), std::max(axis_a, axis_b)};
    }
    static Operator laplacian() { return {Kind::Laplacian, 0, 0}; }

    /// Number of derivatives taken (0, 1 or 2).
    int order() const noexcept;
    std::string name() const;

    friend bool operator==(const Operator&, const Operator&) = default;
};

/// Polyharmonic spline r^k (odd k) or r^k log r (even k).
struct PhsBasis {
    int k = 3;

    double operator()(double r) const;

    /// Value of `op` applied in the first argument to phi(|x - y|), given
    /// v = x - y. At v = 0 returns the analytic limit (0 for k >= 3).
    double apply(const Operator& op, const Point& v, int dim) const;
};

/// n = 2 * binomial(m + d, m): twice the number of augmenting monomials.
int stencil_size(int m, int dim);

/// Number of monomials of total degree <= m in `dim` variables.
int monomial_count(int m, int dim);

/// Value of `phs.apply(op, center - node, dim)`.
double phs_apply(int k, const Operator& op, const Point& center, const Point& node, int dim);

/// RBF-FD weights for several operators over one stencil. Column j of the
/// result holds the weights of ops[j]. Polynomials of total degree <= m are
/// appended after shifting to the center and scaling by the stencil radius.
/// Throws StencilDegenerate (tagged with `node`) when the local saddle-point
/// system has a condition estimate above 1e14. The estimate is stored in
/// `condition` when given.
Eigen::MatrixXd compute_weights(const Point& center, std::span<const Point> stencil,
                                std::span<const Operator> ops, int k, int m, int dim,
                                Index node = -1, double* condition = nullptr);

/// Single-operator convenience overload.
std::vector<double> compute_weights(const Point& center, std::span<const Point> stencil,
                                    const Operator& op, int k, int m, int dim, Index node = -1);

/// Stencils and weights for every node and every requested operator.
class WeightSet {
public:
    WeightSet() = default;
    WeightSet(std::vector<Operator> ops, std::size_t nodes);

    std::size_t node_count() const noexcept { return stencils_.size(); }
    const std::vector<Operator>& operators() const noexcept { return ops_; }
    bool empty() const noexcept { return ops_.empty() || stencils_.empty(); }

    /// Slot of an operator in operators(), or -1 when absent.
    int slot(const Operator& op) const;
    bool has(std::size_t node, const Operator& op) const;

    std::span<const Index> stencil(std::size_t node) const { return stencils_[node]; }
    std::span<const double> weights(std::size_t node, int slot) const;
    std::span<const double> weights(std::size_t node, const Operator& op) const;

    /// Applies the operator at `node` to nodal values.
    double apply(std::size_t node, const Operator& op, std::span<const double> values) const;

    void set(std::size_t node, std::vector<Index> stencil, const Eigen::MatrixXd& w);

private:
    std::vector<Operator> ops_;
    std::vector<std::vector<Index>> stencils_;
    std::vector<std::vector<double>> weights_;  // column-major, n x ops
};

struct OperatorTableOptions {
    int k = 3;
    int order_bump = 0;  // added to every node's m (the IMEX indicator uses +2)
    bool skip_dirichlet = false;  // leave Dirichlet nodes without a stencil
    std::size_t centers = 0;      // only nodes [0, centers) get a stencil; 0 means all
};

/// Weights for every node using the nearest stencil_size(m_i + bump, d) nodes.
/// Work is spread over threads; results do not depend on scheduling.
WeightSet build_operator_table(const NodeSet& nodes, const std::vector<Operator>& ops,
                               const OperatorTableOptions& options = {});

}  // namespace mfhp
