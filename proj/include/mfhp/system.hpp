#pragma once

#include "mfhp/approx.hpp"
#include "mfhp/core.hpp"
#include "mfhp/nodegen.hpp"
#include "mfhp/problems.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <optional>
#include <vector>

namespace mfhp {

/// One discrete equation: sum of coef * x[col] = rhs.
struct Equation {
    std::vector<std::pair<Index, double>> terms;
    double rhs = 0.0;
    bool imposed = false;  // boundary value enforced exactly (no residual)
};

/// The `components` equations of node i. Unknowns are node-major
/// interleaved: column = node * components + component.
std::vector<Equation> node_equations(const ProblemSpec& problem, const NodeSet& nodes,
                                     const WeightSet& weights, std::size_t i);

/// The governing-equation rows at node i, whatever its type.
std::vector<Equation> pde_equations(const ProblemSpec& problem, const NodeSet& nodes,
                                    const WeightSet& weights, std::size_t i);

struct SparseSystem {
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    Eigen::VectorXd rhs;
    int components = 1;

    Index unknowns() const noexcept { return matrix.rows(); }
};

/// Throws AssemblyIncomplete when a node lacks a stencil for an operator
/// its row needs.
SparseSystem assemble(const ProblemSpec& problem, const NodeSet& nodes, const WeightSet& weights);

/// Real nodes followed by ghost nodes placed outside the domain, one per
/// Neumann, traction or symmetry node at offset * h along its normal. The
/// owner also collocates the governing equation, which closes the system;
/// without this, derivative boundary rows admit spurious near-null modes.
struct GhostedNodes {
    NodeSet nodes;
    std::size_t real = 0;
    std::vector<Index> ghost;  // per real node: ghost index or -1
};

bool needs_ghost(NodeType type);
GhostedNodes add_ghost_nodes(const NodeSet& nodes, double offset = 1.0);

/// Stencils for the real nodes only, drawn from real and ghost nodes alike;
/// Dirichlet nodes get none.
WeightSet build_ghosted_table(const GhostedNodes& ghosted, const std::vector<Operator>& ops,
                              OperatorTableOptions options = {});

/// Unknowns and rows cover ghost nodes as well; the row block of a ghost holds
/// the governing equation of its owner.
SparseSystem assemble(const ProblemSpec& problem, const GhostedNodes& ghosted, const WeightSet& weights);

struct SolverConfig {
    double tolerance = 1e-15;     // relative residual
    int max_iterations = 300;
    double drop_tolerance = 1e-5;
    int fill_factor = 50;
    Index direct_below = 2000;    // dense LU for smaller systems; 0 disables
};

struct SolveResult {
    Eigen::VectorXd solution;
    int iterations = 0;
    double residual = 0.0;        // ||b - A x|| / ||b||
    bool converged = false;
    bool direct = false;
    std::vector<double> history;  // relative residual per iteration
};

/// BiCGSTAB with an incomplete-LU (threshold) preconditioner. Hitting the
/// iteration cap is reported through `converged`; breakdown that survives a
/// restart and non-finite residuals throw SolverFailure.
SolveResult solve(const SparseSystem& system, const SolverConfig& config = {},
                  const std::optional<Eigen::VectorXd>& guess = std::nullopt);

/// Writes "row col value" triplets, one per line.
void write_matrix(std::ostream& out, const SparseSystem& system);

}  // namespace mfhp
