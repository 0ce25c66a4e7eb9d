#pragma once

#include "mfhp/adapt.hpp"
#include "mfhp/problems.hpp"
#include "mfhp/system.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mfhp {

/// Raised when an adaptive iteration aborts; the original error is nested.
class IterationFailure : public Error {
public:
    IterationFailure(int iteration, const std::string& inner)
        : Error("driver", "iteration " + std::to_string(iteration) + ": " + inner),
          iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

struct IterationRecord {
    int iteration = 0;
    std::size_t nodes = 0;
    double eta_max = 0.0;
    double eta_min = 0.0;
    std::optional<ErrorNorms> error;
    int solver_iterations = 0;
    double solver_residual = 0.0;
    double ms_discretise = 0.0;
    double ms_weights = 0.0;  // includes assembly
    double ms_solve = 0.0;
    double ms_indicator = 0.0;
    double ms_adapt = 0.0;
    double h_min = 0.0;
    double h_max = 0.0;
    std::array<std::size_t, 4> order_histogram{};  // counts of m = 2, 4, 6, 8
};

std::string records_csv_header();
std::string to_csv_row(const IterationRecord& r);

struct AdaptiveOptions {
    AdaptivityParams params;
    SpacingField h0 = SpacingField::constant(0.1);
    OrderField m0 = OrderField::constant(2);
    std::uint64_t seed = 1;
    int phs_k = 3;
    int order_bump = 2;
    SolverConfig solver;
    bool warm_start = true;
    bool ghost_nodes = true;
    std::filesystem::path out_dir;  // empty: nothing written
    std::string meta;               // echoed into the meta file
    /// Called after every iteration; returning false ends the run early.
    std::function<bool(const IterationRecord&)> on_iteration;
};

struct AdaptiveResult {
    NodeSet nodes;                 // of the reported iteration
    std::vector<double> solution;  // node-major interleaved
    IndicatorField indicator;
    int reported_iteration = 0;
    std::vector<IterationRecord> records;
};

/// One discretise-solve pass on a fixed node set.
struct SingleSolve {
    std::vector<double> solution;  // real nodes only
    SolveResult solver;            // over every unknown, ghosts included
};

/// A guess sized for the real nodes is extended to ghost nodes by Shepard
/// interpolation.
SingleSolve solve_on_nodes(const ProblemSpec& problem, const NodeSet& nodes,
                           const SolverConfig& solver = {}, int phs_k = 3,
                           const std::optional<Eigen::VectorXd>& guess = std::nullopt,
                           bool ghost_nodes = true);

/// The hp-adaptive loop. Reports the iteration with the smallest relative
/// l-infinity error when a closed form exists, otherwise the last one.
AdaptiveResult adaptive_solve(const ProblemSpec& problem, const AdaptiveOptions& options);

struct StudyCell {
    double h = 0.0;
    int m = 2;
    std::uint64_t seed = 0;
    std::size_t nodes = 0;
    double e_inf = 0.0;
    double eta_max = 0.0;
    bool failed = false;
    std::string error;
};

struct StudyRow {
    double h = 0.0;
    int m = 2;
    double nodes = 0.0;  // medians over successful seeds
    double e_inf = 0.0;
    double eta_max = 0.0;
    int failures = 0;
};

struct StudyResult {
    std::vector<StudyCell> cells;
    std::vector<StudyRow> rows;
};

/// Non-adaptive solves over every (h, m, seed); medians per (h, m).
StudyResult unrefined_convergence_study(const ProblemSpec& problem, std::span<const double> hs,
                                        std::span<const int> ms, int seeds,
                                        std::uint64_t first_seed = 1, const SolverConfig& solver = {},
                                        int phs_k = 3, int order_bump = 2, bool ghost_nodes = true);

struct ResidualSample {
    std::size_t nodes = 0;
    double max = 0.0;  // over interior rows
    double rms = 0.0;
};

/// Interior residual of the assembled operator applied to the exact solution
/// on a uniform discretisation with order m everywhere.
ResidualSample closed_form_residual(const ProblemSpec& problem, double h, int m,
                                    std::uint64_t seed = 1, int phs_k = 3);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace mfhp
