#pragma once

#include "mfhp/core.hpp"
#include "mfhp/interp.hpp"
#include "mfhp/nodegen.hpp"
#include "mfhp/problems.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace mfhp {

inline constexpr std::array<int, 4> kAllowedOrders{2, 4, 6, 8};
inline constexpr std::array<int, 4> kIndicatorOrders{4, 6, 8, 10};

/// Thresholds and aggressiveness of one adaptivity channel (h or p).
struct AdaptBand {
    double alpha = 0.5;   // refine above alpha * eta_max
    double beta = 0.1;    // derefine below beta * eta_max
    double lambda = 1.0;  // refinement aggressiveness
    double theta = 1.0;   // de-refinement aggressiveness

    bool operator==(const AdaptBand&) const = default;
};

struct AdaptivityParams {
    AdaptBand h;
    AdaptBand p;
    double h_max = 0.1;
    std::size_t n_max = 100000;
    int n_iter = 10;
    std::optional<double> gamma;
    std::vector<int> orders{kAllowedOrders.begin(), kAllowedOrders.end()};

    /// Throws ConfigError naming the offending parameter.
    void validate() const;
};

struct IndicatorField {
    std::vector<double> eta;
    double max = 0.0;  // over non-Dirichlet nodes
    double min = 0.0;
    std::size_t argmax = 0;
};

/// Wraps raw indicator values and caches the extrema over non-Dirichlet nodes.
IndicatorField make_indicator(std::vector<double> eta, const NodeSet& nodes);

/// IMEX error indicator: residual of the problem's rows rebuilt with order
/// m_i + order_bump, evaluated on the implicit solution. Zero at Dirichlet
/// nodes and on exactly imposed rows.
IndicatorField imex_indicator(const ProblemSpec& problem, std::span<const double> solution,
                              const NodeSet& nodes, int order_bump = 2, int phs_k = 3);

enum class Action : std::uint8_t { Refine, None, Derefine };

struct MarkDecision {
    Action h = Action::None;
    Action p = Action::None;
};

Action mark(double eta, double eta_max, double alpha, double beta);
std::vector<MarkDecision> mark(const IndicatorField& eta, const AdaptivityParams& params);

/// Divisor D >= 1 applied to h on refinement.
double refine_factor(double eta, double eta_max, double alpha, double lambda);
/// Divisor D' in [1/theta, 1] applied to h on de-refinement.
double derefine_factor(double eta, double eta_max, double eta_min, double beta, double theta);

double refine_spacing(double h_old, double eta, double eta_max, double alpha, double lambda);
double derefine_spacing(double h_old, double eta, double eta_max, double eta_min, double beta,
                        double theta);

/// Rounds to the nearest integer, then to the nearest allowed order (ties
/// upward); values outside the set clamp to its ends. `allowed` is ascending.
int snap_order(double target, std::span<const int> allowed = kAllowedOrders);

/// m_old * factor snapped to the allowed set; unchanged for Action::None.
int update_order(int m_old, Action action, double factor,
                 std::span<const int> allowed = kAllowedOrders);

/// Drops h-refinement once the node count reaches n_max.
std::vector<MarkDecision> enforce_caps(std::size_t node_count, std::size_t n_max,
                                       std::vector<MarkDecision> actions);

bool stop_check(std::span<const double> eta_max_history, int iteration, int n_iter,
                std::optional<double> gamma);

/// m_0 + ln(e_t / e_0), unrounded.
double target_order_guess(double m0, double e0, double e_target);

/// Cost ratio C(m_t+d, d)^3 h_t^-d / (C(m_0+d, d)^3 h_0^-d).
double complexity_ratio(int m_target, int m0, double h_target, double h0, int dim);

/// Order field over the whole domain: constant or Shepard-interpolated from
/// carriers and snapped to the allowed set.
class OrderField {
public:
    static OrderField constant(int m);
    OrderField(std::vector<Point> carriers, std::vector<double> orders, int dim,
               std::size_t neighbours = 3,
               std::vector<int> allowed = {kAllowedOrders.begin(), kAllowedOrders.end()});

    int operator()(const Point& p) const;

private:
    OrderField() = default;
    int constant_ = 2;
    std::optional<ShepardInterpolant> shepard_;
    std::vector<int> allowed_{kAllowedOrders.begin(), kAllowedOrders.end()};
};

struct TransferredFields {
    SpacingField h;
    OrderField m;
};

/// Builds the next spacing and order fields from per-node targets. Dirichlet
/// nodes are not used as carriers unless every node is Dirichlet.
TransferredFields transfer_fields(const NodeSet& old_nodes, std::span<const double> h_new,
                                  std::span<const int> m_new, double h_max,
                                  std::span<const int> allowed = kAllowedOrders);

struct AdaptTargets {
    std::vector<double> h;
    std::vector<int> m;
};

/// Applies the spacing and order rules node by node.
AdaptTargets adapt_targets(const NodeSet& nodes, const IndicatorField& eta,
                           std::span<const MarkDecision> actions, const AdaptivityParams& params);

/// Appends `iter,node_id,eta` rows (no header).
void write_indicator_rows(std::ostream& out, int iteration, std::span<const double> eta);

}  // namespace mfhp
