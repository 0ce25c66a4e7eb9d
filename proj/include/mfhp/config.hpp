#pragma once

#include "mfhp/adapt.hpp"
#include "mfhp/problems.hpp"
#include "mfhp/system.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfhp {

/// Run configuration as written by the user. Values are kept in input units
/// so that parse -> serialize -> parse is exact; the fretting problem takes
/// lengths in mm, stresses and moduli in MPa, forces in N. The peak and
/// Boussinesq problems are dimensionless.
struct RunConfig {
    std::string problem = "peak";

    AdaptBand h_band;
    AdaptBand p_band;
    double h_max = 0.1;
    std::size_t n_max = 250000;
    int n_iter = 70;
    std::optional<double> gamma;
    std::vector<int> orders{2, 4, 6, 8};

    double h0 = 0.03;  // initial uniform spacing
    int m0 = 2;        // initial order
    int phs_k = 3;
    int order_bump = 2;
    bool warm_start = true;
    bool ghost_nodes = true;  // stabilises derivative boundary rows

    double solver_tolerance = 1e-15;
    int solver_max_iterations = 300;
    double solver_drop_tolerance = 1e-5;
    int solver_fill_factor = 50;
    int solver_direct_below = 2000;

    std::uint64_t seed = 1;
    std::string out = "run";
    std::string ref;  // fretting reference CSV (x, sigma_xx in mm, MPa)

    std::vector<double> study_h;
    std::vector<int> study_m;
    int study_seeds = 3;

    // peak
    double peak_strength = 1e3;
    double peak_source_x = 0.5;
    double peak_source_y = 1.0 / 3.0;

    // elasticity: fretting uses MPa, Boussinesq is dimensionless
    double young = 1.0;
    double poisson = 0.33;
    double pad_young = 72100.0;
    double pad_poisson = 0.33;
    double force = -1.0;  // Boussinesq point load
    double epsilon = 0.1;

    // fretting geometry and loads
    double length = 40.0;
    double width = 10.0;
    double thickness = 4.0;
    double pad_radius = 10.0;
    double normal_force = 543.0;
    double tangential_force = 155.0;
    double axial_stress = 100.0;
    double friction = 0.3;

    bool operator==(const RunConfig&) const = default;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    /// Factor converting configured lengths to metres (1e-3 for fretting).
    double length_scale() const;

    AdaptivityParams adaptivity() const;  // lengths in SI
    SolverConfig solver() const;
    ProblemSpec make_problem() const;
    FrettingParams fretting() const;
    PeakParams peak() const;
    BoussinesqParams boussinesq() const;
    /// Material of the discretised body in SI.
    ElasticMaterial material() const;
};

inline const std::vector<std::string> kProblemNames{"peak", "fretting", "boussinesq"};

/// Defaults of the given benchmark; throws ConfigError for an unknown name.
RunConfig default_config(const std::string& problem);

/// Parses `key = value` lines ('#' starts a comment). Missing keys take the
/// problem's defaults; `problem` may be overridden by the caller. Unknown or
/// repeated keys, malformed values and constraint violations raise ConfigError.
RunConfig parse_config(std::string_view text,
                       const std::optional<std::string>& problem_override = std::nullopt);

/// Every key, one per line, with shortest round-trip number formatting.
std::string serialize_config(const RunConfig& config);

/// Names of all recognised keys, in serialization order.
std::vector<std::string> config_keys();

}  // namespace mfhp
