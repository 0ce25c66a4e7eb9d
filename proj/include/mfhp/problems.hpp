#pragma once

#include "mfhp/approx.hpp"
#include "mfhp/core.hpp"
#include "mfhp/domain.hpp"
#include "mfhp/nodegen.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mfhp {

enum class PdeKind { Poisson, NavierCauchy };

/// Vector-valued data callback; scalar problems use component 0.
using FieldFn = std::function<Point(const Point&)>;
/// Boundary flux callback: normal derivative (scalar, component 0) for
/// Neumann nodes, traction vector for traction and symmetry nodes.
using FluxFn = std::function<Point(const Point& p, const Point& normal)>;

/// Everything needed to assemble and judge one benchmark.
struct ProblemSpec {
    std::string name;
    PdeKind pde = PdeKind::Poisson;
    int components = 1;
    double lame_lambda = 0.0;  // Navier-Cauchy only
    double lame_mu = 0.0;
    DomainShape shape = DomainShape::disc(Point::Zero(), 1.0);
    BoundaryClassifier classify;
    bool remove_corners = false;

    FieldFn source;     // interior right-hand side
    FieldFn dirichlet;  // prescribed values
    FluxFn flux;        // Neumann / traction data
    FieldFn exact;      // closed form, may be empty

    int dim() const noexcept { return shape.dim(); }
    bool has_exact() const noexcept { return static_cast<bool>(exact); }

    /// Operators the assembled rows reference.
    std::vector<Operator> operators() const;

    /// Discretises the shape with the problem's boundary classification.
    NodeSet discretise(const SpacingField& h, std::uint64_t seed, std::size_t max_nodes) const;
};

// ---- exponential peak -------------------------------------------------------

struct PeakParams {
    double strength = 1e3;
    Point source = Point(0.5, 1.0 / 3.0, 0.0);
};

double peak_value(const PeakParams& p, const Point& x, int dim);
Point peak_gradient(const PeakParams& p, const Point& x, int dim);
double peak_laplacian(const PeakParams& p, const Point& x, int dim);

/// Poisson problem with closed form exp(-a |x - x_s|^2). The boundary part
/// with x <= 1/2 carries Neumann data n . grad u, the rest Dirichlet data.
ProblemSpec peak_problem(const PeakParams& params = {},
                         const DomainShape& shape = DomainShape::disc(Point::Zero(), 1.0));

// ---- elasticity -------------------------------------------------------------

struct ElasticMaterial {
    double young = 0.0;
    double poisson = 0.0;

    double lame_lambda() const;
    double lame_mu() const;
    void validate() const;
};

struct FrettingParams {
    double length = 40e-3;     // L
    double width = 10e-3;      // W
    double thickness = 4e-3;   // t
    double normal_force = 543.0;         // F
    double tangential_force = 155.0;     // Q
    double axial_stress = 100e6;         // sigma_ax
    double pad_radius = 10e-3;           // R
    double friction = 0.3;               // mu_f
    ElasticMaterial sample{72.1e9, 0.33};
    ElasticMaterial pad{72.1e9, 0.33};
};

struct HertzConstants {
    double half_width = 0.0;     // a
    double peak_pressure = 0.0;  // p0
    double stick_half_width = 0.0;  // c
    double eccentricity = 0.0;   // e
    double combined_modulus = 0.0;  // E*
    double friction = 0.0;       // mu_f

    /// sigma_ax / (4 mu_f p0) + sqrt(1 - Q / (mu_f F)); must not exceed 1.
    double axial_margin = 0.0;
    /// The printed form 4 (1 - sqrt(1 - Q / (mu_f F))), reported for reference.
    double printed_axial_bound = 0.0;
};

/// Throws InvalidLoading when Q > mu_f F or the axial condition fails.
HertzConstants hertz_constants(const FrettingParams& p);

struct ContactTraction {
    double normal = 0.0;      // p(x)
    double tangential = 0.0;  // q(x)
};

ContactTraction contact_tractions(const HertzConstants& c, double x);

/// Plane-strain contact benchmark on [-L/2, L/2] x [-W/2, 0]: left edge
/// clamped, right edge axial traction, top edge Hertzian tractions, bottom
/// edge symmetry.
ProblemSpec fretting_spec(const FrettingParams& params = {});

/// Surface stress sample along the contact edge, SI units.
struct SurfaceSample {
    double x = 0.0;
    double sigma_xx = 0.0;
};

/// Reads an external `x,sigma_xx` reference table given in mm and MPa and
/// converts it to metres and pascals. A header line is optional.
std::vector<SurfaceSample> read_reference_csv(std::istream& in);

/// Mean |sigma_ref - sigma_num| over reference points with |x| <= half_width.
/// The numerical values are interpolated onto the reference abscissae by
/// Shepard's method with 2 neighbours. Throws when no reference point lies
/// under the contact.
double mean_contact_difference(std::span<const SurfaceSample> numeric,
                               std::span<const SurfaceSample> reference, double half_width);

struct BoussinesqParams {
    double force = -1.0;  // P
    ElasticMaterial material{1.0, 0.33};
    double epsilon = 0.1;
};

struct CylindricalDisplacement {
    double ur = 0.0, utheta = 0.0, uz = 0.0;
};

struct CylindricalStress {
    double rr = 0.0, tt = 0.0, zz = 0.0, rz = 0.0, rt = 0.0, tz = 0.0;
};

CylindricalDisplacement boussinesq_displacement_cyl(const BoussinesqParams& p, double r, double z);
CylindricalStress boussinesq_stress_cyl(const BoussinesqParams& p, double r, double z);
/// Cartesian displacement; on the z axis the radial part vanishes.
Point boussinesq_displacement(const BoussinesqParams& p, const Point& x);
/// Cartesian stress tensor.
Eigen::Matrix3d boussinesq_stress(const BoussinesqParams& p, const Point& x);

/// Point load on a half-space, solved on [-1, -eps]^3 with closed-form
/// Dirichlet data on all faces.
ProblemSpec boussinesq_spec(const BoussinesqParams& params = {});

struct StressField {
    std::vector<Eigen::Matrix3d> stress;  // plane strain in 2D (sigma_zz filled)
    std::vector<double> von_mises;
};

double von_mises(const Eigen::Matrix3d& s);

/// Small-strain Hooke stresses from discrete displacement gradients.
/// `displacement` is node-major interleaved (u_x, u_y[, u_z] per node).
StressField stress_and_vonmises(const NodeSet& nodes, std::span<const double> displacement,
                                const WeightSet& weights, const ElasticMaterial& material);

struct ErrorNorms {
    double l1 = 0.0, l2 = 0.0, linf = 0.0;
};

/// Relative l1, l2 and l-infinity errors; throws Error("problems", ...) when
/// the exact values have zero norm.
ErrorNorms error_norms(std::span<const double> numeric, std::span<const double> exact);

/// Exact values of a problem's closed form at the nodes (node-major).
std::vector<double> exact_values(const ProblemSpec& problem, const NodeSet& nodes);

}  // namespace mfhp
