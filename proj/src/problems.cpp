#include "mfhp/problems.hpp"

#include "mfhp/interp.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <sstream>

namespace mfhp {

std::vector<Operator> ProblemSpec::operators() const {
    const int d = dim();
    std::vector<Operator> ops;
    if (pde == PdeKind::Poisson) {
        ops.push_back(Operator::laplacian());
    } else {
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) ops.push_back(Operator::d2(a, b));
    }
    for (int a = 0; a < d; ++a) ops.push_back(Operator::d(a));
    return ops;
}

NodeSet ProblemSpec::discretise(const SpacingField& h, std::uint64_t seed,
                                std::size_t max_nodes) const {
    FillOptions opt;
    opt.classify = classify;
    opt.max_nodes = max_nodes;
    NodeSet nodes = fill_domain(shape, h, seed, opt);
    if (remove_corners) nodes = remove_corner_nodes(nodes, shape);
    return nodes;
}

// ---- peak -------------------------------------------------------------------

double peak_value(const PeakParams& p, const Point& x, int dim) {
    const double r2 = (x - p.source).head(dim).squaredNorm();
    return std::exp(-p.strength * r2);
}

Point peak_gradient(const PeakParams& p, const Point& x, int dim) {
    Point g = Point::Zero();
    g.head(dim) = -2.0 * p.strength * (x - p.source).head(dim) * peak_value(p, x, dim);
    return g;
}

double peak_laplacian(const PeakParams& p, const Point& x, int dim) {
    const double r2 = (x - p.source).head(dim).squaredNorm();
    const double a = p.strength;
    return 2.0 * a * std::exp(-a * r2) * (2.0 * a * r2 - dim);
}

ProblemSpec peak_problem(const PeakParams& params, const DomainShape& shape) {
    if (!(params.strength > 0.0)) throw Error("problems", "peak strength must be positive");
    ProblemSpec s;
    s.name = "peak";
    s.pde = PdeKind::Poisson;
    s.components = 1;
    s.shape = shape;
    const int d = shape.dim();
    s.classify = [](const Point& p, const Point&, int) {
        return p[0] <= 0.5 ? NodeType::Neumann : NodeType::Dirichlet;
    };
    s.source = [params, d](const Point& x) { return Point(peak_laplacian(params, x, d), 0, 0); };
    s.dirichlet = [params, d](const Point& x) { return Point(peak_value(params, x, d), 0, 0); };
    s.flux = [params, d](const Point& x, const Point& n) {
        return Point(n.dot(peak_gradient(params, x, d)), 0, 0);
    };
    s.exact = s.dirichlet;
    return s;
}

// ---- elasticity -------------------------------------------------------------

double ElasticMaterial::lame_lambda() const {
    return young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
}

double ElasticMaterial::lame_mu() const { return young / (2.0 * (1.0 + poisson)); }

void ElasticMaterial::validate() const {
    if (!(young > 0.0)) throw Error("problems", "Young's modulus must be positive");
    if (!(poisson > 0.0 && poisson < 0.5))
        throw Error("problems", "Poisson ratio must lie in (0, 0.5)");
}

HertzConstants hertz_constants(const FrettingParams& p) {
    p.sample.validate();
    p.pad.validate();
    const double F = p.normal_force, Q = p.tangential_force, R = p.pad_radius;
    const double t = p.thickness, mu = p.friction;
    if (!(F > 0.0 && R > 0.0 && t > 0.0 && mu > 0.0))
        throw InvalidLoading("force, pad radius, thickness and friction must be positive");

    HertzConstants c;
    c.friction = mu;
    c.combined_modulus =
        1.0 / ((1.0 - p.sample.poisson * p.sample.poisson) / p.sample.young +
               (1.0 - p.pad.poisson * p.pad.poisson) / p.pad.young);
    const double Es = c.combined_modulus;
    c.half_width = 2.0 * std::sqrt(F * R / (t * std::numbers::pi * Es));
    c.peak_pressure = std::sqrt(F * Es / (t * std::numbers::pi * R));

    if (std::abs(Q) > mu * F) throw InvalidLoading("Q <= mu_f F violated");
    const double slip = std::sqrt(1.0 - std::abs(Q) / (mu * F));
    c.stick_half_width = c.half_width * slip;
    const double sgn = Q > 0.0 ? 1.0 : (Q < 0.0 ? -1.0 : 0.0);
    c.eccentricity = sgn * c.half_width * p.axial_stress / (4.0 * mu * c.peak_pressure);
    c.axial_margin = p.axial_stress / (4.0 * mu * c.peak_pressure) + slip;
    c.printed_axial_bound = 4.0 * (1.0 - slip);
    if (c.axial_margin > 1.0)
        throw InvalidLoading("sigma_ax / (4 mu_f p0) + sqrt(1 - Q / (mu_f F)) <= 1 violated");
    return c;
}

ContactTraction contact_tractions(const HertzConstants& c, double x) {
    const double a = c.half_width;
    ContactTraction out;
    if (std::abs(x) >= a) return out;
    const double ellipse = std::sqrt(1.0 - x * x / (a * a));
    out.normal = c.peak_pressure * ellipse;
    out.tangential = -c.friction * c.peak_pressure * ellipse;
    const double dx = x - c.eccentricity;
    const double cs = c.stick_half_width;
    if (std::abs(dx) < cs)
        out.tangential += c.friction * c.peak_pressure * (cs / a) * std::sqrt(1.0 - dx * dx / (cs * cs));
    return out;
}

ProblemSpec fretting_spec(const FrettingParams& params) {
    const HertzConstants hc = hertz_constants(params);
    ProblemSpec s;
    s.name = "fretting";
    s.pde = PdeKind::NavierCauchy;
    s.components = 2;
    s.lame_lambda = params.sample.lame_lambda();
    s.lame_mu = params.sample.lame_mu();
    s.shape = DomainShape::symmetric_rectangle(Point(-params.length / 2, -params.width / 2, 0),
                                               Point(params.length / 2, 0, 0));
    s.remove_corners = true;
    // face ids: 0 left, 1 right, 2 bottom, 3 top (corners report 0 or 1)
    s.classify = [](const Point&, const Point&, int face) {
        switch (face) {
            case 0: return NodeType::Dirichlet;
            case 2: return NodeType::Symmetry;
            default: return NodeType::Traction;
        }
    };
    s.source = [](const Point&) { return Point::Zero().eval(); };
    s.dirichlet = [](const Point&) { return Point::Zero().eval(); };
    const double sax = params.axial_stress;
    s.flux = [hc, sax](const Point& x, const Point& n) -> Point {
        if (n[0] > 0.5) return Point(sax, 0, 0);
        if (n[1] > 0.5) {
            const auto t = contact_tractions(hc, x[0]);
            return Point(t.tangential, -t.normal, 0);
        }
        return Point::Zero();
    };
    return s;
}

CylindricalDisplacement boussinesq_displacement_cyl(const BoussinesqParams& p, double r,
                                                    double z) {
    const double nu = p.material.poisson, mu = p.material.lame_mu(), P = p.force;
    const double R = std::hypot(r, z);
    const double k = P / (4.0 * std::numbers::pi * mu);
    CylindricalDisplacement u;
    u.ur = k * r * (z / (R * R * R) - (1.0 - 2.0 * nu) / (R * (z + R)));
    u.uz = k * (2.0 * (1.0 - nu) / R + z * z / (R * R * R));
    return u;
}

CylindricalStress boussinesq_stress_cyl(const BoussinesqParams& p, double r, double z) {
    const double nu = p.material.poisson, P = p.force;
    const double R = std::hypot(r, z);
    const double R5 = std::pow(R, 5);
    const double k = P / (2.0 * std::numbers::pi);
    CylindricalStress s;
    s.rr = k * ((1.0 - 2.0 * nu) / (R * (z + R)) - 3.0 * r * r * z / R5);
    s.tt = k * (1.0 - 2.0 * nu) * (z / (R * R * R) - 1.0 / (R * (z + R)));
    s.zz = -3.0 * P * z * z * z / (2.0 * std::numbers::pi * R5);
    s.rz = -3.0 * P * r * z * z / (2.0 * std::numbers::pi * R5);
    return s;
}

Point boussinesq_displacement(const BoussinesqParams& p, const Point& x) {
    const double r = std::hypot(x[0], x[1]);
    const auto u = boussinesq_displacement_cyl(p, r, x[2]);
    if (r == 0.0) return Point(0.0, 0.0, u.uz);
    return Point(u.ur * x[0] / r, u.ur * x[1] / r, u.uz);
}

Eigen::Matrix3d boussinesq_stress(const BoussinesqParams& p, const Point& x) {
    const double r = std::hypot(x[0], x[1]);
    const auto s = boussinesq_stress_cyl(p, r, x[2]);
    const double c = r > 0.0 ? x[0] / r : 1.0, sn = r > 0.0 ? x[1] / r : 0.0;
    Eigen::Matrix3d out;
    out(0, 0) = s.rr * c * c + s.tt * sn * sn;
    out(1, 1) = s.rr * sn * sn + s.tt * c * c;
    out(0, 1) = out(1, 0) = (s.rr - s.tt) * c * sn;
    out(0, 2) = out(2, 0) = s.rz * c;
    out(1, 2) = out(2, 1) = s.rz * sn;
    out(2, 2) = s.zz;
    return out;
}

ProblemSpec boussinesq_spec(const BoussinesqParams& params) {
    params.material.validate();
    if (!(params.epsilon > 0.0 && params.epsilon < 1.0))
        throw Error("problems", "Boussinesq epsilon must lie in (0, 1)");
    ProblemSpec s;
    s.name = "boussinesq";
    s.pde = PdeKind::NavierCauchy;
    s.components = 3;
    s.lame_lambda = params.material.lame_lambda();
    s.lame_mu = params.material.lame_mu();
    const double e = params.epsilon;
    s.shape = DomainShape::box(Point(-1, -1, -1), Point(-e, -e, -e), 3);
    s.classify = [](const Point&, const Point&, int) { return NodeType::Dirichlet; };
    s.source = [](const Point&) { return Point::Zero().eval(); };
    s.dirichlet = [params](const Point& x) { return boussinesq_displacement(params, x); };
    s.flux = [params](const Point& x, const Point& n) -> Point {
        return boussinesq_stress(params, x) * n;
    };
    s.exact = s.dirichlet;
    return s;
}

double von_mises(const Eigen::Matrix3d& s) {
    const double dxy = s(0, 0) - s(1, 1), dyz = s(1, 1) - s(2, 2), dzx = s(2, 2) - s(0, 0);
    const double shear = s(0, 1) * s(0, 1) + s(1, 2) * s(1, 2) + s(0, 2) * s(0, 2);
    return std::sqrt(0.5 * (dxy * dxy + dyz * dyz + dzx * dzx) + 3.0 * shear);
}

StressField stress_and_vonmises(const NodeSet& nodes, std::span<const double> displacement,
                                const WeightSet& weights, const ElasticMaterial& material) {
    const int d = nodes.dim;
    const double lam = material.lame_lambda(), mu = material.lame_mu();
    StressField out;
    out.stress.resize(nodes.size());
    out.von_mises.resize(nodes.size());
    std::vector<double> comp(nodes.size());
    std::vector<Eigen::Matrix3d> grad(nodes.size(), Eigen::Matrix3d::Zero());
    for (int c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < nodes.size(); ++i) comp[i] = displacement[i * d + c];
        for (int a = 0; a < d; ++a) {
            const Operator op = Operator::d(a);
            for (std::size_t i = 0; i < nodes.size(); ++i) grad[i](c, a) = weights.apply(i, op, comp);
        }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Eigen::Matrix3d eps = 0.5 * (grad[i] + grad[i].transpose());
        Eigen::Matrix3d s = 2.0 * mu * eps;
        s.diagonal().array() += lam * eps.trace();
        // plane strain: eps_zz = 0 but sigma_zz = lambda tr(eps) is already set above
        out.stress[i] = s;
        out.von_mises[i] = von_mises(s);
    }
    return out;
}

std::vector<SurfaceSample> read_reference_csv(std::istream& in) {
    std::vector<SurfaceSample> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        std::string xs, ss;
        std::getline(row, xs, ',');
        std::getline(row, ss, ',');
        try {
            std::size_t px = 0, ps = 0;
            const double x = std::stod(xs, &px), s = std::stod(ss, &ps);
            out.push_back({x * 1e-3, s * 1e6});
        } catch (const std::logic_error&) {
            if (line_no == 1 && out.empty()) continue;  // header
            throw Error("problems", "reference CSV line " + std::to_string(line_no) + " is not 'x,sigma_xx'");
        }
    }
    if (out.empty()) throw Error("problems", "reference CSV holds no samples");
    return out;
}

double mean_contact_difference(std::span<const SurfaceSample> numeric,
                               std::span<const SurfaceSample> reference, double half_width) {
    if (numeric.empty()) throw Error("problems", "no numerical surface samples");
    std::vector<Point> pts;
    std::vector<double> vals;
    for (const auto& s : numeric) {
        pts.emplace_back(s.x, 0.0, 0.0);
        vals.push_back(s.sigma_xx);
    }
    const ShepardInterpolant interp(std::move(pts), std::move(vals), 2,
                                    std::min<std::size_t>(2, numeric.size()));
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : reference) {
        if (std::abs(r.x) > half_width) continue;
        sum += std::abs(r.sigma_xx - interp(Point(r.x, 0.0, 0.0)));
        ++count;
    }
    if (count == 0) throw Error("problems", "no reference samples under the contact");
    return sum / static_cast<double>(count);
}

ErrorNorms error_norms(std::span<const double> numeric, std::span<const double> exact) {
    if (numeric.size() != exact.size()) throw Error("problems", "error norms: size mismatch");
    double e1 = 0, e2 = 0, einf = 0, u1 = 0, u2 = 0, uinf = 0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const double e = std::abs(numeric[i] - exact[i]), u = std::abs(exact[i]);
        e1 += e;
        e2 += e * e;
        einf = std::max(einf, e);
        u1 += u;
        u2 += u * u;
        uinf = std::max(uinf, u);
    }
    if (!(uinf > 0.0)) throw Error("problems", "error norms undefined: exact values are all zero");
    return {e1 / u1, std::sqrt(e2 / u2), einf / uinf};
}

std::vector<double> exact_values(const ProblemSpec& problem, const NodeSet& nodes) {
    if (!problem.has_exact()) throw Error("problems", problem.name + " has no closed form");
    const int c = problem.components;
    std::vector<double> out(nodes.size() * static_cast<std::size_t>(c));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Point v = problem.exact(nodes.pos[i]);
        for (int k = 0; k < c; ++k) out[i * c + k] = v[k];
    }
    return out;
}

}  // namespace mfhp
