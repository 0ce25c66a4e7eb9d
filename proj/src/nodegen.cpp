#include "mfhp/nodegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <Eigen/Geometry>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace mfhp {

std::string to_string(NodeType t) {
    switch (t) {
        case NodeType::Interior: return "interior";
        case NodeType::Dirichlet: return "dirichlet";
        case NodeType::Neumann: return "neumann";
        case NodeType::Traction: return "traction";
        case NodeType::Symmetry: return "symmetry";
    }
    return "interior";
}

NodeType node_type_from_string(const std::string& s) {
    if (s == "interior") return NodeType::Interior;
    if (s == "dirichlet") return NodeType::Dirichlet;
    if (s == "neumann") return NodeType::Neumann;
    if (s == "traction") return NodeType::Traction;
    if (s == "symmetry") return NodeType::Symmetry;
    throw Error("nodegen", "unknown node type '" + s + "'");
}

void NodeSet::push_back(const Point& p, NodeType t, const Point& n, double spacing, int order,
                        int face_id) {
    pos.push_back(p);
    type.push_back(t);
    normal.push_back(n);
    h.push_back(spacing);
    m.push_back(order);
    face.push_back(face_id);
}

NodeSet NodeSet::subset(const std::vector<bool>& keep) const {
    NodeSet out;
    out.dim = dim;
    for (std::size_t i = 0; i < size(); ++i)
        if (keep[i]) out.push_back(pos[i], type[i], normal[i], h[i], m[i], face[i]);
    return out;
}

void NodeSet::validate(std::span<const int> allowed_orders) const {
    const std::size_t n = size();
    if (type.size() != n || normal.size() != n || h.size() != n || m.size() != n ||
        face.size() != n)
        throw Error("nodegen", "node set field lengths differ");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(h[i] > 0.0)) throw Error("nodegen", "non-positive spacing at node " + std::to_string(i));
        if (is_boundary(i) && std::abs(normal[i].norm() - 1.0) > 1e-12)
            throw Error("nodegen", "boundary normal not unit length at node " + std::to_string(i));
        if (!allowed_orders.empty() &&
            std::find(allowed_orders.begin(), allowed_orders.end(), m[i]) == allowed_orders.end())
            throw Error("nodegen", "order not in the allowed set at node " + std::to_string(i));
    }
}

void write_nodes_csv(std::ostream& out, const NodeSet& nodes, std::span<const double> eta) {
    out << (nodes.dim == 3 ? "x,y,z,type,h,m,eta\n" : "x,y,type,h,m,eta\n");
    out << std::setprecision(17);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (int a = 0; a < nodes.dim; ++a) out << nodes.pos[i][a] << ',';
        out << to_string(nodes.type[i]) << ',' << nodes.h[i] << ',' << nodes.m[i] << ','
            << (i < eta.size() ? eta[i] : 0.0) << '\n';
    }
}

namespace {

// strtod accepts subnormal values, which stod rejects
double cell_number(const std::string& cell, const std::string& line) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size())
        throw Error("nodegen", "malformed node dump row: " + line);
    return v;
}

}  // namespace

NodeSet read_nodes_csv(std::istream& in, std::vector<double>* eta) {
    NodeSet nodes;
    std::string line;
    if (!std::getline(in, line)) throw Error("nodegen", "empty node dump");
    nodes.dim = line.rfind("x,y,z,", 0) == 0 ? 3 : 2;
    if (eta) eta->clear();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != static_cast<std::size_t>(nodes.dim) + 4)
            throw Error("nodegen", "malformed node dump row: " + line);
        Point p = Point::Zero();
        for (int a = 0; a < nodes.dim; ++a) p[a] = cell_number(cells[a], line);
        const NodeType t = node_type_from_string(cells[nodes.dim]);
        nodes.push_back(p, t, Point::Zero(), cell_number(cells[nodes.dim + 1], line),
                        static_cast<int>(cell_number(cells[nodes.dim + 2], line)), t == NodeType::Interior ? -1 : 0);
        if (eta) eta->push_back(cell_number(cells[nodes.dim + 3], line));
    }
    return nodes;
}

SpacingField SpacingField::constant(double h) {
    if (!(h > 0.0)) throw Error("nodegen", "spacing must be positive");
    return analytic([h](const Point&) { return h; });
}

SpacingField SpacingField::analytic(std::function<double(const Point&)> f) {
    SpacingField s;
    s.fn_ = std::move(f);
    return s;
}

SpacingField::SpacingField(std::vector<Point> carriers, std::vector<double> values, int dim,
                           std::size_t neighbours, double power, double upper_bound)
    : upper_(upper_bound) {
    for (double v : values)
        if (!(v > 0.0)) throw Error("nodegen", "spacing carrier values must be positive");
    shepard_ = ShepardInterpolant(std::move(carriers), std::move(values), dim, neighbours, power);
}

double SpacingField::operator()(const Point& p) const {
    const double v = fn_ ? fn_(p) : shepard_(p);
    return std::min(v, upper_);
}

namespace {

// Accumulates nodes while keeping the proximity index in sync.
class CloudBuilder {
public:
    CloudBuilder(const DomainShape& shape, const SpacingField& h, const FillOptions& opt)
        : h_(h), opt_(opt), dim_(shape.dim()),
          tree_(padded_lo(shape), padded_hi(shape), shape.dim()) {}

    std::size_t add(const Point& p, const Point& n, int face, bool boundary) {
        if (pos_.size() >= opt_.max_nodes) throw GenerationOverflow(opt_.max_nodes);
        pos_.push_back(p);
        normal_.push_back(n);
        face_.push_back(face);
        boundary_.push_back(boundary);
        tree_.insert(p);
        return pos_.size() - 1;
    }

    // Advancing front: every queued node proposes candidates at distance h(p);
    // a candidate is kept if it passes `inside` and no node lies closer than
    // min_spacing_factor * h(candidate).
    template <class Candidates, class Inside>
    void grow(std::vector<std::size_t> seeds, Candidates&& candidates, Inside&& inside, int face,
              bool boundary, const Point& normal) {
        std::deque<std::size_t> front(seeds.begin(), seeds.end());
        std::vector<Point> cand;
        while (!front.empty()) {
            const Point p = pos_[front.front()];
            front.pop_front();
            cand.clear();
            candidates(p, h_(p), cand);
            for (const Point& c : cand) {
                if (!inside(c)) continue;
                const double hc = h_(c);
                if (tree_.any_within(c, opt_.min_spacing_factor * hc)) continue;
                front.push_back(add(c, normal, face, boundary));
            }
        }
    }

    std::vector<std::size_t> nodes_where(const std::function<bool(const Point&)>& pred) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < pos_.size(); ++i)
            if (pred(pos_[i])) out.push_back(i);
        return out;
    }

    std::vector<std::size_t> all() const {
        std::vector<std::size_t> out(pos_.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
        return out;
    }

    NodeSet finish(const FillOptions& opt) const {
        NodeSet out;
        out.dim = dim_;
        for (std::size_t i = 0; i < pos_.size(); ++i) {
            NodeType t = NodeType::Interior;
            if (boundary_[i]) t = opt.classify ? opt.classify(pos_[i], normal_[i], face_[i])
                                               : NodeType::Dirichlet;
            out.push_back(pos_[i], t, boundary_[i] ? normal_[i] : Point::Zero(), h_(pos_[i]),
                          opt.initial_order, boundary_[i] ? face_[i] : -1);
        }
        return out;
    }

    const SpacingField& h() const { return h_; }

private:
    static Point padded_lo(const DomainShape& s) {
        const Point ext = s.hi() - s.lo();
        return s.lo() - 0.01 * ext - Point::Constant(1e-12);
    }
    static Point padded_hi(const DomainShape& s) {
        const Point ext = s.hi() - s.lo();
        return s.hi() + 0.01 * ext + Point::Constant(1e-12);
    }

    const SpacingField& h_;
    const FillOptions& opt_;
    int dim_;
    GrowingTree tree_;
    std::vector<Point> pos_, normal_;
    std::vector<int> face_;
    std::vector<bool> boundary_;
};

// Parameters t in [0,1] at which a curve of length `len` should carry nodes so
// that consecutive gaps follow h. The node count is round(integral of ds/h).
// Open curves return interior parameters only (endpoints are placed by the
// caller); closed curves return count parameters in [0,1).
std::vector<double> march(const std::function<Point(double)>& curve, double len,
                          const SpacingField& h, bool closed) {
    std::vector<double> ts{0.0}, cum{0.0};
    double t = 0.0, acc = 0.0;
    while (t < 1.0) {
        const double step = std::min(h(curve(t)) / (8.0 * len), 1.0 - t);
        const double hm = h(curve(t + 0.5 * step));
        acc += step * len / hm;
        t = std::min(1.0, t + step);
        ts.push_back(t);
        cum.push_back(acc);
    }
    const long count = closed ? std::max(3L, std::lround(acc)) : std::max(1L, std::lround(acc));
    std::vector<double> out;
    const long first = closed ? 0 : 1;
    std::size_t seg = 1;
    for (long k = first; k < count; ++k) {
        const double target = acc * static_cast<double>(k) / static_cast<double>(count);
        while (seg + 1 < cum.size() && cum[seg] < target) ++seg;
        const double c0 = cum[seg - 1], c1 = cum[seg];
        const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
        out.push_back(ts[seg - 1] + frac * (ts[seg] - ts[seg - 1]));
    }
    return out;
}

void circle_candidates(const Point& p, double r, int count, int axis_u, int axis_v,
                       std::mt19937_64& rng, std::vector<Point>& out) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    const double offset = angle(rng);
    for (int j = 0; j < count; ++j) {
        const double th = offset + 2.0 * std::numbers::pi * j / count;
        Point c = p;
        c[axis_u] += r * std::cos(th);
        c[axis_v] += r * std::sin(th);
        out.push_back(c);
    }
}

// Fibonacci lattice on the unit sphere under a random rotation.
void sphere_candidates(const Point& p, double r, int count, std::mt19937_64& rng,
                       std::vector<Point>& out) {
    std::normal_distribution<double> g;
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    q.normalize();
    const Eigen::Matrix3d rot = q.toRotationMatrix();
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < count; ++j) {
        const double z = 1.0 - (2.0 * j + 1.0) / count;
        const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double th = golden * j;
        const Point dir(rad * std::cos(th), rad * std::sin(th), z);
        out.push_back(p + r * (rot * dir));
    }
}

void fill_disc(const DomainShape& shape, CloudBuilder& b) {
    const Point c = shape.center();
    const double R = shape.radius();
    auto curve = [&](double t) {
        const double th = 2.0 * std::numbers::pi * t;
        return Point(c[0] + R * std::cos(th), c[1] + R * std::sin(th), 0.0);
    };
    for (double t : march(curve, 2.0 * std::numbers::pi * R, b.h(), true)) {
        const Point p = curve(t);
        b.add(p, (p - c).normalized(), 0, true);
    }
}

// Outward normal of a box point lying on the faces listed in `on`.
Point box_normal(const DomainShape& s, const Point& p) {
    Point n = Point::Zero();
    for (int a = 0; a < s.dim(); ++a) {
        const double tol = 1e-12 * (s.hi()[a] - s.lo()[a]);
        if (std::abs(p[a] - s.lo()[a]) <= tol) n[a] = -1.0;
        if (std::abs(p[a] - s.hi()[a]) <= tol) n[a] = 1.0;
    }
    return n.normalized();
}

int box_face(const DomainShape& s, const Point& p) {
    for (int a = 0; a < s.dim(); ++a) {
        const double tol = 1e-12 * (s.hi()[a] - s.lo()[a]);
        if (std::abs(p[a] - s.lo()[a]) <= tol) return 2 * a;
        if (std::abs(p[a] - s.hi()[a]) <= tol) return 2 * a + 1;
    }
    return -1;
}

void fill_box_boundary(const DomainShape& shape, CloudBuilder& b, std::mt19937_64& rng,
                       int candidates) {
    const int d = shape.dim();
    const auto corners = shape.corners();
    for (const Point& c : corners) b.add(c, box_normal(shape, c), box_face(shape, c), true);

    // Edges: corner pairs differing in exactly one coordinate bit.
    for (std::size_t i = 0; i < corners.size(); ++i) {
        for (int a = 0; a < d; ++a) {
            if (i & (std::size_t{1} << a)) continue;
            const Point p0 = corners[i];
            const Point p1 = corners[i | (std::size_t{1} << a)];
            auto curve = [&](double t) -> Point { return p0 + t * (p1 - p0); };
            for (double t : march(curve, (p1 - p0).norm(), b.h(), false)) {
                const Point p = curve(t);
                b.add(p, box_normal(shape, p), box_face(shape, p), true);
            }
        }
    }
    if (d == 2) return;

    // Faces: 2D advancing front in each face plane, seeded by its edge nodes.
    for (int a = 0; a < 3; ++a) {
        const int u = (a + 1) % 3, v = (a + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            const double plane = side ? shape.hi()[a] : shape.lo()[a];
            const double tol = 1e-12 * (shape.hi()[a] - shape.lo()[a]);
            auto on_face = [&](const Point& p) { return std::abs(p[a] - plane) <= tol; };
            auto inside = [&](const Point& p) {
                return p[u] > shape.lo()[u] && p[u] < shape.hi()[u] && p[v] > shape.lo()[v] &&
                       p[v] < shape.hi()[v];
            };
            Point n = Point::Zero();
            n[a] = side ? 1.0 : -1.0;
            b.grow(
                b.nodes_where(on_face),
                [&](const Point& p, double r, std::vector<Point>& out) {
                    circle_candidates(p, r, candidates, u, v, rng, out);
                },
                inside, 2 * a + side, true, n);
        }
    }
}

}  // namespace

NodeSet fill_domain(const DomainShape& shape, const SpacingField& h, std::uint64_t seed,
                    const FillOptions& options) {
    std::mt19937_64 rng(seed);
    CloudBuilder b(shape, h, options);

    if (shape.kind() == ShapeKind::Disc)
        fill_disc(shape, b);
    else
        fill_box_boundary(shape, b, rng, options.candidates);

    auto inside = [&](const Point& p) { return shape.contains(p); };
    if (shape.dim() == 2) {
        b.grow(
            b.all(),
            [&](const Point& p, double r, std::vector<Point>& out) {
                circle_candidates(p, r, options.candidates, 0, 1, rng, out);
            },
            inside, -1, false, Point::Zero());
    } else {
        b.grow(
            b.all(),
            [&](const Point& p, double r, std::vector<Point>& out) {
                sphere_candidates(p, r, options.candidates, rng, out);
            },
            inside, -1, false, Point::Zero());
    }
    return b.finish(options);
}

std::vector<Index> nearest_neighbors(const NodeSet& nodes, const Point& x, std::size_t n) {
    if (n > nodes.size()) throw InsufficientNodes(n, nodes.size());
    return nodes.tree().knn(x, n);
}

NodeSet remove_corner_nodes(const NodeSet& nodes, const DomainShape& shape) {
    const auto corners = shape.corners();
    std::vector<bool> keep(nodes.size(), true);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (const Point& c : corners)
            if ((nodes.pos[i] - c).norm() < 0.25 * nodes.h[i]) keep[i] = false;
    return nodes.subset(keep);
}

}  // namespace mfhp
