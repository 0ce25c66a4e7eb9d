#pragma once

#include "mfhp/core.hpp"
#include "mfhp/domain.hpp"
#include "mfhp/interp.hpp"
#include "mfhp/spatial.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace mfhp {

enum class NodeType : std::uint8_t { Interior, Dirichlet, Neumann, Traction, Symmetry };

std::string to_string(NodeType t);
NodeType node_type_from_string(const std::string& s);

/// Discretisation carrier: positions plus per-node tags, normals, spacing and
/// approximation order. Boundary nodes carry unit outward normals; interior
/// nodes carry a zero normal.
struct NodeSet {
    int dim = 2;
    std::vector<Point> pos;
    std::vector<NodeType> type;
    std::vector<Point> normal;
    std::vector<double> h;
    std::vector<int> m;
    std::vector<int> face;  // boundary segment id, -1 for interior nodes

    std::size_t size() const noexcept { return pos.size(); }
    bool is_boundary(std::size_t i) const { return type[i] != NodeType::Interior; }

    void push_back(const Point& p, NodeType t, const Point& n, double spacing, int order,
                   int face_id);

    /// Keeps the nodes with keep[i] == true, preserving order.
    NodeSet subset(const std::vector<bool>& keep) const;

    /// Checks the structural invariants; throws Error("nodegen", ...) on failure.
    void validate(std::span<const int> allowed_orders) const;

    KdTree tree() const { return KdTree(pos, dim); }
};

/// Writes `x,y[,z],type,h,m,eta` rows with 17 significant digits.
void write_nodes_csv(std::ostream& out, const NodeSet& nodes, std::span<const double> eta);

/// Reads the format produced by write_nodes_csv. Normals and face ids are not
/// part of the dump and come back zero / -1.
NodeSet read_nodes_csv(std::istream& in, std::vector<double>* eta = nullptr);

/// Positive target node spacing over the domain. Either analytic or a Shepard
/// interpolant over carrier points; queries may be capped from above.
class SpacingField {
public:
    static SpacingField constant(double h);
    static SpacingField analytic(std::function<double(const Point&)> f);
    SpacingField(std::vector<Point> carriers, std::vector<double> values, int dim,
                 std::size_t neighbours, double power = 2.0,
                 double upper_bound = std::numeric_limits<double>::infinity());

    double operator()(const Point& p) const;

private:
    SpacingField() = default;

    std::function<double(const Point&)> fn_;
    ShepardInterpolant shepard_;
    double upper_ = std::numeric_limits<double>::infinity();
};

using BoundaryClassifier = std::function<NodeType(const Point& p, const Point& normal, int face)>;

struct FillOptions {
    int candidates = 15;
    double min_spacing_factor = 0.7;
    std::size_t max_nodes = 5'000'000;
    int initial_order = 2;
    BoundaryClassifier classify;  // default: every boundary node is Dirichlet
};

/// Face ids: disc boundary 0; boxes use 2*axis + (0 for the low side, 1 for
/// the high side). Edge and corner nodes of boxes take the face of the lowest
/// axis they touch.
NodeSet fill_domain(const DomainShape& shape, const SpacingField& h, std::uint64_t seed,
                    const FillOptions& options = {});

/// Indices of the n nodes closest to x, ascending by distance with ties broken
/// by the lower index.
std::vector<Index> nearest_neighbors(const NodeSet& nodes, const Point& x, std::size_t n);

/// Drops nodes lying within h/4 of a geometric corner of a box-like shape.
NodeSet remove_corner_nodes(const NodeSet& nodes, const DomainShape& shape);

}  // namespace mfhp
