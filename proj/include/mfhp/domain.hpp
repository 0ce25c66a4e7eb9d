#pragma once

#include "mfhp/core.hpp"

#include <vector>

namespace mfhp {

enum class ShapeKind { Disc, Box, SymmetricRectangle };

/// Geometric primitive to be discretised. Boxes are axis aligned; in 2D a box
/// is a rectangle. SymmetricRectangle is a 2D rectangle whose bottom edge is a
/// symmetry plane; geometrically it is identical to a 2D box.
class DomainShape {
public:
    static DomainShape disc(const Point& center, double radius);
    static DomainShape box(const Point& lo, const Point& hi, int dim);
    static DomainShape symmetric_rectangle(const Point& lo, const Point& hi);

    ShapeKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }

    /// Axis-aligned bounding box.
    const Point& lo() const noexcept { return lo_; }
    const Point& hi() const noexcept { return hi_; }
    const Point& center() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }

    bool is_boxlike() const noexcept { return kind_ != ShapeKind::Disc; }

    /// Strict interior test.
    bool contains(const Point& p) const;

    /// Area (2D) or volume (3D).
    double measure() const;

    /// Geometric corners of box-like shapes (4 in 2D, 8 in 3D); empty for a disc.
    std::vector<Point> corners() const;

private:
    DomainShape() = default;
    void validate() const;

    ShapeKind kind_ = ShapeKind::Disc;
    int dim_ = 2;
    Point lo_ = Point::Zero(), hi_ = Point::Zero(), center_ = Point::Zero();
    double radius_ = 0.0;
};

}  // namespace mfhp
