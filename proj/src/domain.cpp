#include "mfhp/domain.hpp"

#include <cmath>
#include <numbers>

namespace mfhp {

DomainShape DomainShape::disc(const Point& center, double radius) {
    DomainShape s;
    s.kind_ = ShapeKind::Disc;
    s.dim_ = 2;
    s.center_ = Point(center[0], center[1], 0.0);
    s.radius_ = radius;
    s.lo_ = s.center_ - Point(radius, radius, 0.0);
    s.hi_ = s.center_ + Point(radius, radius, 0.0);
    s.validate();
    return s;
}

DomainShape DomainShape::box(const Point& lo, const Point& hi, int dim) {
    DomainShape s;
    s.kind_ = ShapeKind::Box;
    s.dim_ = dim;
    s.lo_ = lo;
    s.hi_ = hi;
    if (dim == 2) s.lo_[2] = s.hi_[2] = 0.0;
    s.center_ = 0.5 * (s.lo_ + s.hi_);
    s.validate();
    return s;
}

DomainShape DomainShape::symmetric_rectangle(const Point& lo, const Point& hi) {
    DomainShape s = box(lo, hi, 2);
    s.kind_ = ShapeKind::SymmetricRectangle;
    return s;
}

void DomainShape::validate() const {
    if (dim_ != 2 && dim_ != 3) throw Error("nodegen", "shape dimension must be 2 or 3");
    if (kind_ == ShapeKind::Disc) {
        if (!(std::isfinite(radius_) && radius_ > 0.0))
            throw Error("nodegen", "disc radius must be finite and positive");
        if (!center_.allFinite()) throw Error("nodegen", "disc center must be finite");
        return;
    }
    for (int a = 0; a < dim_; ++a) {
        if (!(std::isfinite(lo_[a]) && std::isfinite(hi_[a]) && hi_[a] > lo_[a]))
            throw Error("nodegen", "box bounds must be finite with positive extent");
    }
}

bool DomainShape::contains(const Point& p) const {
    if (kind_ == ShapeKind::Disc) {
        const double dx = p[0] - center_[0], dy = p[1] - center_[1];
        return dx * dx + dy * dy < radius_ * radius_;
    }
    for (int a = 0; a < dim_; ++a)
        if (!(p[a] > lo_[a] && p[a] < hi_[a])) return false;
    return true;
}

double DomainShape::measure() const {
    if (kind_ == ShapeKind::Disc) return std::numbers::pi * radius_ * radius_;
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= hi_[a] - lo_[a];
    return v;
}

std::vector<Point> DomainShape::corners() const {
    std::vector<Point> out;
    if (kind_ == ShapeKind::Disc) return out;
    const int count = 1 << dim_;
    for (int c = 0; c < count; ++c) {
        Point p = Point::Zero();
        for (int a = 0; a < dim_; ++a) p[a] = (c & (1 << a)) ? hi_[a] : lo_[a];
        out.push_back(p);
    }
    return out;
}

}  // namespace mfhp
