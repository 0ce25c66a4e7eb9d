#pragma once

#include "mfhp/core.hpp"
#include "mfhp/spatial.hpp"

#include <span>
#include <vector>

namespace mfhp {

/// Inverse distance weighted (Shepard) average of `values` over the
/// `n_nearest` points closest to `query`, with weights |query - p|^-power.
/// A query closer than 1e-12 to a data point returns that point's value.
/// Throws Error("adapt", ...) on an empty point set.
double shepard(std::span<const Point> points, std::span<const double> values,
               const Point& query, std::size_t n_nearest, double power = 2.0);

/// Reusable Shepard interpolant backed by a k-d tree.
class ShepardInterpolant {
public:
    ShepardInterpolant() = default;
    ShepardInterpolant(std::vector<Point> points, std::vector<double> values, int dim,
                       std::size_t n_nearest, double power = 2.0);

    double operator()(const Point& query) const;

    std::size_t size() const noexcept { return values_.size(); }
    double min_value() const noexcept { return min_; }
    double max_value() const noexcept { return max_; }

private:
    KdTree tree_;
    std::vector<double> values_;
    std::size_t n_nearest_ = 1;
    double power_ = 2.0;
    double min_ = 0.0, max_ = 0.0;
};

}  // namespace mfhp
