#include "mfhp/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfhp {

namespace {

constexpr double kExactHit = 1e-12;

// Weighted average over neighbours given as (index, squared distance) lists.
double blend(std::span<const Index> idx, std::span<const double> d2,
             std::span<const double> values, double power) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double d = std::sqrt(d2[k]);
        const double v = values[static_cast<std::size_t>(idx[k])];
        if (d < kExactHit) return v;
        const double w = std::pow(d, -power);
        num += w * v;
        den += w;
    }
    return num / den;
}

}  // namespace

double shepard(std::span<const Point> points, std::span<const double> values,
               const Point& query, std::size_t n_nearest, double power) {
    if (points.empty()) throw Error("adapt", "shepard: no data points");
    if (points.size() != values.size()) throw Error("adapt", "shepard: size mismatch");
    const std::size_t n = std::min(n_nearest, points.size());

    std::vector<std::pair<double, Index>> all(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        all[i] = {(points[i] - query).squaredNorm(), static_cast<Index>(i)};
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end());

    std::vector<Index> idx(n);
    std::vector<double> d2(n);
    for (std::size_t k = 0; k < n; ++k) {
        d2[k] = all[k].first;
        idx[k] = all[k].second;
    }
    return blend(idx, d2, values, power);
}

ShepardInterpolant::ShepardInterpolant(std::vector<Point> points, std::vector<double> values,
                                       int dim, std::size_t n_nearest, double power)
    : values_(std::move(values)), power_(power) {
    if (points.empty()) throw Error("adapt", "shepard: no data points");
    if (points.size() != values_.size()) throw Error("adapt", "shepard: size mismatch");
    n_nearest_ = std::min(n_nearest, points.size());
    tree_ = KdTree(std::move(points), dim);
    const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    min_ = *lo;
    max_ = *hi;
}

double ShepardInterpolant::operator()(const Point& query) const {
    if (values_.empty()) throw Error("adapt", "shepard: no data points");
    thread_local std::vector<Index> idx;
    thread_local std::vector<double> d2;
    tree_.knn(query, n_nearest_, idx, d2);
    return blend(idx, d2, values_, power_);
}

}  // namespace mfhp
