#pragma once

#include "mfhp/core.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace mfhp {

/// Static k-d tree over a point set. Neighbour lists are ordered by
/// (distance, index), so ties resolve to the lower index and results match
/// an exhaustive scan exactly.
class KdTree {
public:
    KdTree() = default;
    KdTree(std::vector<Point> points, int dim);

    std::size_t size() const noexcept { return points_.size(); }
    int dim() const noexcept { return dim_; }
    const Point& point(Index i) const { return points_[static_cast<std::size_t>(i)]; }

    /// The n nearest points to x. Throws InsufficientNodes when n > size().
    std::vector<Index> knn(const Point& x, std::size_t n) const;

    /// Same as knn() but also returns the squared distances, reusing buffers.
    void knn(const Point& x, std::size_t n, std::vector<Index>& idx,
             std::vector<double>& dist2) const;

private:
    struct Node {
        std::int32_t begin = 0, end = 0;  // range into order_ (leaves only)
        std::int32_t left = -1, right = -1;
        std::int32_t axis = 0;
        double split = 0.0;
    };

    std::int32_t build(std::int32_t begin, std::int32_t end);

    std::vector<Point> points_;
    std::vector<std::int32_t> order_;
    std::vector<Node> nodes_;
    int dim_ = 2;
};

/// Insert-only orthtree (quadtree in 2D, octree in 3D) used while a point
/// cloud is being grown. Supports "is any point closer than r" queries.
class GrowingTree {
public:
    GrowingTree(const Point& lo, const Point& hi, int dim);

    void insert(const Point& p);
    bool any_within(const Point& x, double r) const;
    std::size_t size() const noexcept { return points_.size(); }

private:
    static constexpr std::size_t kBucket = 16;
    static constexpr int kMaxDepth = 48;

    struct Cell {
        Point lo, hi;
        std::array<std::int32_t, 8> child{};  // -1 when absent
        std::vector<std::int32_t> items;
        bool leaf = true;
        int depth = 0;
    };

    void insert_into(std::int32_t cell, std::int32_t item);
    void split(std::int32_t cell);
    int child_slot(const Cell& c, const Point& p) const;

    std::vector<Point> points_;
    std::vector<Cell> cells_;
    int dim_;
};

}  // namespace mfhp
