#include "mfhp/spatial.hpp"

#include <algorithm>
#include <queue>
#include <utility>

namespace mfhp {

namespace {

constexpr std::int32_t kLeafSize = 12;

double dist2(const Point& a, const Point& b) { return (a - b).squaredNorm(); }

}  // namespace

KdTree::KdTree(std::vector<Point> points, int dim) : points_(std::move(points)), dim_(dim) {
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::int32_t>(i);
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / kLeafSize + 2);
        build(0, static_cast<std::int32_t>(points_.size()));
    }
}

std::int32_t KdTree::build(std::int32_t begin, std::int32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;

    Point lo = points_[order_[begin]], hi = lo;
    for (std::int32_t i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    for (int a = 1; a < dim_; ++a)
        if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident, keep as leaf

    const std::int32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::int32_t a, std::int32_t b) {
                         return points_[a][axis] < points_[b][axis];
                     });
    const double split = points_[order_[mid]][axis];
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    Node& n = nodes_[id];
    n.left = left;
    n.right = right;
    n.axis = axis;
    n.split = split;
    return id;
}

std::vector<Index> KdTree::knn(const Point& x, std::size_t n) const {
    std::vector<Index> idx;
    std::vector<double> d2;
    knn(x, n, idx, d2);
    return idx;
}

void KdTree::knn(const Point& x, std::size_t n, std::vector<Index>& idx,
                 std::vector<double>& d2) const {
    if (n > points_.size()) throw InsufficientNodes(n, points_.size());
    idx.clear();
    d2.clear();
    if (n == 0) return;

    // Max-heap on (distance, index): top is the current worst kept neighbour.
    using Entry = std::pair<double, std::int32_t>;
    std::vector<Entry> heap;
    heap.reserve(n + 1);

    auto offer = [&](double d, std::int32_t i) {
        if (heap.size() < n) {
            heap.emplace_back(d, i);
            std::push_heap(heap.begin(), heap.end());
        } else if (Entry{d, i} < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = Entry{d, i};
            std::push_heap(heap.begin(), heap.end());
        }
    };

    // Iterative depth-first descent, near child first.
    std::vector<std::pair<std::int32_t, double>> stack;
    stack.reserve(64);
    stack.emplace_back(0, 0.0);
    while (!stack.empty()) {
        auto [id, plane_d2] = stack.back();
        stack.pop_back();
        if (heap.size() == n && plane_d2 > heap.front().first) continue;
        const Node& node = nodes_[id];
        if (node.left < 0) {
            for (std::int32_t k = node.begin; k < node.end; ++k) {
                const std::int32_t i = order_[k];
                offer(dist2(points_[i], x), i);
            }
            continue;
        }
        const double diff = x[node.axis] - node.split;
        const std::int32_t near = diff < 0.0 ? node.left : node.right;
        const std::int32_t far = diff < 0.0 ? node.right : node.left;
        stack.emplace_back(far, std::max(plane_d2, diff * diff));
        stack.emplace_back(near, plane_d2);
    }

    std::sort_heap(heap.begin(), heap.end());
    idx.reserve(heap.size());
    d2.reserve(heap.size());
    for (const auto& [d, i] : heap) {
        idx.push_back(i);
        d2.push_back(d);
    }
}

GrowingTree::GrowingTree(const Point& lo, const Point& hi, int dim) : dim_(dim) {
    Cell root;
    root.lo = lo;
    root.hi = hi;
    root.child.fill(-1);
    cells_.push_back(std::move(root));
}

int GrowingTree::child_slot(const Cell& c, const Point& p) const {
    int slot = 0;
    for (int a = 0; a < dim_; ++a)
        if (p[a] >= 0.5 * (c.lo[a] + c.hi[a])) slot |= 1 << a;
    return slot;
}

void GrowingTree::insert(const Point& p) {
    const auto item = static_cast<std::int32_t>(points_.size());
    points_.push_back(p);
    insert_into(0, item);
}

void GrowingTree::insert_into(std::int32_t cell, std::int32_t item) {
    while (!cells_[cell].leaf) {
        const int slot = child_slot(cells_[cell], points_[item]);
        cell = cells_[cell].child[slot];
    }
    cells_[cell].items.push_back(item);
    if (cells_[cell].items.size() > kBucket && cells_[cell].depth < kMaxDepth) split(cell);
}

void GrowingTree::split(std::int32_t cell) {
    const int nchild = 1 << dim_;
    for (int s = 0; s < nchild; ++s) {
        Cell c;
        const Cell& parent = cells_[cell];
        c.lo = parent.lo;
        c.hi = parent.hi;
        for (int a = 0; a < dim_; ++a) {
            const double mid = 0.5 * (parent.lo[a] + parent.hi[a]);
            if (s & (1 << a))
                c.lo[a] = mid;
            else
                c.hi[a] = mid;
        }
        c.child.fill(-1);
        c.depth = parent.depth + 1;
        const auto id = static_cast<std::int32_t>(cells_.size());
        cells_.push_back(std::move(c));
        cells_[cell].child[s] = id;
    }
    std::vector<std::int32_t> items = std::move(cells_[cell].items);
    cells_[cell].items.clear();
    cells_[cell].leaf = false;
    for (std::int32_t it : items) {
        const int slot = child_slot(cells_[cell], points_[it]);
        cells_[cells_[cell].child[slot]].items.push_back(it);
    }
}

bool GrowingTree::any_within(const Point& x, double r) const {
    const double r2 = r * r;
    std::int32_t stack[512];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Cell& c = cells_[stack[--top]];
        double gap2 = 0.0;
        for (int a = 0; a < dim_; ++a) {
            const double g = std::max({c.lo[a] - x[a], 0.0, x[a] - c.hi[a]});
            gap2 += g * g;
        }
        if (gap2 >= r2) continue;
        if (c.leaf) {
            for (std::int32_t it : c.items)
                if (dist2(points_[it], x) < r2) return true;
            continue;
        }
        const int nchild = 1 << dim_;
        for (int s = 0; s < nchild; ++s) stack[top++] = c.child[s];
    }
    return false;
}

}  // namespace mfhp
