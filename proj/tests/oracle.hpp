#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical code.

#include "mfhp/core.hpp"
#include "mfhp/approx.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using mfhp::Index;
using mfhp::Point;

/// Exhaustive nearest-neighbour scan ordered by (distance, index).
inline std::vector<Index> brute_knn(const std::vector<Point>& pts, const Point& x, std::size_t n) {
    std::vector<Index> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> d2(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = (pts[i] - x).squaredNorm();
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return d2[a] < d2[b]; });
    idx.resize(n);
    return idx;
}

/// min over pairs of |x_i - x_j| / min(h_i, h_j), by exhaustive scan.
inline double min_spacing_ratio(const std::vector<Point>& pts, const std::vector<double>& h) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::min(best, (pts[i] - pts[j]).norm() / std::min(h[i], h[j]));
    return best;
}

inline double nearest_distance(const std::vector<Point>& pts, const Point& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::min(best, (p - x).norm());
    return best;
}

using Exponent = std::array<int, 3>;

inline std::vector<Exponent> monomials(int m, int d) {
    std::vector<Exponent> out;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m - i; ++j) {
            if (d == 2) {
                out.push_back({i, j, 0});
                continue;
            }
            for (int k = 0; k <= m - i - j; ++k) out.push_back({i, j, k});
        }
    return out;
}

inline double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

inline double monomial(const Exponent& e, const Point& p) {
    return ipow(p[0], e[0]) * ipow(p[1], e[1]) * ipow(p[2], e[2]);
}

/// Mixed partial derivative of x^e[0] y^e[1] z^e[2] of multi-order n at p.
inline double monomial_partial(const Exponent& e, const std::array<int, 3>& n, const Point& p) {
    double v = 1.0;
    for (int a = 0; a < 3; ++a) {
        if (n[a] > e[a]) return 0.0;
        double c = 1.0;
        for (int i = 0; i < n[a]; ++i) c *= e[a] - i;
        v *= c * ipow(p[a], e[a] - n[a]);
    }
    return v;
}

inline double apply_to_monomial(const mfhp::Operator& op, const Exponent& e, const Point& p, int d) {
    using K = mfhp::Operator::Kind;
    std::array<int, 3> n{};
    switch (op.kind) {
        case K::Identity: return monomial(e, p);
        case K::Gradient: n[op.a] = 1; return monomial_partial(e, n, p);
        case K::Hessian: ++n[op.a]; ++n[op.b]; return monomial_partial(e, n, p);
        case K::Laplacian: {
            double s = 0.0;
            for (int a = 0; a < d; ++a) {
                std::array<int, 3> q{};
                q[a] = 2;
                s += monomial_partial(e, q, p);
            }
            return s;
        }
    }
    return 0.0;
}

/// |sum w f - L f| / max(|L f|, sum |w f|): relative error that stays
/// meaningful when L f vanishes but individual terms do not.
inline double exactness_error(std::span<const double> w, const std::vector<Point>& st,
                              const mfhp::Operator& op, const Exponent& e, const Point& c, int d) {
    double s = 0.0, mag = 0.0;
    for (std::size_t j = 0; j < st.size(); ++j) {
        const double t = w[j] * monomial(e, st[j]);
        s += t;
        mag += std::abs(t);
    }
    const double exact = apply_to_monomial(op, e, c, d);
    return std::abs(s - exact) / std::max({std::abs(exact), mag, 1e-300});
}

/// Random stencil: the center itself plus n-1 points in a cube of half-width r.
inline std::vector<Point> random_stencil(std::mt19937_64& rng, const Point& c, int n, int d, double r) {
    std::uniform_real_distribution<double> u(-r, r);
    std::vector<Point> st{c};
    while (static_cast<int>(st.size()) < n) st.push_back(c + Point(u(rng), u(rng), d == 3 ? u(rng) : 0.0));
    return st;
}

inline std::vector<mfhp::Operator> all_operators(int d) {
    std::vector<mfhp::Operator> ops{mfhp::Operator::laplacian()};
    for (int a = 0; a < d; ++a) {
        ops.push_back(mfhp::Operator::d(a));
        for (int b = a; b < d; ++b) ops.push_back(mfhp::Operator::d2(a, b));
    }
    return ops;
}

inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

/// Spearman rank correlation (Pearson correlation of average ranks).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
