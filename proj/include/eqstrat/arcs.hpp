#ifndef EQSTRAT_ARCS_HPP
#define EQSTRAT_ARCS_HPP

#include "eqstrat/poly.hpp"

namespace eqstrat {

/// The circle standing in for the point at infinity.
struct OuterCircle {
    Complex center = 0.0;
    double radius = 1.0;

    static OuterCircle for_points(const std::vector<Complex>& pts, double factor = 10.0) {
        Complex c = 0.0;
        for (auto z : pts) c += z;
        c /= static_cast<double>(std::max<std::size_t>(1, pts.size()));
        double extent = 0.0;
        for (auto z : pts) extent = std::max(extent, std::abs(z - c));
        return {c, factor * std::max(extent, 1e-3)};
    }
};

/// Polyline from a point of the outer circle to a root.
struct Arc {
    std::vector<Complex> points;
    int root = -1;  // index into the root list of the configuration it lives on
};

/// One arc per root, pairwise disjoint away from the outer circle.
struct Marking {
    std::vector<Arc> arcs;
    std::vector<int> windings;
    OuterCircle outer;
};

namespace detail {

inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

/// Proper or touching intersection of closed segments [a,b] and [c,d].
inline bool segments_intersect(Complex a, Complex b, Complex c, Complex d) {
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    auto on = [](Complex p, Complex q, Complex r) {
        return std::abs(cross(q - p, r - p)) <= 1e-15 * std::norm(q - p) && std::min(p.real(), q.real()) <= r.real() &&
               r.real() <= std::max(p.real(), q.real()) && std::min(p.imag(), q.imag()) <= r.imag() &&
               r.imag() <= std::max(p.imag(), q.imag());
    };
    return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

/// Winding number of a closed polygon around q (the polygon is closed implicitly).
inline int winding_around(const std::vector<Complex>& poly, Complex q) {
    int wn = 0;
    const std::size_t m = poly.size();
    for (std::size_t k = 0; k < m; ++k) {
        const Complex a = poly[k], b = poly[(k + 1) % m];
        if (a.imag() <= q.imag()) {
            if (b.imag() > q.imag() && cross(b - a, q - a) > 0) ++wn;
        } else if (b.imag() <= q.imag() && cross(b - a, q - a) < 0) {
            --wn;
        }
    }
    return wn;
}

/// Axis-aligned bounding boxes to prune segment tests.
struct Box {
    double x0, x1, y0, y1;
    static Box of(Complex a, Complex b) {
        return {std::min(a.real(), b.real()), std::max(a.real(), b.real()), std::min(a.imag(), b.imag()),
                std::max(a.imag(), b.imag())};
    }
    bool overlaps(const Box& o) const { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
};

} // namespace detail

/// Whether two polylines meet, ignoring the first `skip_a`/`skip_b` segments at their
/// starts (arcs share the point at infinity).
inline bool polylines_intersect(const std::vector<Complex>& a, const std::vector<Complex>& b, std::size_t skip_a = 0,
                                std::size_t skip_b = 0) {
    for (std::size_t i = skip_a; i + 1 < a.size(); ++i) {
        const auto ba = detail::Box::of(a[i], a[i + 1]);
        for (std::size_t j = skip_b; j + 1 < b.size(); ++j) {
            if (!ba.overlaps(detail::Box::of(b[j], b[j + 1]))) continue;
            if (detail::segments_intersect(a[i], a[i + 1], b[j], b[j + 1])) return true;
        }
    }
    return false;
}

/// Whether a polyline intersects itself (non-adjacent segments).
inline bool self_intersects(const std::vector<Complex>& a) {
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        for (std::size_t j = i + 2; j + 1 < a.size(); ++j) {
            if (!detail::Box::of(a[i], a[i + 1]).overlaps(detail::Box::of(a[j], a[j + 1]))) continue;
            if (detail::segments_intersect(a[i], a[i + 1], a[j], a[j + 1])) return true;
        }
    return false;
}

/// Pairwise disjointness of the arcs of a marking (outer-circle endpoints excluded).
inline bool arcs_disjoint(const std::vector<Arc>& arcs) {
    for (std::size_t i = 0; i < arcs.size(); ++i)
        for (std::size_t j = i + 1; j < arcs.size(); ++j)
            if (polylines_intersect(arcs[i].points, arcs[j].points)) return false;
    return true;
}

/// Distance from q to the polyline, optionally excluding its final vertex.
inline double polyline_distance(const std::vector<Complex>& a, Complex q, bool exclude_end = false) {
    double d = INFINITY;
    const std::size_t m = a.size();
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (exclude_end && i + 2 == m) {
            // last segment: measure only up to a short distance from the end
            const Complex e = a[i] + 0.9 * (a[i + 1] - a[i]);
            d = std::min(d, detail::segment_distance(a[i], e, q));
        } else {
            d = std::min(d, detail::segment_distance(a[i], a[i + 1], q));
        }
    }
    return d;
}

} // namespace eqstrat

#endif
