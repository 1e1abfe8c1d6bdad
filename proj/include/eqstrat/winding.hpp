#ifndef EQSTRAT_WINDING_HPP
#define EQSTRAT_WINDING_HPP

#include "eqstrat/arcs.hpp"
#include "eqstrat/braid.hpp"
#include "eqstrat/curve_diagram.hpp"
#include "eqstrat/continuation.hpp"

namespace eqstrat {

using DefectVector = std::vector<int>;

struct WindingResult {
    int value = 0;
    double residual = 0.0;  // end misalignment with the horizontal field, in turns
};

namespace detail {

/// Change of arg V along the straight segment [a, b], where V = f/f' = prod (z - r_j) /
/// (n prod (z - w_i)^{k_i}). Each factor contributes the angle the segment subtends at its
/// zero, which is exact for straight segments.
inline double field_arg_change(const PointConfig& cfg, Complex a, Complex b) {
    double d = 0.0;
    for (auto r : cfg.roots) d += std::arg((b - r) / (a - r));
    for (int i = 0; i < cfg.p(); ++i) d -= cfg.orders[i] * std::arg((b - cfg.critical[i]) / (a - cfg.critical[i]));
    return d;
}

} // namespace detail

/// Turning of the arc against the horizontal field of df/f, in whole turns.
///
/// The reference direction is -V with V = f/f', which points along decreasing |f|: into
/// the root at the end, and radially inward near the outer circle. Both ends are joined to
/// the field by the shortest rotation, so the result is always an integer; `residual`
/// reports how far the ends were from horizontal.
inline WindingResult winding_number_detailed(const Arc& arc, const Polynomial& f, const PointConfig& cfg) {
    const auto& P = arc.points;
    if (P.size() < 2) throw Error(ErrorKind::InvalidInput, "arc needs at least two points");
    const double sep = min_separation(cfg.all_points());
    const Complex end = P.back();
    for (std::size_t q = 0; q + 1 < P.size(); ++q) {
        for (auto z : cfg.all_points()) {
            if (z == end && q + 2 == P.size()) continue;
            const Complex b = q + 2 == P.size() ? P[q] + (1 - 1e-9) * (P[q + 1] - P[q]) : P[q + 1];
            if (detail::segment_distance(P[q], b, z) < 1e-9 * sep) {
                throw Error(ErrorKind::ArcThroughPoint, "arc passes through a marked point");
            }
        }
    }
    auto V = [&](Complex z) { return f(z) / f.derivative(z); };

    std::vector<Complex> pts;
    for (std::size_t q = 0; q < P.size(); ++q)
        if (pts.empty() || P[q] != pts.back()) pts.push_back(P[q]);
    // stop just short of the root where V vanishes
    const Complex last = pts[pts.size() - 2] + (1 - 1e-6) * (pts.back() - pts[pts.size() - 2]);
    pts.back() = last;

    double total = 0.0;
    const Complex d0 = pts[1] - pts[0];
    const double phi0 = principal_angle(std::arg(d0) - std::arg(-V(pts[0])));
    double phi = phi0;
    for (std::size_t q = 0; q + 1 < pts.size(); ++q) {
        const Complex a = pts[q], b = pts[q + 1];
        if (q > 0) phi += principal_angle(std::arg(b - a) - std::arg(a - pts[q - 1]));
        phi -= detail::field_arg_change(cfg, a, b);
    }
    const double phi1 = principal_angle(phi);
    total = phi - phi1;  // close up with the shortest rotation
    WindingResult r;
    // the sign is fixed so that sliding an arc's right side over an order-k point adds k
    r.value = static_cast<int>(std::lround(total / kTwoPi));
    r.residual = (std::abs(phi0) + std::abs(phi1)) / kTwoPi;
    return r;
}

inline int winding_number(const Arc& arc, const Polynomial& f, const PointConfig& cfg,
                          double max_residual = Tolerances{}.winding_residual) {
    const auto r = winding_number_detailed(arc, f, cfg);
    if (r.residual > max_residual) throw Error(ErrorKind::ResidualTooLarge, "arc ends are not horizontal");
    return r.value;
}

// ---------------------------------------------------------------------------
// Transport by ambient isotopy.
// ---------------------------------------------------------------------------

struct TransportOptions {
    double support = 0.4;    // bump radius as a fraction of the distance to the nearest other point
    double max_shift = 0.05; // per substep, as a fraction of the bump radius
    double refine = 0.25;    // segment length cap near moving points, fraction of the bump radius
};

namespace detail {

inline double bump(double rho) {
    if (rho <= 0.5) return 1.0;
    if (rho >= 1.0) return 0.0;
    return 0.5 * (1.0 + std::cos(kTwoPi * (rho - 0.5)));
}

inline double bump_slope(double rho) {
    if (rho <= 0.5 || rho >= 1.0) return 0.0;
    return -kPi * std::sin(kTwoPi * (rho - 0.5));
}

/// Divergence-free field dragging the disk |y| < r/2 rigidly by u and letting material
/// outside it flow around: the rotated gradient of bump(|y|/r) * cross(u, y).
inline Complex drag_velocity(Complex y, Complex u, double r) {
    const double d = std::abs(y);
    if (d >= r) return 0.0;
    const double rho = d / r;
    if (rho <= 0.5) return u;
    return bump(rho) * u - Complex(0, 1) * (bump_slope(rho) / r) * (y / d) * cross(u, y);
}

inline std::vector<double> bump_radii(const std::vector<Complex>& pts, double factor) {
    std::vector<double> r(pts.size(), INFINITY);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (i != j) r[i] = std::min(r[i], std::abs(pts[i] - pts[j]));
    for (auto& x : r) x = std::isfinite(x) ? factor * x : 1.0;
    return r;
}

inline void refine_near(std::vector<Complex>& poly, const std::vector<Complex>& pts, const std::vector<double>& radius,
                        double frac) {
    std::vector<Complex> out;
    out.reserve(poly.size());
    for (std::size_t q = 0; q + 1 < poly.size(); ++q) {
        out.push_back(poly[q]);
        const Complex a = poly[q], b = poly[q + 1];
        double cap = INFINITY;
        for (std::size_t k = 0; k < pts.size(); ++k)
            if (segment_distance(a, b, pts[k]) < 1.5 * radius[k]) cap = std::min(cap, frac * radius[k]);
        const double len = std::abs(b - a);
        if (std::isfinite(cap) && len > cap) {
            const int parts = static_cast<int>(std::ceil(len / cap));
            for (int s = 1; s < parts; ++s) out.push_back(a + (b - a) * (static_cast<double>(s) / parts));
        }
    }
    out.push_back(poly.back());
    poly = std::move(out);
}

/// Drops interior vertices that are collinear with their neighbours far from every point.
inline void coarsen(std::vector<Complex>& poly, const std::vector<Complex>& pts, const std::vector<double>& radius) {
    if (poly.size() < 3) return;
    std::vector<Complex> out{poly.front()};
    for (std::size_t q = 1; q + 1 < poly.size(); ++q) {
        const Complex a = out.back(), b = poly[q], c = poly[q + 1];
        bool keep = std::abs(cross(b - a, c - a)) > 1e-10 * std::norm(c - a);
        for (std::size_t k = 0; k < pts.size() && !keep; ++k)
            if (std::abs(b - pts[k]) < 2.0 * radius[k]) keep = true;
        if (keep) out.push_back(b);
    }
    out.push_back(poly.back());
    poly = std::move(out);
}

} // namespace detail

/// Carries the arcs of `marking` along the strand motion by an ambient isotopy: each strand
/// drags a small disk (its bump support) and material around it flows past. Supports of
/// different strands never overlap. Long motions squeeze arc layers together, so this is
/// kept for short motions and for cross-checking `transport`.
inline Marking transport_isotopy(const Marking& marking, const StrandSet& strands, const TransportOptions& opt = {}) {
    Marking out = marking;
    const std::size_t N = strands.strand_count();
    if (N == 0 || strands.sample_count() == 0) return out;
    std::vector<Complex> p = strands.snapshot(0);
    {
        const auto r = detail::bump_radii(p, opt.support);
        for (auto& a : out.arcs) detail::refine_near(a.points, p, r, opt.refine);
    }
    std::size_t substeps = 0;
    for (std::size_t t = 0; t + 1 < strands.sample_count(); ++t) {
        const auto target = strands.snapshot(t + 1);
        auto r = detail::bump_radii(p, opt.support);
        double need = 0.0;
        for (std::size_t k = 0; k < N; ++k) need = std::max(need, std::abs(target[k] - p[k]) / (opt.max_shift * r[k]));
        const int sub = std::max(1, static_cast<int>(std::ceil(need)));
        std::vector<Complex> step(N);
        for (std::size_t k = 0; k < N; ++k) step[k] = (target[k] - p[k]) / static_cast<double>(sub);
        for (int s = 0; s < sub; ++s) {
            if (s > 0) r = detail::bump_radii(p, opt.support);
            for (auto& a : out.arcs) {
                // a straight segment only follows the flow if it is short where the flow bends
                detail::refine_near(a.points, p, r, opt.refine);
                if (++substeps % 256 == 0) detail::coarsen(a.points, p, r);
                for (auto& x : a.points) {
                    for (std::size_t k = 0; k < N; ++k) {
                        if (step[k] == Complex(0.0) || std::abs(x - p[k]) >= r[k]) continue;
                        // midpoint rule; supports are disjoint so one strand acts
                        const Complex mid = x + 0.5 * detail::drag_velocity(x - p[k], step[k], r[k]);
                        x += detail::drag_velocity(mid - (p[k] + 0.5 * step[k]), step[k], r[k]);
                        break;
                    }
                }
            }
            for (std::size_t k = 0; k < N; ++k) p[k] += step[k];
        }
        for (std::size_t k = 0; k < N; ++k) p[k] = target[k];
    }
    // the root endpoint rides exactly on its strand
    for (auto& a : out.arcs) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < N; ++k)
            if (std::abs(p[k] - a.points.back()) < std::abs(p[best] - a.points.back())) best = k;
        a.points.back() = p[best];
    }
    for (const auto& a : out.arcs) {
        if (self_intersects(a.points)) throw Error(ErrorKind::IsotopyBreakdown, "transported arc is not simple");
    }
    if (!arcs_disjoint(out.arcs)) throw Error(ErrorKind::IsotopyBreakdown, "transported arcs intersect");
    return out;
}

/// Carries the arcs of `marking` along the strand motion, acting on curve codes by the
/// braid of the motion. Each arc is realized separately, so distinct arcs of the result
/// need not be disjoint.
inline Marking transport(const Marking& marking, const StrandSet& strands) {
    return transport_by_braid(marking, strands);
}

/// Re-labels arc roots against a configuration and recomputes windings.
inline void annotate(Marking& m, const Polynomial& f, const PointConfig& cfg) {
    m.windings.clear();
    for (auto& a : m.arcs) {
        int best = 0;
        for (int r = 1; r < cfg.n(); ++r)
            if (std::abs(cfg.roots[r] - a.points.back()) < std::abs(cfg.roots[best] - a.points.back())) best = r;
        a.root = best;
        a.points.back() = cfg.roots[best];
        m.windings.push_back(winding_number(a, f, cfg));
    }
}

/// Winding change of each arc after carrying the marking around `strands`, which must
/// return the configuration of `f` to itself. Entry i refers to the arc that started at
/// root i.
inline DefectVector delta_psi_for_motion(const Marking& base, const StrandSet& strands, const Polynomial& f,
                                         const PointConfig& cfg) {
    Marking moved = transport(base, strands);
    annotate(moved, f, cfg);
    DefectVector d(base.arcs.size());
    for (std::size_t i = 0; i < base.arcs.size(); ++i) {
        const int before = base.windings.empty() ? winding_number(base.arcs[i], f, cfg) : base.windings[i];
        d[i] = moved.windings[i] - before;
    }
    return d;
}

/// Defect of a closed stratum loop against a marking at its start.
inline DefectVector delta_psi(const StratumPath& loop, const Marking& base_marking) {
    const auto f = expand_from_stratum(loop.start());
    const auto cfg = validate_stratum(loop.start());
    const auto strands = track(loop);
    return delta_psi_for_motion(base_marking, strands, f, cfg);
}

// ---------------------------------------------------------------------------
// Arc types.
// ---------------------------------------------------------------------------

/// Critical points (and other roots) on each side of a, split by the closed curve a u b.
struct ArcType {
    std::vector<int> left;   // critical indices left of a (oriented from infinity to the root)
    std::vector<int> right;
    int left_roots = 0;
    int right_roots = 0;

    int order_sum(const std::vector<int>& side, const PointConfig& cfg) const {
        int s = 0;
        for (int i : side) s += cfg.orders[i];
        return s;
    }
    bool balanced(const PointConfig& cfg) const {
        return order_sum(left, cfg) == left_roots && order_sum(right, cfg) == right_roots;
    }
};

inline ArcType arc_type(const Arc& a, const Arc& b, const PointConfig& cfg, const OuterCircle& outer) {
    if (a.points.back() != b.points.back()) throw Error(ErrorKind::InvalidInput, "arcs must end at the same root");
    {
        // interiors must be disjoint: pull both ends of each arc in slightly
        auto trimmed = [](const std::vector<Complex>& P) {
            std::vector<Complex> q = P;
            q.front() = P[0] + 1e-3 * (P[1] - P[0]);
            q.back() = P[P.size() - 2] + 0.999 * (P.back() - P[P.size() - 2]);
            return q;
        };
        if (polylines_intersect(trimmed(a.points), trimmed(b.points)))
            throw Error(ErrorKind::ArcsNotDisjoint, "arcs cross");
    }
    // a, then b backwards, then out to radius 2R and around to a's start
    std::vector<Complex> poly = a.points;
    for (auto it = b.points.rbegin() + 1; it != b.points.rend(); ++it) poly.push_back(*it);
    const double R2 = 2 * outer.radius;
    const double tb = std::arg(b.points.front() - outer.center), ta = std::arg(a.points.front() - outer.center);
    double sweep = ta - tb;
    while (sweep < 0) sweep += kTwoPi;
    if (sweep > kTwoPi - 1e-12) sweep = 0.0;
    poly.push_back(outer.center + std::polar(R2, tb));
    const int steps = 64;
    for (int s = 1; s < steps; ++s) poly.push_back(outer.center + std::polar(R2, tb + sweep * s / steps));
    poly.push_back(outer.center + std::polar(R2, ta));

    // which winding value marks the left side of a
    std::size_t q = 0;
    double best = -1;
    for (std::size_t k = 0; k + 1 < a.points.size(); ++k) {
        const double len = std::abs(a.points[k + 1] - a.points[k]);
        if (len > best) best = len, q = k;
    }
    const Complex mid = 0.5 * (a.points[q] + a.points[q + 1]);
    const Complex dir = (a.points[q + 1] - a.points[q]) / std::abs(a.points[q + 1] - a.points[q]);
    const double sep = min_separation(cfg.all_points());
    const Complex left_probe = mid + Complex(0, 1) * dir * std::min(1e-6 * sep, 0.01 * best);
    const bool left_inside = detail::winding_around(poly, left_probe) != 0;

    ArcType t;
    const Complex root = a.points.back();
    for (int i = 0; i < cfg.p(); ++i) {
        const bool inside = detail::winding_around(poly, cfg.critical[i]) != 0;
        (inside == left_inside ? t.left : t.right).push_back(i);
    }
    for (auto r : cfg.roots) {
        if (r == root) continue;
        const bool inside = detail::winding_around(poly, r) != 0;
        (inside == left_inside ? t.left_roots : t.right_roots) += 1;
    }
    return t;
}

// ---------------------------------------------------------------------------
// mod-r reduction.
// ---------------------------------------------------------------------------

struct ModRReduction {
    int r = 1;
    DefectVector reduced;
};

inline ModRReduction mod_r_reduce(const Partition& kappa, const DefectVector& v) {
    ModRReduction out{kappa.gcd(), {}};
    for (int x : v) out.reduced.push_back(((x % out.r) + out.r) % out.r);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic strand motions.
// ---------------------------------------------------------------------------

/// Points in `moving` rotate rigidly about `center` through m full turns; the rest stay.
inline StrandSet twist_motion(const std::vector<Complex>& points, const std::vector<StrandColor>& colors,
                              const std::vector<int>& moving, Complex center, int m, int samples_per_turn = 256) {
    StrandSet s;
    s.colors = colors;
    s.positions.assign(points.size(), {});
    const int K = std::max(1, std::abs(m) * samples_per_turn);
    std::vector<bool> mv(points.size(), false);
    for (int i : moving) mv[i] = true;
    for (int k = 0; k <= K; ++k) {
        const double ang = kTwoPi * m * static_cast<double>(k) / K;
        s.times.push_back(static_cast<double>(k) / K);
        for (std::size_t i = 0; i < points.size(); ++i) {
            s.positions[i].push_back(mv[i] ? center + (points[i] - center) * std::polar(1.0, ang) : points[i]);
        }
    }
    // exact return
    for (std::size_t i = 0; i < points.size(); ++i) s.positions[i].back() = points[i];
    return s;
}

/// Colors of a point configuration in the roots-then-critical layout.
inline std::vector<StrandColor> strand_colors(const PointConfig& cfg) {
    std::vector<StrandColor> c;
    for (int i = 0; i < cfg.n(); ++i) c.push_back(StrandColor::root());
    for (int k : cfg.orders) c.push_back(StrandColor::critical(k));
    return c;
}

} // namespace eqstrat

#endif
