#ifndef EQSTRAT_SYNTHETIC_HPP
#define EQSTRAT_SYNTHETIC_HPP

// Synthetic arcs and strand motions that do not come from loops in the stratum:
// slides of an arc across a critical point and rigid twists of point clusters.

#include "eqstrat/winding.hpp"

#include <optional>
#include <random>

namespace eqstrat {

/// Gaussian critical points and c; retried until the configuration is valid.
inline StratumPoint random_stratum_point(const Partition& kappa, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        StratumPoint s{kappa, {}, Complex(g(rng), g(rng))};
        for (int i = 0; i < kappa.p(); ++i) s.w.emplace_back(g(rng), g(rng));
        try {
            validate_stratum(s);
            return s;
        } catch (const Error&) {
        }
    }
    throw Error(ErrorKind::InvalidInput, "could not sample a valid stratum point");
}

/// Straight arc from the outer circle to root r, along the ray from r with the most clearance.
inline Arc ray_arc(const PointConfig& cfg, const OuterCircle& outer, int r, int directions = 360) {
    const auto pts = cfg.all_points();
    const Complex z = cfg.roots[r];
    Complex best_dir = 1.0;
    double best = -1;
    for (int a = 0; a < directions; ++a) {
        const Complex dir = std::polar(1.0, kTwoPi * a / directions);
        const Complex far = z + dir * (3 * outer.radius);
        double d = INFINITY;
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (static_cast<int>(j) != r) d = std::min(d, detail::segment_distance(z, far, pts[j]));
        if (d > best) best = d, best_dir = dir;
    }
    // where the ray leaves the outer circle
    const Complex q = z - outer.center;
    const double b = (std::conj(best_dir) * q).real();
    const double t = -b + std::sqrt(b * b - (std::norm(q) - outer.radius * outer.radius));
    return {{z + t * best_dir, z}, r};
}

struct SlideScenario {
    StratumPoint point;
    PointConfig config;
    OuterCircle outer;
    Arc before;  // critical point on its right
    Arc after;   // slid across it, critical point now on its left
    int critical = 0;
};

/// Two-segment arcs from the outer circle past critical point `i` to root `r`, bent just
/// around either side of it. Empty when another marked point lies in the way.
inline std::optional<SlideScenario> slide_scenario(const StratumPoint& s, int i, int r) {
    SlideScenario out;
    out.point = s;
    out.config = validate_stratum(s);
    out.critical = i;
    const auto& cfg = out.config;
    out.outer = OuterCircle::for_points(cfg.all_points());
    const Complex w = cfg.critical[i], rt = cfg.roots[r];
    const Complex P = out.outer.center + out.outer.radius * (w - rt) / std::abs(w - rt);
    const double sep = min_separation(cfg.all_points());
    const Complex u = (rt - P) / std::abs(rt - P);
    const double delta = 0.05 * sep;
    out.before = {{P, w + Complex(0, 1) * u * delta, rt}, r};
    out.after = {{P, w - Complex(0, 1) * u * delta, rt}, r};
    const std::vector<Complex> quad{P, out.before.points[1], rt, out.after.points[1]};
    for (auto z : cfg.all_points()) {
        if (z == rt || z == w) continue;
        if (polyline_distance(out.before.points, z) < delta || polyline_distance(out.after.points, z) < delta)
            return std::nullopt;
        if (detail::winding_around(quad, z) != 0) return std::nullopt;
    }
    if (self_intersects(out.before.points) || self_intersects(out.after.points)) return std::nullopt;
    return out;
}

struct TwistScenario {
    StratumPoint point;
    PointConfig config;
    Marking marking;           // a single ray arc to the enclosed root
    std::vector<int> moving;   // indices into all_points(), including the root
    Complex center;
    double radius = 0.0;       // of the twist circle
    int weight = 0;            // total weight of the enclosed points
};

/// Disks around `center` that contain root r and whose boundary annulus (outer/inner
/// radius ratio at least `min_ratio`) holds no marked point. Each yields a scenario.
inline std::vector<TwistScenario> twist_scenarios(const StratumPoint& s, int r, Complex center,
                                                  double min_ratio = 1.5) {
    std::vector<TwistScenario> out;
    const auto cfg = validate_stratum(s);
    const auto pts = cfg.all_points();
    const auto wts = cfg.weights();
    const auto outer = OuterCircle::for_points(pts);
    std::vector<std::pair<double, int>> d;
    for (std::size_t j = 0; j < pts.size(); ++j) d.push_back({std::abs(pts[j] - center), static_cast<int>(j)});
    std::sort(d.begin(), d.end());
    const Arc arc = ray_arc(cfg, outer, r);
    int W = 0;
    std::vector<int> inside;
    for (std::size_t m = 0; m < d.size(); ++m) {
        inside.push_back(d[m].second);
        W += wts[d[m].second];
        const double lo = std::max(d[m].first, 1e-9), hi = m + 1 < d.size() ? d[m + 1].first : INFINITY;
        if (m + 1 == d.size() || hi < min_ratio * lo) continue;
        if (std::find(inside.begin(), inside.end(), r) == inside.end()) continue;
        TwistScenario t{s, cfg, {}, inside, center, std::sqrt(lo * hi), W};
        t.marking.outer = outer;
        t.marking.arcs.push_back(arc);
        out.push_back(std::move(t));
    }
    return out;
}

/// Transported windings minus original windings under m twists of the scenario's cluster.
inline DefectVector twist_defect(const TwistScenario& t, int m) {
    const auto f = expand_from_stratum(t.point);
    const auto motion = twist_motion(t.config.all_points(), strand_colors(t.config), t.moving, t.center, m);
    return delta_psi_for_motion(t.marking, motion, f, t.config);
}

struct ArcPair {
    Arc a, b;
    OuterCircle outer;
    ArcType type;
    int psi_a = 0, psi_b = 0;
    bool admissible() const { return psi_a == 0 && psi_b == 0; }
};

/// Realizes two codes with a common end jointly in `frame`; empty when the realized
/// arcs are not disjoint.
inline std::optional<ArcPair> realize_pair(const PointConfig& cfg, const Polynomial& f, const CurveCode& ca,
                                           const CurveCode& cb, const ModelFrame& frame, const OuterCircle& outer) {
    const auto pts = cfg.all_points();
    std::vector<std::vector<Complex>> polys;
    ArcPair p;
    p.outer = realize_arcs({ca, cb}, frame, outer, pts, polys);
    const int root = frame.point_at(ca.end);
    p.a = {polys[0], root};
    p.b = {polys[1], root};
    try {
        p.type = arc_type(p.a, p.b, cfg, p.outer);
    } catch (const Error&) {
        return std::nullopt;
    }
    p.psi_a = winding_number(p.a, f, cfg);
    p.psi_b = winding_number(p.b, f, cfg);
    return p;
}

/// Same-endpoint arc pairs with disjoint interiors: the code of a marking arc against its
/// image under a short random braid, kept when the two realize disjointly.
inline std::vector<ArcPair> disjoint_pairs(const StratumPoint& s, const Marking& marking, int attempts,
                                           std::uint64_t seed, double angle = 0.3) {
    std::vector<ArcPair> out;
    const auto cfg = validate_stratum(s);
    const auto f = expand_from_stratum(s);
    const auto pts = cfg.all_points();
    const ModelFrame frame(pts, angle);
    const int N = static_cast<int>(pts.size());
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> gen(1, N - 1), coin(0, 1), len(1, 5);
    for (int trial = 0; trial < attempts; ++trial) {
        const auto& arc = marking.arcs[trial % marking.arcs.size()];
        const auto ca = encode_arc(arc.points, frame, arc.root);
        auto cb = ca;
        for (int q = len(rng); q > 0; --q) cb = apply_letter(cb, gen(rng) * (coin(rng) ? 1 : -1));
        if (cb.end != ca.end || (cb.crossings == ca.crossings && cb.from_above == ca.from_above)) continue;
        if (auto p = realize_pair(cfg, f, ca, cb, frame, marking.outer)) out.push_back(std::move(*p));
    }
    return out;
}

} // namespace eqstrat

#endif
