#ifndef EQSTRAT_LOOPS_HPP
#define EQSTRAT_LOOPS_HPP

#include "eqstrat/continuation.hpp"

#include <random>

namespace eqstrat {

enum class LoopKind { COrbit, FullPush, HalfPushPair, SwapEqualOrder, CyclicShift, Rotation, RandomValues, Custom };

inline const char* to_string(LoopKind k) {
    switch (k) {
    case LoopKind::COrbit: return "c_orbit";
    case LoopKind::FullPush: return "full_push";
    case LoopKind::HalfPushPair: return "half_push_pair";
    case LoopKind::SwapEqualOrder: return "swap_equal_order";
    case LoopKind::CyclicShift: return "cyclic_shift";
    case LoopKind::Rotation: return "rotation";
    case LoopKind::RandomValues: return "random_values";
    case LoopKind::Custom: return "custom";
    }
    return "unknown";
}

/// Named loop at a base point. Indices i, j are 1-based critical-point labels.
struct LoopSpec {
    LoopKind kind = LoopKind::COrbit;
    int i = 1;
    int j = 2;
    double radius = 0.0;     // c_orbit: distance from the wall (0 = half of |v_i|)
    int turns = 1;
    std::uint64_t seed = 0;  // random_values
    StratumPath custom;

    std::string label() const {
        std::string s = to_string(kind);
        switch (kind) {
        case LoopKind::COrbit: return s + "(" + std::to_string(i) + ")";
        case LoopKind::FullPush:
        case LoopKind::HalfPushPair:
        case LoopKind::SwapEqualOrder: return s + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        case LoopKind::RandomValues: return s + "(" + std::to_string(seed) + ")";
        default: return s;
        }
    }
};

/// Pieces of a push: the approach, the turn, and the branch that was used.
struct PushPlan {
    StratumPath approach;
    int branch = 0;
    double rho = 0.0;  // final |delta| / |delta_0|
    double bend = 0.0; // rotation of delta during the approach
};

namespace detail {

inline std::vector<std::vector<Complex>> pair_knots(const std::vector<Complex>& L, int i, int j, Complex mid,
                                                    const std::vector<Complex>& deltas) {
    std::vector<std::vector<Complex>> knots;
    for (auto d : deltas) {
        auto K = L;
        K[i] = mid - 0.5 * d;
        K[j] = mid + 0.5 * d;
        knots.push_back(std::move(K));
    }
    return knots;
}

inline double pair_isolation(const StratumPoint& s, int i, int j) {
    const auto cfg = validate_stratum(s);
    double other = INFINITY;
    for (auto r : cfg.roots) other = std::min({other, std::abs(r - s.w[i]), std::abs(r - s.w[j])});
    for (int l = 0; l < s.kappa.p(); ++l)
        if (l != i && l != j) other = std::min({other, std::abs(s.w[l] - s.w[i]), std::abs(s.w[l] - s.w[j])});
    return std::abs(s.w[i] - s.w[j]) / other;
}

inline StratumPath reverse_path(const StratumPath& p) {
    StratumPath r = p.reversed();
    r.closed = false;
    r.relabel.clear();
    return r;
}

} // namespace detail

/// Shrinks the relative log-period between w_i and w_j (0-based) on the first branch
/// for which the two critical points actually come together.
inline PushPlan plan_push(const StratumPoint& base, int i, int j, const LiftOptions& opt = {}) {
    const int p = base.kappa.p();
    if (i < 0 || j < 0 || i >= p || j >= p || i == j) throw Error(ErrorKind::InvalidInput, "push indices out of range");
    const auto L0 = log_critical_values(base);
    for (double bend : {0.0, kPi / 2, -kPi / 2, kPi, -kPi})
    for (int m : {0, -1, 1, -2, 2}) {
        auto L = L0;
        L[j] += Complex(0, kTwoPi * m);
        const Complex mid = 0.5 * (L[i] + L[j]);
        const Complex d0 = L[j] - L[i];
        // radial shrink in geometric steps, continued while the pair is not yet isolated
        StratumPath path;
        path.samples.push_back({0.0, base});
        double rho = 1.0;
        bool good = false;
        try {
            for (int stage = 0; stage < 9 && !good; ++stage) {
                std::vector<Complex> deltas;
                const double next = stage == 0 ? 1e-2 : rho * 1e-1;
                const int K = stage == 0 ? 48 : 16;
                const Complex dir = std::polar(1.0, bend);
                for (int k = 0; k <= K; ++k) {
                    const double u = double(k) / K;
                    const Complex r = stage == 0 ? std::polar(1.0, bend * u) : dir;
                    deltas.push_back(d0 * r * rho * std::pow(next / rho, u));
                }
                auto knots = detail::pair_knots(L, i, j, mid, deltas);
                auto seg = lift_log_values(knots, path.end(), opt);
                path.append(seg);
                rho = next;
                good = detail::pair_isolation(path.end(), i, j) < 0.15;
            }
        } catch (const Error&) {
            good = false;
        }
        if (good) {
            path.normalize_times();
            return {path, m, rho, bend};
        }
    }
    throw Error(ErrorKind::NotAdjacent, "critical points " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                            " cannot be brought together by a push", j + 1);
}

namespace detail {

/// Turn of the relative period by `angle` (radians, counterclockwise) at the end of `plan`,
/// then retreat along the rotated ray. Returns the full open path.
inline StratumPath push_turn(const StratumPoint& base, int i, int j, const PushPlan& plan, double angle,
                             const LiftOptions& opt) {
    const auto Lb = log_critical_values(base);
    auto L = Lb;
    L[j] += Complex(0, kTwoPi * plan.branch);
    const Complex mid = 0.5 * (L[i] + L[j]);
    const Complex d0 = L[j] - L[i];
    const Complex d_eps = d0 * plan.rho * std::polar(1.0, plan.bend);

    std::vector<Complex> deltas;
    const int K = std::max(8, static_cast<int>(std::ceil(std::abs(angle) / (kPi / 24))));
    for (int k = 0; k <= K; ++k) deltas.push_back(d_eps * std::polar(1.0, angle * k / K));
    const int R = 64 + static_cast<int>(32 * std::abs(plan.bend) / kPi);
    const Complex turn = std::polar(1.0, angle);
    // retreat along the approach, rotated by the turn
    for (int k = 1; k <= R; ++k) {
        const double u = 1.0 - double(k) / R;
        const Complex r = std::polar(1.0, plan.bend * std::min(1.0, u * std::log(plan.rho) / std::log(1e-2)));
        deltas.push_back(d0 * turn * r * std::pow(plan.rho, u));
    }

    const auto knots = pair_knots(L, i, j, mid, deltas);
    StratumPath path = plan.approach;
    path.append(lift_log_values(knots, plan.approach.end(), opt));
    path.normalize_times();
    return path;
}

/// How a push reaches its collapsed pair: an optional preliminary path that moves a
/// third log critical value out of the way, then the approach of the pair.
struct PushRoute {
    StratumPath pre;  // a single sample when the pair is reached directly
    PushPlan plan;

    /// Path from the base point to the collapsed pair.
    StratumPath approach() const {
        StratumPath out = pre;
        out.append(plan.approach);
        out.normalize_times();
        return out;
    }
};

/// Route to w_i and w_j. When another prong separates the pair, a third log critical
/// value is first moved aside, so the push becomes a conjugate of a push at the moved point.
inline PushRoute route_push(const StratumPoint& base, int i, int j, const LiftOptions& opt) {
    try {
        StratumPath pre;
        pre.samples.push_back({0.0, base});
        return {pre, plan_push(base, i, j, opt)};
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotAdjacent) throw;
    }
    const auto L0 = log_critical_values(base);
    for (Complex shift : {Complex(-1.5, 0), Complex(0, -kPi), Complex(0, kPi), Complex(1.5, 0)}) {
        for (int l = 0; l < base.kappa.p(); ++l) {
            if (l == i || l == j) continue;
            std::vector<std::vector<Complex>> knots;
            for (int k = 0; k <= 48; ++k) {
                auto L = L0;
                L[l] += shift * (k / 48.0);
                knots.push_back(std::move(L));
            }
            try {
                StratumPath pre = lift_log_values(knots, base, opt);
                auto plan = plan_push(pre.end(), i, j, opt);
                return {std::move(pre), std::move(plan)};
            } catch (const Error&) {
            }
        }
    }
    throw Error(ErrorKind::NotAdjacent, "critical points " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                            " cannot be brought together by a push", j + 1);
}

inline StratumPath push_loop(const StratumPoint& base, int i, int j, double angle, const LiftOptions& opt) {
    const auto route = route_push(base, i, j, opt);
    const StratumPoint& mid = route.pre.end();
    StratumPath inner = push_turn(mid, i, j, route.plan, angle, opt);
    close_affinely(inner);
    if (route.pre.samples.size() == 1) return inner;
    // the way back carries the labels the inner loop ended with
    StratumPath back = reverse_path(route.pre);
    for (auto& x : back.samples) {
        const auto w = x.s.w;
        for (std::size_t q = 0; q < w.size(); ++q) x.s.w[q] = w[inner.relabel[q]];
    }
    StratumPath path = route.pre;
    path.append(inner);
    path.append(back);
    path.normalize_times();
    close_affinely(path);
    return path;
}

/// Loop of c around the wall of w_i (the point c - v_i of the c-plane). The circle is
/// shrunk to keep the other walls outside, and the leg to it bends around walls that lie
/// on the straight way there.
inline StratumPath c_orbit(const StratumPoint& base, int i, double radius, int turns, const Tolerances& tol) {
    const int p = base.kappa.p();
    if (i < 0 || i >= p) throw Error(ErrorKind::InvalidInput, "c_orbit: wall index out of range", i + 1);
    const auto v = critical_values(base);
    const double av = std::abs(v[i]);
    if (radius <= 0) radius = 0.5 * av;
    if (radius > av * (1 + 1e-12)) throw Error(ErrorKind::InvalidInput, "c_orbit: radius exceeds distance to the wall");
    const Complex wall = base.c - v[i];
    std::vector<Complex> others;
    for (int q = 0; q < p; ++q)
        if (q != i) others.push_back(base.c - v[q]);
    for (auto o : others) radius = std::min(radius, 0.45 * std::abs(o - wall));
    const Complex dir = v[i] / av;
    const Complex Q = wall + dir * radius;
    const double margin = 0.25 * radius;
    auto clear = [&](Complex a, Complex b) {
        for (auto o : others)
            if (segment_distance(a, b, o) < margin) return false;
        return true;
    };
    std::vector<Complex> leg;  // waypoints from base.c to Q
    if (std::abs(base.c - Q) < 1e-15 * (1 + av) || clear(base.c, Q)) {
        leg = {base.c, Q};
    } else {
        for (double h : {0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0}) {
            const Complex W = 0.5 * (base.c + Q) + Complex(0, h) * (Q - base.c);
            if (clear(base.c, W) && clear(W, Q)) {
                leg = {base.c, W, Q};
                break;
            }
        }
        if (leg.empty()) throw Error(ErrorKind::WallHit, "c_orbit: no clear way to the wall", i + 1);
    }
    StratumPath path;
    auto push = [&](Complex c) {
        StratumPoint s = base;
        s.c = c;
        const double ref = detail::median_abs(v);
        for (int q = 0; q < p; ++q) {
            if (std::abs(v[q] + (c - base.c)) < tol.wall_clearance * ref) {
                throw Error(ErrorKind::WallHit, "c_orbit passes too close to a wall", q + 1);
            }
        }
        path.samples.push_back({static_cast<double>(path.samples.size()), s});
    };
    auto walk = [&](const std::vector<Complex>& pts, bool include_first) {
        if (include_first) push(pts.front());
        for (std::size_t q = 0; q + 1 < pts.size(); ++q) {
            const int K = std::max(4, static_cast<int>(std::ceil(32 * std::abs(pts[q + 1] - pts[q]) / std::max(av, 1e-300))));
            for (int k = 1; k <= K; ++k) push(pts[q] + (pts[q + 1] - pts[q]) * (static_cast<double>(k) / K));
        }
    };
    walk(leg, true);
    const int around = 96 * std::abs(turns);
    const double sgn = turns >= 0 ? 1.0 : -1.0;
    for (int k = 1; k <= around; ++k) push(wall + dir * radius * std::polar(1.0, sgn * kTwoPi * k / 96));
    walk(std::vector<Complex>(leg.rbegin(), leg.rend()), false);
    path.samples.back().s.c = base.c;
    path.closed = true;
    path.relabel.resize(p);
    std::iota(path.relabel.begin(), path.relabel.end(), 0);
    path.normalize_times();
    return path;
}

inline StratumPath random_values(const StratumPoint& base, std::uint64_t seed, const LiftOptions& opt) {
    const int p = base.kappa.p();
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 17);
    std::uniform_real_distribution<double> amp(-0.25, 0.25);
    std::uniform_int_distribution<int> wind(-1, 1);
    std::vector<std::vector<Complex>> a(p, std::vector<Complex>(3));
    std::vector<int> W(p);
    for (int i = 0; i < p; ++i) {
        for (auto& x : a[i]) x = Complex(amp(rng), amp(rng));
        W[i] = wind(rng);
    }
    const auto L0 = log_critical_values(base);
    const int K = 160;
    std::vector<std::vector<Complex>> knots;
    for (int k = 0; k <= K; ++k) {
        const double t = static_cast<double>(k) / K;
        std::vector<Complex> L = L0;
        for (int i = 0; i < p; ++i) {
            for (int f = 0; f < 3; ++f) L[i] += a[i][f] * (std::polar(1.0, kTwoPi * (f + 1) * t) - 1.0);
            L[i] += Complex(0, kTwoPi * W[i] * t);
        }
        knots.push_back(std::move(L));
    }
    StratumPath path;
    path.samples.push_back({0.0, base});
    for (int rep = 0; rep < 8; ++rep) {
        auto K0 = knots;
        const auto Lend = log_critical_values(path.end());
        for (auto& row : K0)
            for (int i = 0; i < p; ++i) {
                const double shift = std::round((Lend[i].imag() - K0[0][i].imag()) / kTwoPi) * kTwoPi;
                row[i] += Complex(0, shift);
            }
        path.append(lift_log_values(K0, path.end(), opt));
        if (affine_match(path.start(), path.end())) {
            close_affinely(path);
            return path;
        }
    }
    throw Error(ErrorKind::NotClosed, "random value loop did not close after repeated lifting");
}

} // namespace detail

/// Builds the closed stratum path named by `spec` at `base`.
inline StratumPath make_loop(const LoopSpec& spec, const StratumPoint& base, const LiftOptions& opt = {}) {
    validate_stratum(base, opt.tol);
    const int p = base.kappa.p();
    const int i = spec.i - 1, j = spec.j - 1;
    auto check_pair = [&] {
        if (i < 0 || j < 0 || i >= p || j >= p || i == j) throw Error(ErrorKind::InvalidInput, "loop indices out of range");
    };
    switch (spec.kind) {
    case LoopKind::COrbit:
        return detail::c_orbit(base, i, spec.radius, spec.turns, opt.tol);
    case LoopKind::Rotation: {
        if (p != 1) throw Error(ErrorKind::InvalidInput, "rotation loop needs a single critical point");
        return detail::c_orbit(base, 0, std::abs(critical_values(base)[0]), 1, opt.tol);
    }
    case LoopKind::FullPush: {
        check_pair();
        const int turns = base.kappa.part(i) + base.kappa.part(j) + 1;
        return detail::push_loop(base, i, j, kTwoPi * turns * (spec.turns == 0 ? 1 : spec.turns), opt);
    }
    case LoopKind::SwapEqualOrder: {
        check_pair();
        if (base.kappa.part(i) != base.kappa.part(j)) {
            throw Error(ErrorKind::InvalidInput, "swap requires critical points of equal order", j + 1);
        }
        return detail::push_loop(base, i, j, kPi * (2 * base.kappa.part(j) + 1), opt);
    }
    case LoopKind::HalfPushPair: {
        check_pair();
        return detail::push_loop(base, i, j, kTwoPi, opt);
    }
    case LoopKind::CyclicShift: {
        if (p == 1) return detail::c_orbit(base, 0, std::abs(critical_values(base)[0]), 1, opt.tol);
        // Candidate push sequences, tried in a fixed order; the first whose end point is a
        // nontrivial rotation of the base is used.
        std::vector<std::vector<std::pair<int, int>>> sequences(4);
        for (int m = 0; m + 1 < p; ++m) {
            sequences[0].push_back({m, m + 1});
            sequences[1].push_back({0, m + 1});
        }
        sequences[2].assign(sequences[0].rbegin(), sequences[0].rend());
        sequences[3].assign(sequences[1].rbegin(), sequences[1].rend());
        for (const auto& seq : sequences) {
            for (double dir : {1.0, -1.0}) {
                try {
                    StratumPath path;
                    path.samples.push_back({0.0, base});
                    for (auto [a, b] : seq) {
                        const auto plan = plan_push(path.end(), a, b, opt);
                        path.append(detail::push_turn(path.end(), a, b, plan, dir * kTwoPi, opt));
                    }
                    auto m = affine_match(path.start(), path.end());
                    if (!m || m->power == 0) continue;
                    close_affinely(path);
                    return path;
                } catch (const Error&) {
                }
            }
        }
        throw Error(ErrorKind::NotClosed, "no push sequence realizes a cyclic shift at this base point");
    }
    case LoopKind::RandomValues:
        return detail::random_values(base, spec.seed, opt);
    case LoopKind::Custom: {
        StratumPath path = spec.custom;
        if (!path.closed) close_affinely(path);
        return path;
    }
    }
    throw Error(ErrorKind::InvalidInput, "unknown loop kind");
}

} // namespace eqstrat

#endif
