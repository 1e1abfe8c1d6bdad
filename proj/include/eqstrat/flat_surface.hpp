#ifndef EQSTRAT_FLAT_SURFACE_HPP
#define EQSTRAT_FLAT_SURFACE_HPP

#include "eqstrat/arcs.hpp"
#include "eqstrat/continuation.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace eqstrat {

/// A horizontal leaf of the flat structure |dz| -> |d log f| leaving a cone point.
/// Direction m (0 <= m < 2(k+1)) runs counterclockwise; odd m head to a root,
/// even m head to infinity.
struct SeparatrixTrace {
    int cone = -1;
    int direction = 0;
    int root = -1;  // landing root, -1 for infinity
    std::vector<Complex> points;

    bool to_root() const noexcept { return direction % 2 == 1; }
};

enum class SideKind { StripTop, StripBottom, SlitUpper, SlitLower };

inline const char* to_string(SideKind k) {
    switch (k) {
    case SideKind::StripTop: return "top";
    case SideKind::StripBottom: return "bottom";
    case SideKind::SlitUpper: return "slit-upper";
    case SideKind::SlitLower: return "slit-lower";
    }
    return "?";
}

/// A right-hand boundary side: a strip edge (index into strips) or a lip of the slit
/// leaving a free prong (index into free_prongs).
struct StripSide {
    SideKind kind = SideKind::StripTop;
    int index = -1;
    bool operator==(const StripSide&) const = default;
};

/// The half-infinite cylinder of leaves leaving one root, cut along its fixed prong.
struct Strip {
    int root = -1;
    int fixed_cone = -1;
    int fixed_direction = -1;
    double height = 0.0;  // Im log f along the fixed prong
    StripSide top_glued_to;
    StripSide bottom_glued_to;
};

/// A prong leaf of a cone point landing inside a strip it does not bound.
struct FreeProng {
    int cone = -1;
    int direction = -1;
    int host_strip = -1;
    Complex period;  // log v_cone - log v_fixed, imaginary part in (0, 2 pi)
    StripSide upper_glued_to;
    StripSide lower_glued_to;
};

struct StripDiagram {
    PointConfig config;
    std::vector<Complex> critical_values;
    std::vector<SeparatrixTrace> traces;
    std::vector<Strip> strips;           // one per root, in root order
    std::vector<FreeProng> free_prongs;  // p - 1 of them

    /// Number of strips whose fixed prong leaves cone i.
    int strips_fixed_at(int cone) const {
        int c = 0;
        for (const auto& s : strips) c += s.fixed_cone == cone;
        return c;
    }

    std::string describe() const {
        std::ostringstream os;
        for (std::size_t s = 0; s < strips.size(); ++s) {
            const auto& S = strips[s];
            os << "strip " << s << ": root " << S.root << ", fixed prong w" << S.fixed_cone + 1 << ", top -> "
               << to_string(S.top_glued_to.kind) << " " << S.top_glued_to.index << ", bottom -> "
               << to_string(S.bottom_glued_to.kind) << " " << S.bottom_glued_to.index << "\n";
        }
        for (std::size_t f = 0; f < free_prongs.size(); ++f) {
            const auto& F = free_prongs[f];
            os << "free prong " << f << ": w" << F.cone + 1 << " in strip " << F.host_strip << ", period ("
               << F.period.real() << ", " << F.period.imag() << ")\n";
        }
        return os.str();
    }
};

namespace detail {

/// f(z) - v ~ a (z - w)^{k+1} near a critical point of order k.
inline Complex cone_coefficient(const StratumPoint& s, int i) {
    Complex a = static_cast<double>(s.kappa.n()) / (s.kappa.part(i) + 1);
    for (int j = 0; j < s.kappa.p(); ++j)
        if (j != i) a *= std::pow(s.w[i] - s.w[j], s.kappa.part(j));
    return a;
}

struct LeafTraceResult {
    std::vector<Complex> points;
    int root = -1;
    bool escaped = false;
};

/// Follows the leaf Im log f = theta from z0 (already on it) with Re log f decreasing
/// (dir = -1, ends at a root) or increasing (dir = +1, ends on the escape circle).
inline LeafTraceResult follow_leaf(const Polynomial& f, const PointConfig& cfg, Complex z0, double theta, int dir,
                                   const OuterCircle& escape, int origin_cone, double h0 = 0.05) {
    LeafTraceResult out;
    out.points.push_back(z0);
    const double diam = std::max(diameter(cfg.all_points()), 1e-12);
    double scale = 1.0;
    for (auto w : cfg.critical) scale = std::max(scale, std::abs(f(w)));
    Complex z = z0;
    double u = std::log(std::abs(f(z)));
    double h = h0;
    const double h_min = std::min(1e-12, 1e-4 * h0);
    for (int step = 0; step < 200000; ++step) {
        double dnear = INFINITY, dorigin = INFINITY;
        for (std::size_t c = 0; c < cfg.critical.size(); ++c) {
            const double d = std::abs(z - cfg.critical[c]);
            if (static_cast<int>(c) != origin_cone && d < 1e-7 * diam) {
                throw Error(ErrorKind::AmbiguousCapture, "leaf runs into another cone point", static_cast<int>(c) + 1);
            }
            if (static_cast<int>(c) != origin_cone) dnear = std::min(dnear, d);
            else dorigin = d;
        }
        for (auto r : cfg.roots) dnear = std::min(dnear, std::abs(z - r));

        const double un = u + dir * h;
        const Complex target = std::exp(Complex(un, theta));
        auto [fz, dz] = f.eval_with_derivative(z);
        Complex zn = z + (dir * h) * fz / dz;
        bool ok = false;
        for (int it = 0; it < 12; ++it) {
            auto [fv, dv] = f.eval_with_derivative(zn);
            const Complex delta = (fv - target) / dv;
            zn -= delta;
            // the residual floor matters near high-order cone points where f' is tiny
            if (std::abs(delta) <= 1e-13 * (1 + std::abs(zn)) || std::abs(fv - target) <= 1e-14 * f.scale_at(zn)) {
                ok = true;
                break;
            }
        }
        if (ok && (std::abs(zn - z) > 0.2 * dnear || std::abs(zn - z) > 0.5 * dorigin)) ok = false;
        if (!ok) {
            h *= 0.5;
            if (h < h_min) {
                // stalling beside another cone point means a saddle connection
                if (dnear < 1e-3 * diam) throw Error(ErrorKind::AmbiguousCapture, "leaf stalls next to a cone point");
                throw Error(ErrorKind::TraceEscapeFailure, "leaf tracing step underflow");
            }
            continue;
        }
        z = zn;
        u = un;
        out.points.push_back(z);
        if (dir < 0 && std::abs(f(z)) < 1e-9 * scale) {
            // capture: the nearest root, which must be clearly nearest
            std::vector<std::pair<double, int>> d;
            for (int r = 0; r < cfg.n(); ++r) d.push_back({std::abs(z - cfg.roots[r]), r});
            std::sort(d.begin(), d.end());
            if (d.size() > 1 && d[0].first > 0.1 * d[1].first) {
                throw Error(ErrorKind::AmbiguousCapture, "leaf capture is ambiguous");
            }
            out.root = d[0].second;
            out.points.push_back(cfg.roots[out.root]);
            return out;
        }
        if (dir > 0 && std::abs(z - escape.center) > escape.radius) {
            out.escaped = true;
            return out;
        }
        h = std::min(0.25, h * 1.5);
    }
    throw Error(ErrorKind::TraceEscapeFailure, "leaf did not terminate");
}

/// Starting point on separatrix m of cone i, close to the cone point.
inline Complex separatrix_start(const StratumPoint& s, const PointConfig& cfg, int i, int m, Complex v, double& u0) {
    const int k = s.kappa.part(i);
    const Complex a = cone_coefficient(s, i);
    auto pts = cfg.all_points();
    double near = INFINITY;
    for (auto z : pts)
        if (std::abs(z - s.w[i]) > 0) near = std::min(near, std::abs(z - s.w[i]));
    const double r0 = 0.02 * near;
    const double phi = (m * kPi - std::arg(a / v)) / (k + 1);
    const Complex z0 = s.w[i] + std::polar(r0, phi);
    const double sgn = m % 2 == 0 ? 1.0 : -1.0;
    u0 = std::log(std::abs(v)) + sgn * std::abs(a / v) * std::pow(r0, k + 1);
    return z0;
}

inline void snap_to_circle(std::vector<Complex>& pts, const OuterCircle& oc) {
    if (pts.size() < 2) return;
    const Complex a = pts[pts.size() - 2] - oc.center, b = pts.back() - oc.center;
    // solve |a + t (b - a)| = R on [0, 1]
    const Complex d = b - a;
    const double A = std::norm(d), B = 2 * (a.real() * d.real() + a.imag() * d.imag()), C = std::norm(a) - oc.radius * oc.radius;
    const double disc = std::max(0.0, B * B - 4 * A * C);
    const double t = std::clamp((-B + std::sqrt(disc)) / (2 * A), 0.0, 1.0);
    pts.back() = oc.center + a + t * d;
}

} // namespace detail

/// Traces all separatrices and assembles the strip decomposition.
inline StripDiagram strip_decomposition(const StratumPoint& s, const Tolerances& tol = {}) {
    StripDiagram D;
    D.config = validate_stratum(s, tol);
    const auto& cfg = D.config;
    const int n = cfg.n(), p = cfg.p();
    const auto f = expand_from_stratum(s);
    D.critical_values = critical_values(s);
    const auto escape = OuterCircle::for_points(cfg.all_points());

    // left_root[i][m] for odd m
    std::vector<std::vector<int>> leaf_root(p);
    for (int i = 0; i < p; ++i) {
        const int k = s.kappa.part(i);
        const Complex v = D.critical_values[i];
        leaf_root[i].assign(2 * (k + 1), -1);
        for (int m = 0; m < 2 * (k + 1); ++m) {
            double u0 = 0.0;
            Complex z = detail::separatrix_start(s, cfg, i, m, v, u0);
            const Complex target = std::exp(Complex(u0, std::arg(v)));
            for (int it = 0; it < 20; ++it) {
                auto [fv, dv] = f.eval_with_derivative(z);
                z -= (fv - target) / dv;
            }
            const double h0 = 0.1 * std::abs(u0 - std::log(std::abs(v)));
            auto res = detail::follow_leaf(f, cfg, z, std::arg(v), m % 2 == 1 ? -1 : 1, escape, i, h0);
            SeparatrixTrace tr{i, m, res.root, {}};
            tr.points.push_back(s.w[i]);
            tr.points.insert(tr.points.end(), res.points.begin(), res.points.end());
            if (res.escaped) detail::snap_to_circle(tr.points, escape);
            leaf_root[i][m] = res.root;
            D.traces.push_back(std::move(tr));
        }
    }

    // fixed prong per root: smallest |v|, then cone index
    D.strips.assign(n, {});
    for (int r = 0; r < n; ++r) D.strips[r].root = r;
    for (int i = 0; i < p; ++i)
        for (std::size_t m = 1; m < leaf_root[i].size(); m += 2) {
            const int r = leaf_root[i][m];
            auto& S = D.strips[r];
            if (S.fixed_cone < 0 || std::abs(D.critical_values[i]) < std::abs(D.critical_values[S.fixed_cone])) {
                S.fixed_cone = i;
                S.fixed_direction = static_cast<int>(m);
                S.height = std::arg(D.critical_values[i]);
            }
        }
    for (int r = 0; r < n; ++r) {
        if (D.strips[r].fixed_cone < 0) throw Error(ErrorKind::AmbiguousCapture, "a root receives no prong", r + 1);
    }
    std::map<std::pair<int, int>, int> free_index;
    for (int i = 0; i < p; ++i)
        for (std::size_t m = 1; m < leaf_root[i].size(); m += 2) {
            const int r = leaf_root[i][m];
            const auto& S = D.strips[r];
            if (S.fixed_cone == i && S.fixed_direction == static_cast<int>(m)) continue;
            FreeProng F;
            F.cone = i;
            F.direction = static_cast<int>(m);
            F.host_strip = r;
            Complex per = std::log(D.critical_values[i]) - std::log(D.critical_values[S.fixed_cone]);
            double im = std::fmod(per.imag(), kTwoPi);
            if (im <= 0) im += kTwoPi;
            F.period = Complex(per.real(), im);
            free_index[{i, static_cast<int>(m)}] = static_cast<int>(D.free_prongs.size());
            D.free_prongs.push_back(F);
        }
    if (static_cast<int>(D.free_prongs.size()) != p - 1) {
        throw Error(ErrorKind::AmbiguousCapture, "prong count does not match the stratum");
    }

    // each right-going leaf glues the side counterclockwise of the previous left leaf to
    // the side clockwise of the next one
    auto is_fixed = [&](int i, int m) {
        const int r = leaf_root[i][m];
        return D.strips[r].fixed_cone == i && D.strips[r].fixed_direction == m;
    };
    for (int i = 0; i < p; ++i) {
        const int M = static_cast<int>(leaf_root[i].size());
        for (int e = 0; e < M; e += 2) {
            const int lm = (e - 1 + M) % M, lp = (e + 1) % M;
            StripSide X = is_fixed(i, lm) ? StripSide{SideKind::StripTop, leaf_root[i][lm]}
                                          : StripSide{SideKind::SlitLower, free_index.at({i, lm})};
            StripSide Y = is_fixed(i, lp) ? StripSide{SideKind::StripBottom, leaf_root[i][lp]}
                                          : StripSide{SideKind::SlitUpper, free_index.at({i, lp})};
            auto attach = [&](const StripSide& a, const StripSide& b) {
                switch (a.kind) {
                case SideKind::StripTop: D.strips[a.index].top_glued_to = b; break;
                case SideKind::StripBottom: D.strips[a.index].bottom_glued_to = b; break;
                case SideKind::SlitUpper: D.free_prongs[a.index].upper_glued_to = b; break;
                case SideKind::SlitLower: D.free_prongs[a.index].lower_glued_to = b; break;
                }
            };
            attach(X, Y);
            attach(Y, X);
        }
    }
    return D;
}

/// Whether the diagram has the combinatorics of the model surface T_sigma:
/// the first cone in sigma fixes k+1 strips; every later cone fixes k strips and
/// has its single free prong in the topmost strip of the previous group.
inline bool matches_model(const StripDiagram& D, const Partition& kappa, const std::vector<int>& sigma) {
    const int p = kappa.p();
    if (static_cast<int>(sigma.size()) != p) return false;
    for (int m = 0; m < p; ++m) {
        const int c = sigma[m];
        if (D.strips_fixed_at(c) != kappa.part(c) + (m == 0 ? 1 : 0)) return false;
    }
    std::vector<int> free_of(p, -1);
    for (std::size_t f = 0; f < D.free_prongs.size(); ++f) {
        const int c = D.free_prongs[f].cone;
        if (free_of[c] >= 0) return false;
        free_of[c] = static_cast<int>(f);
    }
    if (p > 0 && free_of[sigma[0]] >= 0) return false;
    for (int m = 1; m < p; ++m) {
        const int f = free_of[sigma[m]];
        if (f < 0) return false;
        const auto& host = D.strips[D.free_prongs[f].host_strip];
        if (host.fixed_cone != sigma[m - 1]) return false;
        if (m >= 2) {
            // topmost strip of a later group: its top edge meets its own group's slit
            if (host.top_glued_to.kind != SideKind::SlitUpper) return false;
            if (D.free_prongs[host.top_glued_to.index].cone != sigma[m - 1]) return false;
        }
    }
    return true;
}

/// Target critical values of the model point: v_{sigma(m)} = (-1)^m e^{m/2} (m from 0).
inline std::vector<Complex> model_log_values(const Partition& kappa, const std::vector<int>& sigma) {
    std::vector<Complex> L(kappa.p());
    for (int m = 0; m < kappa.p(); ++m) L[sigma[m]] = static_cast<double>(m) * Complex(0.5, kPi);
    return L;
}

struct BasepointResult {
    StratumPoint point;
    StripDiagram diagram;
    int seeds_tried = 0;
};

namespace detail {

inline std::string basepoint_key(const Partition& kappa, const std::vector<int>& sigma) {
    std::string k;
    for (int x : kappa.parts()) k += std::to_string(x) + ",";
    k += "|";
    for (int x : sigma) k += std::to_string(x) + ",";
    return k;
}

inline std::map<std::string, BasepointResult>& basepoint_cache() {
    static std::map<std::string, BasepointResult> cache;
    return cache;
}

inline std::mutex& basepoint_mutex() {
    static std::mutex m;
    return m;
}

} // namespace detail

/// Finds a point of the stratum with the model critical values whose strip
/// decomposition is T_sigma. sigma is a 0-based permutation of the cone indices.
/// Seeds with zero centroid are lifted to the model values until one lands on the
/// right component of the fiber. Results are cached per (kappa, sigma).
inline BasepointResult solve_basepoint(const Partition& kappa, std::vector<int> sigma = {}, int max_seeds = 2000) {
    const int p = kappa.p();
    if (sigma.empty()) {
        sigma.resize(p);
        std::iota(sigma.begin(), sigma.end(), 0);
    }
    {
        auto sorted = sigma;
        std::sort(sorted.begin(), sorted.end());
        for (int m = 0; m < p; ++m)
            if (sorted[m] != m) throw Error(ErrorKind::InvalidInput, "sigma must be a permutation of the cone indices");
    }
    const auto key = detail::basepoint_key(kappa, sigma);
    {
        std::lock_guard lock(detail::basepoint_mutex());
        auto it = detail::basepoint_cache().find(key);
        if (it != detail::basepoint_cache().end()) return it->second;
    }

    const auto target = model_log_values(kappa, sigma);
    std::uint64_t h = 1469598103934665603ULL;
    for (char ch : key) h = (h ^ static_cast<unsigned char>(ch)) * 1099511628211ULL;
    std::mt19937_64 rng(h);
    std::normal_distribution<double> g;

    for (int trial = 0; trial < max_seeds; ++trial) {
        StratumPoint seed{kappa, std::vector<Complex>(p), 0.0};
        for (auto& w : seed.w) w = Complex(g(rng), g(rng));
        const Complex mean = seed.centroid();
        for (auto& w : seed.w) w -= mean;
        if (p == 1) seed.w[0] = 0.0;
        seed.c = Complex(g(rng), g(rng));
        try {
            validate_stratum(seed);
            const auto L0 = log_critical_values(seed);
            std::vector<Complex> L1 = target;
            for (int i = 0; i < p; ++i) {
                // nearest branch of the target logarithm
                const double shift = std::round((L0[i].imag() - L1[i].imag()) / kTwoPi) * kTwoPi;
                L1[i] += Complex(0, shift);
            }
            std::vector<std::vector<Complex>> knots;
            const int K = 32;
            for (int k = 0; k <= K; ++k) {
                std::vector<Complex> L(p);
                for (int i = 0; i < p; ++i) L[i] = L0[i] + (L1[i] - L0[i]) * (static_cast<double>(k) / K);
                knots.push_back(std::move(L));
            }
            auto path = lift_log_values(knots, seed);
            StratumPoint pt = path.end();
            auto D = strip_decomposition(pt);
            if (!matches_model(D, kappa, sigma)) continue;
            BasepointResult res{pt, std::move(D), trial + 1};
            std::lock_guard lock(detail::basepoint_mutex());
            detail::basepoint_cache()[key] = res;
            return res;
        } catch (const Error&) {
            continue;
        }
    }
    throw Error(ErrorKind::SolveFailure, "no seed reached the model surface for this permutation");
}

/// The marking by leaves just above each fixed prong: arc i leaves the outer circle and
/// follows Im log f = height + eps down to root i. All windings are zero.
inline Marking standard_marking(const StripDiagram& D, const StratumPoint& s) {
    const auto& cfg = D.config;
    const auto f = expand_from_stratum(s);
    Marking M;
    M.outer = OuterCircle::for_points(cfg.all_points());
    const double sep = min_separation(cfg.all_points());
    for (int r = 0; r < cfg.n(); ++r) {
        const auto& S = D.strips[r];
        double gap = kTwoPi;
        for (const auto& F : D.free_prongs)
            if (F.host_strip == r) gap = std::min({gap, F.period.imag(), kTwoPi - F.period.imag()});
        const double eps = std::min(0.1, 0.25 * gap);
        const double theta = S.height + eps;
        const Complex d1 = f.derivative(cfg.roots[r]);
        const double rad = 1e-6 * sep;
        Complex z = cfg.roots[r] + rad * std::polar(1.0, theta - std::arg(d1));
        const Complex tgt = std::polar(std::abs(d1) * rad, theta);
        for (int it = 0; it < 20; ++it) {
            auto [fv, dv] = f.eval_with_derivative(z);
            z -= (fv - tgt) / dv;
        }
        auto res = detail::follow_leaf(f, cfg, z, theta, +1, M.outer, -1);
        std::vector<Complex> pts{cfg.roots[r]};
        pts.insert(pts.end(), res.points.begin(), res.points.end());
        detail::snap_to_circle(pts, M.outer);
        std::reverse(pts.begin(), pts.end());
        M.arcs.push_back({std::move(pts), r});
        M.windings.push_back(0);
    }
    return M;
}

/// Picture of the plane: points, traced separatrices and (optionally) a marking.
inline std::string to_svg(const StripDiagram& D, const Marking* marking = nullptr) {
    const auto pts = D.config.all_points();
    const auto oc = OuterCircle::for_points(pts, 1.6);
    const double R = oc.radius, W = 600;
    auto X = [&](Complex z) { return W / 2 + (z.real() - oc.center.real()) / R * (W / 2); };
    auto Y = [&](Complex z) { return W / 2 - (z.imag() - oc.center.imag()) / R * (W / 2); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << W << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    auto polyline = [&](const std::vector<Complex>& ps, const char* cls, const char* colour, double width) {
        os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << width
           << "\" points=\"";
        for (auto z : ps) os << X(z) << "," << Y(z) << " ";
        os << "\"/>\n";
    };
    // fixed prongs bound strips, free prongs are slits, the rest are plain prong leaves
    auto kind = [&](const SeparatrixTrace& t) {
        for (const auto& S : D.strips)
            if (S.fixed_cone == t.cone && S.fixed_direction == t.direction) return "strip";
        for (const auto& F : D.free_prongs)
            if (F.cone == t.cone && F.direction == t.direction) return "slit";
        return "leaf";
    };
    for (const auto& t : D.traces) {
        const std::string k = kind(t);
        const char* colour = k == "slit" ? "#e08000" : t.to_root() ? "#3060c0" : "#c0c0c0";
        polyline(t.points, k.c_str(), colour, 1.2);
    }
    if (marking)
        for (const auto& a : marking->arcs) polyline(a.points, "arc", "#d04020", 1.0);
    for (std::size_t r = 0; r < D.config.roots.size(); ++r) {
        const auto z = D.config.roots[r];
        os << "<circle cx=\"" << X(z) << "\" cy=\"" << Y(z) << "\" r=\"4\" fill=\"black\"/>\n";
        os << "<text x=\"" << X(z) + 6 << "\" y=\"" << Y(z) - 6 << "\" font-size=\"11\">r" << r + 1 << "</text>\n";
    }
    for (std::size_t i = 0; i < D.config.critical.size(); ++i) {
        const auto z = D.config.critical[i];
        os << "<rect x=\"" << X(z) - 4 << "\" y=\"" << Y(z) - 4 << "\" width=\"8\" height=\"8\" fill=\"#208040\"/>\n";
        os << "<text x=\"" << X(z) + 6 << "\" y=\"" << Y(z) + 14 << "\" font-size=\"11\">w" << i + 1 << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace eqstrat

#endif
