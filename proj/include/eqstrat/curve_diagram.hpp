#ifndef EQSTRAT_CURVE_DIAGRAM_HPP
#define EQSTRAT_CURVE_DIAGRAM_HPP

// Arcs from infinity to a marked point, up to isotopy, recorded by their crossings with
// the projection axis. In the model the N marked points sit at x = 0..N-1 on the real
// axis and an arc is: the half-plane it leaves infinity in, the x positions where it
// crosses the axis in order, and the point it ends at. Braid letters act by explicit
// half-twists of the model, after which the code is re-read and reduced.

#include "eqstrat/arcs.hpp"
#include "eqstrat/braid.hpp"

namespace eqstrat {

struct CurveCode {
    int points = 0;
    bool from_above = true;
    std::vector<double> crossings;  // never integer: crossings avoid the marked points
    int end = 0;

    bool arrives_from_above() const { return from_above == (crossings.size() % 2 == 0); }
    // Interval of the axis containing x: 0 left of point 0, k between points k-1 and k.
    int interval(double x) const { return std::clamp(static_cast<int>(std::floor(x)) + 1, 0, points); }
};

namespace detail {

/// Even spacing inside every interval, preserving the order of the crossings.
inline void respace(CurveCode& c) {
    std::vector<std::vector<std::size_t>> in(c.points + 1);
    for (std::size_t t = 0; t < c.crossings.size(); ++t) in[c.interval(c.crossings[t])].push_back(t);
    for (int k = 0; k <= c.points; ++k) {
        auto& ids = in[k];
        std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return c.crossings[a] < c.crossings[b]; });
        const double m = static_cast<double>(ids.size());
        for (std::size_t r = 0; r < ids.size(); ++r) {
            const double u = (static_cast<double>(r) + 1) / (m + 1);
            // outer intervals are given unit width next to the extreme points
            c.crossings[ids[r]] = k == 0 ? u - 1.0 : (k == c.points ? c.points - 1 + u : k - 1 + u);
        }
    }
}

/// Whether any crossing of c lies strictly between a and b.
inline bool crossing_between(const CurveCode& c, double a, double b) {
    if (a > b) std::swap(a, b);
    for (double x : c.crossings)
        if (x > a && x < b) return true;
    return false;
}

} // namespace detail

/// Removes bigons, crossings next to infinity and a final crossing next to the endpoint.
/// Each removal is an isotopy across an empty disk (or a swing about an endpoint).
inline void reduce(CurveCode& c) {
    bool changed = true;
    while (changed) {
        changed = false;
        auto& x = c.crossings;
        for (std::size_t t = 0; t + 1 < x.size(); ++t) {
            if (c.interval(x[t]) == c.interval(x[t + 1]) && !detail::crossing_between(c, x[t], x[t + 1])) {
                x.erase(x.begin() + static_cast<long>(t), x.begin() + static_cast<long>(t) + 2);
                changed = true;
                break;
            }
        }
        if (changed) continue;
        if (!x.empty()) {
            const int k = c.interval(x.front());
            const bool outermost = (k == 0 && std::all_of(x.begin(), x.end(), [&](double y) { return y >= x.front(); })) ||
                                   (k == c.points && std::all_of(x.begin(), x.end(), [&](double y) { return y <= x.front(); }));
            if (outermost) {
                x.erase(x.begin());
                c.from_above = !c.from_above;
                changed = true;
                continue;
            }
            const int k_last = c.interval(x.back());
            if ((k_last == c.end || k_last == c.end + 1) && !detail::crossing_between(c, x.back(), c.end)) {
                x.pop_back();
                changed = true;
            }
        }
    }
    detail::respace(c);
}

/// Model polyline of the code: from (x, +-top) down to the axis, then half circles
/// between consecutive crossings, ending on the marked point. `fine` caps the segment
/// length within distance 1.5 of `focus`; elsewhere pieces are sampled coarsely.
inline std::vector<Complex> realize_model(const CurveCode& c, double fine = 0.01, double focus = NAN) {
    std::vector<Complex> out;
    const double top = 2.0 + 0.5 * (c.points + 2);
    auto near_focus = [&](double mid, double rad) { return std::isnan(focus) || std::abs(focus - mid) < rad + 1.5; };
    const double sgn0 = c.from_above ? 1.0 : -1.0;
    const double x0 = c.crossings.empty() ? static_cast<double>(c.end) : c.crossings.front();
    {
        const int steps = near_focus(x0, 0.0) ? static_cast<int>(std::ceil(top / fine)) : 4;
        for (int s = 0; s < steps; ++s) out.emplace_back(x0, sgn0 * top * (1.0 - static_cast<double>(s) / steps));
    }
    std::vector<double> stops = c.crossings;
    stops.push_back(c.end);
    double sgn = -sgn0;
    for (std::size_t t = 0; t + 1 < stops.size(); ++t, sgn = -sgn) {
        const double a = stops[t], b = stops[t + 1];
        const double mid = 0.5 * (a + b), rad = 0.5 * std::abs(b - a);
        out.emplace_back(a, 0.0);
        const int steps =
            near_focus(mid, rad) ? std::max(8, static_cast<int>(std::ceil(kPi * rad / fine))) : 16;
        for (int s = 1; s < steps; ++s) {
            const double phi = kPi * s / steps;
            // from a to b over the top (or bottom)
            const double x = a < b ? mid - rad * std::cos(phi) : mid + rad * std::cos(phi);
            out.emplace_back(x, sgn * rad * std::sin(phi));
        }
    }
    out.emplace_back(static_cast<double>(c.end), 0.0);
    return out;
}

/// Reads a model polyline back into a code. The polyline starts far from the axis (or
/// beyond the outer points) and ends exactly on marked point `end`.
inline CurveCode encode_model(const std::vector<Complex>& poly, int points, int end) {
    CurveCode c;
    c.points = points;
    c.end = end;
    auto upper = [](Complex z) { return z.imag() >= 0.0; };
    c.from_above = upper(poly.front());
    bool side = c.from_above;
    for (std::size_t q = 0; q + 2 < poly.size(); ++q) {
        const Complex a = poly[q], b = poly[q + 1];
        if (upper(b) == side) continue;
        const double t = a.imag() / (a.imag() - b.imag());
        c.crossings.push_back(a.real() + t * (b.real() - a.real()));
        side = !side;
    }
    // the last segment runs into the point; its side is fixed by the last interior vertex
    reduce(c);
    return c;
}

/// Half-twist of model points gen-1 and gen: counterclockwise for a positive letter,
/// the sense in which the braid extraction counts a positive crossing.
inline CurveCode apply_letter(const CurveCode& c, int letter) {
    const int gen = std::abs(letter);
    const double center = gen - 0.5;
    const double dir = letter > 0 ? 1.0 : -1.0;
    auto poly = realize_model(c, 0.01, center);
    const double r_in = 0.75, r_out = 1.25;
    for (auto& z : poly) {
        const Complex y = z - center;
        const double r = std::abs(y);
        if (r <= r_in) {
            z = Complex(2 * center, 0.0) - z;  // exact half turn keeps the axis exact
        } else if (r < r_out) {
            const double u = (r - r_in) / (r_out - r_in);
            z = center + y * std::polar(1.0, dir * kPi * 0.5 * (1.0 + std::cos(kPi * u)));
        }
    }
    int end = c.end;
    if (end == gen - 1) end = gen;
    else if (end == gen) end = gen - 1;
    return encode_model(poly, c.points, end);
}

/// Piecewise-linear identification of the model with a configuration seen in the frame
/// of `angle`: x runs through the projections in order, y is sheared through the points.
class ModelFrame {
public:
    ModelFrame(const std::vector<Complex>& pts, double angle) : rot_(std::polar(1.0, angle)) {
        const Complex inv = std::conj(rot_);
        order_.resize(pts.size());
        std::iota(order_.begin(), order_.end(), 0);
        std::sort(order_.begin(), order_.end(), [&](int a, int b) { return (pts[a] * inv).real() < (pts[b] * inv).real(); });
        for (int k : order_) {
            X_.push_back((pts[k] * inv).real());
            Y_.push_back((pts[k] * inv).imag());
        }
        const double span = X_.size() > 1 ? X_.back() - X_.front() : 1.0;
        step_ = std::max(span / std::max<std::size_t>(1, X_.size() - 1), 1e-9);
        scale_ = step_;
    }

    int size() const { return static_cast<int>(order_.size()); }
    /// Configuration index of the point at model position k.
    int point_at(int k) const { return order_[k]; }
    int position_of(int index) const {
        return static_cast<int>(std::find(order_.begin(), order_.end(), index) - order_.begin());
    }
    Complex up() const { return rot_ * Complex(0, 1); }
    double frame_height(Complex z) const { return (z * std::conj(rot_)).imag(); }

    Complex to_plane(Complex m) const {
        const double x = m.real();
        return Complex(X(x), h(x) + scale_ * m.imag()) * rot_;
    }
    Complex to_model(Complex z) const {
        const Complex f = z * std::conj(rot_);
        const double x = Xinv(f.real());
        return {x, (f.imag() - h(x)) / scale_};
    }

    /// Polyline through the images of a model polyline, split where the map bends.
    std::vector<Complex> polyline_to_plane(const std::vector<Complex>& m) const {
        return map_split(m, [&](Complex z) { return z.real(); }, [&](Complex z) { return to_plane(z); },
                         [&](int k) { return static_cast<double>(k); });
    }
    std::vector<Complex> polyline_to_model(const std::vector<Complex>& p) const {
        return map_split(p, [&](Complex z) { return (z * std::conj(rot_)).real(); },
                         [&](Complex z) { return to_model(z); }, [&](int k) { return X_[k]; });
    }

private:
    double X(double x) const {
        const int N = size();
        if (N == 1) return X_[0] + x * step_;
        if (x <= 0) return X_[0] + x * step_;
        if (x >= N - 1) return X_[N - 1] + (x - (N - 1)) * step_;
        const int k = static_cast<int>(std::floor(x));
        return X_[k] + (x - k) * (X_[k + 1] - X_[k]);
    }
    double Xinv(double v) const {
        const int N = size();
        if (v <= X_[0]) return (v - X_[0]) / step_;
        if (v >= X_[N - 1]) return (N - 1) + (v - X_[N - 1]) / step_;
        const int k = static_cast<int>(std::upper_bound(X_.begin(), X_.end(), v) - X_.begin()) - 1;
        return k + (v - X_[k]) / (X_[k + 1] - X_[k]);
    }
    double h(double x) const {
        const int N = size();
        if (x <= 0) return Y_[0];
        if (x >= N - 1) return Y_[N - 1];
        const int k = static_cast<int>(std::floor(x));
        return Y_[k] + (x - k) * (Y_[k + 1] - Y_[k]);
    }
    template <class Key, class Map, class Break>
    std::vector<Complex> map_split(const std::vector<Complex>& in, Key key, Map map, Break brk) const {
        std::vector<Complex> out;
        if (in.empty()) return out;
        out.push_back(map(in.front()));
        for (std::size_t q = 0; q + 1 < in.size(); ++q) {
            const Complex a = in[q], b = in[q + 1];
            const double ka = key(a), kb = key(b);
            std::vector<double> cuts;
            for (int k = 0; k < size(); ++k) {
                const double v = brk(k);
                if ((v > ka && v < kb) || (v < ka && v > kb)) cuts.push_back((v - ka) / (kb - ka));
            }
            std::sort(cuts.begin(), cuts.end());
            for (double t : cuts) out.push_back(map(a + t * (b - a)));
            out.push_back(map(b));
        }
        return out;
    }

    Complex rot_;
    std::vector<int> order_;
    std::vector<double> X_, Y_;
    double step_ = 1.0, scale_ = 1.0;
};

/// Code of a plane arc ending on configuration point `index`.
inline CurveCode encode_arc(const std::vector<Complex>& poly, const ModelFrame& frame, int index) {
    auto m = frame.polyline_to_model(poly);
    const int end = frame.position_of(index);
    m.back() = Complex(end, 0.0);
    return encode_model(m, frame.size(), end);
}

/// Plane arcs of several codes, each started on the outer circle straight above (or below)
/// the center. All arcs climb to a common height first, so arcs whose codes realize
/// disjointly in the model stay disjoint. Returns the circle actually used.
inline OuterCircle realize_arcs(const std::vector<CurveCode>& codes, const ModelFrame& frame, const OuterCircle& outer,
                                const std::vector<Complex>& pts, std::vector<std::vector<Complex>>& arcs) {
    arcs.clear();
    double reach = 0.0;
    for (auto z : pts) reach = std::max(reach, std::abs(z - outer.center));
    for (const auto& c : codes) {
        arcs.push_back(frame.polyline_to_plane(realize_model(c, 0.05)));
        arcs.back().back() = pts[frame.point_at(c.end)];
        for (auto z : arcs.back()) reach = std::max(reach, std::abs(z - outer.center));
    }
    const OuterCircle used{outer.center, std::max(outer.radius, 4.0 * reach)};
    for (std::size_t i = 0; i < codes.size(); ++i) {
        auto& body = arcs[i];
        const double sgn = codes[i].from_above ? 1.0 : -1.0;
        const Complex up = sgn * frame.up();
        const Complex first = body.front();
        const double climb = 1.05 * reach - sgn * frame.frame_height(first - outer.center);
        std::vector<Complex> out{used.center + used.radius * up, first + up * std::max(climb, 0.0)};
        out.insert(out.end(), body.begin(), body.end());
        body = std::move(out);
    }
    return used;
}

/// Carries the arcs of a marking along a strand motion by reading the motion as a braid
/// in a fixed projection frame and acting on curve codes. The result is realized at the
/// final configuration; arcs realize disjointly when their codes allow it in the model.
inline Marking transport_by_braid(const Marking& marking, const StrandSet& strands, const ExtractionOptions& opt = {}) {
    Marking out = marking;
    if (strands.strand_count() == 0 || strands.sample_count() == 0) return out;
    std::optional<ColoredBraidWord> word;
    double angle = 0.0;
    std::mt19937_64 rng(0x7a15);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    for (int attempt = 0; attempt < 64 && !word; ++attempt) {
        if (attempt > 0) angle = dist(rng);
        word = detail::robust_crossing_word(strands, angle, opt);
    }
    if (!word) throw Error(ErrorKind::DegenerateProjection, "no projection frame for transport");
    const auto start = strands.snapshot(0), end = strands.snapshot(strands.sample_count() - 1);
    const ModelFrame f0(start, angle), f1(end, angle);
    std::vector<CurveCode> codes;
    for (const auto& a : out.arcs) {
        int idx = 0;
        for (std::size_t k = 1; k < start.size(); ++k)
            if (std::abs(start[k] - a.points.back()) < std::abs(start[idx] - a.points.back())) idx = static_cast<int>(k);
        auto code = encode_arc(a.points, f0, idx);
        for (int letter : word->letters) code = apply_letter(code, letter);
        codes.push_back(std::move(code));
    }
    std::vector<std::vector<Complex>> polys;
    out.outer = realize_arcs(codes, f1, marking.outer, end, polys);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        out.arcs[i].points = std::move(polys[i]);
        out.arcs[i].root = f1.point_at(codes[i].end);
    }
    return out;
}

} // namespace eqstrat

#endif
