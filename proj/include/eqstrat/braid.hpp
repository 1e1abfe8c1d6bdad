#ifndef EQSTRAT_BRAID_HPP
#define EQSTRAT_BRAID_HPP

#include "eqstrat/common.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <random>

namespace eqstrat {

/// Strand coloring: roots, or critical points of a given order.
struct StrandColor {
    enum class Kind { Root, Critical };
    Kind kind = Kind::Root;
    int order = 0;

    static StrandColor root() { return {Kind::Root, 0}; }
    static StrandColor critical(int k) { return {Kind::Critical, k}; }
    bool is_root() const noexcept { return kind == Kind::Root; }
    bool operator==(const StrandColor&) const = default;
};

/// Time-sampled labeled trajectories. positions[s][t] is strand s at times[t].
struct StrandSet {
    std::vector<double> times;
    std::vector<std::vector<Complex>> positions;
    std::vector<StrandColor> colors;

    std::size_t strand_count() const noexcept { return positions.size(); }
    std::size_t sample_count() const noexcept { return times.size(); }

    std::vector<Complex> snapshot(std::size_t t) const {
        std::vector<Complex> out;
        out.reserve(positions.size());
        for (const auto& s : positions) out.push_back(s[t]);
        return out;
    }

    StrandSet reversed() const {
        StrandSet r = *this;
        const double t0 = times.front(), t1 = times.back();
        std::reverse(r.times.begin(), r.times.end());
        for (auto& t : r.times) t = t0 + t1 - t;
        for (auto& s : r.positions) std::reverse(s.begin(), s.end());
        return r;
    }
};

/// Word in the Artin generators: letter +i is sigma_i, -i its inverse (1-based).
struct ColoredBraidWord {
    int strand_count = 0;
    std::vector<int> letters;
    std::vector<StrandColor> colors;

    /// Final position of the strand starting at each position (0-based).
    std::vector<int> permutation() const {
        std::vector<int> at(strand_count);
        std::iota(at.begin(), at.end(), 0);  // at[pos] = strand currently at pos
        for (int l : letters) {
            const int i = std::abs(l) - 1;
            std::swap(at[i], at[i + 1]);
        }
        std::vector<int> perm(strand_count);
        for (int pos = 0; pos < strand_count; ++pos) perm[at[pos]] = pos;
        return perm;
    }

    /// Whether the induced permutation maps every strand onto a strand of the same color.
    bool color_preserving() const {
        const auto perm = permutation();
        for (int s = 0; s < strand_count; ++s)
            if (!(colors[s] == colors[perm[s]])) return false;
        return true;
    }

    int exponent_sum() const {
        int e = 0;
        for (int l : letters) e += l > 0 ? 1 : -1;
        return e;
    }

    ColoredBraidWord inverse() const {
        ColoredBraidWord inv{strand_count, {}, {}};
        for (auto it = letters.rbegin(); it != letters.rend(); ++it) inv.letters.push_back(-*it);
        // colors of the inverse are the colors at the end of this word
        const auto perm = permutation();
        inv.colors.resize(strand_count);
        for (int s = 0; s < strand_count; ++s) inv.colors[perm[s]] = colors[s];
        return inv;
    }

    /// This word followed by `other` (time order).
    ColoredBraidWord then(const ColoredBraidWord& other) const {
        ColoredBraidWord out = *this;
        out.letters.insert(out.letters.end(), other.letters.begin(), other.letters.end());
        return out;
    }

    ColoredBraidWord power(int k) const {
        ColoredBraidWord base = k >= 0 ? *this : inverse();
        ColoredBraidWord out{strand_count, {}, colors};
        for (int i = 0; i < std::abs(k); ++i) out.letters.insert(out.letters.end(), base.letters.begin(), base.letters.end());
        return out;
    }

    /// Cancels adjacent inverse pairs.
    ColoredBraidWord freely_reduced() const {
        ColoredBraidWord out{strand_count, {}, colors};
        for (int l : letters) {
            if (!out.letters.empty() && out.letters.back() == -l) out.letters.pop_back();
            else out.letters.push_back(l);
        }
        return out;
    }
};

/// The positive full twist (sigma_1 ... sigma_{N-1})^N.
inline ColoredBraidWord full_twist(int strand_count, std::vector<StrandColor> colors = {}) {
    ColoredBraidWord d{strand_count, {}, std::move(colors)};
    if (d.colors.empty()) d.colors.assign(strand_count, StrandColor::root());
    for (int r = 0; r < strand_count; ++r)
        for (int i = 1; i < strand_count; ++i) d.letters.push_back(i);
    return d;
}

// ---------------------------------------------------------------------------
// Lamination coordinates.
//
// The N-strand group is embedded in the (N+2)-strand group by adding an
// unbraided puncture at each end, so every generator acts by the interior
// Dynnikov update rule. A vector therefore has 2N entries: a_1..a_N, b_1..b_N.
// ---------------------------------------------------------------------------

using LamInt = boost::multiprecision::cpp_int;

struct LaminationCoords {
    std::vector<LamInt> a;
    std::vector<LamInt> b;

    bool operator==(const LaminationCoords&) const = default;

    static LaminationCoords zeros(int strand_count) {
        return {std::vector<LamInt>(strand_count, 0), std::vector<LamInt>(strand_count, 0)};
    }
};

namespace detail {

inline LamInt pos(const LamInt& x) { return x > 0 ? x : LamInt(0); }
inline LamInt neg(const LamInt& x) { return x < 0 ? x : LamInt(0); }

/// Generator sigma_i^{sign} of the N-strand group, 1 <= i <= N-1.
inline void act_letter(LaminationCoords& L, int letter) {
    // In the extended group this is sigma_{i+1}, touching a_i, b_i, a_{i+1}, b_{i+1}
    // (1-based), i.e. indices i-1 and i below.
    const int i = std::abs(letter);
    const std::size_t lo = static_cast<std::size_t>(i - 1), hi = static_cast<std::size_t>(i);
    const LamInt a1 = L.a[lo], b1 = L.b[lo], a2 = L.a[hi], b2 = L.b[hi];
    if (letter > 0) {
        const LamInt c = a1 - a2 + pos(b2) - neg(b1);
        L.a[lo] = a1 + pos(b1) + pos(pos(b2) - c);
        L.b[lo] = b2 - pos(c);
        L.a[hi] = a2 + neg(b2) + neg(neg(b1) + c);
        L.b[hi] = b1 + pos(c);
    } else {
        const LamInt d = a1 - a2 - pos(b2) + neg(b1);
        L.a[lo] = a1 - pos(b1) - pos(pos(b2) + d);
        L.b[lo] = b2 + neg(d);
        L.a[hi] = a2 - neg(b2) - neg(neg(b1) - d);
        L.b[hi] = b1 - neg(d);
    }
}

} // namespace detail

/// Applies the braid word, letter by letter in time order.
inline LaminationCoords act(const ColoredBraidWord& word, LaminationCoords L) {
    if (static_cast<int>(L.a.size()) != word.strand_count || static_cast<int>(L.b.size()) != word.strand_count) {
        throw Error(ErrorKind::InvalidInput, "lamination coordinate length does not match strand count");
    }
    for (int l : word.letters) {
        if (l == 0 || std::abs(l) >= word.strand_count) throw Error(ErrorKind::InvalidInput, "generator index out of range");
        detail::act_letter(L, l);
    }
    return L;
}

/// A fixed family of coordinate vectors on which only the trivial braid acts trivially.
inline std::vector<LaminationCoords> spanning_family(int strand_count) {
    std::vector<LaminationCoords> fam;
    for (int sign : {-1, 1}) {
        auto L = LaminationCoords::zeros(strand_count);
        for (auto& x : L.b) x = sign;
        fam.push_back(L);
    }
    std::mt19937_64 rng(0xd1a7);
    std::uniform_int_distribution<int> dist(-7, 7);
    for (int r = 0; r < 6; ++r) {
        auto L = LaminationCoords::zeros(strand_count);
        for (auto& x : L.a) x = dist(rng);
        for (auto& x : L.b) x = dist(rng);
        fam.push_back(L);
    }
    return fam;
}

inline bool acts_trivially(const ColoredBraidWord& word) {
    const auto reduced = word.freely_reduced();
    if (reduced.letters.empty()) return true;
    for (const auto& L : spanning_family(word.strand_count))
        if (!(act(reduced, L) == L)) return false;
    return true;
}

/// Equality of braids; with `mod_center`, up to a power of the full twist.
inline bool braids_equal(const ColoredBraidWord& b1, const ColoredBraidWord& b2, bool mod_center) {
    if (b1.strand_count != b2.strand_count || b1.colors != b2.colors) {
        throw Error(ErrorKind::ColorMismatch, "braids have different strand counts or colors");
    }
    ColoredBraidWord diff = b1.then(b2.inverse());
    if (mod_center) {
        const int N = b1.strand_count;
        const int twist_exp = N * (N - 1);
        const int de = b1.exponent_sum() - b2.exponent_sum();
        if (twist_exp == 0) return acts_trivially(diff);
        if (de % twist_exp != 0) return false;
        diff = diff.then(full_twist(N, b1.colors).power(-de / twist_exp));
    } else if (b1.exponent_sum() != b2.exponent_sum()) {
        return false;
    }
    return acts_trivially(diff);
}

// ---------------------------------------------------------------------------
// Extraction from strand data.
// ---------------------------------------------------------------------------

struct ExtractionOptions {
    double gap = 1e-7;          // relative to configuration diameter
    double simultaneity = 1e-9; // crossing fractions closer than this are simultaneous
    int max_retries = 16;
};

namespace detail {

/// Raw crossing word of the projection onto direction exp(i*angle); nullopt if degenerate.
inline std::optional<ColoredBraidWord> crossing_word(const StrandSet& strands, double angle,
                                                     const ExtractionOptions& opt) {
    const int N = static_cast<int>(strands.strand_count());
    const Complex rot = std::polar(1.0, -angle);
    auto proj = [&](int s, std::size_t t) { return strands.positions[s][t] * rot; };

    double diam = 0.0;
    for (std::size_t t = 0; t < strands.sample_count(); t += std::max<std::size_t>(1, strands.sample_count() / 8))
        diam = std::max(diam, diameter(strands.snapshot(t)));
    const double gap = opt.gap * std::max(diam, 1e-12);

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return proj(x, 0).real() < proj(y, 0).real(); });
    for (int k = 0; k + 1 < N; ++k)
        if (proj(order[k + 1], 0).real() - proj(order[k], 0).real() < gap) return std::nullopt;

    ColoredBraidWord word{N, {}, {}};
    for (int s : order) word.colors.push_back(strands.colors[s]);
    std::vector<int> where(N);
    for (int k = 0; k < N; ++k) where[order[k]] = k;

    struct Event { double frac; int a, b; };
    std::vector<Event> events;
    for (std::size_t t = 0; t + 1 < strands.sample_count(); ++t) {
        events.clear();
        for (int x = 0; x < N; ++x) {
            for (int y = x + 1; y < N; ++y) {
                const double d0 = proj(x, t).real() - proj(y, t).real();
                const double d1 = proj(x, t + 1).real() - proj(y, t + 1).real();
                if ((d0 < 0) != (d1 < 0)) {
                    if (std::abs(d1) < gap) return std::nullopt;  // ends on a tie
                    events.push_back({d0 / (d0 - d1), x, y});
                }
            }
        }
        std::sort(events.begin(), events.end(), [](const Event& e, const Event& f) { return e.frac < f.frac; });
        for (std::size_t e = 0; e < events.size(); ++e) {
            if (e + 1 < events.size() && events[e + 1].frac - events[e].frac < opt.simultaneity) {
                const auto& f = events[e + 1];
                if (f.a == events[e].a || f.a == events[e].b || f.b == events[e].a || f.b == events[e].b) return std::nullopt;
            }
            const auto& ev = events[e];
            int left = where[ev.a] < where[ev.b] ? ev.a : ev.b;
            int right = left == ev.a ? ev.b : ev.a;
            if (where[right] != where[left] + 1) return std::nullopt;
            const double s = ev.frac;
            const double yl = ((1 - s) * proj(left, t) + s * proj(left, t + 1)).imag();
            const double yr = ((1 - s) * proj(right, t) + s * proj(right, t + 1)).imag();
            if (std::abs(yl - yr) < gap) return std::nullopt;
            const int gen = where[left] + 1;
            word.letters.push_back(yl < yr ? gen : -gen);
            std::swap(where[left], where[right]);
        }
    }
    return word;
}

/// Whether two strands share a projected coordinate at the first or last sample.
inline bool endpoints_tied(const StrandSet& strands, double angle, const ExtractionOptions& opt) {
    const std::size_t T = strands.sample_count();
    if (T == 0) return false;
    const double gap = opt.gap * std::max(diameter(strands.snapshot(0)), 1e-12);
    const Complex rot = std::polar(1.0, -angle);
    for (std::size_t t : {std::size_t{0}, T - 1}) {
        std::vector<double> x;
        for (auto z : strands.snapshot(t)) x.push_back((z * rot).real());
        std::sort(x.begin(), x.end());
        for (std::size_t k = 0; k + 1 < x.size(); ++k)
            if (x[k + 1] - x[k] < gap) return true;
    }
    return false;
}

/// Crossing word that survives projection degeneracies forced by symmetry (e.g. a
/// regular polygon rotating about its center keeps antipodal points collinear with the
/// center at every angle). When the plain word fails, every strand is shifted by a tiny
/// constant offset; the braid is unchanged as long as the endpoints keep their order,
/// which is checked against a gap well above the offset.
inline std::optional<ColoredBraidWord> robust_crossing_word(const StrandSet& strands, double angle,
                                                            const ExtractionOptions& opt) {
    if (auto w = crossing_word(strands, angle, opt)) return w;
    const std::size_t T = strands.sample_count();
    if (T == 0) return std::nullopt;
    const double diam = std::max(diameter(strands.snapshot(0)), 1e-12);
    const double eps = 1e-6 * diam;
    const Complex rot = std::polar(1.0, -angle);
    for (std::size_t t : {std::size_t{0}, T - 1}) {
        auto xs = strands.snapshot(t);
        std::vector<double> x;
        for (auto z : xs) x.push_back((z * rot).real());
        std::sort(x.begin(), x.end());
        for (std::size_t k = 0; k + 1 < x.size(); ++k)
            if (x[k + 1] - x[k] < 8 * eps) return std::nullopt;
    }
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    for (int attempt = 0; attempt < 4; ++attempt) {
        StrandSet moved = strands;
        for (auto& s : moved.positions) {
            const Complex off = std::polar(eps, phase(rng));
            for (auto& z : s) z += off;
        }
        if (auto w = crossing_word(moved, angle, opt)) return w;
    }
    return std::nullopt;
}

/// Motion rotating a configuration rigidly about its centroid by `turn` radians.
inline StrandSet rotation_motion(const std::vector<Complex>& config, const std::vector<StrandColor>& colors,
                                 double turn) {
    Complex ctr = 0.0;
    for (auto z : config) ctr += z;
    ctr /= static_cast<double>(config.size());
    const int samples = 8 + static_cast<int>(std::ceil(std::abs(turn) / 0.02));
    StrandSet m;
    m.colors = colors;
    m.positions.assign(config.size(), {});
    for (int i = 0; i <= samples; ++i) {
        const double s = static_cast<double>(i) / samples;
        m.times.push_back(s);
        for (std::size_t k = 0; k < config.size(); ++k)
            m.positions[k].push_back(ctr + std::polar(1.0, turn * s) * (config[k] - ctr));
    }
    return m;
}

} // namespace detail

/// Braid word of the strand motion, read in the projection onto direction exp(i*angle).
/// Degenerate projections are retried at deterministic pseudorandom angles and the
/// result is conjugated back into the frame of `angle`.
inline ColoredBraidWord extract_braid(const StrandSet& strands, double angle = 0.0, const ExtractionOptions& opt = {}) {
    // Tied endpoints have no frame at `angle`; use the nearby frame just counterclockwise.
    for (double d : {0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2}) {
        if (!detail::endpoints_tied(strands, angle + d, opt)) {
            angle += d;
            break;
        }
    }
    if (auto w = detail::robust_crossing_word(strands, angle, opt)) return *w;
    std::mt19937_64 rng(0xb4a1d);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (int r = 0; r < opt.max_retries; ++r) {
        const double shift = dist(rng);
        auto w = detail::robust_crossing_word(strands, angle + shift, opt);
        if (!w) continue;
        // Rotating the configuration by -shift and projecting at `angle` is the same as
        // projecting at angle + shift; conjugate by that rotation.
        // If the endpoints themselves are degenerate at `angle` there is no such frame,
        // and the word is returned in the shifted frame.
        const auto start = strands.snapshot(0);
        const auto rot = detail::rotation_motion(start, strands.colors, -shift);
        auto rw = detail::robust_crossing_word(rot, angle, opt);
        const auto end = strands.snapshot(strands.sample_count() - 1);
        auto rot_end = detail::rotation_motion(end, strands.colors, -shift);
        auto rwe = detail::robust_crossing_word(rot_end, angle, opt);
        if (!rw || !rwe) return *w;
        ColoredBraidWord out = *rw;
        out.letters.insert(out.letters.end(), w->letters.begin(), w->letters.end());
        const auto back = rwe->inverse();
        out.letters.insert(out.letters.end(), back.letters.begin(), back.letters.end());
        return out;
    }
    throw Error(ErrorKind::DegenerateProjection, "no non-degenerate projection found");
}

/// Braid of the motion as seen at `angle`, conjugated into the frame of angle 0.
/// For generic data this equals extract_braid(strands, 0) as a braid.
inline ColoredBraidWord extract_braid_in_base_frame(const StrandSet& strands, double angle,
                                                    const ExtractionOptions& opt = {}) {
    const auto w = extract_braid(strands, angle, opt);
    if (angle == 0.0) return w;
    const auto rot = extract_braid(detail::rotation_motion(strands.snapshot(0), strands.colors, -angle), 0.0, opt);
    const auto rot_end = extract_braid(
        detail::rotation_motion(strands.snapshot(strands.sample_count() - 1), strands.colors, -angle), 0.0, opt);
    ColoredBraidWord out = rot;
    out.letters.insert(out.letters.end(), w.letters.begin(), w.letters.end());
    const auto back = rot_end.inverse();
    out.letters.insert(out.letters.end(), back.letters.begin(), back.letters.end());
    return out;
}

} // namespace eqstrat

#endif
