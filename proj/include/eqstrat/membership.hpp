#ifndef EQSTRAT_MEMBERSHIP_HPP
#define EQSTRAT_MEMBERSHIP_HPP

// Framed braid group membership of monodromy braids and the generator suite.

#include "eqstrat/flat_surface.hpp"
#include "eqstrat/loops.hpp"
#include "eqstrat/synthetic.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <map>
#include <thread>

namespace eqstrat {

/// A braid belongs to the framed group when it preserves colors and every winding number
/// of the standard marking.
struct MembershipCertificate {
    ColoredBraidWord braid;
    DefectVector defect;  // empty when colors are not preserved (arcs would end on critical points)
    bool color_ok = false;
    bool verdict = false;
    std::string provenance;
};

namespace detail {

struct CertifiedMotion {
    MembershipCertificate cert;
    Marking base;
    Marking moved;
};

inline CertifiedMotion certify_motion(const StratumPoint& base, const StrandSet& strands, std::string provenance) {
    CertifiedMotion out;
    auto& c = out.cert;
    c.provenance = std::move(provenance);
    c.braid = extract_braid(strands);
    c.color_ok = c.braid.color_preserving();
    if (c.color_ok) {
        const auto cfg = validate_stratum(base);
        const auto f = expand_from_stratum(base);
        out.base = standard_marking(strip_decomposition(base), base);
        annotate(out.base, f, cfg);
        out.moved = transport(out.base, strands);
        annotate(out.moved, f, cfg);
        for (std::size_t i = 0; i < out.base.arcs.size(); ++i) c.defect.push_back(out.moved.windings[i] - out.base.windings[i]);
    }
    c.verdict = c.color_ok;
    for (int d : c.defect) c.verdict = c.verdict && d == 0;
    return out;
}

/// Concatenation of two motions; `b` must start where `a` ends.
inline StrandSet then(StrandSet a, const StrandSet& b) {
    const double off = a.times.back() - b.times.front();
    for (std::size_t t = 1; t < b.sample_count(); ++t) {
        a.times.push_back(off + b.times[t]);
        for (std::size_t s = 0; s < a.strand_count(); ++s) a.positions[s].push_back(b.positions[s][t]);
    }
    return a;
}

} // namespace detail

/// Certificate of a strand motion that returns the configuration of `base` to itself.
inline MembershipCertificate certify_motion(const StratumPoint& base, const StrandSet& strands,
                                            std::string provenance = "synthetic") {
    return detail::certify_motion(base, strands, std::move(provenance)).cert;
}

/// Certificate of a closed stratum loop against the standard marking at its start.
inline MembershipCertificate certify(const StratumPath& loop, std::string provenance = "custom") {
    if (!loop.closed) throw Error(ErrorKind::InvalidInput, "certify needs a closed loop");
    return certify_motion(loop.start(), track(loop), std::move(provenance));
}

/// Independent model of a full push: follow the approach that collapses w_i and w_j,
/// turn the collapsed pair once counterclockwise about its midpoint with all other points
/// frozen, and retrace the approach.
inline ColoredBraidWord expected_push_twist(const StratumPoint& base, int i, int j, const LiftOptions& opt = {}) {
    const int n = base.kappa.n();
    const auto route = detail::route_push(base, i - 1, j - 1, opt);
    const auto A = track(route.approach());
    const auto pts = A.snapshot(A.sample_count() - 1);
    const int a = n + i - 1, b = n + j - 1;
    const auto twist = twist_motion(pts, A.colors, {a, b}, 0.5 * (pts[a] + pts[b]), 1);
    return extract_braid(detail::then(detail::then(A, twist), A.reversed()));
}

/// Full twist of root r and critical point i of a point, realized as a rigid turn of a
/// disk holding exactly those two points. Not a stratum loop: the enclosed weight is
/// k_i - 1, so the root's winding number changes by m k_i. Empty when no such disk exists.
inline std::optional<StrandSet> root_critical_twist(const StratumPoint& s, int r, int i, int m) {
    const auto cfg = validate_stratum(s);
    const int n = cfg.n();
    const Complex center = 0.5 * (cfg.roots[r] + cfg.critical[i]);
    for (const auto& t : twist_scenarios(s, r, center)) {
        if (t.moving.size() != 2) continue;
        if (std::find(t.moving.begin(), t.moving.end(), n + i) == t.moving.end()) continue;
        return twist_motion(cfg.all_points(), strand_colors(cfg), t.moving, center, m);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Generator suite.
// ---------------------------------------------------------------------------

struct SuiteOptions {
    int jobs = 1;
    std::uint64_t seed = 0;
    int random_loops = 20;  // p = 1 only
    bool timing = false;
    LiftOptions lift;
};

struct SuiteEntry {
    LoopSpec spec;
    MembershipCertificate cert;
    std::vector<std::string> arc_types;  // one per marking arc
    double seconds = 0.0;
};

struct IdentityCheck {
    std::string name;
    bool strict = false;
    bool mod_center = false;
};

struct SuiteReport {
    Partition kappa;
    std::vector<SuiteEntry> entries;
    std::vector<IdentityCheck> identities;
    std::map<std::string, int> arc_types;
    int unbalanced = 0;

    bool all_certified() const {
        for (const auto& e : entries)
            if (!e.cert.verdict) return false;
        return true;
    }
    bool identities_hold() const {
        for (const auto& c : identities)
            if (!c.mod_center) return false;
        return true;
    }
};

namespace detail {

inline std::string side_string(const std::vector<int>& crit, int roots) {
    std::string s = "{";
    for (std::size_t q = 0; q < crit.size(); ++q) s += (q ? "," : "") + std::to_string(crit[q] + 1);
    return s + "}+" + std::to_string(roots) + "r";
}

/// Type of each marking arc against the transported arc ending at the same root, both
/// realized jointly from their codes. "same" when the codes agree, "crossing" when the
/// joint realization is not disjoint.
inline std::vector<std::string> transported_types(const StratumPoint& s, const Marking& base, const Marking& moved,
                                                  int& unbalanced) {
    const auto cfg = validate_stratum(s);
    const auto f = expand_from_stratum(s);
    const ModelFrame frame(cfg.all_points(), 0.3);
    std::vector<std::string> out;
    for (const auto& a : base.arcs) {
        const Arc* b = nullptr;
        for (const auto& x : moved.arcs)
            if (x.root == a.root) b = &x;
        if (!b) {
            out.push_back("missing");
            continue;
        }
        const auto ca = encode_arc(a.points, frame, a.root);
        const auto cb = encode_arc(b->points, frame, b->root);
        if (ca.crossings == cb.crossings && ca.from_above == cb.from_above) {
            out.push_back("same");
            continue;
        }
        const auto p = realize_pair(cfg, f, ca, cb, frame, base.outer);
        if (!p) {
            out.push_back("crossing");
            continue;
        }
        if (p->admissible() && !p->type.balanced(cfg)) ++unbalanced;
        out.push_back("L" + side_string(p->type.left, p->type.left_roots) + " R" +
                      side_string(p->type.right, p->type.right_roots));
    }
    return out;
}

/// Runs f(0..count-1) on up to `jobs` threads; results land by index.
template <class F>
void parallel_for(int count, int jobs, F&& f) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int k = 0; k < count; ++k) f(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (int k = next++; k < count; k = next++) {
                try {
                    f(k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/// Loops of the suite at the basepoint of kappa: all pairwise full pushes, swaps of
/// equal-order pairs and the cyclic shift; for p = 1 the 1/n rotation and random loops.
inline std::vector<LoopSpec> suite_loops(const Partition& kappa, const SuiteOptions& opt = {}) {
    std::vector<LoopSpec> out;
    const int p = kappa.p();
    if (p == 1) {
        out.push_back({LoopKind::Rotation});
        for (int q = 0; q < opt.random_loops; ++q) {
            LoopSpec s{LoopKind::RandomValues};
            s.seed = opt.seed * 1000 + q;
            out.push_back(s);
        }
        return out;
    }
    for (int i = 1; i <= p; ++i)
        for (int j = i + 1; j <= p; ++j) out.push_back({LoopKind::FullPush, i, j});
    for (int i = 1; i <= p; ++i)
        for (int j = i + 1; j <= p; ++j)
            if (kappa.part(i - 1) == kappa.part(j - 1)) out.push_back({LoopKind::SwapEqualOrder, i, j});
    out.push_back({LoopKind::CyclicShift});
    return out;
}

/// Certifies every suite loop, checks the expected braid identities and collects arc
/// types. Throws CertificationFailure naming the first loop whose certificate fails.
inline SuiteReport generator_suite(const Partition& kappa, const SuiteOptions& opt = {}) {
    SuiteReport rep;
    rep.kappa = kappa;
    const auto base = solve_basepoint(kappa).point;
    const auto specs = suite_loops(kappa, opt);
    rep.entries.resize(specs.size());
    std::vector<int> unbalanced(specs.size(), 0);
    detail::parallel_for(static_cast<int>(specs.size()), opt.jobs, [&](int k) {
        const auto t0 = std::chrono::steady_clock::now();
        auto& e = rep.entries[k];
        e.spec = specs[k];
        try {
            const auto loop = make_loop(specs[k], base, opt.lift);
            auto cm = detail::certify_motion(base, track(loop), specs[k].label());
            e.cert = std::move(cm.cert);
            if (e.cert.color_ok) e.arc_types = detail::transported_types(base, cm.base, cm.moved, unbalanced[k]);
        } catch (const Error& err) {
            throw Error(err.kind(), specs[k].label() + ": " + err.message());
        }
        e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    for (std::size_t k = 0; k < specs.size(); ++k) {
        if (!rep.entries[k].cert.verdict)
            throw Error(ErrorKind::CertificationFailure, "loop " + specs[k].label() + " is not in the framed braid group");
        rep.unbalanced += unbalanced[k];
        for (const auto& t : rep.entries[k].arc_types) ++rep.arc_types[t];
    }

    auto braid_of = [&](LoopKind kind, int i, int j) -> const ColoredBraidWord* {
        for (const auto& e : rep.entries)
            if (e.spec.kind == kind && e.spec.i == i && e.spec.j == j) return &e.cert.braid;
        return nullptr;
    };
    auto check = [&](std::string name, const ColoredBraidWord& a, const ColoredBraidWord& b) {
        rep.identities.push_back({std::move(name), braids_equal(a, b, false), braids_equal(a, b, true)});
    };
    const int p = kappa.p();
    if (p == 1) {
        const auto& rot = rep.entries.front().cert.braid;
        const int n = kappa.n();
        for (std::size_t k = 1; k < rep.entries.size(); ++k) {
            const auto& w = rep.entries[k].cert.braid;
            IdentityCheck c{rep.entries[k].spec.label() + " = rotation^k"};
            for (int q = 0; q < n && !c.mod_center; ++q) {
                if (braids_equal(w, rot.power(q), true)) {
                    c.mod_center = true;
                    c.strict = braids_equal(w, rot.power(q), false);
                    c.name = rep.entries[k].spec.label() + " = rotation^" + std::to_string(q);
                }
            }
            rep.identities.push_back(std::move(c));
        }
        return rep;
    }
    for (int i = 1; i <= p; ++i) {
        for (int j = i + 1; j <= p; ++j) {
            const auto* push = braid_of(LoopKind::FullPush, i, j);
            const std::string pair = std::to_string(i) + "," + std::to_string(j);
            check("full_push(" + pair + ") = pair full twist", *push, expected_push_twist(base, i, j, opt.lift));
            if (const auto* swap = braid_of(LoopKind::SwapEqualOrder, i, j))
                check("full_push(" + pair + ") = swap_equal_order(" + pair + ")^2", *push, swap->power(2));
        }
    }
    return rep;
}

/// Deterministic JSON rendering of a suite report; timings only when asked for.
inline nlohmann::ordered_json to_json(const SuiteReport& rep, bool timing = false) {
    using J = nlohmann::ordered_json;
    J o;
    o["kappa"] = rep.kappa.parts();
    o["all_certified"] = rep.all_certified();
    o["identities_hold"] = rep.identities_hold();
    o["loops"] = J::array();
    for (const auto& e : rep.entries) {
        J l;
        l["loop"] = e.spec.label();
        l["braid"] = e.cert.braid.letters;
        l["defect"] = e.cert.defect;
        l["color_ok"] = e.cert.color_ok;
        l["verdict"] = e.cert.verdict;
        l["arc_types"] = e.arc_types;
        if (timing) l["seconds"] = e.seconds;
        o["loops"].push_back(std::move(l));
    }
    o["identities"] = J::array();
    for (const auto& c : rep.identities) o["identities"].push_back({{"identity", c.name}, {"strict", c.strict}, {"mod_center", c.mod_center}});
    o["arc_types"] = J::object();
    for (const auto& [t, count] : rep.arc_types) o["arc_types"][t] = count;
    o["unbalanced_admissible_pairs"] = rep.unbalanced;
    return o;
}

} // namespace eqstrat

#endif
