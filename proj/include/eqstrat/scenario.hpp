#ifndef EQSTRAT_SCENARIO_HPP
#define EQSTRAT_SCENARIO_HPP

// Scenario files: YAML documents with complex numbers written as strings a+bi.
//
//   kappa: [2, 1, 1]
//   sigma: [1, 2, 3]              # basepoint request, or
//   point: {w: [0.4+1.2i, ...], c: 0.5-1i}
//   seed: 0
//   tolerances: {root_residual: 1e-10}
//   loops:
//     - {kind: full_push, i: 1, j: 2}
//     - {kind: c_orbit, i: 1, radius: 0.3, turns: 1}
//     - {kind: random_values, seed: 4}
//   arcs:
//     - {points: [10+0i, 1+1i, 0.5+0i]}

#include "eqstrat/loops.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <set>

namespace eqstrat {

struct Scenario {
    Partition kappa;
    std::optional<std::vector<int>> sigma;
    std::optional<StratumPoint> point;
    std::uint64_t seed = 0;
    std::map<std::string, double> tolerances;
    std::vector<LoopSpec> loops;
    std::vector<std::vector<Complex>> arcs;
};

namespace detail {

inline double parse_double(std::string_view s, const std::string& field) {
    double x = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || end != s.data() + s.size())
        throw Error(ErrorKind::InvalidInput, field + ": not a number: '" + std::string(s) + "'");
    return x;
}

inline double sign_only(std::string_view s) { return s == "-" ? -1.0 : 1.0; }

using ToleranceField = double Tolerances::*;

inline const std::map<std::string, ToleranceField>& tolerance_fields() {
    static const std::map<std::string, ToleranceField> m{
        {"root_residual", &Tolerances::root_residual},   {"wall", &Tolerances::wall},
        {"separation", &Tolerances::separation},         {"collision", &Tolerances::collision},
        {"lift_residual", &Tolerances::lift_residual},   {"wall_clearance", &Tolerances::wall_clearance},
        {"winding_residual", &Tolerances::winding_residual},
    };
    return m;
}

inline const std::map<std::string, LoopKind>& loop_kinds() {
    static const std::map<std::string, LoopKind> m{
        {"c_orbit", LoopKind::COrbit},           {"full_push", LoopKind::FullPush},
        {"half_push_pair", LoopKind::HalfPushPair}, {"swap_equal_order", LoopKind::SwapEqualOrder},
        {"cyclic_shift", LoopKind::CyclicShift}, {"rotation", LoopKind::Rotation},
        {"random_values", LoopKind::RandomValues},
    };
    return m;
}

inline void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
    if (!node.IsMap()) throw Error(ErrorKind::InvalidInput, where + ": expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw Error(ErrorKind::InvalidInput, where + ": unknown key '" + key + "'");
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) throw Error(ErrorKind::InvalidInput, field + ": expected a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw Error(ErrorKind::InvalidInput, field + ": bad value '" + node.Scalar() + "'");
    }
}

template <class T>
std::vector<T> scalar_list(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence()) throw Error(ErrorKind::InvalidInput, field + ": expected a list");
    std::vector<T> out;
    for (std::size_t k = 0; k < node.size(); ++k) out.push_back(scalar<T>(node[k], field + "[" + std::to_string(k) + "]"));
    return out;
}

} // namespace detail

/// Parses "a+bi", "a-bi", "a", "bi", "i", "-i" (exponents allowed in both parts).
inline Complex parse_complex(std::string s, const std::string& field = "complex") {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); }), s.end());
    if (s.empty()) throw Error(ErrorKind::InvalidInput, field + ": empty complex number");
    if (s.back() != 'i') return {detail::parse_double(s, field), 0.0};
    const std::string_view body(s.data(), s.size() - 1);
    // split at the last sign that does not belong to an exponent
    std::size_t cut = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            cut = k;
            break;
        }
    }
    const auto imag_part = [&](std::string_view t) {
        return t.empty() || t == "+" || t == "-" ? detail::sign_only(t) : detail::parse_double(t, field);
    };
    if (cut == std::string_view::npos) return {0.0, imag_part(body)};
    return {detail::parse_double(body.substr(0, cut), field), imag_part(body.substr(cut))};
}

/// Shortest form that parses back to the same doubles.
inline std::string format_complex(Complex z) {
    auto shortest = [](double x) {
        char buf[64];
        for (int prec = 1; prec <= 17; ++prec) {
            std::snprintf(buf, sizeof buf, "%.*g", prec, x);
            if (std::strtod(buf, nullptr) == x) break;
        }
        return std::string(buf);
    };
    const std::string re = shortest(z.real());
    std::string im = shortest(z.imag());
    if (im.front() != '-') im = "+" + im;
    return re + im + "i";
}

inline Tolerances tolerances_of(const Scenario& sc, Tolerances base = {}) {
    for (const auto& [k, v] : sc.tolerances) base.*detail::tolerance_fields().at(k) = v;
    return base;
}

/// Validates and stores one tolerance override given as "key=value".
inline void set_tolerance(Scenario& sc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidInput, "tol: expected key=value, got '" + assignment + "'");
    const auto key = assignment.substr(0, eq);
    if (!detail::tolerance_fields().count(key)) throw Error(ErrorKind::InvalidInput, "tol: unknown tolerance '" + key + "'");
    const double v = detail::parse_double(assignment.substr(eq + 1), "tol." + key);
    if (!(v > 0)) throw Error(ErrorKind::InvalidInput, "tol." + key + ": must be positive");
    sc.tolerances[key] = v;
}

inline Scenario parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("scenario: ") + e.what());
    }
    using detail::scalar;
    using detail::scalar_list;
    detail::check_keys(root, {"kappa", "sigma", "point", "seed", "tolerances", "loops", "arcs"}, "scenario");
    Scenario sc;
    if (!root["kappa"]) throw Error(ErrorKind::InvalidInput, "kappa: missing");
    sc.kappa = Partition(scalar_list<int>(root["kappa"], "kappa"));
    const int p = sc.kappa.p();
    if (root["sigma"]) {
        auto sigma = scalar_list<int>(root["sigma"], "sigma");
        auto sorted = sigma;
        std::sort(sorted.begin(), sorted.end());
        for (int k = 0; k < static_cast<int>(sorted.size()); ++k)
            if (sorted[k] != k + 1 || static_cast<int>(sorted.size()) != p)
                throw Error(ErrorKind::InvalidInput, "sigma: must be a permutation of 1.." + std::to_string(p));
        sc.sigma = std::move(sigma);
    }
    if (root["point"]) {
        const auto node = root["point"];
        detail::check_keys(node, {"w", "c"}, "point");
        if (!node["w"] || !node["c"]) throw Error(ErrorKind::InvalidInput, "point: needs w and c");
        StratumPoint s{sc.kappa, {}, parse_complex(scalar<std::string>(node["c"], "point.c"), "point.c")};
        const auto w = scalar_list<std::string>(node["w"], "point.w");
        if (static_cast<int>(w.size()) != p)
            throw Error(ErrorKind::InvalidInput, "point.w: expected " + std::to_string(p) + " critical points");
        for (std::size_t k = 0; k < w.size(); ++k) s.w.push_back(parse_complex(w[k], "point.w[" + std::to_string(k) + "]"));
        sc.point = std::move(s);
    }
    if (root["seed"]) sc.seed = scalar<std::uint64_t>(root["seed"], "seed");
    if (root["tolerances"]) {
        const auto node = root["tolerances"];
        if (!node.IsMap()) throw Error(ErrorKind::InvalidInput, "tolerances: expected a mapping");
        for (const auto& kv : node)
            set_tolerance(sc, kv.first.as<std::string>() + "=" + scalar<std::string>(kv.second, "tolerances"));
    }
    if (root["loops"]) {
        const auto node = root["loops"];
        if (!node.IsSequence()) throw Error(ErrorKind::InvalidInput, "loops: expected a list");
        for (std::size_t k = 0; k < node.size(); ++k) {
            const std::string where = "loops[" + std::to_string(k) + "]";
            const auto L = node[k];
            detail::check_keys(L, {"kind", "i", "j", "radius", "turns", "seed"}, where);
            if (!L["kind"]) throw Error(ErrorKind::InvalidInput, where + ".kind: missing");
            const auto kind = scalar<std::string>(L["kind"], where + ".kind");
            const auto it = detail::loop_kinds().find(kind);
            if (it == detail::loop_kinds().end()) throw Error(ErrorKind::InvalidInput, where + ".kind: unknown loop '" + kind + "'");
            LoopSpec spec{it->second};
            if (L["i"]) spec.i = scalar<int>(L["i"], where + ".i");
            if (L["j"]) spec.j = scalar<int>(L["j"], where + ".j");
            if (L["radius"]) spec.radius = scalar<double>(L["radius"], where + ".radius");
            if (L["turns"]) spec.turns = scalar<int>(L["turns"], where + ".turns");
            if (L["seed"]) spec.seed = scalar<std::uint64_t>(L["seed"], where + ".seed");
            sc.loops.push_back(spec);
        }
    }
    if (root["arcs"]) {
        const auto node = root["arcs"];
        if (!node.IsSequence()) throw Error(ErrorKind::InvalidInput, "arcs: expected a list");
        for (std::size_t k = 0; k < node.size(); ++k) {
            const std::string where = "arcs[" + std::to_string(k) + "]";
            detail::check_keys(node[k], {"points"}, where);
            if (!node[k]["points"]) throw Error(ErrorKind::InvalidInput, where + ".points: missing");
            std::vector<Complex> pts;
            for (const auto& s : scalar_list<std::string>(node[k]["points"], where + ".points"))
                pts.push_back(parse_complex(s, where + ".points"));
            if (pts.size() < 2) throw Error(ErrorKind::InvalidInput, where + ".points: need at least two points");
            sc.arcs.push_back(std::move(pts));
        }
    }
    return sc;
}

/// Canonical text of a scenario; parse_scenario(serialize(s)) reproduces s exactly.
inline std::string serialize(const Scenario& sc) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "kappa" << YAML::Value << YAML::Flow << sc.kappa.parts();
    if (sc.sigma) out << YAML::Key << "sigma" << YAML::Value << YAML::Flow << *sc.sigma;
    if (sc.point) {
        std::vector<std::string> w;
        for (auto z : sc.point->w) w.push_back(format_complex(z));
        out << YAML::Key << "point" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "w" << YAML::Value << YAML::Flow << w;
        out << YAML::Key << "c" << YAML::Value << format_complex(sc.point->c);
        out << YAML::EndMap;
    }
    out << YAML::Key << "seed" << YAML::Value << sc.seed;
    if (!sc.tolerances.empty()) {
        out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, v] : sc.tolerances) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << YAML::Key << k << YAML::Value << buf;
        }
        out << YAML::EndMap;
    }
    if (!sc.loops.empty()) {
        out << YAML::Key << "loops" << YAML::Value << YAML::BeginSeq;
        for (const auto& L : sc.loops) {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << to_string(L.kind);
            switch (L.kind) {
            case LoopKind::COrbit: {
                out << YAML::Key << "i" << YAML::Value << L.i;
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g", L.radius);
                out << YAML::Key << "radius" << YAML::Value << buf << YAML::Key << "turns" << YAML::Value << L.turns;
                break;
            }
            case LoopKind::FullPush:
            case LoopKind::HalfPushPair:
            case LoopKind::SwapEqualOrder:
                out << YAML::Key << "i" << YAML::Value << L.i << YAML::Key << "j" << YAML::Value << L.j;
                if (L.turns != 1) out << YAML::Key << "turns" << YAML::Value << L.turns;
                break;
            case LoopKind::RandomValues: out << YAML::Key << "seed" << YAML::Value << L.seed; break;
            default: break;
            }
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    if (!sc.arcs.empty()) {
        out << YAML::Key << "arcs" << YAML::Value << YAML::BeginSeq;
        for (const auto& a : sc.arcs) {
            std::vector<std::string> pts;
            for (auto z : a) pts.push_back(format_complex(z));
            out << YAML::BeginMap << YAML::Key << "points" << YAML::Value << YAML::Flow << pts << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace eqstrat

#endif
