// Command-line front end: analyze, basepoint, monodromy, suite, winding.
//
// Exit codes: 0 success, 1 certification failure, 2 numerical failure, 3 input error.

#include "eqstrat/membership.hpp"
#include "eqstrat/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace eqstrat;
using Json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kCertification = 1, kNumerical = 2, kInput = 3 };

struct Options {
    std::string scenario_file;
    std::string svg_dir;
    std::string out_file;
    std::string cache_dir;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> tol;
    bool timing = false;
};

int exit_code_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidInput:
    case ErrorKind::NotSquarefree:
    case ErrorKind::DegenerateW:
    case ErrorKind::ColorMismatch:
    case ErrorKind::ArcThroughPoint:
    case ErrorKind::ArcsNotDisjoint: return kInput;
    case ErrorKind::CertificationFailure: return kCertification;
    default: return kNumerical;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidInput, "scenario: cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write '" + path.string() + "'");
    out << text;
}

/// Output directory: the flag, else EQSTRAT_OUT_DIR, else none.
std::string svg_dir(const Options& o) {
    if (!o.svg_dir.empty()) return o.svg_dir;
    if (const char* env = std::getenv("EQSTRAT_OUT_DIR")) return env;
    return {};
}

Scenario load(const Options& o) {
    Scenario sc = parse_scenario(read_file(o.scenario_file));
    if (o.seed) sc.seed = *o.seed;
    for (const auto& t : o.tol) set_tolerance(sc, t);
    return sc;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) h = (h ^ ch) * 0x100000001b3ULL;
    return h;
}

/// Basepoint of the scenario: the given point, or T_sigma, read from and stored in the
/// cache directory when one is given.
StratumPoint base_point(const Scenario& sc, const Options& o) {
    if (sc.point) return *sc.point;
    Scenario key{sc.kappa, sc.sigma, std::nullopt, 0, sc.tolerances, {}, {}};
    std::filesystem::path cached;
    if (!o.cache_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof name, "%016llx.yaml", static_cast<unsigned long long>(fnv1a(serialize(key))));
        cached = std::filesystem::path(o.cache_dir) / name;
        if (std::filesystem::exists(cached)) {
            const auto hit = parse_scenario(read_file(cached.string()));
            if (hit.point && hit.kappa == sc.kappa && hit.sigma == sc.sigma) return *hit.point;
        }
    }
    std::vector<int> sigma = sc.sigma.value_or(std::vector<int>{});
    for (auto& x : sigma) --x;
    const auto point = solve_basepoint(sc.kappa, sigma).point;
    if (!cached.empty()) {
        key.point = point;
        write_file(cached, serialize(key));
    }
    return point;
}

Json complex_json(Complex z) { return format_complex(z); }

void emit(const Options& o, const std::string& text) {
    if (o.out_file.empty()) std::cout << text;
    else write_file(o.out_file, text);
}

int cmd_analyze(const Options& o) {
    const auto sc = load(o);
    const auto tol = tolerances_of(sc);
    const auto s = base_point(sc, o);
    validate_stratum(s, tol);
    const auto D = strip_decomposition(s, tol);
    const auto M = standard_marking(D, s);
    Json j;
    j["kappa"] = sc.kappa.parts();
    j["n"] = sc.kappa.n();
    j["p"] = sc.kappa.p();
    j["roots"] = Json::array();
    for (auto z : D.config.roots) j["roots"].push_back(complex_json(z));
    j["strips"] = Json::array();
    for (const auto& S : D.strips) {
        j["strips"].push_back({{"root", S.root + 1},
                               {"fixed_prong", S.fixed_cone + 1},
                               {"top", std::string(to_string(S.top_glued_to.kind)) + " " + std::to_string(S.top_glued_to.index + 1)},
                               {"bottom", std::string(to_string(S.bottom_glued_to.kind)) + " " +
                                              std::to_string(S.bottom_glued_to.index + 1)}});
    }
    j["free_prongs"] = Json::array();
    for (const auto& F : D.free_prongs)
        j["free_prongs"].push_back({{"cone", F.cone + 1}, {"host_strip", F.host_strip + 1}, {"period", complex_json(F.period)}});
    int prongs = 0;
    for (int k : sc.kappa.parts()) prongs += k + 1;
    j["prong_leaves"] = prongs;
    const auto dir = svg_dir(o);
    if (!dir.empty()) {
        write_file(std::filesystem::path(dir) / "analyze.svg", to_svg(D, &M));
        j["svg"] = "analyze.svg";
    }
    emit(o, j.dump(2) + "\n");
    return kOk;
}

int cmd_basepoint(const Options& o) {
    auto sc = load(o);
    sc.point.reset();
    sc.point = base_point(sc, o);
    sc.loops.clear();
    sc.arcs.clear();
    emit(o, serialize(sc));
    return kOk;
}

int cmd_monodromy(const Options& o) {
    const auto sc = load(o);
    if (sc.loops.empty()) throw Error(ErrorKind::InvalidInput, "loops: monodromy needs at least one loop");
    LiftOptions lift;
    lift.tol = tolerances_of(sc);
    const auto s = base_point(sc, o);
    validate_stratum(s, lift.tol);
    std::vector<MembershipCertificate> certs(sc.loops.size());
    detail::parallel_for(static_cast<int>(sc.loops.size()), o.jobs, [&](int k) {
        auto spec = sc.loops[k];
        try {
            certs[k] = certify(make_loop(spec, s, lift), spec.label());
        } catch (const Error& e) {
            throw Error(e.kind(), "loops[" + std::to_string(k) + "] " + spec.label() + ": " + e.message());
        }
    });
    Json j;
    j["kappa"] = sc.kappa.parts();
    j["point"] = {{"w", Json::array()}, {"c", complex_json(s.c)}};
    for (auto w : s.w) j["point"]["w"].push_back(complex_json(w));
    j["loops"] = Json::array();
    bool all = true;
    for (const auto& c : certs) {
        j["loops"].push_back({{"loop", c.provenance},
                              {"braid", c.braid.letters},
                              {"defect", c.defect},
                              {"color_ok", c.color_ok},
                              {"verdict", c.verdict}});
        all = all && c.verdict;
    }
    j["all_certified"] = all;
    const auto dir = svg_dir(o);
    if (!dir.empty()) {
        const auto D = strip_decomposition(s, lift.tol);
        const auto M = standard_marking(D, s);
        write_file(std::filesystem::path(dir) / "monodromy_base.svg", to_svg(D, &M));
    }
    emit(o, j.dump(2) + "\n");
    return all ? kOk : kCertification;
}

int cmd_suite(const Options& o) {
    const auto sc = load(o);
    SuiteOptions opt;
    opt.jobs = o.jobs;
    opt.seed = sc.seed;
    opt.timing = o.timing;
    opt.lift.tol = tolerances_of(sc);
    const auto rep = generator_suite(sc.kappa, opt);
    emit(o, to_json(rep, o.timing).dump(2) + "\n");
    return rep.all_certified() && rep.identities_hold() && rep.unbalanced == 0 ? kOk : kCertification;
}

int cmd_winding(const Options& o) {
    const auto sc = load(o);
    if (sc.arcs.empty()) throw Error(ErrorKind::InvalidInput, "arcs: winding needs at least one arc");
    const auto tol = tolerances_of(sc);
    const auto s = base_point(sc, o);
    const auto cfg = validate_stratum(s, tol);
    const auto f = expand_from_stratum(s);
    const double snap = 1e-6 * (1.0 + diameter(cfg.all_points()));
    Json j;
    j["kappa"] = sc.kappa.parts();
    j["arcs"] = Json::array();
    for (std::size_t k = 0; k < sc.arcs.size(); ++k) {
        const auto& pts = sc.arcs[k];
        int root = -1;
        for (int r = 0; r < cfg.n(); ++r)
            if (std::abs(cfg.roots[r] - pts.back()) < snap) root = r;
        if (root < 0) throw Error(ErrorKind::InvalidInput, "arcs[" + std::to_string(k) + "]: last point is not a root");
        Arc a{pts, root};
        a.points.back() = cfg.roots[root];
        WindingResult w;
        try {
            w = winding_number_detailed(a, f, cfg);
        } catch (const Error& e) {
            throw Error(e.kind(), "arcs[" + std::to_string(k) + "]: " + e.message());
        }
        if (w.residual > tol.winding_residual)
            throw Error(ErrorKind::ResidualTooLarge, "arcs[" + std::to_string(k) + "]: winding residual too large");
        j["arcs"].push_back({{"root", root + 1}, {"psi", w.value}});
    }
    emit(o, j.dump(2) + "\n");
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monodromy of equicritical strata: strip diagrams, braids and winding numbers"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--svg-dir", o.svg_dir, "Directory for SVG figures (default: EQSTRAT_OUT_DIR if set)");
    app.add_option("--out", o.out_file, "Write the report here instead of standard output");
    app.add_option("--cache-dir", o.cache_dir, "Directory caching solved basepoints");
    app.add_option("--jobs", o.jobs, "Parallel loops")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed, "Overrides the scenario seed");
    app.add_option("--tol", o.tol, "Tolerance override key=value (repeatable)");
    app.add_flag("--timing", o.timing, "Add per-loop timings to suite reports (breaks byte-identity)");

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Command commands[] = {
        {"analyze", "Strip decomposition of the scenario point, with SVG", cmd_analyze},
        {"basepoint", "Solve the basepoint T_sigma and print it as a scenario", cmd_basepoint},
        {"monodromy", "Track the scenario loops and certify their braids", cmd_monodromy},
        {"suite", "Generator suite report for kappa", cmd_suite},
        {"winding", "Winding numbers of the scenario arcs", cmd_winding},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->fallthrough();
        sub->add_option("scenario", o.scenario_file, "Scenario file")->required();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }
    try {
        for (const auto& c : commands)
            if (app.got_subcommand(c.name)) return c.run(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kInput;
}
