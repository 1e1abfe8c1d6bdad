#include "eqstrat/scenario.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sys/wait.h>

using namespace eqstrat;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("eqstrat_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path write(const std::string& name, const std::string& text) {
    const auto p = scratch() / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

Run run(const std::string& args) {
    const auto err = scratch() / "stderr.txt";
    const std::string cmd = std::string(EQSTRAT_CLI_PATH) + " " + args + " 2>" + err.string();
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
}

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t c = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++c;
    return c;
}

} // namespace

TEST(Complex, Syntax) {
    EXPECT_EQ(parse_complex("1+2i"), Complex(1, 2));
    EXPECT_EQ(parse_complex("-1.5-0.25i"), Complex(-1.5, -0.25));
    EXPECT_EQ(parse_complex("3"), Complex(3, 0));
    EXPECT_EQ(parse_complex("-2i"), Complex(0, -2));
    EXPECT_EQ(parse_complex("i"), Complex(0, 1));
    EXPECT_EQ(parse_complex("-i"), Complex(0, -1));
    EXPECT_EQ(parse_complex("1-i"), Complex(1, -1));
    EXPECT_EQ(parse_complex("1e-3+2.5e+2i"), Complex(1e-3, 250));
    EXPECT_EQ(parse_complex("-1E2-1e-2i"), Complex(-100, -0.01));
    EXPECT_EQ(parse_complex(" 1 + 2i "), Complex(1, 2));
    for (const char* bad : {"", "abc", "1+2j", "1++2i", "1+2i3"}) EXPECT_THROW(parse_complex(bad), Error) << bad;
}

TEST(Complex, FormatRoundTrips) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0, 10);
    for (int k = 0; k < 1000; ++k) {
        const Complex z(g(rng) * std::pow(10.0, k % 7 - 3), g(rng));
        EXPECT_EQ(parse_complex(format_complex(z)), z) << format_complex(z);
    }
    EXPECT_EQ(format_complex(Complex(0.5, -1)), "0.5-1i");
}

TEST(Scenario, RoundTripIsAFixedPoint) {
    const std::string text = R"(
kappa: [2, 1, 1]
sigma: [2, 1, 3]
point: {w: [0.1+0.2i, -1e-3-3i, 2], c: "-0.5+0.125i"}
seed: 7
tolerances: {root_residual: 1e-12, collision: 2e-4}
loops:
  - {kind: full_push, i: 1, j: 3}
  - {kind: c_orbit, i: 2, radius: 0.25, turns: -2}
  - {kind: random_values, seed: 11}
  - {kind: cyclic_shift}
arcs:
  - {points: [10+0i, 1+1i, 0.3-0.1i]}
)";
    const auto a = parse_scenario(text);
    EXPECT_EQ(a.kappa, Partition({2, 1, 1}));
    EXPECT_EQ(*a.sigma, (std::vector<int>{2, 1, 3}));
    EXPECT_EQ(a.point->w[1], Complex(-1e-3, -3));
    EXPECT_EQ(a.point->c, Complex(-0.5, 0.125));
    EXPECT_EQ(a.seed, 7u);
    EXPECT_EQ(a.tolerances.at("collision"), 2e-4);
    ASSERT_EQ(a.loops.size(), 4u);
    EXPECT_EQ(a.loops[1].turns, -2);
    EXPECT_EQ(a.loops[2].seed, 11u);
    ASSERT_EQ(a.arcs.size(), 1u);
    EXPECT_EQ(a.arcs[0][2], Complex(0.3, -0.1));
    const auto once = serialize(a);
    const auto b = parse_scenario(once);
    EXPECT_EQ(serialize(b), once);
    EXPECT_EQ(b.point->w, a.point->w);
    EXPECT_EQ(b.loops[1].radius, 0.25);
    EXPECT_EQ(tolerances_of(b).root_residual, 1e-12);
}

TEST(Scenario, UnknownKeysAreRejected) {
    for (const char* text : {"kappa: [1, 1]\nfoo: 1\n", "kappa: [1, 1]\nloops:\n  - {kind: full_push, k: 2}\n",
                             "kappa: [1, 1]\npoint: {w: [1, -1], c: 0, z: 1}\n", "kappa: [1, 1]\ntolerances: {bogus: 1}\n",
                             "kappa: [1, 1]\nloops:\n  - {kind: spin}\n"}) {
        EXPECT_THROW(parse_scenario(text), Error) << text;
    }
}

TEST(Scenario, MalformedFieldsAreNamed) {
    auto message = [](const char* text) {
        try {
            parse_scenario(text);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("kappa: [1, 2]\n").find("kappa"), std::string::npos);
    EXPECT_NE(message("kappa: [2, 1]\nsigma: [1, 1]\n").find("sigma"), std::string::npos);
    EXPECT_NE(message("kappa: [2, 1]\npoint: {w: [1+1i], c: 0}\n").find("point.w"), std::string::npos);
    EXPECT_NE(message("kappa: [1, 1]\npoint: {w: [1+1j, 0], c: 0}\n").find("point.w[0]"), std::string::npos);
    EXPECT_NE(message("seed: 1\n").find("kappa"), std::string::npos);
}

TEST(Cli, AnalyzeSingleCriticalPointHasNoSlits) {
    const auto sc = write("p1.yaml", "kappa: [3]\n");
    const auto svg = scratch() / "svg_p1";
    const auto r = run("analyze --svg-dir " + svg.string() + " " + sc.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto text = slurp(svg / "analyze.svg");
    EXPECT_EQ(count(text, "class=\"strip\""), 4u);
    EXPECT_EQ(count(text, "class=\"slit\""), 0u);
    EXPECT_NE(r.out.find("\"free_prongs\": []"), std::string::npos);
}

TEST(Cli, AnalyzeBasepointOf211) {
    const auto sc = write("a211.yaml", "kappa: [2, 1, 1]\n");
    const auto svg = scratch() / "svg_211";
    const auto r = run("analyze --svg-dir " + svg.string() + " " + sc.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const auto text = slurp(svg / "analyze.svg");
    EXPECT_EQ(count(text, "class=\"strip\""), 5u);
    EXPECT_EQ(count(text, "class=\"slit\""), 2u);
    EXPECT_NE(r.out.find("\"prong_leaves\": 7"), std::string::npos);
}

TEST(Cli, SuiteCertifiesAll) {
    const auto sc = write("s11.yaml", "kappa: [1, 1]\n");
    const auto r = run("suite " + sc.string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\"all_certified\": true"), std::string::npos);
    EXPECT_EQ(r.out.find("\"verdict\": false"), std::string::npos);
    EXPECT_EQ(r.out.find("seconds"), std::string::npos);
}

TEST(Cli, MalformedScenarioExitsWithInputError) {
    const auto sc = write("bad.yaml", "kappa: [1, 2]\n");
    const auto r = run("suite " + sc.string());
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("kappa"), std::string::npos);
    EXPECT_EQ(run("suite " + (scratch() / "missing.yaml").string()).code, 3);
    EXPECT_EQ(run("frobnicate " + sc.string()).code, 3);
    EXPECT_EQ(run("suite --tol nonsense=1 " + write("ok.yaml", "kappa: [1, 1]\n").string()).code, 3);
}

TEST(Cli, OutputIsDeterministic) {
    const auto sc = write("det.yaml", "kappa: [2, 1, 1]\nseed: 3\n");
    const auto a = run("suite " + sc.string());
    const auto b = run("suite --jobs 3 " + sc.string());
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const auto m = write("mono.yaml", "kappa: [1, 1]\nloops:\n  - {kind: full_push, i: 1, j: 2}\n  - {kind: random_values, seed: 2}\n");
    const auto x = run("monodromy " + m.string());
    const auto y = run("monodromy --jobs 2 " + m.string());
    ASSERT_EQ(x.code, 0) << x.err;
    EXPECT_EQ(x.out, y.out);
    EXPECT_NE(x.out.find("\"all_certified\": true"), std::string::npos);
}

TEST(Cli, BasepointOutputIsAReusableScenario) {
    const auto sc = write("bp.yaml", "kappa: [2, 1]\nsigma: [2, 1]\n");
    const auto cache = scratch() / "cache";
    const auto a = run("basepoint --cache-dir " + cache.string() + " " + sc.string());
    ASSERT_EQ(a.code, 0) << a.err;
    const auto parsed = parse_scenario(a.out);
    ASSERT_TRUE(parsed.point.has_value());
    EXPECT_EQ(serialize(parsed), a.out);
    EXPECT_EQ(std::distance(fs::directory_iterator(cache), fs::directory_iterator()), 1);
    const auto b = run("basepoint --cache-dir " + cache.string() + " " + sc.string());
    EXPECT_EQ(a.out, b.out);
    // the printed point feeds straight back in
    const auto again = write("bp2.yaml", a.out);
    const auto c = run("analyze " + again.string());
    EXPECT_EQ(c.code, 0) << c.err;
}

TEST(Cli, WindingOfSuppliedArcs) {
    const auto ok = write("w.yaml", R"(kappa: [1, 1]
point: {w: [1+1i, -1-1i], c: 0.5}
arcs:
  - {points: [30+0i, 2+0.2i]}
)");
    // with w = +-(1+i) and c = 0.5 the roots are the solutions of z^3/3 - 2iz + 0.5 = 0
    const auto sc = parse_scenario(slurp(ok));
    const auto cfg = validate_stratum(*sc.point);
    auto arc_text = std::string("kappa: [1, 1]\npoint: {w: [1+1i, -1-1i], c: 0.5}\narcs:\n");
    for (auto r : cfg.roots) arc_text += "  - {points: [\"" + format_complex(r + 40.0) + "\", \"" + format_complex(r) + "\"]}\n";
    const auto r = run("winding " + write("w2.yaml", arc_text).string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count(r.out, "\"psi\""), 3u);
    // an arc through a marked point is an input error
    const auto through = write("w3.yaml", "kappa: [1, 1]\npoint: {w: [1+0i, -1+0i], c: 0}\narcs:\n"
                                          "  - {points: [\"-30+0i\", \"1.7320508075688772+0i\"]}\n");
    EXPECT_EQ(run("winding " + through.string()).code, 3);
    // an arc leaving infinity sideways cannot be closed against the field: numerical failure
    std::string side = "kappa: [1, 1]\npoint: {w: [1+0i, -1+0i], c: 0}\narcs:\n";
    side += "  - {points: [\"40+0i\", \"40+40i\", \"" + format_complex(validate_stratum(StratumPoint{Partition({1, 1}), {1.0, -1.0}, 0.0}).roots[2]) + "\"]}\n";
    EXPECT_EQ(run("winding " + write("w4.yaml", side).string()).code, 2);
}
