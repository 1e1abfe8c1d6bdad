#include "eqstrat/flat_surface.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace eqstrat;

namespace {

const StratumPoint kCubic{Partition({1, 1}), {1.0, -1.0}, 0.0};
const StratumPoint kGeneric{Partition({2, 1, 1}), {Complex(0.1, 0.2), Complex(1.2, -0.3), Complex(-0.9, 0.5)},
                            Complex(0.4, 0.1)};

int root_near(const PointConfig& cfg, Complex z) {
    for (int r = 0; r < cfg.n(); ++r)
        if (std::abs(cfg.roots[r] - z) < 1e-9) return r;
    return -1;
}

void expect_glue_involution(const StripDiagram& D) {
    auto back = [&](const StripSide& s) -> StripSide {
        switch (s.kind) {
        case SideKind::StripTop: return D.strips[s.index].top_glued_to;
        case SideKind::StripBottom: return D.strips[s.index].bottom_glued_to;
        case SideKind::SlitUpper: return D.free_prongs[s.index].upper_glued_to;
        case SideKind::SlitLower: return D.free_prongs[s.index].lower_glued_to;
        }
        return {};
    };
    for (int s = 0; s < static_cast<int>(D.strips.size()); ++s) {
        EXPECT_EQ(back(D.strips[s].top_glued_to), (StripSide{SideKind::StripTop, s}));
        EXPECT_EQ(back(D.strips[s].bottom_glued_to), (StripSide{SideKind::StripBottom, s}));
    }
    for (int f = 0; f < static_cast<int>(D.free_prongs.size()); ++f) {
        EXPECT_EQ(back(D.free_prongs[f].upper_glued_to), (StripSide{SideKind::SlitUpper, f}));
        EXPECT_EQ(back(D.free_prongs[f].lower_glued_to), (StripSide{SideKind::SlitLower, f}));
    }
}

} // namespace

TEST(Separatrix, CubicLeavesFollowTheRealAxis) {
    // f = z^3 - 3z: v = -2 at w = 1, v = 2 at w = -1. On the real axis f is real, so the
    // prong leaves run along it: 1 -> 0, 1 -> sqrt3, -1 -> 0, -1 -> -sqrt3.
    const auto D = strip_decomposition(kCubic);
    ASSERT_EQ(D.traces.size(), 8u);
    const auto& cfg = D.config;
    const int r_minus = root_near(cfg, -std::sqrt(3.0)), r0 = root_near(cfg, 0.0), r_plus = root_near(cfg, std::sqrt(3.0));
    std::multiset<std::pair<int, int>> landings;
    for (const auto& t : D.traces) {
        if (t.to_root()) {
            landings.insert({t.cone, t.root});
        } else {
            EXPECT_EQ(t.root, -1);
        }
    }
    EXPECT_EQ(landings, (std::multiset<std::pair<int, int>>{{0, r0}, {0, r_plus}, {1, r0}, {1, r_minus}}));
    // the root at 0 receives both; equal |v| so the first cone fixes it
    EXPECT_EQ(D.strips[r0].fixed_cone, 0);
    EXPECT_EQ(D.strips[r_plus].fixed_cone, 0);
    EXPECT_EQ(D.strips[r_minus].fixed_cone, 1);
    ASSERT_EQ(D.free_prongs.size(), 1u);
    EXPECT_EQ(D.free_prongs[0].cone, 1);
    EXPECT_EQ(D.free_prongs[0].host_strip, r0);
    EXPECT_NEAR(D.free_prongs[0].period.real(), 0.0, 1e-12);
    EXPECT_NEAR(D.free_prongs[0].period.imag(), kPi, 1e-12);
    expect_glue_involution(D);
}

TEST(Separatrix, LeavesAreHorizontal) {
    const auto D = strip_decomposition(kGeneric);
    const auto f = expand_from_stratum(kGeneric);
    const auto escape = OuterCircle::for_points(D.config.all_points());
    std::size_t expected = 0;
    for (int k : kGeneric.kappa.parts()) expected += 2 * (k + 1);
    ASSERT_EQ(D.traces.size(), expected);
    for (const auto& t : D.traces) {
        const Complex v = D.critical_values[t.cone];
        double prev = std::abs(v);
        for (std::size_t q = 1; q + 1 < t.points.size(); ++q) {
            const Complex fz = f(t.points[q]);
            // the argument is only meaningful away from the root
            if (std::abs(fz) > 1e-6 * std::abs(v)) EXPECT_LT(std::abs(principal_angle(std::arg(fz) - std::arg(v))), 1e-8);
            // |f| is monotone along the leaf
            if (t.to_root()) EXPECT_LE(std::abs(fz), prev * (1 + 1e-12));
            else EXPECT_GE(std::abs(fz), prev * (1 - 1e-12));
            prev = std::abs(fz);
        }
        if (!t.to_root()) EXPECT_NEAR(std::abs(t.points.back() - escape.center), escape.radius, 1e-9 * escape.radius);
    }
}

TEST(Strips, CountsAndGluing) {
    for (const auto& s : {kCubic, kGeneric}) {
        const auto D = strip_decomposition(s);
        EXPECT_EQ(static_cast<int>(D.strips.size()), s.kappa.n());
        EXPECT_EQ(static_cast<int>(D.free_prongs.size()), s.kappa.p() - 1);
        int fixed = 0;
        for (int i = 0; i < s.kappa.p(); ++i) fixed += D.strips_fixed_at(i);
        EXPECT_EQ(fixed, s.kappa.n());
        for (const auto& F : D.free_prongs) {
            EXPECT_GT(F.period.imag(), 0.0);
            EXPECT_LT(F.period.imag(), kTwoPi);
        }
        expect_glue_involution(D);
    }
}

TEST(Strips, SingleConeIsACycle) {
    // z^4 + 1: one cone point, four strips glued cyclically
    const auto D = strip_decomposition({Partition({3}), {0.0}, 1.0});
    ASSERT_EQ(D.strips.size(), 4u);
    int s = 0;
    for (int step = 0; step < 4; ++step) {
        ASSERT_EQ(D.strips[s].top_glued_to.kind, SideKind::StripBottom);
        s = D.strips[s].top_glued_to.index;
    }
    EXPECT_EQ(s, 0);
    expect_glue_involution(D);
}

TEST(Basepoint, ModelCombinatoricsAndValues) {
    for (const auto& kappa : {Partition({1}), Partition({2, 1}), Partition({1, 1, 1}), Partition({2, 2, 1})}) {
        std::vector<int> sigma(kappa.p());
        std::iota(sigma.begin(), sigma.end(), 0);
        do {
            const auto res = solve_basepoint(kappa, sigma);
            EXPECT_TRUE(matches_model(res.diagram, kappa, sigma));
            const auto v = critical_values(res.point);
            for (int m = 0; m < kappa.p(); ++m) {
                const Complex want = std::exp(static_cast<double>(m) * Complex(0.5, kPi));
                EXPECT_LT(std::abs(v[sigma[m]] - want), 1e-8);
            }
            EXPECT_LT(std::abs(res.point.centroid()), 1e-12);
            // first group owns k+1 strips
            EXPECT_EQ(res.diagram.strips_fixed_at(sigma[0]), kappa.part(sigma[0]) + 1);
        } while (std::next_permutation(sigma.begin(), sigma.end()));
    }
}

TEST(Basepoint, SingleConeIsRadical) {
    const auto res = solve_basepoint(Partition({4}));
    // w = 0 and v = 1 give z^5 + 1
    EXPECT_LT(std::abs(res.point.w[0]), 1e-12);
    EXPECT_LT(std::abs(res.point.c - 1.0), 1e-9);
}

TEST(Basepoint, CachedResultIsIdentical) {
    const auto a = solve_basepoint(Partition({2, 1, 1}), {2, 0, 1});
    const auto b = solve_basepoint(Partition({2, 1, 1}), {2, 0, 1});
    for (int i = 0; i < 3; ++i) EXPECT_EQ(a.point.w[i], b.point.w[i]);
    EXPECT_THROW(solve_basepoint(Partition({2, 1, 1}), {0, 0, 1}), Error);
}

TEST(Marking, StandardArcsAreDisjointLeaves) {
    for (const auto& kappa : {Partition({1, 1}), Partition({2, 1, 1}), Partition({3, 2, 1})}) {
        const auto res = solve_basepoint(kappa);
        const auto M = standard_marking(res.diagram, res.point);
        const auto f = expand_from_stratum(res.point);
        ASSERT_EQ(static_cast<int>(M.arcs.size()), kappa.n());
        EXPECT_TRUE(arcs_disjoint(M.arcs));
        for (const auto& a : M.arcs) {
            EXPECT_NEAR(std::abs(a.points.front() - M.outer.center), M.outer.radius, 1e-9 * M.outer.radius);
            EXPECT_EQ(a.points.back(), res.diagram.config.roots[a.root]);
            EXPECT_FALSE(self_intersects(a.points));
            // every interior vertex sits on one horizontal leaf
            const double h = std::arg(f(a.points[a.points.size() / 2]));
            for (std::size_t q = 1; q + 1 < a.points.size(); ++q)
                if (std::abs(f(a.points[q])) > 1e-6) EXPECT_LT(std::abs(principal_angle(std::arg(f(a.points[q])) - h)), 1e-8);
            // no other marked point on the arc
            for (auto z : res.diagram.config.all_points())
                if (z != a.points.back()) EXPECT_GT(polyline_distance(a.points, z), 1e-4);
        }
        for (int w : M.windings) EXPECT_EQ(w, 0);
    }
}

TEST(Svg, ContainsPointsAndTraces) {
    const auto D = strip_decomposition(kGeneric);
    const auto svg = to_svg(D);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("w3"), std::string::npos);
    EXPECT_NE(svg.find("polyline"), std::string::npos);
}
