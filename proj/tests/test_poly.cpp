#include "eqstrat/poly.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace eqstrat;

namespace {

// Independent expansion: multiply out n * prod (z - w_i)^{k_i} by repeated
// convolution, then integrate term by term.
std::vector<Complex> expand_oracle(const std::vector<int>& kappa, const std::vector<Complex>& w, Complex c) {
    int n = 1;
    for (int k : kappa) n += k;
    std::vector<Complex> d{Complex(n)};
    for (std::size_t i = 0; i < kappa.size(); ++i) {
        for (int r = 0; r < kappa[i]; ++r) {
            std::vector<Complex> lin{-w[i], 1.0};
            std::vector<Complex> out(d.size() + 1, 0.0);
            for (std::size_t a = 0; a < d.size(); ++a)
                for (std::size_t b = 0; b < 2; ++b) out[a + b] += d[a] * lin[b];
            d = out;
        }
    }
    std::vector<Complex> f(d.size() + 1, 0.0);
    f[0] = c;
    for (std::size_t i = 0; i < d.size(); ++i) f[i + 1] = d[i] / double(i + 1);
    return f;
}

void expect_coeffs(const Polynomial& f, const std::vector<Complex>& expected, double tol) {
    ASSERT_EQ(f.coefficients().size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_LT(std::abs(f.coefficients()[i] - expected[i]), tol) << i;
}

bool contains(const std::vector<Complex>& zs, Complex z, double tol) {
    for (auto x : zs)
        if (std::abs(x - z) < tol) return true;
    return false;
}

} // namespace

TEST(Partition, Validation) {
    EXPECT_THROW(Partition(std::vector<int>{}), Error);
    EXPECT_THROW(Partition({1, 2}), Error);
    EXPECT_THROW(Partition({0}), Error);
    Partition k({2, 1, 1});
    EXPECT_EQ(k.n(), 5);
    EXPECT_EQ(k.p(), 3);
    EXPECT_EQ(k.gcd(), 1);
    EXPECT_EQ(Partition({4, 2}).gcd(), 2);
    EXPECT_EQ(partitions_of(4).size(), 5u);
}

TEST(Expand, SingleCriticalPoint) {
    const Complex alpha(0.3, -0.2), beta(1.5, 0.5);
    // c fixes f(0), so the form is (z - alpha)^4 + beta with c = alpha^4 + beta
    auto f = expand_from_stratum({Partition({3}), {alpha}, std::pow(alpha, 4) + beta});
    EXPECT_EQ(f.degree(), 4);
    EXPECT_LT(std::abs(f(alpha) - beta), 1e-13);
    for (Complex z : {Complex(1, 1), Complex(-2, 0.5)}) EXPECT_LT(std::abs(f(z) - (std::pow(z - alpha, 4) + beta)), 1e-12);
}

TEST(Expand, CubeExamples) {
    expect_coeffs(expand_from_stratum({Partition({2}), {0.0}, 1.0}), {1.0, 0.0, 0.0, 1.0}, 1e-15);
    expect_coeffs(expand_from_stratum({Partition({1, 1}), {1.0, -1.0}, 0.0}), {0.0, -3.0, 0.0, 1.0}, 1e-15);
}

TEST(Expand, DerivativeMatchesOracle) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (const auto& kappa : {std::vector<int>{3, 2, 1}, {2, 2}, {1, 1, 1, 1}, {5}}) {
        std::vector<Complex> w;
        for (std::size_t i = 0; i < kappa.size(); ++i) w.emplace_back(g(rng), g(rng));
        const Complex c(g(rng), g(rng));
        auto f = expand_from_stratum({Partition(kappa), w, c});
        expect_coeffs(f, expand_oracle(kappa, w, c), 1e-10);
    }
}

TEST(Validate, Examples) {
    try {
        validate_stratum({Partition({1, 1}), {1.0, -1.0}, 2.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WallHit);
        EXPECT_EQ(e.index(), 1);
    }
    try {
        validate_stratum({Partition({1, 1}), {1.0, 1.0}, 5.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateW);
    }
    auto cfg = validate_stratum({Partition({1, 1}), {1.0, -1.0}, 0.0});
    ASSERT_EQ(cfg.n(), 3);
    EXPECT_TRUE(contains(cfg.roots, 0.0, 1e-10));
    EXPECT_TRUE(contains(cfg.roots, std::sqrt(3.0), 1e-10));
    EXPECT_TRUE(contains(cfg.roots, -std::sqrt(3.0), 1e-10));
    int sum = 0;
    for (int w : cfg.weights())
        if (w > 0) sum += w;
    EXPECT_EQ(sum, cfg.n() - 1);
}

TEST(Roots, CubeRootsOfMinusOne) {
    auto r = roots(Polynomial({1.0, 0.0, 0.0, 1.0}));
    ASSERT_EQ(r.size(), 3u);
    EXPECT_LT(std::abs(r[0] + 1.0), 1e-12);
    EXPECT_TRUE(contains(r, std::polar(1.0, kPi / 3), 1e-12));
    EXPECT_TRUE(contains(r, std::polar(1.0, -kPi / 3), 1e-12));
    // lexicographic order
    for (std::size_t i = 0; i + 1 < r.size(); ++i) EXPECT_LE(r[i].real(), r[i + 1].real() + 1e-15);
}

TEST(Roots, Radical) {
    const Complex alpha(0.5, 0.25), beta(-0.7, 0.3);
    const int n = 6;
    auto r = roots(expand_from_stratum({Partition({n - 1}), {alpha}, std::pow(-alpha, n) + beta}));
    const Complex base = std::pow(-beta, 1.0 / n);
    for (int k = 0; k < n; ++k) EXPECT_TRUE(contains(r, alpha + base * std::polar(1.0, kTwoPi * k / n), 1e-10));
}

TEST(Roots, RandomResiduals) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int n = 2; n <= 8; ++n) {
        for (const auto& kappa : partitions_of(n - 1)) {
            for (int trial = 0; trial < 200; ++trial) {
                StratumPoint s{kappa, {}, Complex(g(rng), g(rng))};
                for (int i = 0; i < kappa.p(); ++i) s.w.emplace_back(g(rng), g(rng));
                auto f = expand_from_stratum(s);
                std::vector<Complex> r;
                try {
                    r = roots(f);
                } catch (const Error& e) {
                    // near-discriminant samples are legitimately rejected
                    ASSERT_EQ(e.kind(), ErrorKind::NotSquarefree);
                    continue;
                }
                ASSERT_EQ(static_cast<int>(r.size()), n);
                for (auto z : r) EXPECT_LT(std::abs(f(z)), 1e-10 * f.scale_at(z));
            }
        }
    }
}

TEST(Roots, RandomDegreeEight) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    std::vector<Complex> c(9);
    for (int i = 0; i < 8; ++i) c[i] = Complex(g(rng), g(rng));
    c[8] = 1.0;
    Polynomial f(c);
    auto r = roots(f);
    for (auto z : r) EXPECT_LT(std::abs(f(z)), 1e-10 * f.scale_at(z));
    EXPECT_GT(min_separation(r), 1e-6);
}

TEST(LogPeriod, Residues) {
    auto f = expand_from_stratum({Partition({1, 1}), {1.0, -1.0}, 0.0});
    const auto rts = roots(f);
    Complex sum = 0.0;
    for (auto z : rts) {
        auto loop = circle_path(z, 0.3, 64);
        const Complex res = log_period(f, loop);
        EXPECT_LT(std::abs(res - Complex(0, kTwoPi)), 1e-8);
        sum += res;
    }
    const Complex big = log_period(f, circle_path(0.0, 10.0, 256));
    EXPECT_LT(std::abs(big - Complex(0, kTwoPi * 3)), 1e-8);
    EXPECT_LT(std::abs(sum - big), 1e-6);
    EXPECT_LT(std::abs(log_period(f, circle_path(Complex(5, 5), 1.0))), 1e-10);
}

TEST(LogPeriod, OpenPathMatchesLogDifference) {
    auto f = expand_from_stratum({Partition({2}), {0.0}, 1.0});
    std::vector<Complex> path{Complex(2, 0), Complex(2, 0.5), Complex(1.8, 1.0)};
    const Complex lp = log_period(f, path);
    EXPECT_LT(std::abs(std::exp(lp) - f(path.back()) / f(path.front())), 1e-12);
}

TEST(LogPeriod, PathThroughRoot) {
    auto f = expand_from_stratum({Partition({1, 1}), {1.0, -1.0}, 0.0});
    std::vector<Complex> path{Complex(-0.5, 0), Complex(0.5, 0)};
    try {
        log_period(f, path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PathThroughZero);
    }
}

TEST(Gauge, TranslationPreservesCriticalValues) {
    StratumPoint s{Partition({2, 1}), {Complex(0.3, 0.1), Complex(-0.7, 0.4)}, Complex(0.2, -0.5)};
    auto f = expand_from_stratum(s);
    const Complex b(0.37, -0.21);
    // f(z - b) has critical points w + b and constant term f(-b)
    StratumPoint t{s.kappa, {s.w[0] + b, s.w[1] + b}, f(-b)};
    auto v = critical_values(s), u = critical_values(t);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_LT(std::abs(v[i] - u[i]), 1e-10);
}

TEST(Jacobian, MatchesFiniteDifferences) {
    StratumPoint s{Partition({2, 1, 1}), {Complex(0.3, 0.1), Complex(-0.7, 0.4), Complex(0.2, -0.8)}, Complex(0.2, -0.5)};
    auto jac = critical_value_jacobian(s);
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
        auto sp = s, sm = s;
        sp.w[j] += h;
        sm.w[j] -= h;
        auto vp = critical_values(sp), vm = critical_values(sm);
        for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs((vp[i] - vm[i]) / (2 * h) - jac[i][j]), 1e-6) << i << "," << j;
    }
}
