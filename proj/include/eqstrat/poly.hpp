#ifndef EQSTRAT_POLY_HPP
#define EQSTRAT_POLY_HPP

#include "eqstrat/common.hpp"

#include <random>
#include <span>

namespace eqstrat {

/// Monic polynomial with coefficients stored by ascending degree.
class Polynomial {
public:
    Polynomial() : coeffs_{Complex(1.0)} {}

    explicit Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty() || coeffs_.back() != Complex(1.0)) {
            throw Error(ErrorKind::InvalidInput, "polynomial must be monic");
        }
    }

    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<Complex>& coefficients() const noexcept { return coeffs_; }

    Complex operator()(Complex z) const {
        Complex acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    /// Value and first derivative by a single Horner pass.
    std::pair<Complex, Complex> eval_with_derivative(Complex z) const {
        Complex f = 0.0, df = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            df = df * z + f;
            f = f * z + *it;
        }
        return {f, df};
    }

    Complex derivative(Complex z) const { return eval_with_derivative(z).second; }

    /// max(1, max |coefficient|)
    double scale() const {
        double s = 1.0;
        for (const auto& c : coeffs_) s = std::max(s, std::abs(c));
        return s;
    }

    /// Residual scale at z: grows like |z|^n away from the unit disk.
    double scale_at(Complex z) const { return scale() * std::pow(std::max(1.0, std::abs(z)), degree()); }

private:
    std::vector<Complex> coeffs_;
};

namespace detail {

/// Multiply an ascending coefficient vector by (z - a)^k.
inline void multiply_linear_power(std::vector<Complex>& poly, Complex a, int k) {
    for (int r = 0; r < k; ++r) {
        std::vector<Complex> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] += poly[i];
            next[i] -= a * poly[i];
        }
        poly = std::move(next);
    }
}

/// Antiderivative vanishing at 0.
inline std::vector<Complex> integrate(const std::vector<Complex>& poly) {
    std::vector<Complex> out(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) out[i + 1] = poly[i] / static_cast<double>(i + 1);
    return out;
}

inline Complex horner(const std::vector<Complex>& poly, Complex z) {
    Complex acc = 0.0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * z + *it;
    return acc;
}

} // namespace detail

/// A point of the stratum in (w, c) coordinates:
///   f(z) = c + integral_0^z n * prod (t - w_i)^{k_i} dt.
struct StratumPoint {
    Partition kappa;
    std::vector<Complex> w;
    Complex c = 0.0;

    Complex centroid() const {
        Complex s = 0.0;
        for (auto x : w) s += x;
        return s / static_cast<double>(w.size());
    }
};

/// Coefficients of f'(z) = n * prod (z - w_i)^{k_i}.
inline std::vector<Complex> derivative_coefficients(const StratumPoint& s) {
    std::vector<Complex> d{Complex(static_cast<double>(s.kappa.n()))};
    for (int i = 0; i < s.kappa.p(); ++i) detail::multiply_linear_power(d, s.w[i], s.kappa.part(i));
    return d;
}

inline Polynomial expand_from_stratum(const StratumPoint& s) {
    if (static_cast<int>(s.w.size()) != s.kappa.p()) {
        throw Error(ErrorKind::InvalidInput, "w must have one entry per part of kappa");
    }
    auto coeffs = detail::integrate(derivative_coefficients(s));
    coeffs[0] = s.c;
    coeffs.back() = 1.0;
    return Polynomial(std::move(coeffs));
}

/// Critical values f(w_i).
inline std::vector<Complex> critical_values(const StratumPoint& s) {
    auto f = expand_from_stratum(s);
    std::vector<Complex> v;
    v.reserve(s.w.size());
    for (auto x : s.w) v.push_back(f(x));
    return v;
}

/// d f(w_i) / d w_j = -k_j * integral_0^{w_i} f'(t) / (t - w_j) dt, as a p x p matrix
/// (row i, column j). The derivative in c is identically 1.
inline std::vector<std::vector<Complex>> critical_value_jacobian(const StratumPoint& s) {
    const int p = s.kappa.p();
    std::vector<std::vector<Complex>> jac(p, std::vector<Complex>(p));
    for (int j = 0; j < p; ++j) {
        std::vector<Complex> q{Complex(static_cast<double>(s.kappa.n()))};
        for (int l = 0; l < p; ++l) {
            detail::multiply_linear_power(q, s.w[l], s.kappa.part(l) - (l == j ? 1 : 0));
        }
        auto Q = detail::integrate(q);
        for (int i = 0; i < p; ++i) jac[i][j] = -static_cast<double>(s.kappa.part(j)) * detail::horner(Q, s.w[i]);
    }
    return jac;
}

/// Roots and critical points of a squarefree polynomial of the stratum.
struct PointConfig {
    std::vector<Complex> roots;
    std::vector<Complex> critical;
    std::vector<int> orders;

    int n() const noexcept { return static_cast<int>(roots.size()); }
    int p() const noexcept { return static_cast<int>(critical.size()); }

    /// Roots first, then critical points.
    std::vector<Complex> all_points() const {
        std::vector<Complex> pts = roots;
        pts.insert(pts.end(), critical.begin(), critical.end());
        return pts;
    }

    /// Weight -1 for roots, k_i for critical points (same layout as all_points).
    std::vector<int> weights() const {
        std::vector<int> w(roots.size(), -1);
        w.insert(w.end(), orders.begin(), orders.end());
        return w;
    }
};

namespace detail {

inline void sort_lexicographic(std::vector<Complex>& zs) {
    std::sort(zs.begin(), zs.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

inline bool aberth(const Polynomial& f, std::vector<Complex>& z, int max_iter) {
    const int n = f.degree();
    for (int it = 0; it < max_iter; ++it) {
        double max_step = 0.0;
        for (int k = 0; k < n; ++k) {
            auto [fv, dv] = f.eval_with_derivative(z[k]);
            if (fv == Complex(0.0)) continue;
            Complex ratio = fv / dv;
            Complex sum = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != k) sum += 1.0 / (z[k] - z[j]);
            Complex step = ratio / (1.0 - ratio * sum);
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
            z[k] -= step;
            max_step = std::max(max_step, std::abs(step) / (1.0 + std::abs(z[k])));
        }
        if (max_step < 1e-14) return true;
    }
    return false;
}

} // namespace detail

/// All n roots of a monic polynomial, sorted by (Re, Im).
inline std::vector<Complex> roots(const Polynomial& f, double tol = 1e-10, double separation = 1e-7) {
    const int n = f.degree();
    if (n < 1) return {};
    const auto& a = f.coefficients();
    double bound = 0.0;
    for (int i = 0; i < n; ++i) bound = std::max(bound, std::pow(std::abs(a[i]), 1.0 / (n - i)));
    bound = std::max(bound, 1e-3);

    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> jitter(-0.1, 0.1);
    std::vector<Complex> z(n);
    bool ok = false;
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
        const double offset = 0.4 + (attempt ? jitter(rng) * 10.0 : 0.0);
        const double radius = bound * (attempt ? 1.0 + jitter(rng) : 1.0);
        for (int k = 0; k < n; ++k) z[k] = std::polar(radius, kTwoPi * k / n + offset);
        ok = detail::aberth(f, z, 300);
        if (!ok) {
            // stagnation at roundoff is fine as long as the residuals are small
            ok = std::all_of(z.begin(), z.end(), [&](Complex x) {
                return std::isfinite(x.real()) && std::isfinite(x.imag()) && std::abs(f(x)) < tol * f.scale_at(x);
            });
        }
    }
    if (!ok) throw Error(ErrorKind::NoConvergence, "root iteration did not converge");

    for (auto& x : z) {
        for (int it = 0; it < 3; ++it) {
            auto [fv, dv] = f.eval_with_derivative(x);
            if (dv == Complex(0.0)) break;
            x -= fv / dv;
        }
        if (std::abs(f(x)) >= tol * f.scale_at(x)) {
            throw Error(ErrorKind::NoConvergence, "root residual above tolerance");
        }
    }
    const double sep = separation * (1.0 + diameter(z));
    if (n > 1 && min_separation(z) <= sep) {
        throw Error(ErrorKind::NotSquarefree, "two roots closer than the separation threshold");
    }
    detail::sort_lexicographic(z);
    return z;
}

/// Validates a stratum point and returns its full configuration.
inline PointConfig validate_stratum(const StratumPoint& s, const Tolerances& tol = {}) {
    const int p = s.kappa.p();
    if (static_cast<int>(s.w.size()) != p) {
        throw Error(ErrorKind::InvalidInput, "w must have one entry per part of kappa");
    }
    const double wsep = tol.separation * (1.0 + diameter(s.w));
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            if (std::abs(s.w[i] - s.w[j]) <= wsep) {
                throw Error(ErrorKind::DegenerateW, "critical points coincide", j + 1);
            }
    auto f = expand_from_stratum(s);
    for (int i = 0; i < p; ++i) {
        if (std::abs(f(s.w[i])) <= tol.wall * f.scale()) {
            throw Error(ErrorKind::WallHit, "critical value vanishes at w_" + std::to_string(i + 1), i + 1);
        }
    }
    PointConfig cfg;
    cfg.roots = roots(f, tol.root_residual, tol.separation);
    cfg.critical = s.w;
    cfg.orders = s.kappa.parts();
    return cfg;
}

namespace detail {

inline double segment_distance(Complex a, Complex b, Complex q) {
    const Complex d = b - a;
    const double len2 = std::norm(d);
    double t = len2 > 0 ? ((q - a) * std::conj(d)).real() / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(a + t * d - q);
}

inline double arg_increment(const Polynomial& f, Complex a, Complex b, Complex fa, Complex fb, int depth) {
    const double whole = std::arg(fb / fa);
    const Complex m = 0.5 * (a + b);
    const Complex fm = f(m);
    const double left = std::arg(fm / fa);
    const double right = std::arg(fb / fm);
    if (std::abs(whole) < kPi / 2 && std::abs(left + right - whole) < 1e-12) return whole;
    if (depth > 60) throw Error(ErrorKind::PathThroughZero, "branch tracking failed to resolve");
    return arg_increment(f, a, m, fa, fm, depth + 1) + arg_increment(f, m, b, fm, fb, depth + 1);
}

} // namespace detail

/// Integral of df/f along a polyline with continuous branch tracking of log f.
/// `clearance` is an absolute distance the path must keep from every root.
inline Complex log_period(const Polynomial& f, std::span<const Complex> path, double clearance = 1e-9) {
    if (path.size() < 2) return 0.0;
    const auto rts = roots(f);
    Complex total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const Complex a = path[i], b = path[i + 1];
        for (auto r : rts) {
            if (detail::segment_distance(a, b, r) < clearance) {
                throw Error(ErrorKind::PathThroughZero, "path passes within clearance of a root",
                            static_cast<int>(i) + 1);
            }
        }
        const Complex fa = f(a), fb = f(b);
        total += Complex(std::log(std::abs(fb) / std::abs(fa)), detail::arg_increment(f, a, b, fa, fb, 0));
    }
    return total;
}

/// Closed counterclockwise polygon approximating a circle (first point repeated at the end).
inline std::vector<Complex> circle_path(Complex center, double radius, int samples = 64) {
    std::vector<Complex> pts;
    pts.reserve(samples + 1);
    for (int i = 0; i <= samples; ++i) pts.push_back(center + std::polar(radius, kTwoPi * (i % samples) / samples));
    return pts;
}

} // namespace eqstrat

#endif
