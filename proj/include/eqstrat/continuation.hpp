#ifndef EQSTRAT_CONTINUATION_HPP
#define EQSTRAT_CONTINUATION_HPP

#include "eqstrat/braid.hpp"
#include "eqstrat/poly.hpp"

#include <Eigen/Dense>

#include <optional>

namespace eqstrat {

struct PathSample {
    double t = 0.0;
    StratumPoint s;
};

/// Time-ordered samples of a path in the stratum. For a closed path the last
/// sample equals the first up to `relabel`: w_end[i] = w_start[relabel[i]].
struct StratumPath {
    std::vector<PathSample> samples;
    bool closed = false;
    std::vector<int> relabel;
    bool gauge_corrected = false;

    const StratumPoint& start() const { return samples.front().s; }
    const StratumPoint& end() const { return samples.back().s; }

    /// Rescales times onto [0, 1].
    void normalize_times() {
        if (samples.empty()) return;
        const double t0 = samples.front().t, t1 = samples.back().t;
        for (auto& x : samples) x.t = t1 > t0 ? (x.t - t0) / (t1 - t0) : 0.0;
    }

    /// Appends `next`, whose first sample must coincide with this path's last one.
    void append(const StratumPath& next) {
        if (samples.empty()) {
            *this = next;
            return;
        }
        const double offset = samples.back().t + 1.0;
        for (std::size_t k = 1; k < next.samples.size(); ++k) samples.push_back({offset + next.samples[k].t, next.samples[k].s});
    }

    StratumPath reversed() const {
        StratumPath r = *this;
        std::reverse(r.samples.begin(), r.samples.end());
        const double t1 = samples.empty() ? 0.0 : samples.back().t;
        for (auto& x : r.samples) x.t = t1 - x.t;
        if (closed && !relabel.empty()) {
            r.relabel.assign(relabel.size(), 0);
            for (std::size_t i = 0; i < relabel.size(); ++i) r.relabel[relabel[i]] = static_cast<int>(i);
        }
        return r;
    }
};

struct StepControl {
    double max_motion = 0.2;       // fraction of local min separation per accepted step
    double min_step = 1e-11;       // in path time
    int newton_iterations = 30;
    Tolerances tol{};
};

namespace detail {

inline StratumPoint interpolate(const StratumPoint& a, const StratumPoint& b, double u) {
    StratumPoint s{a.kappa, a.w, (1 - u) * a.c + u * b.c};
    for (std::size_t i = 0; i < s.w.size(); ++i) s.w[i] = (1 - u) * a.w[i] + u * b.w[i];
    return s;
}

inline bool newton_root(const Polynomial& f, Complex& z, double tol, int iterations) {
    for (int it = 0; it < iterations; ++it) {
        auto [fv, dv] = f.eval_with_derivative(z);
        if (std::abs(fv) < tol * f.scale_at(z) * 1e-2) return true;
        if (dv == Complex(0.0)) return false;
        const Complex step = fv / dv;
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
    }
    return std::abs(f(z)) < tol * f.scale_at(z);
}

} // namespace detail

/// Follows roots and critical points along the path. Root strands come first,
/// ordered lexicographically at t = 0; critical strands follow in index order.
inline StrandSet track(const StratumPath& path, const StepControl& step = {}) {
    if (path.samples.empty()) throw Error(ErrorKind::InvalidInput, "empty path");
    const auto& kappa = path.start().kappa;
    const auto cfg0 = validate_stratum(path.start(), step.tol);
    const int n = cfg0.n(), p = cfg0.p();

    StrandSet out;
    for (int i = 0; i < n; ++i) out.colors.push_back(StrandColor::root());
    for (int i = 0; i < p; ++i) out.colors.push_back(StrandColor::critical(kappa.part(i)));
    out.positions.assign(n + p, {});

    std::vector<Complex> z = cfg0.roots;
    auto record = [&](double t, const StratumPoint& s) {
        out.times.push_back(t);
        for (int i = 0; i < n; ++i) out.positions[i].push_back(z[i]);
        for (int i = 0; i < p; ++i) out.positions[n + i].push_back(s.w[i]);
    };
    record(path.samples.front().t, path.start());

    for (std::size_t k = 0; k + 1 < path.samples.size(); ++k) {
        const auto& A = path.samples[k];
        const auto& B = path.samples[k + 1];
        double u = 0.0, h = 1.0;
        StratumPoint cur = A.s;
        Polynomial fcur = expand_from_stratum(cur);
        while (u < 1.0) {
            h = std::min(h, 1.0 - u);
            const double un = u + h;
            const StratumPoint nxt = un >= 1.0 ? B.s : detail::interpolate(A.s, B.s, un);
            const Polynomial fn = expand_from_stratum(nxt);

            std::vector<Complex> pts = z;
            pts.insert(pts.end(), cur.w.begin(), cur.w.end());
            const double diam = std::max(diameter(pts), 1e-300);
            const double sep = min_separation(pts);
            const double t_here = A.t + u * (B.t - A.t);
            if (sep < step.tol.collision * diam) {
                throw Error(ErrorKind::StrandCollision, "strands collided", -1, t_here);
            }

            bool ok = true;
            std::vector<Complex> zn = z;
            for (int i = 0; i < n && ok; ++i) {
                // predictor: dz = -(f_next(z) - f_cur(z)) / f'(z)
                auto [fv, dv] = fcur.eval_with_derivative(z[i]);
                (void)fv;
                if (dv != Complex(0.0)) zn[i] = z[i] - (fn(z[i]) - fcur(z[i])) / dv;
                ok = detail::newton_root(fn, zn[i], step.tol.root_residual, step.newton_iterations);
                if (ok && std::abs(zn[i] - z[i]) > step.max_motion * sep) ok = false;
            }
            for (int i = 0; i < p && ok; ++i)
                if (std::abs(nxt.w[i] - cur.w[i]) > step.max_motion * sep) ok = false;
            if (ok) {
                // distinct images
                for (int i = 0; i < n && ok; ++i)
                    for (int j = i + 1; j < n && ok; ++j)
                        if (std::abs(zn[i] - zn[j]) < 0.5 * sep) ok = false;
            }
            if (!ok) {
                h *= 0.5;
                if (h < step.min_step) {
                    throw Error(ErrorKind::NewtonDivergence, "step size underflow while tracking", -1, t_here);
                }
                continue;
            }
            z = std::move(zn);
            cur = nxt;
            fcur = fn;
            u = un;
            record(A.t + u * (B.t - A.t), cur);
            h *= 2.0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lifting critical-value paths.
// ---------------------------------------------------------------------------

struct LiftOptions {
    int max_newton = 8;
    double max_w_motion = 0.1;   // fraction of the critical-point min separation
    double min_step = 1e-9;
    Tolerances tol{};
};

namespace detail {

/// Newton on Phi(w, c) = target with sum(w) held fixed. Returns iterations used, or -1.
inline int lift_newton(StratumPoint& s, const std::vector<Complex>& target, double residual, int max_iter) {
    const int p = s.kappa.p();
    for (int it = 0; it <= max_iter; ++it) {
        const auto v = critical_values(s);
        double err = 0.0;
        for (int i = 0; i < p; ++i) err = std::max(err, std::abs(v[i] - target[i]) / std::max(1.0, std::abs(target[i])));
        if (!std::isfinite(err)) return -1;
        if (err < residual) return it;
        if (it == max_iter) break;
        const auto J = critical_value_jacobian(s);
        Eigen::MatrixXcd M(p, p);
        Eigen::VectorXcd rhs(p);
        for (int i = 0; i < p; ++i) {
            for (int j = 0; j + 1 < p; ++j) M(i, j) = J[i][j] - J[i][p - 1];
            M(i, p - 1) = 1.0;  // d/dc
            rhs(i) = target[i] - v[i];
        }
        Eigen::VectorXcd d = M.partialPivLu().solve(rhs);
        if (!d.allFinite()) return -1;
        Complex shift = 0.0;
        for (int j = 0; j + 1 < p; ++j) {
            s.w[j] += d(j);
            shift += d(j);
        }
        s.w[p - 1] -= shift;
        s.c += d(p - 1);
    }
    return -1;
}

inline double median_abs(const std::vector<Complex>& v) {
    std::vector<double> m;
    for (auto x : v) m.push_back(std::abs(x));
    std::sort(m.begin(), m.end());
    return m[m.size() / 2];
}

} // namespace detail

/// Lifts a path of log critical values (knots joined linearly in log space) starting
/// at `seed`, whose critical values must be exp(log_knots[0]).
inline StratumPath lift_log_values(const std::vector<std::vector<Complex>>& log_knots, const StratumPoint& seed,
                                   const LiftOptions& opt = {}) {
    const int p = seed.kappa.p();
    if (log_knots.empty()) throw Error(ErrorKind::InvalidInput, "empty target path");
    for (const auto& k : log_knots)
        if (static_cast<int>(k.size()) != p) throw Error(ErrorKind::InvalidInput, "target dimension must equal p");
    const auto v0 = critical_values(seed);
    for (int i = 0; i < p; ++i) {
        if (std::abs(std::exp(log_knots[0][i]) - v0[i]) > 1e-7 * std::max(1.0, std::abs(v0[i]))) {
            throw Error(ErrorKind::InvalidInput, "target does not start at the seed's critical values", i + 1);
        }
    }
    Complex wsum = 0.0;
    for (auto x : seed.w) wsum += x;

    StratumPath path;
    path.samples.push_back({0.0, seed});
    StratumPoint cur = seed;
    const double clearance_ref = detail::median_abs(v0);

    for (std::size_t k = 0; k + 1 < log_knots.size(); ++k) {
        const auto& A = log_knots[k];
        const auto& B = log_knots[k + 1];
        double u = 0.0, h = 1.0;
        while (u < 1.0) {
            h = std::min(h, 1.0 - u);
            const double un = u + h;
            std::vector<Complex> target(p);
            for (int i = 0; i < p; ++i) {
                const Complex L = (1 - un) * A[i] + un * B[i];
                target[i] = std::exp(L);
                if (std::abs(target[i]) < opt.tol.wall_clearance * clearance_ref) {
                    throw Error(ErrorKind::WallHit, "target critical value enters the wall clearance disk", i + 1,
                                static_cast<double>(k) + un);
                }
            }
            StratumPoint trial = cur;
            const int its = detail::lift_newton(trial, target, opt.tol.lift_residual, opt.max_newton);
            bool ok = its >= 0;
            if (ok) {
                const double sep = p > 1 ? min_separation(cur.w) : std::max(1.0, std::abs(cur.w[0]));
                for (int i = 0; i < p && ok; ++i)
                    if (std::abs(trial.w[i] - cur.w[i]) > opt.max_w_motion * sep) ok = false;
            }
            if (!ok) {
                h *= 0.5;
                if (h < opt.min_step) {
                    throw Error(ErrorKind::NewtonDivergence, "critical-value lift failed to converge", -1,
                                static_cast<double>(k) + u);
                }
                continue;
            }
            Complex s = 0.0;
            for (auto x : trial.w) s += x;
            if (std::abs(s - wsum) > 1e-9 * std::max(1.0, std::abs(wsum))) {
                throw Error(ErrorKind::GaugeBreak, "sum of critical points drifted");
            }
            cur = trial;
            u = un;
            path.samples.push_back({static_cast<double>(k) + u, cur});
            if (its <= 3) h *= 2.0;
        }
    }
    path.normalize_times();
    return path;
}

/// Branch-tracked logarithms of a sequence of critical-value vectors.
inline std::vector<std::vector<Complex>> track_logs(const std::vector<std::vector<Complex>>& values) {
    std::vector<std::vector<Complex>> logs;
    for (std::size_t k = 0; k < values.size(); ++k) {
        std::vector<Complex> L(values[k].size());
        for (std::size_t i = 0; i < L.size(); ++i) {
            L[i] = std::log(values[k][i]);
            if (k > 0) {
                const double prev = logs.back()[i].imag();
                L[i].imag(prev + principal_angle(L[i].imag() - prev));
            }
        }
        logs.push_back(std::move(L));
    }
    return logs;
}

/// Lifts a polyline of critical values (linearly interpolated in log space between vertices).
inline StratumPath lift_critical_values(const std::vector<std::vector<Complex>>& values, const StratumPoint& seed,
                                        const LiftOptions& opt = {}) {
    for (std::size_t k = 0; k < values.size(); ++k)
        for (std::size_t i = 0; i < values[k].size(); ++i)
            if (values[k][i] == Complex(0.0)) {
                throw Error(ErrorKind::WallHit, "target critical value is zero", static_cast<int>(i) + 1,
                            static_cast<double>(k));
            }
    return lift_log_values(track_logs(values), seed, opt);
}

inline std::vector<Complex> log_critical_values(const StratumPoint& s) {
    std::vector<Complex> L;
    for (auto v : critical_values(s)) L.push_back(std::log(v));
    return L;
}

// ---------------------------------------------------------------------------
// Affine closure: points of the stratum with equal critical values that differ
// by z -> ctr + lambda (z - ctr), lambda^n = 1.
// ---------------------------------------------------------------------------

struct AffineMatch {
    Complex lambda = 1.0;
    int power = 0;              // lambda = exp(2 pi i power / n), power in (-n/2, n/2]
    std::vector<int> relabel;   // end.w[i] ~ ctr + lambda (start.w[relabel[i]] - ctr)
};

inline std::optional<AffineMatch> affine_match(const StratumPoint& start, const StratumPoint& end, double tol = 1e-7) {
    const int n = start.kappa.n(), p = start.kappa.p();
    const Complex ctr = start.centroid();
    const double scale = 1.0 + diameter(start.w) + std::abs(ctr);
    const auto f0 = expand_from_stratum(start);
    const auto f1 = expand_from_stratum(end);
    for (int q = 0; q < n; ++q) {
        int power = q <= n / 2 ? q : q - n;
        const Complex lambda = std::polar(1.0, kTwoPi * power / n);
        std::vector<int> rel(p, -1);
        std::vector<bool> used(p, false);
        bool ok = true;
        for (int i = 0; i < p && ok; ++i) {
            for (int j = 0; j < p; ++j) {
                if (used[j] || start.kappa.part(j) != start.kappa.part(i)) continue;
                if (std::abs(end.w[i] - (ctr + lambda * (start.w[j] - ctr))) < tol * scale) {
                    rel[i] = j;
                    used[j] = true;
                    break;
                }
            }
            ok = rel[i] >= 0;
        }
        if (!ok) continue;
        // compare polynomials: f1(z) = f0(ctr + (z - ctr) / lambda)
        bool same = true;
        for (int r = 0; r < 4 && same; ++r) {
            const Complex z = ctr + std::polar(scale, 0.7 + 1.3 * r);
            const Complex expect = f0(ctr + (z - ctr) / lambda);
            if (std::abs(f1(z) - expect) > tol * std::max(1.0, std::abs(expect)) * 10.0) same = false;
        }
        if (same) return AffineMatch{lambda, power, rel};
    }
    return std::nullopt;
}

/// Explicit path from the affine image back to `start`, rotating by lambda^{-1}.
inline StratumPath affine_correction(const StratumPoint& start, const AffineMatch& m, int samples_per_turn = 96) {
    const Complex ctr = start.centroid();
    const auto f0 = expand_from_stratum(start);
    const int n = start.kappa.n();
    const double theta = kTwoPi * m.power / n;
    const int samples = std::max(4, static_cast<int>(std::ceil(std::abs(theta) * n / kTwoPi * samples_per_turn)));
    StratumPath path;
    for (int k = 0; k <= samples; ++k) {
        const double s = static_cast<double>(k) / samples;
        const Complex mu = std::polar(1.0, (1 - s) * theta);
        StratumPoint q{start.kappa, {}, 0.0};
        for (int i = 0; i < start.kappa.p(); ++i) q.w.push_back(ctr + mu * (start.w[m.relabel[i]] - ctr));
        q.c = std::pow(mu, n) * f0(ctr - ctr / mu);
        path.samples.push_back({s, q});
    }
    return path;
}

/// Closes `path` (which must end at an affine image of its start) by appending the
/// rotation back; throws NotClosed otherwise.
inline void close_affinely(StratumPath& path) {
    auto m = affine_match(path.start(), path.end());
    if (!m) throw Error(ErrorKind::NotClosed, "path does not return to an affine image of its start");
    if (m->power != 0) {
        auto corr = affine_correction(path.start(), *m);
        // the correction starts from the exact affine image; splice onto the lifted end
        corr.samples.front().s = path.end();
        path.append(corr);
        path.gauge_corrected = true;
        path.samples.back().s.w.clear();
        for (int i = 0; i < path.start().kappa.p(); ++i) path.samples.back().s.w.push_back(path.start().w[m->relabel[i]]);
        path.samples.back().s.c = path.start().c;
    } else {
        // snap the endpoint onto the relabeled start
        auto& e = path.samples.back().s;
        for (int i = 0; i < path.start().kappa.p(); ++i) e.w[i] = path.start().w[m->relabel[i]];
        e.c = path.start().c;
    }
    path.closed = true;
    path.relabel = m->relabel;
    path.normalize_times();
}

} // namespace eqstrat

#endif
