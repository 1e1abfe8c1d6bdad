#ifndef EQSTRAT_COMMON_HPP
#define EQSTRAT_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqstrat {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
    InvalidInput,
    WallHit,
    DegenerateW,
    NoConvergence,
    NotSquarefree,
    PathThroughZero,
    StrandCollision,
    NewtonDivergence,
    GaugeBreak,
    NotAdjacent,
    NotClosed,
    DegenerateProjection,
    ColorMismatch,
    TraceEscapeFailure,
    AmbiguousCapture,
    SolveFailure,
    ResidualTooLarge,
    ArcThroughPoint,
    IsotopyBreakdown,
    ArcsNotDisjoint,
    CertificationFailure,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::WallHit: return "WallHit";
    case ErrorKind::DegenerateW: return "DegenerateW";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotSquarefree: return "NotSquarefree";
    case ErrorKind::PathThroughZero: return "PathThroughZero";
    case ErrorKind::StrandCollision: return "StrandCollision";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::GaugeBreak: return "GaugeBreak";
    case ErrorKind::NotAdjacent: return "NotAdjacent";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::DegenerateProjection: return "DegenerateProjection";
    case ErrorKind::ColorMismatch: return "ColorMismatch";
    case ErrorKind::TraceEscapeFailure: return "TraceEscapeFailure";
    case ErrorKind::AmbiguousCapture: return "AmbiguousCapture";
    case ErrorKind::SolveFailure: return "SolveFailure";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::ArcThroughPoint: return "ArcThroughPoint";
    case ErrorKind::IsotopyBreakdown: return "IsotopyBreakdown";
    case ErrorKind::ArcsNotDisjoint: return "ArcsNotDisjoint";
    case ErrorKind::CertificationFailure: return "CertificationFailure";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, int index = -1, double time = -1.0)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what),
          kind_(kind), index_(index), time_(time), message_(what) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    const std::string& message() const noexcept { return message_; }
    /// 1-based offending index (wall, strand, field), or -1.
    int index() const noexcept { return index_; }
    /// Path time at which the failure happened, or -1.
    double time() const noexcept { return time_; }

private:
    ErrorKind kind_;
    int index_;
    double time_;
    std::string message_;
};

/// Numerical tolerances shared by the whole pipeline. Scales are relative
/// unless noted.
struct Tolerances {
    double root_residual = 1e-10;   // |f(z)| < root_residual * scale
    double wall = 1e-8;             // |f(w_i)| <= wall * scale  -> WallHit
    double separation = 1e-7;       // distinctness, relative to (1 + diameter)
    double collision = 1e-4;        // strand collision, relative to diameter
    double lift_residual = 1e-9;    // critical value residual after lifting
    double wall_clearance = 5e-3;   // lift targets: |v_i| > this * median |v|
    double winding_residual = 0.1;  // max distance to an integer before rounding
};

/// A partition k_1 >= ... >= k_p of n - 1.
class Partition {
public:
    Partition() = default;

    explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
        if (parts_.empty()) {
            throw Error(ErrorKind::InvalidInput, "kappa: partition must have at least one part");
        }
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (parts_[i] < 1) {
                throw Error(ErrorKind::InvalidInput, "kappa: parts must be >= 1", static_cast<int>(i) + 1);
            }
            if (i > 0 && parts_[i] > parts_[i - 1]) {
                throw Error(ErrorKind::InvalidInput, "kappa: parts must be nonincreasing", static_cast<int>(i) + 1);
            }
        }
    }

    const std::vector<int>& parts() const noexcept { return parts_; }
    int part(std::size_t i) const { return parts_.at(i); }
    int n() const noexcept { return 1 + std::accumulate(parts_.begin(), parts_.end(), 0); }
    int p() const noexcept { return static_cast<int>(parts_.size()); }

    /// gcd of the parts.
    int gcd() const {
        int g = 0;
        for (int k : parts_) g = std::gcd(g, k);
        return g;
    }

    bool operator==(const Partition&) const = default;

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(parts_[i]);
        }
        return s + "}";
    }

private:
    std::vector<int> parts_;
};

/// All partitions of m into nonincreasing positive parts.
inline std::vector<Partition> partitions_of(int m) {
    std::vector<Partition> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int rest, int maxpart) -> void {
        if (rest == 0) {
            out.emplace_back(cur);
            return;
        }
        for (int k = std::min(rest, maxpart); k >= 1; --k) {
            cur.push_back(k);
            self(self, rest - k, k);
            cur.pop_back();
        }
    };
    rec(rec, m, m);
    return out;
}

/// Principal value of an angle in (-pi, pi].
inline double principal_angle(double a) {
    a = std::remainder(a, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    return a;
}

inline double diameter(const std::vector<Complex>& pts) {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, std::abs(pts[i] - pts[j]));
    return d;
}

inline double min_separation(const std::vector<Complex>& pts) {
    double d = INFINITY;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::min(d, std::abs(pts[i] - pts[j]));
    return d;
}

} // namespace eqstrat

#endif
