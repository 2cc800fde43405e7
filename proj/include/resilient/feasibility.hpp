#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "resilient/errors.hpp"
#include "resilient/linalg.hpp"
#include "resilient/partition.hpp"
#include "resilient/system.hpp"

namespace resilient {

inline constexpr double kDefaultRootTol = 1e-10;

// Infinity norm of alpha_1 and alpha_2 (alpha_n = 2^-n * ones).
inline constexpr double kAlpha1Norm = 0.5;
inline constexpr double kAlpha2Norm = 0.25;

/// Constants that drive the error bounds and the feasibility conditions.
struct BoundConstants {
    double c = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double lipschitz_sum = 0.0;  // D_S = D_f + D_g
};

struct FeasibleInterval {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double t) const noexcept { return lower <= t && t <= upper; }
};

struct FeasibilityReport {
    BoundConstants constants;
    bool conditions_hold = false;
    std::optional<double> t_star;
    std::optional<FeasibleInterval> feasible_interval;
    double tf_lower_bound = 0.0;
    double t_f = 0.0;
    bool tf_valid = false;
    std::vector<std::string> notes;

    // Norms that enter the constants, kept for diagnostics.
    double drift_norm_at_x0 = 0.0;
    double g0uc_norm = 0.0;
    double g0c_pinv_norm = 0.0;
    double initial_error_norm = 0.0;
};

/// c  = ||f(x0)|| + ||g0uc|| + D_S ||x_tg - x0||
/// c1 = 4 c ||g0c^+||
/// c2 = 4 D_S ||g0c^+|| ||g0uc|| ||alpha_2||
inline BoundConstants compute_constants(const ControlSystem& sys, const DriftlessApproximation& approx,
                                        const Vector& x_tg) {
    detail::expect_dim(x_tg, sys.state_dim, "compute_constants: x_tg");
    BoundConstants k;
    k.lipschitz_sum = sys.lipschitz_sum();
    const double pinv_norm = inf_norm(approx.g0c_pinv);
    const double guc_norm = inf_norm(approx.g0uc);
    k.c = inf_norm(Vector(sys.drift(approx.x0))) + guc_norm + k.lipschitz_sum * inf_norm(Vector(x_tg - approx.x0));
    k.c1 = 4.0 * k.c * pinv_norm;
    k.c2 = 4.0 * k.lipschitz_sum * pinv_norm * guc_norm * kAlpha2Norm;
    return k;
}

/// c1 < 2 and c2 < c1 - 2 (1 - ln(2 / c1)), both strict.
inline bool check_conditions(double c1, double c2) {
    if (!(c1 < 2.0)) return false;
    // c1 -> 0 sends the right-hand side to +inf.
    if (c1 <= 0.0) return true;
    return c2 < c1 - 2.0 * (1.0 - std::log(2.0 / c1));
}

namespace detail {

inline void require_nondegenerate(double c1, double lipschitz_sum, const char* what) {
    if (!(c1 > 0.0)) throw DegenerateInputError(std::string(what) + ": c1 must be > 0");
    if (!(lipschitz_sum > 0.0)) throw DegenerateInputError(std::string(what) + ": D_S must be > 0");
}

}  // namespace detail

/// h(t) = exp(t D_S / 2) - 1 - (t D_S - c2) / c1.
inline double h_eval(double t, double c1, double c2, double lipschitz_sum) {
    detail::require_nondegenerate(c1, lipschitz_sum, "h_eval");
    if (t < 0.0) throw DomainError("h_eval: t must be >= 0");
    return std::expm1(0.5 * t * lipschitz_sum) - (t * lipschitz_sum - c2) / c1;
}

/// Stationary point of h, (2 / D_S) ln(2 / c1). Only a minimiser on t > 0
/// when c1 < 2.
inline std::optional<double> t_star(double c1, double lipschitz_sum) {
    detail::require_nondegenerate(c1, lipschitz_sum, "t_star");
    if (!(c1 < 2.0)) return std::nullopt;
    return (2.0 / lipschitz_sum) * std::log(2.0 / c1);
}

namespace detail {

// h(lo) and h(hi) have opposite signs (or one is zero). Returns a point with
// |h| <= root_tol, preferring the endpoint on the non-positive side.
template <typename F>
double bisect_root(F&& h, double lo, double hi, double root_tol) {
    double h_lo = h(lo);
    if (std::abs(h_lo) <= root_tol) return lo;
    double h_hi = h(hi);
    if (std::abs(h_hi) <= root_tol) return hi;
    if ((h_lo > 0.0) == (h_hi > 0.0)) throw NumericError("bisection: root is not bracketed");
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double h_mid = h(mid);
        if (std::abs(h_mid) <= root_tol) return mid;
        if ((h_mid > 0.0) == (h_lo > 0.0)) {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
            h_hi = h_mid;
        }
    }
    const double best = std::abs(h_lo) < std::abs(h_hi) ? lo : hi;
    if (std::abs(h(best)) > root_tol) {
        throw NumericError("bisection: could not reach |h| <= " + std::to_string(root_tol));
    }
    return best;
}

}  // namespace detail

/// The interval [t_lo, t_hi] on which h <= 0, or nullopt when the
/// conditions fail. Roots are bracketed on [0, t*] and on [t*, T], with T
/// found by doubling from t* until h > 0.
inline std::optional<FeasibleInterval> feasible_interval(double c1, double c2, double lipschitz_sum,
                                                         double root_tol = kDefaultRootTol) {
    if (c1 < 0.0 || c2 < 0.0) throw DomainError("feasible_interval: c1, c2 must be >= 0");
    if (!check_conditions(c1, c2)) return std::nullopt;
    detail::require_nondegenerate(c1, lipschitz_sum, "feasible_interval");
    auto h = [&](double t) { return h_eval(t, c1, c2, lipschitz_sum); };
    const double ts = *t_star(c1, lipschitz_sum);

    FeasibleInterval out;
    out.lower = detail::bisect_root(h, 0.0, ts, root_tol);

    double hi = 2.0 * ts;
    int doublings = 0;
    while (h(hi) <= 0.0) {
        if (++doublings > 200) throw NumericError("feasible_interval: no upper bracket after 200 doublings");
        hi *= 2.0;
    }
    out.upper = detail::bisect_root(h, ts, hi, root_tol);
    return out;
}

/// Smallest t_f keeping the first controlled input in the unit ball:
///   2 ||g0c^+|| (||x0 - x_tg|| + ||alpha_1|| ||g0uc||).
inline double tf_lower_bound(const DriftlessApproximation& approx, const Vector& x0, const Vector& x_tg) {
    return 2.0 * inf_norm(approx.g0c_pinv) * (inf_norm(Vector(x0 - x_tg)) + kAlpha1Norm * inf_norm(approx.g0uc));
}

/// Fills the t_f-dependent part of a report whose constants, interval and
/// lower bound are already set. Failure is advisory: the notes say why.
inline FeasibilityReport validate_tf(double t_f, FeasibilityReport report) {
    report.t_f = t_f;
    report.tf_valid = true;
    if (!report.conditions_hold) {
        report.tf_valid = false;
        std::ostringstream os;
        os << "horizon feasibility conditions violated: need c1 < 2 and c2 < c1 - 2(1 - ln(2/c1)), got c1 = "
           << report.constants.c1 << ", c2 = " << report.constants.c2;
        report.notes.push_back(os.str());
    } else if (!report.feasible_interval) {
        report.tf_valid = false;
        report.notes.push_back("feasible interval for t_f is undefined (degenerate constants: c1 = 0 or D_S = 0)");
    } else if (!report.feasible_interval->contains(t_f)) {
        report.tf_valid = false;
        std::ostringstream os;
        os << "t_f = " << t_f << " lies outside the feasible interval [" << report.feasible_interval->lower << ", "
           << report.feasible_interval->upper << "] where h(t_f) <= 0";
        report.notes.push_back(os.str());
    }
    if (t_f < report.tf_lower_bound) {
        report.tf_valid = false;
        std::ostringstream os;
        os << "t_f = " << t_f << " is below the first-input lower bound 2||g0c^+||(||x0 - x_tg|| + ||g0uc||/2) = "
           << report.tf_lower_bound;
        report.notes.push_back(os.str());
    }
    return report;
}

/// Runs the whole analysis for one (system, x0, x_tg, t_f).
inline FeasibilityReport analyze_feasibility(const ControlSystem& sys, const DriftlessApproximation& approx,
                                             const Vector& x_tg, double t_f, double root_tol = kDefaultRootTol) {
    FeasibilityReport r;
    r.constants = compute_constants(sys, approx, x_tg);
    r.drift_norm_at_x0 = inf_norm(Vector(sys.drift(approx.x0)));
    r.g0uc_norm = inf_norm(approx.g0uc);
    r.g0c_pinv_norm = inf_norm(approx.g0c_pinv);
    r.initial_error_norm = inf_norm(Vector(approx.x0 - x_tg));
    const auto& k = r.constants;
    r.conditions_hold = check_conditions(k.c1, k.c2);
    if (k.c1 > 0.0 && k.lipschitz_sum > 0.0) {
        r.t_star = t_star(k.c1, k.lipschitz_sum);
        r.feasible_interval = feasible_interval(k.c1, k.c2, k.lipschitz_sum, root_tol);
    }
    r.tf_lower_bound = tf_lower_bound(approx, approx.x0, x_tg);
    return validate_tf(t_f, std::move(r));
}

/// A-priori bound on ||x_tg - x_n||: (c / D_S)(exp(Delta t_n D_S) - 1),
/// continuously extended by c Delta t_n at D_S = 0.
inline double error_bound(int n, double c, double lipschitz_sum, double t_f) {
    if (c < 0.0) throw DomainError("error_bound: c must be >= 0");
    if (lipschitz_sum < 0.0) throw DomainError("error_bound: D_S must be >= 0");
    const double dt = interval_length(t_f, n);
    if (lipschitz_sum == 0.0) return c * dt;
    return (c / lipschitz_sum) * std::expm1(dt * lipschitz_sum);
}

/// Smallest n with error_bound(n) <= epsilon.
inline int smallest_n1(double epsilon, double c, double lipschitz_sum, double t_f) {
    if (!(epsilon > 0.0)) throw DomainError("smallest_n1: epsilon must be > 0");
    for (int n = 1; n <= kMaxTerminalIndex; ++n) {
        if (error_bound(n, c, lipschitz_sum, t_f) <= epsilon) return n;
    }
    std::ostringstream os;
    os << "target radius epsilon = " << epsilon << " needs more than " << kMaxTerminalIndex
       << " partition intervals (bound at n = " << kMaxTerminalIndex << " is "
       << error_bound(kMaxTerminalIndex, c, lipschitz_sum, t_f) << "); choose a larger epsilon";
    throw CapError(os.str());
}

inline nlohmann::json to_json(const FeasibilityReport& r) {
    nlohmann::json j;
    j["c"] = r.constants.c;
    j["c1"] = r.constants.c1;
    j["c2"] = r.constants.c2;
    j["D_S"] = r.constants.lipschitz_sum;
    j["conditions_hold"] = r.conditions_hold;
    j["t_star"] = r.t_star ? nlohmann::json(*r.t_star) : nlohmann::json(nullptr);
    if (r.feasible_interval) {
        j["feasible_interval"] = {r.feasible_interval->lower, r.feasible_interval->upper};
    } else {
        j["feasible_interval"] = nullptr;
    }
    j["tf_lower_bound"] = r.tf_lower_bound;
    j["t_f"] = r.t_f;
    j["tf_valid"] = r.tf_valid;
    j["notes"] = r.notes;
    j["norms"] = {{"drift_at_x0", r.drift_norm_at_x0},
                  {"g0uc", r.g0uc_norm},
                  {"g0c_pinv", r.g0c_pinv_norm},
                  {"initial_error", r.initial_error_norm}};
    return j;
}

}  // namespace resilient
