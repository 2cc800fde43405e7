#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "resilient/errors.hpp"
#include "resilient/feasibility.hpp"
#include "resilient/linalg.hpp"
#include "resilient/partition.hpp"
#include "resilient/system.hpp"

namespace resilient {

/// alpha_n = 2^-n * ones(p): the feed-forward guess for the uncontrolled
/// input, shrinking at the same rate as the partition intervals.
inline Vector alpha(int n, int p) {
    if (n < 1) throw DomainError("alpha: n must be >= 1");
    if (p < 1) throw DimensionError("alpha: p must be >= 1");
    return Vector::Constant(p, std::ldexp(1.0, -n));
}

/// Constant controlled input for interval n:
///   u_n = -(1 / dt_n) g0c^+ (x_prev - x_tg + g0uc alpha_n).
/// No clipping is applied.
inline Vector control_input(int n, const Vector& x_prev, const Vector& x_tg, const DriftlessApproximation& approx,
                            double dt_n) {
    if (!(dt_n > 0.0)) throw DomainError("control_input: dt_n must be > 0");
    const auto d = approx.g0c.rows();
    if (x_prev.size() != d || x_tg.size() != d) throw DimensionError("control_input: state dimension mismatch");
    const auto p = static_cast<int>(approx.g0uc.cols());
    return -(1.0 / dt_n) * (approx.g0c_pinv * (x_prev - x_tg + approx.g0uc * alpha(n, p)));
}

struct TerminalIndex {
    int n1 = 1;
    int n_bar = 2;
};

/// n1 is the first index whose error bound is within epsilon; the last input
/// is then held over [t_{n_bar - 1}, t_f] with n_bar = n1 + 1, the smallest
/// value satisfying t_f - t_{n_bar - 1} <= Delta t_{n1}.
inline TerminalIndex select_terminal_index(double epsilon, double c, double lipschitz_sum, double t_f) {
    TerminalIndex idx;
    idx.n1 = smallest_n1(epsilon, c, lipschitz_sum, t_f);
    idx.n_bar = idx.n1 + 1;
    if (idx.n_bar > kMaxTerminalIndex) {
        throw CapError("select_terminal_index: n_bar = " + std::to_string(idx.n_bar) + " exceeds the cap of " +
                       std::to_string(kMaxTerminalIndex) + "; choose a larger epsilon");
    }
    return idx;
}

/// Input held over the merged last interval [t_{n_bar - 1}, t_f]. Keeps the
/// divisor Delta t_{n_bar} = t_f / 2^n_bar although the interval is twice as
/// long.
inline Vector final_interval_input(int n_bar, const Vector& x_prev, const Vector& x_tg,
                                   const DriftlessApproximation& approx, double t_f) {
    return control_input(n_bar, x_prev, x_tg, approx, interval_length(t_f, n_bar));
}

/// Piecewise-constant controlled input over a truncated geometric partition.
/// `inputs` is filled interval by interval by the closed loop (single
/// writer); a completed schedule is read-only.
struct ControlSchedule {
    HorizonPartition partition;
    std::vector<Vector> alpha_seq;
    int n1 = 0;
    int n_bar = 1;
    double epsilon = 0.0;
    std::vector<Vector> inputs;

    double final_time() const { return partition.final_time(); }
    bool complete() const { return static_cast<int>(inputs.size()) == n_bar; }
};

namespace detail {

inline ControlSchedule schedule_for(double t_f, int n1, int n_bar, double epsilon, int p) {
    ControlSchedule s{build_partition(t_f, n_bar), {}, n1, n_bar, epsilon, {}};
    s.alpha_seq.reserve(static_cast<std::size_t>(n_bar));
    for (int n = 1; n <= n_bar; ++n) s.alpha_seq.push_back(alpha(n, p));
    return s;
}

}  // namespace detail

/// Schedule whose terminal index follows from epsilon.
inline ControlSchedule make_schedule(double epsilon, const BoundConstants& k, double t_f, int p) {
    const auto idx = select_terminal_index(epsilon, k.c, k.lipschitz_sum, t_f);
    return detail::schedule_for(t_f, idx.n1, idx.n_bar, epsilon, p);
}

/// Schedule with a fixed terminal index. n1 is still reported from epsilon
/// when it is within the cap, else 0.
inline ControlSchedule make_schedule_with_terminal_index(int n_bar, double epsilon, const BoundConstants& k,
                                                         double t_f, int p) {
    int n1 = 0;
    try {
        n1 = smallest_n1(epsilon, k.c, k.lipschitz_sum, t_f);
    } catch (const CapError&) {
        n1 = 0;
    }
    return detail::schedule_for(t_f, n1, n_bar, epsilon, p);
}

/// A-priori norm bound on the realised input of interval n >= 2:
///   (1 / Delta t_n) ||g0c^+|| (e_{n-1} + ||g0uc|| ||alpha_n||).
inline double input_norm_bound(int n, const BoundConstants& k, const DriftlessApproximation& approx, double t_f) {
    if (n < 2) throw DomainError("input_norm_bound: defined for n >= 2");
    const double dt = interval_length(t_f, n);
    return inf_norm(approx.g0c_pinv) *
           (error_bound(n - 1, k.c, k.lipschitz_sum, t_f) + inf_norm(approx.g0uc) * std::ldexp(1.0, -n)) / dt;
}

inline nlohmann::json to_json(const ControlSchedule& s) {
    nlohmann::json intervals = nlohmann::json::array();
    for (int n = 1; n <= s.n_bar; ++n) {
        nlohmann::json entry;
        entry["n"] = n;
        entry["t_start"] = s.partition.start(n);
        entry["t_end"] = s.partition.end(n);
        if (n <= static_cast<int>(s.inputs.size())) {
            const Vector& u = s.inputs[static_cast<std::size_t>(n - 1)];
            entry["u_c"] = std::vector<double>(u.data(), u.data() + u.size());
        } else {
            entry["u_c"] = nullptr;
        }
        intervals.push_back(std::move(entry));
    }
    nlohmann::json j;
    j["n1"] = s.n1;
    j["n_bar"] = s.n_bar;
    j["epsilon"] = s.epsilon;
    j["t_f"] = s.final_time();
    j["boundaries"] = s.partition.boundaries();
    j["intervals"] = std::move(intervals);
    return j;
}

}  // namespace resilient
