#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "resilient/controller.hpp"
#include "resilient/errors.hpp"
#include "resilient/feasibility.hpp"
#include "resilient/linalg.hpp"
#include "resilient/partition.hpp"
#include "resilient/system.hpp"

namespace resilient {

inline constexpr int kMinStepsPerInterval = 16;
inline constexpr int kDefaultStepsPerInterval = 256;
inline constexpr double kConstraintTol = 1e-9;
inline constexpr double kNodeErrorTol = 1e-9;

// ---------------------------------------------------------------------------
// Uncontrolled input strategies
// ---------------------------------------------------------------------------

namespace strategy {

struct Constant {
    Vector value;
};

// amplitude * sin(2 pi frequency t + phase), entrywise.
struct Sinusoid {
    Vector amplitude;
    double frequency = 1.0;
    double phase = 0.0;
};

// +-1 per channel, redrawn every switch_period from a seeded generator.
struct BangBang {
    double switch_period = 1.0;
    std::uint64_t seed = 0;
};

// Myopic adversary: picks, from `resolution` evenly spaced levels in [-1, 1]
// per channel, the input that most increases the largest error coordinate.
struct Greedy {
    int resolution = 2;
};

// u_uc = (1 / t_f) ones(p): exactly what alpha_n anticipates.
struct CancellationProbe {};

}  // namespace strategy

using UncontrolledStrategy =
    std::variant<strategy::Constant, strategy::Sinusoid, strategy::BangBang, strategy::Greedy, strategy::CancellationProbe>;

inline std::string strategy_name(const UncontrolledStrategy& s) {
    struct Visitor {
        std::string operator()(const strategy::Constant&) const { return "constant"; }
        std::string operator()(const strategy::Sinusoid&) const { return "sinusoid"; }
        std::string operator()(const strategy::BangBang&) const { return "bang_bang"; }
        std::string operator()(const strategy::Greedy&) const { return "greedy"; }
        std::string operator()(const strategy::CancellationProbe&) const { return "cancellation"; }
    };
    return std::visit(Visitor{}, s);
}

/// A strategy bound to one run: dimension, horizon and the driftless
/// approximation used by the adversary. Sampling is a pure function of
/// (t, x); bang-bang levels are drawn once at construction.
class UncontrolledSignal {
public:
    UncontrolledSignal(UncontrolledStrategy strategy, int p, double t_f, Vector x_tg, Matrix g0uc)
        : strategy_(std::move(strategy)), p_(p), t_f_(t_f), x_tg_(std::move(x_tg)), g0uc_(std::move(g0uc)) {
        if (p < 1) throw DimensionError("UncontrolledSignal: p must be >= 1");
        detail::require_positive_horizon(t_f);
        if (g0uc_.cols() != p || g0uc_.rows() != x_tg_.size()) {
            throw DimensionError("UncontrolledSignal: g0uc must be d x p");
        }
        std::visit([this](const auto& s) { prepare(s); }, strategy_);
    }

    UncontrolledSignal(UncontrolledStrategy strategy, const DriftlessApproximation& approx, const Vector& x_tg,
                       double t_f)
        : UncontrolledSignal(std::move(strategy), static_cast<int>(approx.g0uc.cols()), t_f, x_tg, approx.g0uc) {}

    int dim() const noexcept { return p_; }
    const UncontrolledStrategy& strategy() const noexcept { return strategy_; }

    /// Value at time t and state x, clamped entrywise to [-1, 1].
    Vector sample(double t, const Vector& x) const {
        Vector u = std::visit([&](const auto& s) { return raw(s, t, x); }, strategy_);
        return u.cwiseMax(-1.0).cwiseMin(1.0);
    }

    Vector operator()(double t, const Vector& x) const { return sample(t, x); }

private:
    void prepare(const strategy::Constant& s) {
        if (s.value.size() != p_) throw DimensionError("constant strategy: value must have dimension p");
    }
    void prepare(const strategy::Sinusoid& s) {
        if (s.amplitude.size() != p_) throw DimensionError("sinusoid strategy: amplitude must have dimension p");
    }
    void prepare(const strategy::BangBang& s) {
        if (!(s.switch_period > 0.0)) throw DomainError("bang_bang strategy: switch_period must be > 0");
        const auto segments = static_cast<std::size_t>(std::ceil(t_f_ / s.switch_period)) + 1;
        std::mt19937_64 rng(s.seed);
        std::bernoulli_distribution coin(0.5);
        levels_.resize(segments * static_cast<std::size_t>(p_));
        for (auto& level : levels_) level = coin(rng) ? 1.0 : -1.0;
    }
    void prepare(const strategy::Greedy& s) {
        if (s.resolution < 2) throw DomainError("greedy strategy: resolution must be >= 2");
    }
    void prepare(const strategy::CancellationProbe&) {}

    Vector raw(const strategy::Constant& s, double, const Vector&) const { return s.value; }

    Vector raw(const strategy::Sinusoid& s, double t, const Vector&) const {
        return s.amplitude * std::sin(2.0 * std::numbers::pi * s.frequency * t + s.phase);
    }

    Vector raw(const strategy::BangBang& s, double t, const Vector&) const {
        const auto segments = levels_.size() / static_cast<std::size_t>(p_);
        auto k = static_cast<std::size_t>(std::max(0.0, std::floor(t / s.switch_period)));
        k = std::min(k, segments - 1);
        Vector u(p_);
        for (int j = 0; j < p_; ++j) u(j) = levels_[k * static_cast<std::size_t>(p_) + static_cast<std::size_t>(j)];
        return u;
    }

    Vector raw(const strategy::Greedy& s, double, const Vector& x) const {
        const Vector err = x - x_tg_;
        Eigen::Index i = 0;
        err.cwiseAbs().maxCoeff(&i);
        const double direction = err(i) >= 0.0 ? 1.0 : -1.0;
        // The growth rate direction * (g0uc u)_i is separable across channels,
        // so each channel takes its best grid level independently.
        Vector u(p_);
        for (int j = 0; j < p_; ++j) {
            const double weight = direction * g0uc_(i, j);
            double best_level = 1.0;
            double best_value = weight;
            for (int k = s.resolution - 1; k >= 0; --k) {
                const double level = -1.0 + 2.0 * k / (s.resolution - 1);
                if (weight * level > best_value) {
                    best_value = weight * level;
                    best_level = level;
                }
            }
            u(j) = best_level;
        }
        return u;
    }

    Vector raw(const strategy::CancellationProbe&, double, const Vector&) const {
        return Vector::Constant(p_, 1.0 / t_f_);
    }

    UncontrolledStrategy strategy_;
    int p_;
    double t_f_;
    Vector x_tg_;
    Matrix g0uc_;
    std::vector<double> levels_;
};

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

/// Raised when the state stops being finite. Carries the last finite state;
/// run_closed_loop additionally attaches the partial trace.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double t, Vector last_state)
        : Error(what), t_(t), last_state_(std::move(last_state)) {}

    double time() const noexcept { return t_; }
    const Vector& last_state() const noexcept { return last_state_; }

private:
    double t_;
    Vector last_state_;
};

using UncontrolledFn = std::function<Vector(double, const Vector&)>;

/// One classical Runge-Kutta step of x' = f(x) + g_c(x) uc + g_uc(x) uuc(t, x)
/// with uc held constant and uuc sampled at the stage times.
inline Vector rk4_step(const ControlSystem& sys, const Vector& x, const Vector& uc, const UncontrolledFn& uuc, double t,
                       double dt) {
    if (!(dt > 0.0)) throw DomainError("rk4_step: dt must be > 0");
    auto rhs = [&](double tau, const Vector& y) { return evaluate_dynamics_unchecked(sys, y, uc, uuc(tau, y)); };
    const double half = 0.5 * dt;
    const Vector k1 = rhs(t, x);
    const Vector k2 = rhs(t + half, x + half * k1);
    const Vector k3 = rhs(t + half, x + half * k2);
    const Vector k4 = rhs(t + dt, x + dt * k3);
    Vector next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
        throw DivergenceError("state became non-finite at t = " + std::to_string(t + dt), t, x);
    }
    return next;
}

// ---------------------------------------------------------------------------
// Closed loop
// ---------------------------------------------------------------------------

struct NodeError {
    int n = 0;
    double t_n = 0.0;
    double error = 0.0;
    double bound = 0.0;
};

struct SimulationTrace {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Vector> uc_values;
    std::vector<Vector> uuc_values;
    std::vector<NodeError> node_errors;
    // Largest ||u_c||_inf over the run.
    double constraint_max = 0.0;
    double final_error = 0.0;
    int steps_per_interval = 0;
    // Scale used for the integrator allowance in verify_trace.
    double error_scale = 1.0;
    bool diverged = false;
};

class ClosedLoopDivergence : public DivergenceError {
public:
    ClosedLoopDivergence(const DivergenceError& cause, SimulationTrace partial)
        : DivergenceError(cause), partial_(std::move(partial)) {}

    const SimulationTrace& partial_trace() const noexcept { return partial_; }

private:
    SimulationTrace partial_;
};

/// Everything fixed for one closed-loop run.
struct ClosedLoopProblem {
    const ControlSystem* system = nullptr;
    DriftlessApproximation approx;
    Vector x_tg;
    BoundConstants constants;
};

inline ClosedLoopProblem make_problem(const ControlSystem& sys, const Vector& x0, const Vector& x_tg,
                                      double rank_tol = kDefaultRankTol) {
    ClosedLoopProblem prob;
    prob.system = &sys;
    prob.approx = linearize_at_origin(sys, x0, rank_tol);
    detail::expect_dim(x_tg, sys.state_dim, "make_problem: x_tg");
    prob.x_tg = x_tg;
    prob.constants = compute_constants(sys, prob.approx, x_tg);
    return prob;
}

/// Integrates the malfunctioning system over the schedule's partition.
/// At the start of each interval the realised state is read, the constant
/// controlled input is computed and stored in the schedule, and the
/// interval is integrated with steps_per_interval RK4 steps.
inline SimulationTrace run_closed_loop(const ClosedLoopProblem& prob, ControlSchedule& schedule,
                                       const UncontrolledSignal& signal,
                                       int steps_per_interval = kDefaultStepsPerInterval) {
    if (prob.system == nullptr) throw Error("run_closed_loop: problem has no system");
    const ControlSystem& sys = *prob.system;
    if (steps_per_interval < kMinStepsPerInterval) {
        throw DomainError("run_closed_loop: steps_per_interval must be >= " + std::to_string(kMinStepsPerInterval));
    }
    if (signal.dim() != sys.uncontrolled_dim) throw DimensionError("run_closed_loop: signal dimension != p");
    if (static_cast<int>(schedule.alpha_seq.size()) != schedule.n_bar) {
        throw Error("run_closed_loop: schedule is inconsistent");
    }
    schedule.inputs.clear();

    const double t_f = schedule.final_time();
    const auto& part = schedule.partition;
    const auto& k = prob.constants;
    const auto total = static_cast<std::size_t>(schedule.n_bar) * static_cast<std::size_t>(steps_per_interval) + 1;

    SimulationTrace trace;
    trace.steps_per_interval = steps_per_interval;
    trace.error_scale = std::max(1.0, inf_norm(Vector(prob.approx.x0 - prob.x_tg)) + k.c);
    trace.times.reserve(total);
    trace.states.reserve(total);
    trace.uc_values.reserve(total);
    trace.uuc_values.reserve(total);

    auto checked_uuc = [&signal](double t, const Vector& x) {
        Vector u = signal.sample(t, x);
        if (inf_norm(u) > 1.0) throw ConstraintError("uncontrolled input left the unit ball");
        return u;
    };
    const UncontrolledFn uuc_fn = checked_uuc;

    Vector x = prob.approx.x0;
    Vector uc;
    try {
        for (int n = 1; n <= schedule.n_bar; ++n) {
            const double t_start = part.start(n);
            const double t_end = part.end(n);
            uc = part.is_final(n) ? final_interval_input(n, x, prob.x_tg, prob.approx, t_f)
                                  : control_input(n, x, prob.x_tg, prob.approx, interval_length(t_f, n));
            schedule.inputs.push_back(uc);
            trace.constraint_max = std::max(trace.constraint_max, inf_norm(uc));

            const double h = (t_end - t_start) / steps_per_interval;
            for (int s = 0; s < steps_per_interval; ++s) {
                const double t = t_start + s * h;
                trace.times.push_back(t);
                trace.states.push_back(x);
                trace.uc_values.push_back(uc);
                trace.uuc_values.push_back(checked_uuc(t, x));
                // The last step lands on the boundary exactly.
                const double step = (s + 1 == steps_per_interval) ? t_end - t : h;
                x = rk4_step(sys, x, uc, uuc_fn, t, step);
            }
            NodeError node;
            node.n = n;
            node.t_n = t_end;
            node.error = inf_norm(Vector(prob.x_tg - x));
            node.bound = error_bound(n, k.c, k.lipschitz_sum, t_f);
            trace.node_errors.push_back(node);
        }
    } catch (const DivergenceError& e) {
        trace.diverged = true;
        trace.final_error = inf_norm(Vector(prob.x_tg - e.last_state()));
        throw ClosedLoopDivergence(e, std::move(trace));
    }
    trace.times.push_back(t_f);
    trace.states.push_back(x);
    trace.uc_values.push_back(uc);
    trace.uuc_values.push_back(checked_uuc(t_f, x));
    trace.final_error = inf_norm(Vector(prob.x_tg - x));
    return trace;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct TraceDiagnostics {
    std::vector<int> bound_violations;
    std::vector<int> constraint_violations;
    bool final_error_ok = false;
    std::vector<std::string> notes;

    bool clean() const { return bound_violations.empty() && constraint_violations.empty() && final_error_ok; }
};

/// Discretisation slack on a node error: 1e-9 + 10 (h_n)^4 * scale, with h_n
/// the RK4 step used on interval n.
inline double integrator_allowance(double interval_span, int steps, double scale) {
    const double h = interval_span / steps;
    return kNodeErrorTol + 10.0 * h * h * h * h * scale;
}

inline TraceDiagnostics verify_trace(const SimulationTrace& trace, const FeasibilityReport& report,
                                     const ControlSchedule& schedule) {
    TraceDiagnostics diag;
    for (const auto& node : trace.node_errors) {
        const double slack = integrator_allowance(schedule.partition.span(node.n), trace.steps_per_interval,
                                                  trace.error_scale);
        if (node.error > node.bound + slack) diag.bound_violations.push_back(node.n);
    }
    for (std::size_t i = 0; i < schedule.inputs.size(); ++i) {
        if (inf_norm(schedule.inputs[i]) > 1.0 + kConstraintTol) {
            diag.constraint_violations.push_back(static_cast<int>(i) + 1);
        }
    }
    diag.final_error_ok = trace.final_error <= schedule.epsilon;
    if (!report.tf_valid) {
        diag.notes.push_back(
            "t_f was not validated by the feasibility analysis; the node-error bounds and input constraints are not "
            "guaranteed for this run");
    }
    if (!diag.bound_violations.empty()) {
        diag.notes.push_back(std::to_string(diag.bound_violations.size()) + " node(s) exceed the a-priori error bound");
    }
    if (!diag.constraint_violations.empty()) {
        diag.notes.push_back(std::to_string(diag.constraint_violations.size()) +
                             " interval(s) with ||u_c||_inf > 1");
    }
    return diag;
}

}  // namespace resilient
