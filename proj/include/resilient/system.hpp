#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>

#include "resilient/errors.hpp"
#include "resilient/linalg.hpp"

namespace resilient {

// Slack allowed on the unit-ball input constraints before an input is
// rejected as inadmissible.
inline constexpr double kInputNormSlack = 1e-12;

/// A nonlinear system that has lost authority over some of its actuators:
///
///   x' = f(x) + g_c(x) u_c + g_uc(x) u_uc,   ||u_c||_inf <= 1, ||u_uc||_inf <= 1.
///
/// The dynamics are evaluation callbacks; they must be pure. The Lipschitz
/// constants are declared by the caller and trusted (check_lipschitz can
/// sample them).
struct ControlSystem {
    using DriftFn = std::function<Vector(const Vector&)>;
    using InputMapFn = std::function<Matrix(const Vector&)>;

    std::string name;
    int state_dim = 0;
    int controlled_dim = 0;
    int uncontrolled_dim = 0;
    DriftFn drift;
    InputMapFn controlled_map;
    InputMapFn uncontrolled_map;
    double lipschitz_f = 0.0;
    double lipschitz_g = 0.0;
    // Radius (inf-norm) of the compact state region, centred at x0.
    double state_space_bound = 1.0;

    double lipschitz_sum() const { return lipschitz_f + lipschitz_g; }

    void validate() const {
        if (state_dim < 1 || controlled_dim < 1 || uncontrolled_dim < 1) {
            throw DimensionError("ControlSystem '" + name + "': d, m, p must all be >= 1");
        }
        if (state_dim > kMaxDimension) throw DimensionError("ControlSystem '" + name + "': d exceeds 64");
        if (!(lipschitz_f >= 0.0) || !(lipschitz_g >= 0.0)) {
            throw DomainError("ControlSystem '" + name + "': Lipschitz constants must be >= 0");
        }
        if (!(state_space_bound > 0.0)) throw DomainError("ControlSystem '" + name + "': state_space_bound must be > 0");
        if (!drift || !controlled_map || !uncontrolled_map) {
            throw Error("ControlSystem '" + name + "': missing dynamics callback");
        }
    }
};

/// Evaluation of the input maps at x0 with the drift dropped:
///   x' = g0c u_c + g0uc u_uc.
struct DriftlessApproximation {
    Matrix g0c;
    Matrix g0uc;
    Matrix g0c_pinv;
    Vector x0;
};

/// Default compact-region radius: 2 ||x0 - x_tg||_inf + 1.
inline double default_state_space_bound(const Vector& x0, const Vector& x_tg) {
    return 2.0 * inf_norm(Vector(x0 - x_tg)) + 1.0;
}

namespace detail {

inline void expect_dim(const Vector& v, int dim, const char* what) {
    if (v.size() != dim) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(dim) + ", got " +
                             std::to_string(v.size()));
    }
}

inline void expect_shape(const Matrix& m, int rows, int cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                             ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

}  // namespace detail

/// f(x) + g_c(x) u_c + g_uc(x) u_uc without input-constraint checks. The
/// closed loop integrates with this so that a controlled input outside the
/// unit ball is recorded as a diagnostic instead of aborting the run.
inline Vector evaluate_dynamics_unchecked(const ControlSystem& sys, const Vector& x, const Vector& uc,
                                          const Vector& uuc) {
    return sys.drift(x) + sys.controlled_map(x) * uc + sys.uncontrolled_map(x) * uuc;
}

inline Vector evaluate_dynamics(const ControlSystem& sys, const Vector& x, const Vector& uc, const Vector& uuc) {
    detail::expect_dim(x, sys.state_dim, "evaluate_dynamics: state");
    detail::expect_dim(uc, sys.controlled_dim, "evaluate_dynamics: controlled input");
    detail::expect_dim(uuc, sys.uncontrolled_dim, "evaluate_dynamics: uncontrolled input");
    if (inf_norm(uc) > 1.0 + kInputNormSlack) {
        throw ConstraintError("evaluate_dynamics: controlled input u_c has inf-norm " + std::to_string(inf_norm(uc)) +
                              " > 1");
    }
    if (inf_norm(uuc) > 1.0 + kInputNormSlack) {
        throw ConstraintError("evaluate_dynamics: uncontrolled input u_uc has inf-norm " +
                              std::to_string(inf_norm(uuc)) + " > 1");
    }
    const Vector fx = sys.drift(x);
    const Matrix gc = sys.controlled_map(x);
    const Matrix guc = sys.uncontrolled_map(x);
    detail::expect_dim(fx, sys.state_dim, "evaluate_dynamics: drift output");
    detail::expect_shape(gc, sys.state_dim, sys.controlled_dim, "evaluate_dynamics: controlled map");
    detail::expect_shape(guc, sys.state_dim, sys.uncontrolled_dim, "evaluate_dynamics: uncontrolled map");
    return fx + gc * uc + guc * uuc;
}

inline DriftlessApproximation linearize_at_origin(const ControlSystem& sys, const Vector& x0,
                                                  double rank_tol = kDefaultRankTol) {
    sys.validate();
    detail::expect_dim(x0, sys.state_dim, "linearize_at_origin: x0");
    DriftlessApproximation approx;
    approx.x0 = x0;
    approx.g0c = sys.controlled_map(x0);
    approx.g0uc = sys.uncontrolled_map(x0);
    detail::expect_shape(approx.g0c, sys.state_dim, sys.controlled_dim, "linearize_at_origin: g_c(x0)");
    detail::expect_shape(approx.g0uc, sys.state_dim, sys.uncontrolled_dim, "linearize_at_origin: g_uc(x0)");
    approx.g0c_pinv = right_pseudoinverse(approx.g0c, rank_tol);
    return approx;
}

// ---------------------------------------------------------------------------
// ADMIRE fighter-jet model: roll/pitch/yaw rates, canard uncontrolled.
// ---------------------------------------------------------------------------

namespace admire {

inline Matrix a_matrix() {
    return make_matrix({{-0.9967, 0.0, 0.6176}, {0.0, -0.5057, 0.0}, {-0.0939, 0.0, -0.2127}});
}

// Left elevon, right elevon, rudder.
inline Matrix controlled_matrix() {
    return make_matrix({{-4.2423, 4.2423, 1.4871}, {-1.2735, -1.2735, 0.0024}, {-0.2805, 0.2805, -0.8823}});
}

// Canard.
inline Matrix uncontrolled_matrix() { return make_matrix({{0.0}, {1.6532}, {0.0}}); }

/// Wind disturbance 0.5 [sin(p) cos^2(p), -sin(2q), 1]^T.
inline Vector wind(const Vector& x) {
    const double p = x(0);
    const double q = x(1);
    const double cp = std::cos(p);
    return make_vector({0.5 * std::sin(p) * cp * cp, -0.5 * std::sin(2.0 * q), 0.5});
}

inline Vector initial_state() { return make_vector({5.13, 2.76, -3.07}); }
inline Vector target_state() { return Vector::Zero(3); }

inline constexpr double kFinalTime = 20.0;
inline constexpr int kTerminalIndex = 8;
// ||A||_inf + 1, the wind terms having slope at most one.
inline constexpr double kLipschitzF = 2.6143;

}  // namespace admire

inline ControlSystem build_admire() {
    ControlSystem sys;
    sys.name = "admire";
    sys.state_dim = 3;
    sys.controlled_dim = 3;
    sys.uncontrolled_dim = 1;
    sys.drift = [a = admire::a_matrix()](const Vector& x) -> Vector { return a * x + admire::wind(x); };
    sys.controlled_map = [b = admire::controlled_matrix()](const Vector&) -> Matrix { return b; };
    sys.uncontrolled_map = [b = admire::uncontrolled_matrix()](const Vector&) -> Matrix { return b; };
    sys.lipschitz_f = admire::kLipschitzF;
    sys.lipschitz_g = 0.0;
    sys.state_space_bound = default_state_space_bound(admire::initial_state(), admire::target_state());
    return sys;
}

// ---------------------------------------------------------------------------
// Lipschitz sampling
// ---------------------------------------------------------------------------

struct LipschitzReport {
    double max_ratio_f = 0.0;
    double max_ratio_g = 0.0;
    int pairs_used = 0;
    bool consistent = true;
};

namespace detail {

inline Matrix stacked_input_map(const ControlSystem& sys, const Vector& x) {
    Matrix g(sys.state_dim, sys.controlled_dim + sys.uncontrolled_dim);
    g << sys.controlled_map(x), sys.uncontrolled_map(x);
    return g;
}

}  // namespace detail

/// Samples n_samples state pairs uniformly from the inf-ball of radius
/// state_space_bound around `center` and reports the largest difference
/// quotients of f and [g_c g_uc]. Coincident pairs are skipped.
inline LipschitzReport check_lipschitz(const ControlSystem& sys, const Vector& center, int n_samples,
                                       std::uint64_t rng_seed) {
    if (n_samples < 2) throw DomainError("check_lipschitz: n_samples must be >= 2");
    detail::expect_dim(center, sys.state_dim, "check_lipschitz: center");
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> offset(-sys.state_space_bound, sys.state_space_bound);
    auto draw = [&] {
        Vector x(sys.state_dim);
        for (int i = 0; i < sys.state_dim; ++i) x(i) = center(i) + offset(rng);
        return x;
    };

    LipschitzReport report;
    for (int k = 0; k < n_samples; ++k) {
        const Vector x1 = draw();
        const Vector x2 = draw();
        const double dist = inf_norm(Vector(x1 - x2));
        if (dist == 0.0) continue;
        const double rf = inf_norm(Vector(sys.drift(x1) - sys.drift(x2))) / dist;
        const double rg = inf_norm(Matrix(detail::stacked_input_map(sys, x1) - detail::stacked_input_map(sys, x2))) / dist;
        report.max_ratio_f = std::max(report.max_ratio_f, rf);
        report.max_ratio_g = std::max(report.max_ratio_g, rg);
        ++report.pairs_used;
    }
    report.consistent = report.max_ratio_f <= sys.lipschitz_f && report.max_ratio_g <= sys.lipschitz_g;
    return report;
}

}  // namespace resilient
