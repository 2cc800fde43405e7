#pragma once

// Test systems shared by the unit and acceptance suites.

#include <cmath>

#include "resilient/resilient.hpp"

namespace fixtures {

using resilient::ControlSystem;
using resilient::Matrix;
using resilient::Vector;

inline constexpr double kSyntheticDrift = 0.05;
inline constexpr double kSyntheticFinalTime = 10.0;

// f(x) = 0.05 sin(x) elementwise, g_c = I, g_uc = [0.05, 0.025]^T. Near the
// target the horizon conditions validate (checked by the tests themselves).
inline ControlSystem synthetic_system() {
    ControlSystem sys;
    sys.name = "synthetic";
    sys.state_dim = 2;
    sys.controlled_dim = 2;
    sys.uncontrolled_dim = 1;
    sys.drift = [](const Vector& x) -> Vector { return kSyntheticDrift * x.array().sin().matrix(); };
    sys.controlled_map = [](const Vector&) -> Matrix { return Matrix::Identity(2, 2); };
    sys.uncontrolled_map = [](const Vector&) -> Matrix { return resilient::make_matrix({{0.05}, {0.025}}); };
    sys.lipschitz_f = kSyntheticDrift;
    sys.lipschitz_g = 0.0;
    sys.state_space_bound = resilient::default_state_space_bound(resilient::make_vector({0.5, -0.3}), Vector::Zero(2));
    return sys;
}

inline Vector synthetic_x0() { return resilient::make_vector({0.5, -0.3}); }
inline Vector synthetic_target() { return Vector::Zero(2); }

// f = 0, constant input maps: the driftless approximation is exact.
inline ControlSystem driftless_system() {
    ControlSystem sys;
    sys.name = "driftless";
    sys.state_dim = 3;
    sys.controlled_dim = 4;
    sys.uncontrolled_dim = 2;
    sys.drift = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
    sys.controlled_map = [](const Vector&) -> Matrix {
        return resilient::make_matrix({{1.0, 0.5, 0.0, 0.2}, {0.0, 1.0, -0.3, 0.0}, {0.4, 0.0, 1.0, 1.0}});
    };
    sys.uncontrolled_map = [](const Vector&) -> Matrix {
        return resilient::make_matrix({{0.3, -0.1}, {0.0, 0.6}, {0.2, 0.2}});
    };
    sys.lipschitz_f = 0.0;
    sys.lipschitz_g = 0.0;
    sys.state_space_bound = 10.0;
    return sys;
}

// x' = -x, scalar, inputs with zero gain.
inline ControlSystem decay_system() {
    ControlSystem sys;
    sys.name = "decay";
    sys.state_dim = 1;
    sys.controlled_dim = 1;
    sys.uncontrolled_dim = 1;
    sys.drift = [](const Vector& x) -> Vector { return -x; };
    sys.controlled_map = [](const Vector&) -> Matrix { return Matrix::Zero(1, 1); };
    sys.uncontrolled_map = [](const Vector&) -> Matrix { return Matrix::Zero(1, 1); };
    sys.lipschitz_f = 1.0;
    sys.state_space_bound = 2.0;
    return sys;
}

}  // namespace fixtures
