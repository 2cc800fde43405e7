#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numerical routines: plain loops over std::vector.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

// Gauss-Jordan inverse with partial pivoting.
inline Mat inverse(Mat a) {
    const std::size_t n = a.size();
    Mat inv(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (a[pivot][col] == 0.0) throw std::runtime_error("oracle::inverse: singular");
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double diag = a[col][col];
        for (std::size_t k = 0; k < n; ++k) {
            a[col][k] /= diag;
            inv[col][k] /= diag;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double factor = a[r][col];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= factor * a[col][k];
                inv[r][k] -= factor * inv[col][k];
            }
        }
    }
    return inv;
}

inline Vec matvec(const Mat& a, const Vec& x) {
    Vec y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
    }
    return y;
}

inline double max_abs(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double row_sum_norm(const Mat& a) {
    double m = 0.0;
    for (const auto& row : a) {
        double s = 0.0;
        for (double x : row) s += std::abs(x);
        m = std::max(m, s);
    }
    return m;
}

// h(t) = exp(t D / 2) - 1 - (t D - c2) / c1 written out directly.
inline double h(double t, double c1, double c2, double d) { return std::exp(t * d / 2.0) - 1.0 - (t * d - c2) / c1; }

// Minimum of h over a uniform grid on [0, 4 t* + 1] plus a dense grid around
// t*. t* is only used to place the grid.
inline double grid_min_h(double c1, double c2, double d, int points = 10000) {
    const double ts = (2.0 / d) * std::log(2.0 / c1);
    const double hi = 4.0 * std::max(ts, 0.0) + 1.0;
    double m = h(0.0, c1, c2, d);
    for (int i = 0; i <= points; ++i) m = std::min(m, h(hi * i / points, c1, c2, d));
    if (ts > 0.0) {
        const double w = std::max(ts * 1e-3, 1e-9);
        for (int i = -1000; i <= 1000; ++i) {
            const double t = ts + w * i / 1000.0;
            if (t >= 0.0) m = std::min(m, h(t, c1, c2, d));
        }
    }
    return m;
}

// Classical RK4 for y' = rhs(t, y) with n equal steps over [t0, t1].
inline Vec integrate(const std::function<Vec(double, const Vec&)>& rhs, Vec y, double t0, double t1, int n) {
    const double hstep = (t1 - t0) / n;
    auto axpy = [](const Vec& a, double s, const Vec& b) {
        Vec out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
        return out;
    };
    for (int k = 0; k < n; ++k) {
        const double t = t0 + k * hstep;
        const Vec k1 = rhs(t, y);
        const Vec k2 = rhs(t + hstep / 2, axpy(y, hstep / 2, k1));
        const Vec k3 = rhs(t + hstep / 2, axpy(y, hstep / 2, k2));
        const Vec k4 = rhs(t + hstep, axpy(y, hstep, k3));
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += hstep / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return y;
}

}  // namespace oracle
