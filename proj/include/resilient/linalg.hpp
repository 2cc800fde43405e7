#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include <Eigen/Dense>

#include "resilient/errors.hpp"

namespace resilient {

// Dense real vectors and matrices. Dimensions are dynamic; the library only
// targets desk-scale systems (d <= 64).
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr int kMaxDimension = 64;
inline constexpr double kDefaultRankTol = 1e-10;

inline Vector make_vector(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

// Row-major initializer: make_matrix({{1, 2}, {3, 4}}).
inline Matrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = n_rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.begin()->size());
    Matrix m(n_rows, n_cols);
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        if (static_cast<Eigen::Index>(row.size()) != n_cols) {
            throw DimensionError("make_matrix: ragged rows");
        }
        Eigen::Index c = 0;
        for (double x : row) m(r, c++) = x;
        ++r;
    }
    return m;
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Max absolute entry.
inline double inf_norm(const Vector& x) {
    if (x.size() == 0) throw DimensionError("inf_norm: empty vector");
    return x.cwiseAbs().maxCoeff();
}

/// Induced infinity norm: maximum absolute row sum.
inline double inf_norm(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) throw DimensionError("inf_norm: empty matrix");
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Minimal-norm right inverse of a full-row-rank matrix, so that M * pinv == I.
///
/// The rank test compares the smallest singular value of M against
/// rank_tol times the largest Euclidean row norm. The inverse itself comes
/// from a Householder QR of M^T (M^T = QR gives M^+ = Q R^-T), which avoids
/// forming M M^T.
inline Matrix right_pseudoinverse(const Matrix& m, double rank_tol = kDefaultRankTol) {
    const Eigen::Index d = m.rows();
    const Eigen::Index cols = m.cols();
    if (d == 0 || cols == 0) throw DimensionError("right_pseudoinverse: empty matrix");
    if (d > cols) {
        throw DimensionError("right_pseudoinverse: " + std::to_string(d) + "x" + std::to_string(cols) +
                             " matrix has more rows than columns and cannot have full row rank");
    }
    if (!m.allFinite()) throw DimensionError("right_pseudoinverse: non-finite entries");

    const double row_scale = m.rowwise().norm().maxCoeff();
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sigma = svd.singularValues();
    const double threshold = rank_tol * row_scale;
    int rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > threshold) ++rank;
    }
    if (row_scale == 0.0 || rank < d) {
        throw RankError("right_pseudoinverse: matrix is rank deficient (numerical rank " + std::to_string(rank) +
                            " < " + std::to_string(d) + " rows); full row rank " + std::to_string(d) + " required",
                        static_cast<int>(d), rank);
    }

    Eigen::HouseholderQR<Matrix> qr(m.transpose());
    const Matrix q = qr.householderQ() * Matrix::Identity(cols, d);
    const Matrix r = qr.matrixQR().topLeftCorner(d, d).triangularView<Eigen::Upper>();
    // pinv^T = R^-1 Q^T
    const Matrix pinv_t = r.triangularView<Eigen::Upper>().solve(q.transpose());
    return pinv_t.transpose();
}

}  // namespace resilient
