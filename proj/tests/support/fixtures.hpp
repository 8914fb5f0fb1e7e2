#pragma once

// Shared problem instances for the unit and acceptance suites.

#include "condrdf/gaussian_core.hpp"
#include "condrdf/waterfill.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace condrdf::testing {

/// Q_X = 1, Q_S = 1.5, Q_Y = 2, all cross-covariances 1. Gives
/// Q_{X|Y} = 0.5, Q_{S|Y} = 1, Q_{X,S|Y} = 0.5.
inline GaussianSourceSpec scalar_example() {
  Matrix q(3, 3);
  q << 1.0, 1.0, 1.0,
       1.0, 1.5, 1.0,
       1.0, 1.0, 2.0;
  return validate_spec(q, Dims{1, 1, 1});
}

/// X = S almost surely with Q_{X|Y} = q (Y has unit variance, Q_{X,Y} = c).
inline GaussianSourceSpec wyner_spec(double q, double c = 0.5) {
  const double v = q + c * c;
  Matrix m(3, 3);
  m << v, v, c,
       v, v, c,
       c, c, 1.0;
  return validate_spec(m, Dims{1, 1, 1});
}

/// X = S almost surely, Y independent of X.
inline GaussianSourceSpec classical_spec(double q_x) {
  Matrix m(3, 3);
  m << q_x, q_x, 0.0,
       q_x, q_x, 0.0,
       0.0, 0.0, 1.0;
  return validate_spec(m, Dims{1, 1, 1});
}

/// Y independent of (X, S): Q_{X|Y} = diag(0.5, 0.25), Q_{S|Y} = I,
/// Q_{X,S|Y} = diag(0.5, 0.25).
inline GaussianSourceSpec diagonal_pair_example() {
  Matrix m = Matrix::Zero(5, 5);
  m(0, 0) = 0.5;
  m(1, 1) = 0.25;
  m(2, 2) = 1.0;
  m(3, 3) = 1.0;
  m(0, 2) = m(2, 0) = 0.5;
  m(1, 3) = m(3, 1) = 0.25;
  m(4, 4) = 1.0;
  return validate_spec(m, Dims{2, 2, 1});
}

inline double condition_number(const Matrix& m) {
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues();
  return ev.minCoeff() > 0.0 ? ev.maxCoeff() / ev.minCoeff() : std::numeric_limits<double>::infinity();
}

/// Random full-rank joint covariance B B^T / N + ridge I, rescaled so the
/// largest diagonal entry is 1. Draws are rejected until Q and
/// Q_{X|Y} - Q_{X|S,Y} both have condition number at most max_condition.
inline GaussianSourceSpec random_spec(std::mt19937_64& rng, int n, int n_y, double ridge = 0.05,
                                      double max_condition = 1e6) {
  const int total = 2 * n + n_y;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Matrix b(total, total);
    for (int i = 0; i < total; ++i) {
      for (int j = 0; j < total; ++j) b(i, j) = normal(rng);
    }
    Matrix q = b * b.transpose() / static_cast<double>(total) +
               ridge * Matrix::Identity(total, total);
    q /= q.diagonal().maxCoeff();
    q = 0.5 * (q + q.transpose());
    auto spec = validate_spec(q, Dims{n, n, n_y});
    const auto stats = conditional_stats(spec);
    if (condition_number(q) <= max_condition &&
        condition_number(symmetrized(stats.q_x_given_y - stats.q_x_given_sy)) <= max_condition) {
      return spec;
    }
  }
}

/// Distortion at fraction u of the way from max(lower, 0) to upper.
inline double delta_at(const DistortionRange& range, double u) {
  const double lo = std::max(range.lower, 0.0);
  return lo + u * (range.upper - lo);
}

}  // namespace condrdf::testing
