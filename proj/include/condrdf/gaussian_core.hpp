#pragma once

// Covariance algebra for the jointly Gaussian triple (X, S, Y).
//
// X is the source, S the measurement seen by the encoder and Y the side
// information at the decoder. All conditional quantities are Schur
// complements of the joint covariance.

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace condrdf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dims {
  Eigen::Index n_x = 0;
  Eigen::Index n_s = 0;
  Eigen::Index n_y = 0;

  Eigen::Index total() const { return n_x + n_s + n_y; }
  bool operator==(const Dims&) const = default;
};

/// Numerical thresholds derived from the joint covariance at validation time.
struct Tolerances {
  double sym = 0.0;   // 1e-9 * ||Q||_F
  double psd = 1e-9;  // 1e-9 * max(1, lambda_max(Q))
  double inv = 1e-10;
  double rank = 1e-12;
};

class GaussianSourceSpec {
 public:
  const Dims& dims() const { return dims_; }
  const Matrix& covariance() const { return q_; }
  const Tolerances& tolerances() const { return tol_; }
  /// Frobenius norm of Q - Q^T before symmetrization.
  double symmetrization_residual() const { return sym_residual_; }

  auto q_x() const { return q_.topLeftCorner(dims_.n_x, dims_.n_x); }
  auto q_s() const { return q_.block(dims_.n_x, dims_.n_x, dims_.n_s, dims_.n_s); }
  auto q_y() const { return q_.bottomRightCorner(dims_.n_y, dims_.n_y); }
  auto q_xs() const { return q_.block(0, dims_.n_x, dims_.n_x, dims_.n_s); }
  auto q_xy() const { return q_.block(0, dims_.n_x + dims_.n_s, dims_.n_x, dims_.n_y); }
  auto q_sy() const {
    return q_.block(dims_.n_x, dims_.n_x + dims_.n_s, dims_.n_s, dims_.n_y);
  }

 private:
  friend GaussianSourceSpec validate_spec(const Matrix& raw, const Dims& dims);

  Dims dims_;
  Matrix q_;
  Tolerances tol_;
  double sym_residual_ = 0.0;
};

struct ConditionalStats {
  Matrix q_x_given_y;     // Q_{X|Y}
  Matrix q_s_given_y;     // Q_{S|Y}
  Matrix q_xs_given_y;    // Q_{X,S|Y}, n_x x n_s
  Matrix q_x_given_sy;    // Q_{X|S,Y}
  Matrix gain_x_given_y;  // Q_{X,Y} Q_Y^{-1}
  Matrix gain_s_given_y;  // Q_{S,Y} Q_Y^{-1}
};

/// Checks dims, symmetry, PSD-ness and invertibility of Q_Y, returning the
/// symmetrized spec. Throws Error{DimensionMismatch, NotSymmetric, NotPSD,
/// SingularY}.
GaussianSourceSpec validate_spec(const Matrix& raw, const Dims& dims);

ConditionalStats conditional_stats(const GaussianSourceSpec& spec);

/// 1e-9 * max(1, lambda_max(m)).
double psd_tolerance(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of m (+inf for empty m).
double min_eigenvalue(const Matrix& m);

/// Unique symmetric PSD root. Eigenvalues below psd_tol are clamped to zero;
/// anything below -psd_tol is rejected with NotPSD. A negative psd_tol selects
/// psd_tolerance(m).
Matrix symmetric_sqrt(const Matrix& m, double psd_tol = -1.0);

/// Moore-Penrose pseudoinverse; singular values below rank_tol * sigma_max
/// are treated as zero.
Matrix pseudo_inverse(const Matrix& m, double rank_tol = 1e-12);

/// 0.5 * log(det(prior) / det(posterior)) in nats, restricted to the range of
/// prior. Returns +inf when posterior is singular on that range. Throws
/// NotNested if prior - posterior is not PSD within psd_tol.
double gaussian_cmi(const Matrix& prior, const Matrix& posterior,
                    double psd_tol = -1.0, double rank_tol = 1e-12);

/// Index set into a joint covariance.
using IndexList = std::span<const Eigen::Index>;

/// cov(A, B | C) = S_AB - S_AC S_CC^+ S_CB for a joint covariance sigma.
Matrix conditional_cross_covariance(const Matrix& sigma, IndexList a, IndexList b,
                                    IndexList c, double rank_tol = 1e-12);

/// Sub-block sigma[rows, cols].
Matrix select(const Matrix& sigma, IndexList rows, IndexList cols);

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace condrdf
