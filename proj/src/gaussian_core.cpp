#include "condrdf/gaussian_core.hpp"

#include "condrdf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace condrdf {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(m));
}

std::string dims_string(const Dims& d) {
  std::ostringstream os;
  os << "(" << d.n_x << ", " << d.n_s << ", " << d.n_y << ")";
  return os.str();
}

}  // namespace

double psd_tolerance(const Matrix& m) {
  if (m.size() == 0) return 1e-9;
  const double top = eigen_of(m).eigenvalues().maxCoeff();
  return 1e-9 * std::max(1.0, top);
}

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  return eigen_of(m).eigenvalues().minCoeff();
}

GaussianSourceSpec validate_spec(const Matrix& raw, const Dims& dims) {
  if (dims.n_x <= 0 || dims.n_s <= 0 || dims.n_y <= 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "all block dimensions must be positive, got " + dims_string(dims));
  }
  if (raw.rows() != raw.cols() || raw.rows() != dims.total()) {
    std::ostringstream os;
    os << "covariance is " << raw.rows() << "x" << raw.cols() << " but dims "
       << dims_string(dims) << " require " << dims.total() << "x" << dims.total();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  if (!raw.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "covariance has non-finite entries");
  }

  GaussianSourceSpec spec;
  spec.dims_ = dims;
  spec.sym_residual_ = (raw - raw.transpose()).norm();
  spec.tol_.sym = 1e-9 * raw.norm();
  if (spec.sym_residual_ > spec.tol_.sym) {
    std::ostringstream os;
    os << "covariance is not symmetric: ||Q - Q^T||_F = " << spec.sym_residual_
       << " exceeds " << spec.tol_.sym;
    throw Error(ErrorCode::NotSymmetric, os.str());
  }
  spec.q_ = symmetrized(raw);

  const Vector eig = eigen_of(spec.q_).eigenvalues();
  spec.tol_.psd = 1e-9 * std::max(1.0, eig.maxCoeff());
  if (eig.minCoeff() < -spec.tol_.psd) {
    std::ostringstream os;
    os << "covariance is not positive semidefinite: min eigenvalue "
       << eig.minCoeff();
    throw Error(ErrorCode::NotPSD, os.str());
  }

  const double y_min = min_eigenvalue(Matrix(spec.q_y()));
  if (!(y_min > spec.tol_.inv)) {
    std::ostringstream os;
    os << "Q_Y is not invertible: min eigenvalue " << y_min;
    throw Error(ErrorCode::SingularY, os.str());
  }
  return spec;
}

ConditionalStats conditional_stats(const GaussianSourceSpec& spec) {
  const Matrix q_y = spec.q_y();
  Eigen::LDLT<Matrix> y_solver(q_y);
  if (y_solver.info() != Eigen::Success || !(min_eigenvalue(q_y) > spec.tolerances().inv)) {
    throw Error(ErrorCode::SingularY, "Q_Y is not invertible");
  }

  ConditionalStats out;
  // Q_Y symmetric, so (Q_{A,Y} Q_Y^{-1})^T = Q_Y^{-1} Q_{Y,A}.
  out.gain_x_given_y = y_solver.solve(Matrix(spec.q_xy().transpose())).transpose();
  out.gain_s_given_y = y_solver.solve(Matrix(spec.q_sy().transpose())).transpose();

  out.q_x_given_y = symmetrized(spec.q_x() - out.gain_x_given_y * spec.q_xy().transpose());
  out.q_s_given_y = symmetrized(spec.q_s() - out.gain_s_given_y * spec.q_sy().transpose());
  out.q_xs_given_y = spec.q_xs() - out.gain_x_given_y * spec.q_sy().transpose();

  const Matrix s_pinv = pseudo_inverse(out.q_s_given_y, spec.tolerances().rank);
  out.q_x_given_sy = symmetrized(out.q_x_given_y -
                                 out.q_xs_given_y * s_pinv * out.q_xs_given_y.transpose());
  return out;
}

Matrix symmetric_sqrt(const Matrix& m, double psd_tol) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric_sqrt needs a square matrix");
  }
  if (m.size() == 0) return m;
  if (psd_tol < 0.0) psd_tol = psd_tolerance(m);

  const auto solver = eigen_of(m);
  Vector eig = solver.eigenvalues();
  if (eig.minCoeff() < -psd_tol) {
    std::ostringstream os;
    os << "matrix is not positive semidefinite: min eigenvalue " << eig.minCoeff();
    throw Error(ErrorCode::NotPSD, os.str());
  }
  for (auto& e : eig) e = e < psd_tol ? 0.0 : std::sqrt(e);
  const Matrix& v = solver.eigenvectors();
  return symmetrized(v * eig.asDiagonal() * v.transpose());
}

Matrix pseudo_inverse(const Matrix& m, double rank_tol) {
  if (m.size() == 0) return Matrix(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = rank_tol * (sv.size() > 0 ? sv(0) : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double gaussian_cmi(const Matrix& prior, const Matrix& posterior, double psd_tol,
                    double rank_tol) {
  if (prior.rows() != prior.cols() || prior.rows() != posterior.rows() ||
      posterior.rows() != posterior.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "gaussian_cmi needs equal square matrices");
  }
  if (prior.size() == 0) return 0.0;
  if (psd_tol < 0.0) psd_tol = psd_tolerance(prior);

  const double gap = min_eigenvalue(prior - posterior);
  if (gap < -psd_tol) {
    std::ostringstream os;
    os << "posterior is not dominated by prior: min eigenvalue of difference " << gap;
    throw Error(ErrorCode::NotNested, os.str());
  }
  if (min_eigenvalue(posterior) < -psd_tol) {
    throw Error(ErrorCode::NotPSD, "posterior covariance is not positive semidefinite");
  }

  const auto prior_eig = eigen_of(prior);
  const Vector& lam = prior_eig.eigenvalues();
  const double top = lam.maxCoeff();
  if (!(top > 0.0)) return 0.0;

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > rank_tol * top) keep.push_back(i);
  }
  Matrix basis(prior.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    basis.col(static_cast<Eigen::Index>(k)) = prior_eig.eigenvectors().col(keep[k]);
  }

  const Vector post = eigen_of(basis.transpose() * posterior * basis).eigenvalues();
  if (post.minCoeff() <= rank_tol * top) return std::numeric_limits<double>::infinity();

  double rate = 0.0;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    rate += std::log(lam(keep[k])) - std::log(post(static_cast<Eigen::Index>(k)));
  }
  return std::max(0.0, 0.5 * rate);
}

Matrix select(const Matrix& sigma, IndexList rows, IndexList cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sigma(rows[i], cols[j]);
    }
  }
  return out;
}

Matrix conditional_cross_covariance(const Matrix& sigma, IndexList a, IndexList b,
                                    IndexList c, double rank_tol) {
  const Matrix s_ab = select(sigma, a, b);
  if (c.empty()) return s_ab;
  const Matrix s_cc_pinv = pseudo_inverse(select(sigma, c, c), rank_tol);
  return s_ab - select(sigma, a, c) * s_cc_pinv * select(sigma, c, b);
}

}  // namespace condrdf
