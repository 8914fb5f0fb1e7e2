#include "condrdf/oracle.hpp"

#include "condrdf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace condrdf::oracle {

namespace {

template <int N>
using Fixed = Eigen::Matrix<double, N, N>;

template <int N>
struct Problem {
  Fixed<N> q_x_given_y;
  Fixed<N> q_s_given_y;
  Fixed<N> s_gain;  // Q_{S|Y} Q_{X,S|Y}^{-1}
  double log_det_prior = 0.0;
  double trace_x = 0.0;
  double delta = 0.0;
  double tol = 0.0;
};

template <int N>
double min_eig(const Fixed<N>& m) {
  if constexpr (N == 1) {
    return m(0, 0);
  } else {
    const double mean = 0.5 * (m(0, 0) + m(1, 1));
    const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
    const double off = 0.5 * (m(0, 1) + m(1, 0));
    return mean - std::hypot(half_diff, off);
  }
}

enum class Verdict { Infeasible, Feasible };

// Evaluates the determinant-ratio objective for one candidate Q_{X^|Y}.
// With H = Q_{X^|Y} Q_{X,S|Y}^{-T}, H^T Q_{X^|Y}^+ H = Q_{X,S|Y}^{-1} Q_{X^|Y} Q_{X,S|Y}^{-T},
// so Q_{S|X^,Y} = Q_{S|Y} - s_gain Q_{X^|Y} s_gain^T.
template <int N>
Verdict evaluate(const Problem<N>& p, const Fixed<N>& reproduction, double reproduction_trace,
                 double& objective) {
  if (p.trace_x - reproduction_trace > p.delta + p.tol) return Verdict::Infeasible;
  const Fixed<N> sigma = p.q_x_given_y - reproduction;
  if (min_eig<N>(sigma) < -p.tol) return Verdict::Infeasible;
  const Fixed<N> posterior =
      p.q_s_given_y - p.s_gain * reproduction * p.s_gain.transpose();
  if (min_eig<N>(posterior) < -p.tol) return Verdict::Infeasible;
  const double det = posterior.determinant();
  objective = det > 0.0 ? 0.5 * (p.log_det_prior - std::log(det))
                        : std::numeric_limits<double>::infinity();
  return Verdict::Feasible;
}

template <int N>
Problem<N> make_problem(const ConditionalStats& stats, double delta, double psd_tol) {
  Problem<N> p;
  p.q_x_given_y = stats.q_x_given_y;
  p.q_s_given_y = stats.q_s_given_y;
  const Fixed<N> cross = stats.q_xs_given_y;
  // s_gain = Q_{S|Y} cross^{-1}  <=>  s_gain^T = cross^{-T} Q_{S|Y}.
  p.s_gain = cross.transpose().fullPivLu().solve(p.q_s_given_y).transpose();
  p.log_det_prior = std::log(p.q_s_given_y.determinant());
  p.trace_x = p.q_x_given_y.trace();
  p.delta = delta;
  p.tol = psd_tol;
  return p;
}

struct Best {
  double rate = std::numeric_limits<double>::infinity();
  Matrix argmin;
  std::int64_t evaluated = 0;
  std::int64_t feasible = 0;
};

// Candidates are Q_{X^|Y} = P^{1/2} B P^{1/2} with 0 <= B <= I, where
// P = Q_{X|Y} - Q_{X|S,Y} bounds every reproduction covariance of finite
// objective. B's eigenvalues are gridded on [0, 1].
Best search_scalar(const Problem<1>& p, const Fixed<1>& reach, double step) {
  Best best;
  const double target = p.trace_x - p.delta;
  const double scale = reach(0, 0);
  const double start = std::max(0.0, target / scale);
  for (std::int64_t k = 0;; ++k) {
    const double b = start + static_cast<double>(k) * step;
    if (b > 1.0 + 1e-12) break;
    Fixed<1> rep;
    rep(0, 0) = b * scale;
    double obj = 0.0;
    ++best.evaluated;
    if (evaluate<1>(p, rep, rep(0, 0), obj) == Verdict::Infeasible) break;
    ++best.feasible;
    if (obj < best.rate) {
      best.rate = obj;
      best.argmin = rep;
    }
  }
  return best;
}

Best search_pair(const Problem<2>& p, const Fixed<2>& reach, double step, int eigen_points,
                 int angle_points) {
  Best best;
  const double target = p.trace_x - p.delta;
  const Fixed<2> root = Eigen::SelfAdjointEigenSolver<Fixed<2>>(reach).operatorSqrt();
  for (int j = 0; j < angle_points; ++j) {
    const double theta = std::numbers::pi * static_cast<double>(j) / angle_points;
    Fixed<2> rot;
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    const Fixed<2> basis = root * rot;
    // trace(P^{1/2} R diag(a, b) R^T P^{1/2}) = a w_a + b w_b
    const double w_a = basis.col(0).squaredNorm();
    const double w_b = basis.col(1).squaredNorm();
    for (int i = 0; i < eigen_points; ++i) {
      const double a = static_cast<double>(i) * step;
      const double b_start = w_b > 0.0 ? std::max(0.0, (target - a * w_a) / w_b) : 0.0;
      for (std::int64_t k = 0;; ++k) {
        const double b = b_start + static_cast<double>(k) * step;
        if (b > 1.0 + 1e-12) break;
        const Fixed<2> rep = basis * Eigen::Vector2d(a, b).asDiagonal() * basis.transpose();
        double obj = 0.0;
        ++best.evaluated;
        // Growing b grows rep in PSD order, shrinking Q_{X|Y} - rep and
        // Q_{S|X^,Y}, so the first infeasible b ends this row.
        if (evaluate<2>(p, rep, a * w_a + b * w_b, obj) == Verdict::Infeasible) break;
        ++best.feasible;
        if (obj < best.rate) {
          best.rate = obj;
          best.argmin = rep;
        }
      }
    }
  }
  return best;
}

}  // namespace

double resolution_tolerance(const Resolution& resolution) {
  return 0.8 / static_cast<double>(std::max(1, resolution.eigen_points));
}

OracleResult brute_force_rdf(const GaussianSourceSpec& spec, double delta,
                             const Resolution& resolution) {
  const Dims& d = spec.dims();
  if (d.n_x != d.n_s || d.n_x < 1 || d.n_x > 2) {
    std::ostringstream os;
    os << "brute-force oracle supports n_x = n_s in {1, 2}, got n_x=" << d.n_x
       << " n_s=" << d.n_s;
    throw Error(ErrorCode::DimensionUnsupported, os.str());
  }
  if (resolution.eigen_points < 2 || (d.n_x == 2 && resolution.angle_points < 1)) {
    throw Error(ErrorCode::ResolutionTooCoarse, "grid needs at least 2 eigenvalue points");
  }
  if (!std::isfinite(delta) || delta < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "distortion must be finite and non-negative");
  }

  const ConditionalStats stats = conditional_stats(spec);
  const Tolerances& tol = spec.tolerances();
  Eigen::JacobiSVD<Matrix> cross_svd(stats.q_xs_given_y);
  const Vector& sv = cross_svd.singularValues();
  if (!(sv.minCoeff() > tol.inv * std::max(1.0, sv.maxCoeff()))) {
    throw Error(ErrorCode::HypothesisViolated, "Q_{X,S|Y} is not invertible");
  }
  if (!(min_eigenvalue(stats.q_s_given_y) > tol.psd)) {
    throw Error(ErrorCode::HypothesisViolated, "Q_{S|Y} is not positive definite");
  }

  const Matrix reach = symmetrized(stats.q_x_given_y - stats.q_x_given_sy);
  if (!(min_eigenvalue(reach) > tol.psd)) {
    throw Error(ErrorCode::HypothesisViolated, "Q_{X|Y} - Q_{X|S,Y} is not positive definite");
  }
  const double step = 1.0 / static_cast<double>(resolution.eigen_points - 1);

  Best best;
  if (d.n_x == 1) {
    best = search_scalar(make_problem<1>(stats, delta, tol.psd), reach, step);
  } else {
    best = search_pair(make_problem<2>(stats, delta, tol.psd), reach, step, resolution.eigen_points,
                       resolution.angle_points);
  }
  if (best.feasible < 10) {
    std::ostringstream os;
    os << "only " << best.feasible << " feasible grid points; increase the resolution";
    throw Error(ErrorCode::ResolutionTooCoarse, os.str());
  }

  OracleResult out;
  out.rate = best.rate;
  out.argmin = best.argmin;
  out.method = Method::Grid;
  out.evaluated_points = best.evaluated;
  out.feasible_points = best.feasible;
  out.eigen_step = step;
  out.angle_points = d.n_x == 2 ? resolution.angle_points : 0;
  return out;
}

WynerScalar wyner_scalar_rdf(double q_x_given_y, double delta) {
  if (!(q_x_given_y > 0.0) || !(delta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "wyner_scalar_rdf needs q > 0 and delta > 0");
  }
  WynerScalar w;
  w.rate = std::max(0.0, 0.5 * std::log(q_x_given_y / delta));
  w.h = std::max(0.0, (q_x_given_y - delta) / q_x_given_y);
  w.q_w = w.h * delta;
  return w;
}

ClassicalScalar classical_scalar_rdf(double q_x, double delta) {
  if (!(q_x >= 0.0) || !(delta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "classical_scalar_rdf needs q_x >= 0 and delta > 0");
  }
  ClassicalScalar c;
  c.rate = q_x > delta ? 0.5 * std::log(q_x / delta) : 0.0;
  c.reproduction_variance = std::max(0.0, q_x - delta);
  return c;
}

std::vector<DiscrepancyRow> remark3_discrepancy(double q_x_given_y,
                                                const std::vector<double>& deltas) {
  if (!(q_x_given_y > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "q must be positive");
  }
  std::vector<DiscrepancyRow> rows;
  rows.reserve(deltas.size());
  for (double delta : deltas) {
    if (!(delta > 0.0) || delta > q_x_given_y) {
      std::ostringstream os;
      os << "delta=" << delta << " outside (0, " << q_x_given_y << "]";
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
    DiscrepancyRow r;
    r.delta = delta;
    const double gap = q_x_given_y - delta;
    r.prior_noise_variance =
        gap > 0.0 ? delta / gap : std::numeric_limits<double>::infinity();
    r.prior_z_variance = q_x_given_y + r.prior_noise_variance;
    const WynerScalar w = wyner_scalar_rdf(q_x_given_y, delta);
    r.wyner_h = w.h;
    r.wyner_q_w = w.q_w;
    r.wyner_z_variance = w.h * w.h * q_x_given_y + w.q_w;
    r.classical_reproduction_variance = std::max(0.0, gap);
    r.divergent = r.prior_noise_variance > kDivergenceRatio * r.wyner_z_variance;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace condrdf::oracle
