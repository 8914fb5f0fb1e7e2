#include "condrdf/waterfill.hpp"

#include "condrdf/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace condrdf {

namespace {

void require_positive_definite(const Matrix& m, double tol, const char* what) {
  const double lo = min_eigenvalue(m);
  if (!(lo > tol)) {
    std::ostringstream os;
    os << what << " is not positive definite: min eigenvalue " << lo;
    throw Error(ErrorCode::HypothesisViolated, os.str());
  }
}

WaterfillSolution zero_rate_solution(const SpectralSetup& setup, double delta) {
  const auto n = setup.d.size();
  WaterfillSolution sol;
  sol.delta = delta;
  sol.lambda = Vector::Zero(n);
  sol.rate = 0.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (setup.active[static_cast<std::size_t>(i)]) {
      lowest = std::min(lowest, 0.5 * setup.d(i) * setup.d(i));
    }
  }
  sol.xi = std::isfinite(lowest) ? lowest : 0.0;
  sol.sigma_delta = setup.q_x_given_y;
  sol.q_xhat_given_y = Matrix::Zero(n, n);
  sol.zero_rate = true;
  return sol;
}

}  // namespace

SpectralSetup spectral_setup(const GaussianSourceSpec& spec, const ConditionalStats& stats) {
  const Dims& dims = spec.dims();
  const Tolerances& tol = spec.tolerances();
  if (dims.n_x != dims.n_s) {
    std::ostringstream os;
    os << "water-filling requires n_x == n_s, got n_x=" << dims.n_x << " n_s=" << dims.n_s;
    throw Error(ErrorCode::HypothesisViolated, os.str());
  }
  Eigen::JacobiSVD<Matrix> cross_svd(stats.q_xs_given_y);
  const Vector& cross_sv = cross_svd.singularValues();
  if (!(cross_sv.minCoeff() > tol.inv * std::max(1.0, cross_sv.maxCoeff()))) {
    std::ostringstream os;
    os << "Q_{X,S|Y} is not invertible: smallest singular value " << cross_sv.minCoeff();
    throw Error(ErrorCode::HypothesisViolated, os.str());
  }
  require_positive_definite(stats.q_s_given_y, tol.psd, "Q_{S|Y}");
  require_positive_definite(stats.q_x_given_y, tol.psd, "Q_{X|Y}");
  require_positive_definite(stats.q_x_given_y - stats.q_x_given_sy, tol.psd,
                            "Q_{X|Y} - Q_{X|S,Y}");

  SpectralSetup setup;
  setup.q_x_given_y = stats.q_x_given_y;
  setup.trace_q_x_given_y = stats.q_x_given_y.trace();

  // K = Q_{S|Y}^{1/2} Q_{X,S|Y}^{-1}, so K^T = Q_{X,S|Y}^{-T} Q_{S|Y}^{1/2}.
  const Matrix root = symmetric_sqrt(stats.q_s_given_y, tol.psd);
  setup.whitened_cross =
      stats.q_xs_given_y.transpose().fullPivLu().solve(root).transpose();

  Eigen::JacobiSVD<Matrix> svd(setup.whitened_cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index n = dims.n_x;
  // Eigen orders singular values descending; reverse to ascending.
  setup.d.resize(n);
  setup.u.resize(n, n);
  setup.v.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = n - 1 - i;
    setup.d(i) = svd.singularValues()(src);
    setup.u.col(i) = svd.matrixV().col(src);
    setup.v.col(i) = svd.matrixU().col(src);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    setup.u.col(i).cwiseAbs().maxCoeff(&arg);
    if (setup.u(arg, i) < 0.0) {
      setup.u.col(i) *= -1.0;
      setup.v.col(i) *= -1.0;
    }
  }
  const double d_max = setup.d.size() > 0 ? setup.d.maxCoeff() : 0.0;
  setup.active.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    setup.active[static_cast<std::size_t>(i)] = setup.d(i) > tol.rank * d_max && setup.d(i) > 0.0;
  }
  return setup;
}

DistortionRange distortion_range(const SpectralSetup& setup) {
  DistortionRange r;
  r.upper = setup.trace_q_x_given_y;
  double capacity = 0.0;
  for (Eigen::Index i = 0; i < setup.d.size(); ++i) {
    if (setup.active[static_cast<std::size_t>(i)]) capacity += 1.0 / (setup.d(i) * setup.d(i));
  }
  r.lower = r.upper - capacity;
  return r;
}

double water_tolerance(const SpectralSetup& setup) {
  return 1e-10 * setup.trace_q_x_given_y;
}

double water_mass(const SpectralSetup& setup, double xi) {
  double mass = 0.0;
  for (Eigen::Index i = 0; i < setup.d.size(); ++i) {
    if (!setup.active[static_cast<std::size_t>(i)]) continue;
    const double d2 = setup.d(i) * setup.d(i);
    if (xi > 0.5 * d2) mass += 1.0 / d2 - 1.0 / (2.0 * xi);
  }
  return mass;
}

WaterfillSolution solve_waterfill(const SpectralSetup& setup, double delta) {
  if (!std::isfinite(delta)) {
    throw Error(ErrorCode::InvalidArgument, "distortion must be finite");
  }
  const DistortionRange range = distortion_range(setup);
  const double wtol = water_tolerance(setup);
  if (std::abs(delta - range.lower) <= wtol) {
    std::ostringstream os;
    os << "infinite rate at lower boundary: delta=" << delta << " equals " << range.lower;
    throw Error(ErrorCode::BelowRange, os.str());
  }
  if (delta < range.lower) {
    std::ostringstream os;
    os << "delta=" << delta << " is below the achievable range (lower end " << range.lower
       << ")";
    throw Error(ErrorCode::BelowRange, os.str());
  }
  if (delta >= range.upper) {
    WaterfillSolution sol = zero_rate_solution(setup, delta);
    sol.above_range = delta > range.upper;
    return sol;
  }

  const double target = range.upper - delta;
  const Eigen::Index n = setup.d.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!setup.active[static_cast<std::size_t>(i)]) continue;
    const double half = 0.5 * setup.d(i) * setup.d(i);
    lo = std::min(lo, half);
    hi = std::max(hi, half);
  }
  int iterations = 0;
  while (water_mass(setup, hi) < target) {
    hi *= 2.0;
    if (++iterations > 4 * kMaxBisectionIterations || !std::isfinite(hi)) {
      throw Error(ErrorCode::NotConverged, "could not bracket the water level");
    }
  }

  // Invariant: mass(lo) < target <= mass(hi).
  int bisections = 0;
  while (bisections < kMaxBisectionIterations) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    ++bisections;
    if (water_mass(setup, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(water_mass(setup, hi) - target) > wtol &&
      std::abs(water_mass(setup, lo) - target) > wtol) {
    throw Error(ErrorCode::NotConverged, "bisection on the water level did not converge");
  }

  // The active set at hi is final; solve its linear water equation exactly.
  double xi = hi;
  {
    int k = 0;
    double capacity = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!setup.active[static_cast<std::size_t>(i)]) continue;
      const double d2 = setup.d(i) * setup.d(i);
      if (hi > 0.5 * d2) {
        ++k;
        capacity += 1.0 / d2;
      }
    }
    if (k > 0 && capacity > target) {
      const double exact = static_cast<double>(k) / (2.0 * (capacity - target));
      bool same_set = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!setup.active[static_cast<std::size_t>(i)]) continue;
        const double half = 0.5 * setup.d(i) * setup.d(i);
        if ((hi > half) != (exact > half)) same_set = false;
      }
      if (same_set) xi = exact;
    }
  }

  WaterfillSolution sol;
  sol.delta = delta;
  sol.xi = xi;
  sol.iterations = bisections;
  sol.lambda = Vector::Zero(n);
  double rate = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!setup.active[static_cast<std::size_t>(i)]) continue;
    const double d2 = setup.d(i) * setup.d(i);
    if (xi > 0.5 * d2) {
      sol.lambda(i) = 1.0 / d2 - 1.0 / (2.0 * xi);
      // 1 - lambda_i d_i^2 = d_i^2 / (2 xi)
      rate += std::log(2.0 * xi / d2);
      ++sol.active_count;
    }
  }
  sol.rate = 0.5 * rate;
  sol.q_xhat_given_y = symmetrized(setup.u * sol.lambda.asDiagonal() * setup.u.transpose());
  sol.sigma_delta = symmetrized(setup.q_x_given_y - sol.q_xhat_given_y);
  return sol;
}

RdfCurve rdf_curve(const SpectralSetup& setup, const std::vector<double>& deltas) {
  RdfCurve curve;
  curve.reserve(deltas.size());
  for (double delta : deltas) {
    CurvePoint pt;
    pt.delta = delta;
    try {
      const WaterfillSolution sol = solve_waterfill(setup, delta);
      pt.rate = sol.rate;
      pt.xi = sol.xi;
      pt.active_count = sol.active_count;
      pt.feasible = true;
    } catch (const Error& e) {
      pt.feasible = false;
      pt.error = std::string(to_string(e.code()));
      // Below the range the water level diverges along with the rate.
      const double fill = e.code() == ErrorCode::BelowRange
                              ? std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::quiet_NaN();
      pt.rate = fill;
      pt.xi = fill;
    }
    curve.push_back(std::move(pt));
  }
  return curve;
}

}  // namespace condrdf
