#pragma once

// Water-filling solution of the conditional RDF.
//
// With K = Q_{S|Y}^{1/2} Q_{X,S|Y}^{-1} = V diag(d) U^T, the reproduction
// covariance Q_{X^|Y} = U diag(lambda) U^T and the rate separates into
// 1/2 sum log 1/(1 - lambda_i d_i^2), minimized subject to
// sum lambda_i = trace(Q_{X|Y}) - Delta by a common water level xi:
//   lambda_i = 1/d_i^2 - 1/(2 xi)  if xi > d_i^2 / 2, else 0.

#include "condrdf/gaussian_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace condrdf {

struct SpectralSetup {
  Matrix whitened_cross;  // K, n_x x n_x
  Matrix u;               // right singular vectors, columns follow d
  Matrix v;               // left singular vectors
  Vector d;               // singular values, ascending
  std::vector<bool> active;
  Matrix q_x_given_y;
  double trace_q_x_given_y = 0.0;
};

struct DistortionRange {
  double lower = 0.0;  // rate is infinite here
  double upper = 0.0;  // rate reaches zero here
};

struct WaterfillSolution {
  Vector lambda;  // paired with SpectralSetup::d, so non-increasing
  double xi = 0.0;
  double rate = 0.0;  // nats
  double delta = 0.0;
  Matrix sigma_delta;
  Matrix q_xhat_given_y;
  int active_count = 0;
  int iterations = 0;
  bool zero_rate = false;    // delta >= upper end of range
  bool above_range = false;  // delta > upper end of range
};

inline constexpr int kMaxBisectionIterations = 200;

/// Throws HypothesisViolated when n_x != n_s, Q_{X,S|Y} is singular,
/// Q_{S|Y} or Q_{X|Y} is not positive definite, or Q_{X|Y} - Q_{X|S,Y}
/// is not positive definite.
SpectralSetup spectral_setup(const GaussianSourceSpec& spec, const ConditionalStats& stats);

DistortionRange distortion_range(const SpectralSetup& setup);

/// 1e-10 * trace(Q_{X|Y}).
double water_tolerance(const SpectralSetup& setup);

/// Sum over active components of max(0, 1/d_i^2 - 1/(2 xi)).
double water_mass(const SpectralSetup& setup, double xi);

/// Throws Error{BelowRange} for delta at or below the lower end of the range
/// and Error{NotConverged} if bisection exhausts kMaxBisectionIterations.
WaterfillSolution solve_waterfill(const SpectralSetup& setup, double delta);

struct CurvePoint {
  double delta = 0.0;
  double rate = 0.0;
  double xi = 0.0;
  int active_count = 0;
  bool feasible = false;
  std::string error;  // empty when feasible
};

using RdfCurve = std::vector<CurvePoint>;

/// Solves every grid point independently; per-point failures are recorded
/// and the sweep continues.
RdfCurve rdf_curve(const SpectralSetup& setup, const std::vector<double>& deltas);

}  // namespace condrdf
