#pragma once

// Independent ground truth for the water-filling solver: exhaustive grid
// minimization of the determinant-ratio rate at n_x = n_s <= 2, and the
// scalar closed forms the conditional RDF must reduce to.

#include "condrdf/gaussian_core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace condrdf::oracle {

enum class Method { Grid, ClosedForm };

struct Resolution {
  int eigen_points = 400;  // grid points per eigenvalue axis
  int angle_points = 180;  // rotation angles in [0, pi), n = 2 only
};

struct OracleResult {
  double rate = 0.0;          // nats, +inf if no finite feasible point
  Matrix argmin;              // minimizing Q_{X^|Y}
  Method method = Method::Grid;
  std::int64_t evaluated_points = 0;
  std::int64_t feasible_points = 0;
  double eigen_step = 0.0;    // grid step of a and b
  int angle_points = 0;
};

/// Minimizes 1/2 log det Q_{S|Y} / det Q_{S|X^,Y} over a grid of
/// Q_{X^|Y} = P^{1/2} R(theta) diag(a, b) R(theta)^T P^{1/2}, a, b in [0, 1],
/// with P = Q_{X|Y} - Q_{X|S,Y} (the objective is infinite outside Q_{X^|Y} <= P),
/// subject to 0 <= Q_{X^|Y} <= Q_{X|Y}, trace(Q_{X|Y} - Q_{X^|Y}) <= delta and
/// Q_{S|X^,Y} >= 0. The grid for the second eigenvalue (the only one for
/// n = 1) starts on the distortion boundary so the constraint surface is
/// sampled exactly. Ties break on the lexicographically first grid index.
/// Throws DimensionUnsupported, HypothesisViolated or ResolutionTooCoarse.
OracleResult brute_force_rdf(const GaussianSourceSpec& spec, double delta,
                             const Resolution& resolution = {});

/// Rate-agreement tolerance implied by a grid resolution (2e-3 at the default).
double resolution_tolerance(const Resolution& resolution);

struct WynerScalar {
  double rate = 0.0;
  double h = 0.0;
  double q_w = 0.0;
};

/// Side information at the decoder with X = S: rate max(0, 1/2 ln(q/delta)),
/// channel Z = H X + W with H = (q - delta)/q and Q_W = H delta.
WynerScalar wyner_scalar_rdf(double q_x_given_y, double delta);

struct ClassicalScalar {
  double rate = 0.0;
  double reproduction_variance = 0.0;
};

ClassicalScalar classical_scalar_rdf(double q_x, double delta);

struct DiscrepancyRow {
  double delta = 0.0;
  double prior_noise_variance = 0.0;  // delta / (q - delta), +inf at delta = q
  double prior_z_variance = 0.0;      // q + prior_noise_variance
  double wyner_h = 0.0;
  double wyner_q_w = 0.0;
  double wyner_z_variance = 0.0;      // H^2 q + H delta
  double classical_reproduction_variance = 0.0;  // max(0, q - delta)
  bool divergent = false;             // prior noise > 1e3 * Wyner Z variance
};

inline constexpr double kDivergenceRatio = 1e3;

/// Compares the additive-noise auxiliary Z = X + N_3, N_3 ~ N(0, delta/(q - delta)),
/// against the Wyner channel for each delta in (0, q]. Conditional variances
/// are given Y, with q = Q_{X|Y}; with trivial Y the same columns give the
/// classical comparison.
std::vector<DiscrepancyRow> remark3_discrepancy(double q_x_given_y,
                                                const std::vector<double>& deltas);

}  // namespace condrdf::oracle
