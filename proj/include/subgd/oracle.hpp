#pragma once

// The minimum-Frobenius-norm interpolating map W_oracle = X Y^+ = R (A R)^+.

#include "subgd/numkit.hpp"
#include "subgd/problem.hpp"

#include <cstdint>

namespace subgd {

struct OracleSolution {
  Mat W;                              // d x m
  double interpolation_residual = 0;  // ||W Y - X||_F
  double frob_norm = 0;
  double closed_form_gap = 0;         // ||X Y^+ - R (A R)^+||_F / ||X Y^+||_F
};

struct OracleDistance {
  double opnorm_distance = 0;   // ||W - W_oracle||_op
  double residual_term = 0;     // ||W Y - X||_F / sigma_min(X)
  double offsubspace_term = 0;  // ||W P_perp(range Y)||_op
};

struct NoiseError {
  double mean_error = 0;
  double p95_error = 0;
};

/// Throws std::invalid_argument when rank(Y) < s, and std::runtime_error when
/// the two closed forms disagree by more than 1e-8 relative.
OracleSolution oracle_map(const ProblemInstance& inst);

OracleDistance oracle_distance(const Mat& W, const ProblemInstance& inst);
OracleDistance oracle_distance(const Mat& W, const ProblemInstance& inst, const OracleSolution& oracle);

/// Unit-norm test signals x in range(R), measured as y = A x + eps with
/// eps ~ N(0, sigma^2 I_m); statistics of ||W_oracle y - x|| over `trials`.
NoiseError oracle_noise_error(const ProblemInstance& inst, double sigma, int trials,
                              std::uint64_t seed);

/// Unit-norm test coefficients (s x trials) shared by the noise evaluations.
Mat unit_test_coefficients(Index s, Index trials, std::uint64_t seed);

}  // namespace subgd
