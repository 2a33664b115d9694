#pragma once

// Error functionals tracked during training and test-time robustness.

#include "subgd/model.hpp"
#include "subgd/numkit.hpp"
#include "subgd/problem.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace subgd {

struct MetricRecord {
  long t = 0;
  double loss = 0;
  double recon_norm = 0;        // ||F Y - X||_F / ||X||_F
  double recon_restricted = 0;  // ||F A X_r - X_r||_F
  double off_sub = 0;           // ||F P_perp(range Y)||_op
  double oracle_dist = 0;       // ||F - W_oracle||_op
  std::vector<double> weight_frob;
  std::vector<std::pair<std::string, double>> extra;  // hook-provided columns
};

/// ||F Y - X||_F / ||X||_F. Throws on X = 0.
double recon_error(const Mat& F, const Mat& X, const Mat& Y);

/// ||F A X_r - X_r||_F, or divided by ||X_r||_F when `normalized`.
double recon_error_restricted(const Mat& F, const Mat& A, const Mat& X_r, bool normalized = false);

/// sigma_max(F P_perp(range Y)) by power iteration.
double off_subspace_error(const Mat& F, const Mat& Y, const PowerOptions& opts = {});

/// Same, with a precomputed complement projector. Returns the full power
/// iteration result so callers can warm-start the next evaluation.
PowerResult off_subspace_power(const Mat& F, const Mat& Pperp, const PowerOptions& opts = {});

using Predictor = std::function<Mat(const Mat&)>;

struct RobustnessRow {
  double sigma = 0;
  double mean_error = 0;      // mean ||x_hat - x||
  double std_error = 0;       // population std of ||x_hat - x||
  double mean_rel_error = 0;  // mean ||x_hat - x|| / ||x||
};

/// For every sigma draws `trials` unit-norm test signals and noise
/// eps ~ N(0, sigma^2 I_m); the same signals and standardized noise are reused
/// across the grid.
std::vector<RobustnessRow> test_robustness(const Predictor& predict, const ProblemInstance& inst,
                                           const std::vector<double>& sigma_grid, int trials,
                                           std::uint64_t seed);
std::vector<RobustnessRow> test_robustness(const Predictor& predict, const UosInstance& inst,
                                           const std::vector<double>& sigma_grid, int trials,
                                           std::uint64_t seed);
std::vector<RobustnessRow> test_robustness(const Mat& F, const ProblemInstance& inst,
                                           const std::vector<double>& sigma_grid, int trials,
                                           std::uint64_t seed);
std::vector<RobustnessRow> test_robustness(const DeepNet& net, const ProblemInstance& inst,
                                           const std::vector<double>& sigma_grid, int trials,
                                           std::uint64_t seed);

/// Heuristic weight decay balancing on-subspace bias against off-subspace
/// variance: sigma_min^2(X) sqrt(m) / (d_w^C3 kappa(X) sqrt(d sr(X))).
double lambda_recommendation(const ProblemInstance& inst, int d_w, double C3_guess);

}  // namespace subgd
