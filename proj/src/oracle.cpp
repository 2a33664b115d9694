#include "subgd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace subgd {

namespace {
constexpr double kClosedFormTol = 1e-8;
}

OracleSolution oracle_map(const ProblemInstance& inst) {
  if (numerical_rank(inst.Y) < inst.s()) {
    throw std::invalid_argument("oracle_map: measurements are rank deficient");
  }
  OracleSolution sol;
  sol.W = inst.X * pinv(inst.Y);
  const Mat alt = inst.R * pinv(inst.A * inst.R);
  sol.frob_norm = sol.W.norm();
  sol.closed_form_gap = (sol.W - alt).norm() / sol.frob_norm;
  if (sol.closed_form_gap > kClosedFormTol) {
    throw std::runtime_error("oracle_map: X Y^+ and R (A R)^+ disagree");
  }
  sol.interpolation_residual = (sol.W * inst.Y - inst.X).norm();
  return sol;
}

OracleDistance oracle_distance(const Mat& W, const ProblemInstance& inst,
                               const OracleSolution& oracle) {
  if (W.rows() != inst.d() || W.cols() != inst.m()) {
    throw std::invalid_argument("oracle_distance: W must be d x m");
  }
  OracleDistance out;
  out.opnorm_distance = singular_values(W - oracle.W)(0);
  out.residual_term = (W * inst.Y - inst.X).norm() / spec_stats(inst.X).sigma_min_nonzero;
  const Projectors pr = range_projectors(inst.Y);
  out.offsubspace_term = singular_values(W * pr.Pperp)(0);
  return out;
}

OracleDistance oracle_distance(const Mat& W, const ProblemInstance& inst) {
  return oracle_distance(W, inst, oracle_map(inst));
}

Mat unit_test_coefficients(Index s, Index trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("unit_test_coefficients: trials must be >= 1");
  Mat Z = gen_coefficients(s, std::max(s, trials), 1.0, seed).leftCols(trials);
  for (Index j = 0; j < Z.cols(); ++j) {
    const double nz = Z.col(j).norm();
    if (nz > 1e-12) {
      Z.col(j) /= nz;
    } else {
      Z.col(j).setZero();
      Z(j % s, j) = 1.0;
    }
  }
  return Z;
}

NoiseError oracle_noise_error(const ProblemInstance& inst, double sigma, int trials,
                              std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("oracle_noise_error: sigma must be >= 0");
  if (trials < 1) throw std::invalid_argument("oracle_noise_error: trials must be >= 1");
  const OracleSolution sol = oracle_map(inst);
  const Mat Xt = inst.R * unit_test_coefficients(inst.s(), trials, child_seed(seed, "test-x"));
  const Mat noise = sigma * gaussian(inst.m(), trials, 1.0, child_seed(seed, "test-noise"));
  const Mat err = sol.W * (inst.A * Xt + noise) - Xt;
  std::vector<double> e(static_cast<std::size_t>(trials));
  for (int j = 0; j < trials; ++j) e[static_cast<std::size_t>(j)] = err.col(j).norm();
  NoiseError out;
  out.mean_error = std::accumulate(e.begin(), e.end(), 0.0) / trials;
  std::sort(e.begin(), e.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.95 * trials)) - 1;
  out.p95_error = e[std::min(idx, e.size() - 1)];
  return out;
}

}  // namespace subgd
