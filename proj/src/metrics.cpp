#include "subgd/metrics.hpp"

#include "subgd/oracle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace subgd {

double recon_error(const Mat& F, const Mat& X, const Mat& Y) {
  if (F.cols() != Y.rows() || F.rows() != X.rows() || X.cols() != Y.cols()) {
    throw std::invalid_argument("recon_error: shape mismatch");
  }
  const double nx = X.norm();
  if (nx == 0.0) throw std::invalid_argument("recon_error: X is zero");
  return (F * Y - X).norm() / nx;
}

double recon_error_restricted(const Mat& F, const Mat& A, const Mat& X_r, bool normalized) {
  if (F.cols() != A.rows() || A.cols() != X_r.rows() || F.rows() != X_r.rows()) {
    throw std::invalid_argument("recon_error_restricted: shape mismatch");
  }
  const double e = (F * (A * X_r) - X_r).norm();
  if (!normalized) return e;
  const double nx = X_r.norm();
  if (nx == 0.0) throw std::invalid_argument("recon_error_restricted: X_r is zero");
  return e / nx;
}

PowerResult off_subspace_power(const Mat& F, const Mat& Pperp, const PowerOptions& opts) {
  if (F.cols() != Pperp.rows()) throw std::invalid_argument("off_subspace_error: shape mismatch");
  return power_op_norm(F * Pperp, opts);
}

double off_subspace_error(const Mat& F, const Mat& Y, const PowerOptions& opts) {
  if (F.cols() != Y.rows()) throw std::invalid_argument("off_subspace_error: shape mismatch");
  return off_subspace_power(F, range_projectors(Y).Pperp, opts).sigma;
}

namespace {

std::vector<RobustnessRow> evaluate(const Predictor& predict, const Mat& A, const Mat& Xt,
                                    const std::vector<double>& sigma_grid, std::uint64_t seed) {
  if (sigma_grid.empty()) throw std::invalid_argument("test_robustness: empty sigma grid");
  const Index trials = Xt.cols();
  const Mat noise = gaussian(A.rows(), trials, 1.0, child_seed(seed, "test-noise"));
  const Mat clean = A * Xt;
  std::vector<RobustnessRow> rows;
  for (double sigma : sigma_grid) {
    if (sigma < 0.0) throw std::invalid_argument("test_robustness: sigma must be >= 0");
    const Mat Xhat = predict(clean + sigma * noise);
    if (Xhat.rows() != Xt.rows() || Xhat.cols() != trials) {
      throw std::invalid_argument("test_robustness: predictor output has wrong shape");
    }
    RobustnessRow row;
    row.sigma = sigma;
    double sum = 0, sumsq = 0, rel = 0;
    for (Index j = 0; j < trials; ++j) {
      const double e = (Xhat.col(j) - Xt.col(j)).norm();
      sum += e;
      sumsq += e * e;
      rel += e / Xt.col(j).norm();
    }
    const double nt = static_cast<double>(trials);
    row.mean_error = sum / nt;
    row.std_error = std::sqrt(std::max(0.0, sumsq / nt - row.mean_error * row.mean_error));
    row.mean_rel_error = rel / nt;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<RobustnessRow> test_robustness(const Predictor& predict, const ProblemInstance& inst,
                                           const std::vector<double>& sigma_grid, int trials,
                                           std::uint64_t seed) {
  const Mat Xt = inst.R * unit_test_coefficients(inst.s(), trials, child_seed(seed, "test-x"));
  return evaluate(predict, inst.A, Xt, sigma_grid, seed);
}

std::vector<RobustnessRow> test_robustness(const Predictor& predict, const UosInstance& inst,
                                           const std::vector<double>& sigma_grid, int trials,
                                           std::uint64_t seed) {
  const Mat Z = unit_test_coefficients(inst.s(), trials, child_seed(seed, "test-x"));
  std::mt19937_64 gen(child_seed(seed, "test-assignment"));
  std::uniform_int_distribution<int> pick(0, static_cast<int>(inst.bases.size()) - 1);
  Mat Xt(inst.d(), trials);
  for (int j = 0; j < trials; ++j) Xt.col(j) = inst.bases[static_cast<std::size_t>(pick(gen))] * Z.col(j);
  return evaluate(predict, inst.A, Xt, sigma_grid, seed);
}

std::vector<RobustnessRow> test_robustness(const Mat& F, const ProblemInstance& inst,
                                           const std::vector<double>& sigma_grid, int trials,
                                           std::uint64_t seed) {
  return test_robustness([&F](const Mat& Y) -> Mat { return F * Y; }, inst, sigma_grid, trials,
                         seed);
}

std::vector<RobustnessRow> test_robustness(const DeepNet& net, const ProblemInstance& inst,
                                           const std::vector<double>& sigma_grid, int trials,
                                           std::uint64_t seed) {
  return test_robustness([&net](const Mat& Y) -> Mat { return forward(net, Y); }, inst, sigma_grid,
                         trials, seed);
}

double lambda_recommendation(const ProblemInstance& inst, int d_w, double C3_guess) {
  if (!(C3_guess > 0.0)) throw std::invalid_argument("lambda_recommendation: C3 must be > 0");
  const SpectralStats st = spec_stats(inst.X);
  const double smin2 = st.sigma_min_nonzero * st.sigma_min_nonzero;
  return smin2 * std::sqrt(static_cast<double>(inst.m())) /
         (std::pow(static_cast<double>(d_w), C3_guess) * st.kappa *
          std::sqrt(static_cast<double>(inst.d()) * st.stable_rank));
}

}  // namespace subgd
