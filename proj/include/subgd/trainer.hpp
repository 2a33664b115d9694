#pragma once

// Full-batch gradient descent with weight decay on
//
//   raw:        1/2 ||W_{L:1} Y - X||_F^2 + lambda/2 sum_l ||W_l||_F^2
//   normalized: 1/2 ||c W_{L:1} Y - X||_F^2 + lambda/2 sum_l ||W_l||_F^2 / d_l
//
// with c = d_w^{-(L-1)/2} m^{-1/2} and d_l the fan-in of layer l.

#include "subgd/metrics.hpp"
#include "subgd/model.hpp"
#include "subgd/numkit.hpp"
#include "subgd/problem.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace subgd {

struct HyperParams {
  double eta = 0.0;
  double lambda = 0.0;
  double gamma = 1.0;   // accuracy parameter, only used for the tau threshold
  long T = 1;
  double C1 = 1.0;      // tau threshold constant
  long log_stride = 1;
  double prefactor = 1.0;  // eta = prefactor * m / (L sigma_max^2(X)) when derived

  void validate() const;
};

enum class TrainStatus { ok, diverged };

std::string to_string(TrainStatus s);

struct TrainTrace {
  std::vector<MetricRecord> records;  // t = 0, every log_stride, and t = T
  std::optional<long> tau_detected;
  double wall_time = 0.0;  // seconds
  TrainStatus status = TrainStatus::ok;
  std::string diagnostic;
  long steps = 0;  // updates actually applied
};

/// Called once per record; may append named columns to `rec.extra`.
using TrainHook = std::function<void(const DeepNet& net, MetricRecord& rec)>;

struct TrainOptions {
  /// Rank of the well-conditioned part X_r used for the restricted error and
  /// tau; 0 means r = s (X_r = X).
  Index rank_r = 0;
  /// Power iteration settings for operator norms between the endpoints.
  PowerOptions power{};
  /// Exact SVD for operator-norm metrics at t = 0 and at the final record.
  bool exact_endpoints = true;
  /// Loss above this (or non-finite) aborts the run.
  double divergence_threshold = 1e12;
  std::vector<TrainHook> hooks;
};

/// Everything the loop needs besides the network. Fields beyond X and Y are
/// optional; missing ones turn the matching metric columns into NaN.
struct TrainContext {
  Mat X, Y;
  std::optional<Mat> A;
  std::optional<Mat> X_r;    // absent: restricted error uses (X, Y)
  std::optional<Mat> AX_r;
  std::optional<Mat> Pperp;  // complement projector of range(Y)
  std::optional<Mat> W_oracle;
};

TrainContext make_context(const ProblemInstance& inst, Index rank_r = 0);
TrainContext make_context(const Mat& X, const Mat& Y);

double loss(const DeepNet& net, const Mat& X, const Mat& Y, double lambda);

/// Closed-form gradients, one per layer. ReLU nets are routed to
/// relu_gradients.
std::vector<Mat> gradients(const DeepNet& net, const Mat& X, const Mat& Y, double lambda);

/// Chain rule through the penultimate ReLU with relu'(0) = 0.
std::vector<Mat> relu_gradients(const DeepNet& net, const Mat& X, const Mat& Y, double lambda);

/// Runs hp.T in-place updates W_l <- W_l - eta * grad_l.
TrainTrace train(DeepNet& net, const TrainContext& ctx, const HyperParams& hp,
                 const TrainOptions& opts = {});
TrainTrace train(DeepNet& net, const ProblemInstance& inst, const HyperParams& hp,
                 const TrainOptions& opts = {});

/// Central-difference check of the analytic gradients. Returns the largest
/// entrywise |g - g_fd| / max(|g|, |g_fd|, 1e-4 * max|g|).
double grad_check(const DeepNet& net, const Mat& X, const Mat& Y, double lambda,
                  double epsilon = 1e-5);
double grad_check(const DeepNet& net, const ProblemInstance& inst, double lambda,
                  double epsilon = 1e-5);

struct TheoryReport {
  double eta_star = 0;
  double lambda_star = 0;
  double gamma = 0;
  double T_star = 0;
  double tau_ub = 0;
  double gamma_cap = 0;
  double width_ratio = 0;  // d_w / (d * sr(X))
  bool width_cprod_ok = false;  // d_w >= L^2 m
  std::string width_note;
};

/// Step size, weight decay, horizon and first-phase bound for accuracy gamma.
TheoryReport derive_hyperparams(const ProblemInstance& inst, int L, int d_w, double gamma,
                                Index rank_r = 0);

/// min(1, 1e-7 sqrt(d) / (L sqrt(m))).
double gamma_cap(Index d, Index m, int L);

/// lambda = gamma sigma_min^2(X_r) sqrt(m/d), solved for gamma.
double gamma_from_lambda(double lambda, double sigma_min_r, Index m, Index d);

/// 64 m / (eta L s^2) * log(L s^2 / lambda) with s = sigma_min(X_r);
/// +infinity when lambda = 0.
double tau_upper_bound(Index m, double eta, int L, double sigma_min_r, double lambda);

/// prod_l (1 - eta lambda / d_l).
double cprod(double eta, double lambda, const NetDims& dims);
/// Same product without layer i (1-based).
double cprod_i(double eta, double lambda, const NetDims& dims, int i);

}  // namespace subgd
