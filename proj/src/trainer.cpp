#include "subgd/trainer.hpp"

#include "subgd/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace subgd {

void HyperParams::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be finite and >= 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (!(C1 > 0.0)) throw std::invalid_argument("C1 must be > 0");
  if (log_stride < 1) throw std::invalid_argument("log_stride must be >= 1");
}

std::string to_string(TrainStatus s) { return s == TrainStatus::ok ? "ok" : "diverged"; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double decay_weight(const DeepNet& net, int l, double lambda) {
  return net.mode() == Param::normalized ? lambda / net.dims().fan_in(l) : lambda;
}

double regularizer(const DeepNet& net, double lambda) {
  double r = 0.0;
  for (int l = 1; l <= net.depth(); ++l) r += decay_weight(net, l, lambda) * net.W(l).squaredNorm();
  return 0.5 * r;
}

void check_data(const DeepNet& net, const Mat& X, const Mat& Y) {
  if (Y.rows() != net.dims().m || X.rows() != net.dims().d || X.cols() != Y.cols()) {
    throw std::invalid_argument("training data shape does not match the network");
  }
}

struct Pass {
  Mat residual;  // Phi = c W_{L:1} Y - X (through the ReLU when present)
  double loss = 0.0;
  std::vector<Mat> grads;
};

// Forward pass, and the backward pass when `with_grads`.
Pass backprop(const DeepNet& net, const Mat& X, const Mat& Y, double lambda, bool with_grads) {
  const int L = net.depth();
  const double c = net.output_scale();
  std::vector<Mat> acts(static_cast<std::size_t>(L));
  acts[0] = Y;
  Mat pre;
  for (int l = 1; l < L; ++l) {
    acts[static_cast<std::size_t>(l)] = net.W(l) * acts[static_cast<std::size_t>(l - 1)];
  }
  if (net.relu()) {
    pre = acts[static_cast<std::size_t>(L - 1)];
    acts[static_cast<std::size_t>(L - 1)] = pre.cwiseMax(0.0);
  }
  Pass p;
  p.residual = c * (net.W(L) * acts[static_cast<std::size_t>(L - 1)]) - X;
  p.loss = 0.5 * p.residual.squaredNorm() + regularizer(net, lambda);
  if (!with_grads) return p;

  p.grads.resize(static_cast<std::size_t>(L));
  Mat delta = c * p.residual;
  for (int l = L; l >= 1; --l) {
    const auto k = static_cast<std::size_t>(l - 1);
    Mat g = delta * acts[k].transpose();
    g += decay_weight(net, l, lambda) * net.W(l);
    if (l > 1) {
      Mat next = net.W(l).transpose() * delta;
      if (net.relu() && l == L) next = next.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
      delta = std::move(next);
    }
    p.grads[k] = std::move(g);
  }
  return p;
}

double op_norm(const Mat& M, bool exact, PowerOptions& opts) {
  if (exact) {
    const SvdResult f = econ_svd(M);
    opts.start = f.v.col(0);
    return f.s(0);
  }
  PowerResult r = power_op_norm(M, opts);
  opts.start = std::move(r.right);
  return r.sigma;
}

}  // namespace

TrainContext make_context(const Mat& X, const Mat& Y) {
  if (X.cols() != Y.cols()) throw std::invalid_argument("make_context: X and Y sample counts differ");
  TrainContext ctx;
  ctx.X = X;
  ctx.Y = Y;
  return ctx;
}

TrainContext make_context(const ProblemInstance& inst, Index rank_r) {
  TrainContext ctx = make_context(inst.X, inst.Y);
  ctx.A = inst.A;
  if (rank_r != 0 && rank_r != inst.s()) {
    ctx.X_r = split_lowrank(inst.X, rank_r).X_r;
    ctx.AX_r = inst.A * *ctx.X_r;
  }
  ctx.Pperp = range_projectors(inst.Y).Pperp;
  ctx.W_oracle = oracle_map(inst).W;
  return ctx;
}

double loss(const DeepNet& net, const Mat& X, const Mat& Y, double lambda) {
  check_data(net, X, Y);
  return backprop(net, X, Y, lambda, false).loss;
}

std::vector<Mat> gradients(const DeepNet& net, const Mat& X, const Mat& Y, double lambda) {
  check_data(net, X, Y);
  return backprop(net, X, Y, lambda, true).grads;
}

std::vector<Mat> relu_gradients(const DeepNet& net, const Mat& X, const Mat& Y, double lambda) {
  if (!net.relu()) throw std::invalid_argument("relu_gradients: network has no ReLU layer");
  return gradients(net, X, Y, lambda);
}

TrainTrace train(DeepNet& net, const TrainContext& ctx, const HyperParams& hp,
                 const TrainOptions& opts) {
  hp.validate();
  check_data(net, ctx.X, ctx.Y);
  const auto t0 = std::chrono::steady_clock::now();

  const Mat& Xr = ctx.X_r ? *ctx.X_r : ctx.X;
  const double x_norm = ctx.X.norm();
  const double tau_threshold = hp.C1 * hp.gamma * Xr.norm() / net.depth();
  PowerOptions off_power = opts.power;
  PowerOptions oracle_power = opts.power;

  TrainTrace trace;
  for (long t = 0;; ++t) {
    const bool last = t == hp.T;
    const bool record = t == 0 || last || t % hp.log_stride == 0;
    Pass pass = backprop(net, ctx.X, ctx.Y, hp.lambda, !last);

    if (!std::isfinite(pass.loss) || pass.loss > opts.divergence_threshold) {
      trace.status = TrainStatus::diverged;
      std::ostringstream msg;
      msg << "loss " << pass.loss << " at t=" << t
          << " exceeds the divergence threshold; the step size is too large";
      trace.diagnostic = msg.str();
      break;
    }

    double restricted = pass.residual.norm();
    if (ctx.X_r && (record || !trace.tau_detected)) {
      restricted = (forward(net, *ctx.AX_r) - *ctx.X_r).norm();
    }
    if (!trace.tau_detected && restricted <= tau_threshold) trace.tau_detected = t;

    if (record) {
      MetricRecord rec;
      rec.t = t;
      rec.loss = pass.loss;
      rec.recon_norm = pass.residual.norm() / x_norm;
      rec.recon_restricted = restricted;
      rec.off_sub = kNaN;
      rec.oracle_dist = kNaN;
      if (!net.relu()) {
        const bool exact = opts.exact_endpoints && (t == 0 || last);
        const Mat F = end_to_end(net).F;
        if (ctx.Pperp) rec.off_sub = op_norm(F * *ctx.Pperp, exact, off_power);
        if (ctx.W_oracle) rec.oracle_dist = op_norm(F - *ctx.W_oracle, exact, oracle_power);
      } else {
        rec.recon_restricted = ctx.X_r ? restricted : kNaN;
      }
      for (int l = 1; l <= net.depth(); ++l) rec.weight_frob.push_back(net.W(l).norm());
      for (const auto& hook : opts.hooks) hook(net, rec);
      trace.records.push_back(std::move(rec));
    }
    if (last) break;

    for (int l = 1; l <= net.depth(); ++l) {
      net.W(l).noalias() -= hp.eta * pass.grads[static_cast<std::size_t>(l - 1)];
    }
    trace.steps = t + 1;
  }
  trace.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

TrainTrace train(DeepNet& net, const ProblemInstance& inst, const HyperParams& hp,
                 const TrainOptions& opts) {
  return train(net, make_context(inst, opts.rank_r), hp, opts);
}

double grad_check(const DeepNet& net, const Mat& X, const Mat& Y, double lambda, double epsilon) {
  const std::vector<Mat> analytic = gradients(net, X, Y, lambda);
  double gmax = 0.0;
  for (const Mat& g : analytic) gmax = std::max(gmax, g.cwiseAbs().maxCoeff());
  const double floor = std::max(1e-4 * gmax, std::numeric_limits<double>::min());

  DeepNet probe = net;
  double worst = 0.0;
  for (int l = 1; l <= net.depth(); ++l) {
    Mat& w = probe.W(l);
    const Mat& g = analytic[static_cast<std::size_t>(l - 1)];
    for (Index j = 0; j < w.cols(); ++j) {
      for (Index i = 0; i < w.rows(); ++i) {
        const double orig = w(i, j);
        w(i, j) = orig + epsilon;
        const double up = loss(probe, X, Y, lambda);
        w(i, j) = orig - epsilon;
        const double down = loss(probe, X, Y, lambda);
        w(i, j) = orig;
        const double fd = (up - down) / (2.0 * epsilon);
        const double denom = std::max({std::abs(g(i, j)), std::abs(fd), floor});
        worst = std::max(worst, std::abs(g(i, j) - fd) / denom);
      }
    }
  }
  return worst;
}

double grad_check(const DeepNet& net, const ProblemInstance& inst, double lambda, double epsilon) {
  return grad_check(net, inst.X, inst.Y, lambda, epsilon);
}

double gamma_cap(Index d, Index m, int L) {
  return std::min(1.0, 1e-7 * std::sqrt(static_cast<double>(d)) /
                           (L * std::sqrt(static_cast<double>(m))));
}

double gamma_from_lambda(double lambda, double sigma_min_r, Index m, Index d) {
  return lambda / (sigma_min_r * sigma_min_r *
                   std::sqrt(static_cast<double>(m) / static_cast<double>(d)));
}

double tau_upper_bound(Index m, double eta, int L, double sigma_min_r, double lambda) {
  if (lambda <= 0.0) return std::numeric_limits<double>::infinity();
  const double s2 = sigma_min_r * sigma_min_r;
  const double lg = std::log(L * s2 / lambda);
  return std::max(0.0, 64.0 * static_cast<double>(m) / (eta * L * s2) * lg);
}

TheoryReport derive_hyperparams(const ProblemInstance& inst, int L, int d_w, double gamma,
                                Index rank_r) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (L < 2) throw std::invalid_argument("L must be >= 2");
  const double m = static_cast<double>(inst.m());
  const double d = static_cast<double>(inst.d());
  const SpectralStats sx = spec_stats(inst.X);
  const double sigma_min_r =
      rank_r == 0 || rank_r == inst.s()
          ? sx.sigma_min_nonzero
          : spec_stats(split_lowrank(inst.X, rank_r).X_r).sigma_min_nonzero;

  TheoryReport rep;
  rep.gamma = gamma;
  rep.eta_star = m / (L * sx.op_norm * sx.op_norm);
  rep.lambda_star = gamma * sx.sigma_min_nonzero * sx.sigma_min_nonzero * std::sqrt(m / d);
  rep.T_star = std::ceil(2.0 * L * sx.kappa * sx.kappa * std::log(static_cast<double>(d_w)) /
                         gamma * std::sqrt(d / m));
  rep.tau_ub = tau_upper_bound(inst.m(), rep.eta_star, L, sigma_min_r, rep.lambda_star);
  rep.gamma_cap = gamma_cap(inst.d(), inst.m(), L);
  rep.width_ratio = d_w / (d * sx.stable_rank);
  rep.width_cprod_ok = static_cast<double>(d_w) >= static_cast<double>(L) * L * m;
  std::ostringstream note;
  note << "d_w/(d*sr(X)) = " << rep.width_ratio
       << "; the width condition also carries an unspecified poly(L, kappa) factor (kappa = "
       << sx.kappa << ")" << (rep.width_cprod_ok ? "" : "; d_w < L^2 m");
  rep.width_note = note.str();
  return rep;
}

double cprod(double eta, double lambda, const NetDims& dims) {
  double p = 1.0;
  for (int l = 1; l <= dims.L; ++l) p *= 1.0 - eta * lambda / dims.fan_in(l);
  return p;
}

double cprod_i(double eta, double lambda, const NetDims& dims, int i) {
  double p = 1.0;
  for (int l = 1; l <= dims.L; ++l) {
    if (l != i) p *= 1.0 - eta * lambda / dims.fan_in(l);
  }
  return p;
}

}  // namespace subgd
