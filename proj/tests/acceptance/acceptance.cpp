// One PASS/FAIL line per acceptance criterion. Pass criterion numbers as
// arguments to run a subset; the exit code is the number of failures.
#include "subgd/config.hpp"
#include "subgd/experiment.hpp"
#include "subgd/oracle.hpp"
#include "subgd/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace subgd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / b.norm(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ExperimentConfig single(const std::string& name) {
  ExperimentConfig c = preset(name, "desk");
  c.sweep_axis.clear();
  c.sweep_values.clear();
  return c;
}

// 1. analytic gradients against central differences
Outcome gradients_match() {
  const ProblemInstance inst = generate_instance(4, 5, 2, 6, 2.0, 1);
  const NetDims dims{3, 4, 6, 5};
  const double lin = grad_check(init_standard_normal(dims, 2), inst, 1e-2);
  // step the inputs away from the ReLU kinks before differencing
  ProblemInstance shifted = inst;
  DeepNet relu = init_fanin(dims, 3, true);
  for (std::uint64_t k = 0; k < 100; ++k) {
    const Mat pre = relu.W(2) * relu.W(1) * shifted.Y;
    if (pre.cwiseAbs().minCoeff() > 1e-3) break;
    shifted.Y = inst.Y + 1e-2 * gaussian(4, 6, 1.0, 100 + k);
  }
  const double rl = grad_check(relu, shifted.X, shifted.Y, 1e-2);
  return {lin < 1e-6 && rl < 1e-5, fmt("linear max rel err %.2e (< 1e-6), relu %.2e (< 1e-5)", lin, rl)};
}

// 2. W_1(t) Pperp = (1 - eta lambda / d_1)^t W_1(0) Pperp
Outcome off_subspace_recursion() {
  const ExperimentConfig c = single("stepsize-sweep");
  const ProblemInstance inst = generate_instance(c.m, c.d, c.s, c.n, c.kappa, 5);
  const Mat Pperp = range_projectors(inst.Y).Pperp;
  const double smax = spec_stats(inst.X).op_norm;
  double worst = 0.0;
  for (double lambda : {1e-3, 0.0}) {
    DeepNet net = init_standard_normal(NetDims{c.L, c.m, c.d_w, c.d}, 6);
    const Mat B0 = net.W(1) * Pperp;
    const double w1 = net.W(1).norm();
    HyperParams hp;
    hp.eta = c.m / (c.L * smax * smax);
    hp.lambda = lambda;
    hp.T = 100;
    hp.log_stride = 1;
    const double factor = 1.0 - hp.eta * lambda / c.m;
    TrainOptions opts;
    opts.hooks.push_back([&](const DeepNet& n, MetricRecord& rec) {
      const Mat expect = std::pow(factor, static_cast<double>(rec.t)) * B0;
      worst = std::max(worst, (n.W(1) * Pperp - expect).norm() / w1);
    });
    train(net, make_context(inst.X, inst.Y), hp, opts);
  }
  return {worst <= 1e-9, fmt("max deviation / ||W_1(0)||_F = %.2e over 100 steps, lambda in {1e-3, 0}", worst)};
}

// 3. minimum-norm interpolation certificates
Outcome oracle_certificates() {
  const ProblemInstance inst = generate_instance(128, 256, 16, 200, 2.0, 7);
  const OracleSolution sol = oracle_map(inst);
  const double interp = rel(sol.W * inst.Y, inst.X);
  const double gap = rel(inst.R * pinv(inst.A * inst.R), inst.X * pinv(inst.Y));
  const Mat Pperp = range_projectors(inst.Y).Pperp;
  int beaten = 0;
  for (int k = 0; k < 100; ++k) {
    const Mat W = sol.W + gaussian(inst.d(), inst.m(), 1.0 / (k + 1), 500 + k) * Pperp;
    if (W.norm() < sol.frob_norm) ++beaten;
  }
  const Index rank = numerical_rank(sol.W);
  return {interp <= 1e-8 && gap <= 1e-8 && beaten == 0 && rank == 16,
          fmt("interp %.2e, closed-form gap %.2e, smaller feasible %g/100, rank %g (s = 16)", interp, gap,
              beaten, static_cast<double>(rank))};
}

// 4. training on (X, Y) and on the reduced n = s dataset
Outcome sample_reduction() {
  const ProblemInstance inst = generate_instance(32, 64, 4, 50, 2.0, 8);
  const ProblemInstance red = reduce_samples(inst);
  DeepNet a = init_standard_normal(NetDims{3, 32, 128, 64}, 9), b = a;
  HyperParams hp;
  const double smax = spec_stats(inst.X).op_norm;
  hp.eta = 0.5 * 32 / (3 * smax * smax);
  hp.lambda = 1e-3;
  hp.T = 200;
  const TrainTrace ta = train(a, make_context(inst.X, inst.Y), hp);
  const TrainTrace tb = train(b, make_context(red.X, red.Y), hp);
  double worst = ta.records.size() == tb.records.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(ta.records.size(), tb.records.size()); ++i) {
    worst = std::max(worst, std::abs(ta.records[i].loss - tb.records[i].loss) / ta.records[i].loss);
  }
  return {worst <= 1e-8 && ta.records.size() == 201,
          fmt("max rel loss gap %.2e over 200 iterations, n = 50 vs n = %g", worst, static_cast<double>(red.n()))};
}

// 5. decrease, rebound, plateau
Outcome two_phase() {
  ExperimentConfig c = single("stepsize-sweep");
  c.prefactor = 1.0;
  const RunResult r = run_single(c, 0);
  const auto& rec = r.trace.records;
  if (r.trace.status != TrainStatus::ok) return {false, "run diverged: " + r.trace.diagnostic};

  // (a) monotone until the first record below 0.05
  std::size_t first = rec.size();
  long bad_t = -1;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (i > 0 && rec[i].recon_norm > rec[i - 1].recon_norm + 1e-12 && bad_t < 0) bad_t = rec[i].t;
    if (rec[i].recon_norm < 0.05) {
      first = i;
      break;
    }
  }
  const bool a = first < rec.size() && bad_t < 0;

  // (b) rebound after the minimum, plateau near gamma
  std::size_t imin = 0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (rec[i].recon_norm < rec[imin].recon_norm) imin = i;
  }
  const std::size_t tail = rec.size() - std::max<std::size_t>(1, rec.size() / 10);
  double plateau = 0.0;
  for (std::size_t i = tail; i < rec.size(); ++i) plateau += rec[i].recon_norm;
  plateau /= static_cast<double>(rec.size() - tail);
  const bool rebound = rec.back().recon_norm > rec[imin].recon_norm * (1 + 1e-3) && imin + 1 < rec.size();
  const bool b = rebound && plateau <= 100 * r.gamma && plateau >= r.gamma / 100;

  // (c) the minimum precedes tau_ub
  const double t_rebound = static_cast<double>(rec[imin].t);
  const bool cc = t_rebound <= r.tau_ub;

  // (d) off-subspace decay
  double max_ratio = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) max_ratio = std::max(max_ratio, rec[i].off_sub / rec[i - 1].off_sub);
  const double shrink = rec.back().off_sub / rec.front().off_sub;
  const bool d = shrink < 0.2 && max_ratio <= 1.01;

  std::ostringstream os;
  os << "(a) " << (a ? "ok" : "FAIL");
  if (bad_t >= 0) os << " [increase at t=" << bad_t << " before reaching 0.05]";
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "; (b) %s min %.3g at t=%ld, plateau %.3g, gamma %.3g; (c) %s rebound t=%ld <= tau_ub %.1f; "
                "(d) %s off_sub final/initial %.3g, max step ratio %.4f",
                b ? "ok" : "FAIL", rec[imin].recon_norm, rec[imin].t, plateau, r.gamma, cc ? "ok" : "FAIL",
                rec[imin].t, r.tau_ub, d ? "ok" : "FAIL", shrink, max_ratio);
  os << buf;
  return {a && b && cc && d, os.str()};
}

// 6. weight decay improves robustness, too much hurts
Outcome robustness_u_shape() {
  ExperimentConfig c = single("robustness-linear");
  c.sigma_grid = {0.1};
  std::vector<double> errs;
  const std::vector<double> lambdas = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
  for (double lambda : lambdas) {
    c.lambda = lambda;
    const RunResult r = run_single(c, 0);
    errs.push_back(r.robustness.empty() ? INFINITY : r.robustness[0].mean_error);
  }
  const auto best = std::min_element(errs.begin() + 1, errs.end());
  const bool ok = *best <= 0.5 * errs[0] && errs.back() > *best;
  std::ostringstream os;
  os << "mean error at sigma = 0.1:";
  for (std::size_t i = 0; i < errs.size(); ++i) os << fmt(" lambda=%g: %.4f", lambdas[i], errs[i]);
  os << fmt("; best nonzero / lambda=0 = %.3f (<= 0.5); largest lambda worse than best: ", *best / errs[0])
     << (errs.back() > *best ? "yes" : "no");
  return {ok, os.str()};
}

// 7. oracle error under measurement noise
Outcome oracle_noise() {
  const ProblemInstance inst = generate_instance(128, 256, 16, 200, 1.0, 11);
  std::vector<double> per_sigma;
  bool within = true;
  std::ostringstream os;
  for (double sigma : {0.05, 0.1, 0.2}) {
    const NoiseError e = oracle_noise_error(inst, sigma, 200, 12);
    within = within && e.mean_error <= 2 * sigma * 4.0;
    per_sigma.push_back(e.mean_error / sigma);
    os << fmt("sigma=%g: %.4f (bound %.2f); ", sigma, e.mean_error, 8 * sigma);
  }
  const auto [lo, hi] = std::minmax_element(per_sigma.begin(), per_sigma.end());
  const double spread = *hi / *lo - 1.0;
  os << fmt("mean/sigma spread %.2f%% (<= 15%%)", 100 * spread);
  return {within && spread <= 0.15, os.str()};
}

// 8. restricted isometry on the signal subspace
Outcome rip_sanity() {
  double lo = INFINITY, hi = 0.0, worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mat A = gen_measurement(128, 256, child_seed(seed, "A"));
    const Mat R = gen_basis(256, 16, child_seed(seed, "R"));
    const Vec sv = singular_values(A * R);
    lo = std::min(lo, sv.minCoeff());
    hi = std::max(hi, sv.maxCoeff());
    for (int k = 0; k < 10; ++k) {
      const Mat M = R * gaussian(16, 8, 1.0, child_seed(seed, "M", static_cast<std::uint64_t>(k)));
      const Vec sm = singular_values(M), sam = singular_values(A * M);
      for (Index j = 0; j < sm.size(); ++j) {
        const double ratio = sam(j) / sm(j);
        const double v = std::max(sv.minCoeff() - ratio, ratio - sv.maxCoeff());
        worst = std::max(worst, v);
      }
    }
  }
  const bool ok = lo >= 0.5 && hi <= 1.5 && worst <= 1e-8;
  return {ok, fmt("sigma(AR) in [%.3f, %.3f] over 20 seeds; worst bracket violation %.2e", lo, hi, worst)};
}

// 9. the scalar inequalities behind the analysis
Outcome inequality_suite() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int N = 2000;
  int weier = 0, cprod_dev = 0, cprod_i_bad = 0, geom = 0, xlog = 0;
  for (int k = 0; k < N; ++k) {
    const int n = 1 + static_cast<int>(u01(gen) * 8);
    double sum = 0.0, prod = 1.0;
    for (int i = 0; i < n; ++i) {
      const double x = u01(gen), w = 1.0 + 4.0 * u01(gen);
      sum += w * x;
      prod *= std::pow(1.0 - x, w);
    }
    if (1.0 - sum > prod + 1e-15) ++weier;
  }
  for (int k = 0; k < N; ++k) {
    const int L = 2 + static_cast<int>(u01(gen) * 6);
    const int m = 8 + static_cast<int>(u01(gen) * 200);
    const int d = m + static_cast<int>(u01(gen) * 400);
    const int d_w = L * L * m + static_cast<int>(u01(gen) * 1000);
    const double smin = 0.05 + u01(gen), kappa = 1.0 + 10.0 * u01(gen), smax = smin * kappa;
    const double gamma = std::pow(10.0, -8.0 * u01(gen));
    const double eta = m / (L * smax * smax);
    const double lambda = gamma * smin * smin * std::sqrt(static_cast<double>(m) / d);
    const NetDims dims{L, m, d_w, d};
    if (std::abs(1.0 - cprod(eta, lambda, dims)) > 2.0 * eta * lambda / m) ++cprod_dev;
    for (int i = 1; i <= L; ++i) {
      const double ci = cprod_i(eta, lambda, dims, i);
      if (ci < 0.25 || ci > 1.0) ++cprod_i_bad;
    }
  }
  for (int k = 0; k < N; ++k) {
    const double alpha = 0.5 * u01(gen);
    const int j = static_cast<int>(u01(gen) * 20), len = static_cast<int>(u01(gen) * 60);
    double s = 0.0;
    for (int i = j; i <= j + len; ++i) s += std::pow(alpha, i);
    if (s > 2.0 * std::pow(alpha, j) * (1 + 1e-14)) ++geom;
  }
  for (int k = 0; k < N; ++k) {
    const double x = k < N / 2 ? std::pow(10.0, -12.0 * k / (N / 2 - 1)) : u01(gen);
    if (x > 0 && x * std::log(1.0 / x) > std::sqrt(x)) ++xlog;
  }
  const int total = weier + cprod_dev + cprod_i_bad + geom + xlog;
  return {total == 0, fmt("violations over 2000 draws each: product %g, C_prod %g, C_prod_i %g, ", weier, cprod_dev,
                          cprod_i_bad) +
                          fmt("geometric %g, x log(1/x) %g", geom, xlog)};
}

// 10. deeper networks suppress the off-subspace component more
Outcome depth_benefit() {
  ExperimentConfig c = single("depth-sweep");
  std::vector<double> med;
  std::ostringstream os;
  for (int L : {2, 3, 5}) {
    c.L = L;
    std::vector<double> finals;
    int diverged = 0;
    for (int run = 0; run < 3; ++run) {
      const RunResult r = run_single(c, run);
      const bool good = r.trace.status == TrainStatus::ok;
      diverged += !good;
      finals.push_back(good ? r.trace.records.back().off_sub : INFINITY);
    }
    std::sort(finals.begin(), finals.end());
    med.push_back(finals[1]);
    os << fmt("L=%g: %.4g", L, finals[1]);
    if (diverged) os << fmt(" (%g of 3 diverged)", diverged);
    os << "; ";
  }
  const bool ok = med[1] <= med[0] && med[2] <= med[1];
  os << "median final off-subspace error nonincreasing in L";
  return {ok, os.str()};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "gradient correctness", 10, gradients_match},
      {2, "exact off-subspace recursion", 30, off_subspace_recursion},
      {3, "oracle certificates", 10, oracle_certificates},
      {4, "sample-reduction equivalence", 30, sample_reduction},
      {5, "two-phase dynamics", 300, two_phase},
      {6, "robustness U-shape", 900, robustness_u_shape},
      {7, "oracle noise level", 60, oracle_noise},
      {8, "RIP sanity", 60, rip_sanity},
      {9, "inequality suite", 60, inequality_suite},
      {10, "depth benefit", 600, depth_benefit},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %2d %s: %s [%.1f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures;
}
