#include "subgd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace subgd {

namespace {

constexpr double kOrthoTol = 1e-10;

void check_orthonormal(const Mat& R, const char* what) {
  const Mat G = R.transpose() * R;
  if ((G - Mat::Identity(R.cols(), R.cols())).cwiseAbs().maxCoeff() > kOrthoTol) {
    throw std::invalid_argument(std::string(what) + ": basis columns are not orthonormal");
  }
}

}  // namespace

Mat gen_measurement(Index m, Index d, std::uint64_t seed) {
  if (m < 1 || d < 1) throw std::invalid_argument("gen_measurement: zero dimension");
  if (m > d) throw std::invalid_argument("gen_measurement: requires m <= d");
  return gaussian(m, d, 1.0, seed) / std::sqrt(static_cast<double>(m));
}

Mat gen_basis(Index d, Index s, std::uint64_t seed) {
  if (s < 1 || d < 1) throw std::invalid_argument("gen_basis: zero dimension");
  if (s > d) throw std::invalid_argument("gen_basis: requires s <= d");
  return thin_q(gaussian(d, s, 1.0, seed));
}

Mat gen_coefficients(Index s, Index n, double kappa, std::uint64_t seed) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("gen_coefficients: kappa must be >= 1");
  if (s < 1 || n < s) throw std::invalid_argument("gen_coefficients: requires 1 <= s <= n");
  const Mat U = thin_q(gaussian(s, s, 1.0, child_seed(seed, "coef-left")));
  const Mat V = thin_q(gaussian(n, s, 1.0, child_seed(seed, "coef-right")));
  Vec sigma(s);
  for (Index i = 0; i < s; ++i) {
    sigma(i) = s == 1 ? 1.0
                      : 1.0 - static_cast<double>(i) * (1.0 - 1.0 / kappa) /
                                  static_cast<double>(s - 1);
  }
  return U * sigma.asDiagonal() * V.transpose();
}

ProblemInstance assemble(Mat A, Mat R, Mat Z, double kappa_target, std::uint64_t seed) {
  if (A.cols() != R.rows() || R.cols() != Z.rows()) {
    throw std::invalid_argument("assemble: shape mismatch");
  }
  require_finite(A, "assemble(A)");
  require_finite(R, "assemble(R)");
  require_finite(Z, "assemble(Z)");
  const Index m = A.rows(), d = A.cols(), s = R.cols(), n = Z.cols();
  if (m > d) throw std::invalid_argument("assemble: requires m <= d");
  if (s > std::min(m, n)) throw std::invalid_argument("assemble: requires s <= min(m, n)");
  check_orthonormal(R, "assemble");
  if (numerical_rank(Z) != s) throw std::invalid_argument("assemble: Z is rank deficient");
  ProblemInstance inst;
  inst.X = R * Z;
  inst.Y = A * inst.X;
  inst.A = std::move(A);
  inst.R = std::move(R);
  inst.Z = std::move(Z);
  inst.kappa_target = kappa_target;
  inst.seed = seed;
  return inst;
}

ProblemInstance generate_instance(Index m, Index d, Index s, Index n, double kappa,
                                  std::uint64_t seed) {
  return assemble(gen_measurement(m, d, child_seed(seed, "measurement")),
                  gen_basis(d, s, child_seed(seed, "basis", 0)),
                  gen_coefficients(s, n, kappa, child_seed(seed, "coefficients")), kappa, seed);
}

RipReport rip_check(const Mat& A, const Mat& R, double delta) {
  const Vec sv = singular_values(A * R);
  RipReport rep;
  rep.sigma_max_AR = sv(0);
  rep.sigma_min_AR = sv(sv.size() - 1);
  rep.delta_effective = std::max(1.0 - rep.sigma_min_AR * rep.sigma_min_AR,
                                 rep.sigma_max_AR * rep.sigma_max_AR - 1.0);
  rep.passes = rep.delta_effective <= delta;
  return rep;
}

RipReport rip_check_union(const Mat& A, const std::vector<Mat>& bases, double delta) {
  if (bases.empty()) throw std::invalid_argument("rip_check_union: no bases");
  RipReport worst = rip_check(A, bases.front(), delta);
  for (std::size_t j = 1; j < bases.size(); ++j) {
    const RipReport r = rip_check(A, bases[j], delta);
    worst.sigma_min_AR = std::min(worst.sigma_min_AR, r.sigma_min_AR);
    worst.sigma_max_AR = std::max(worst.sigma_max_AR, r.sigma_max_AR);
    worst.delta_effective = std::max(worst.delta_effective, r.delta_effective);
  }
  worst.passes = worst.delta_effective <= delta;
  return worst;
}

LowRankSplit split_lowrank(const Mat& X, Index r) {
  const SvdResult f = econ_svd(X);
  Index rank = 0;
  const double cutoff = default_rank_tol(X) * f.s(0);
  while (rank < f.s.size() && f.s(rank) > cutoff) ++rank;
  if (r < 1 || r > rank) {
    throw std::invalid_argument("split_lowrank: r must lie in [1, rank(X)] = [1, " +
                                std::to_string(rank) + "]");
  }
  LowRankSplit out;
  out.X_r = f.u.leftCols(r) * f.s.head(r).asDiagonal() * f.v.leftCols(r).transpose();
  out.X_small = X - out.X_r;
  return out;
}

UosInstance gen_uos(Index m, Index d, Index s, Index k, Index n, double kappa,
                    std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("gen_uos: requires k >= 1");
  UosInstance u;
  u.seed = seed;
  u.A = gen_measurement(m, d, child_seed(seed, "measurement"));
  for (Index j = 0; j < k; ++j) u.bases.push_back(gen_basis(d, s, child_seed(seed, "basis", j)));
  u.Z = gen_coefficients(s, n, kappa, child_seed(seed, "coefficients"));
  std::mt19937_64 gen(child_seed(seed, "assignment"));
  std::uniform_int_distribution<int> pick(0, static_cast<int>(k - 1));
  u.assignments.resize(n);
  u.X.resize(d, n);
  for (Index i = 0; i < n; ++i) {
    const int a = k == 1 ? 0 : pick(gen);
    u.assignments[i] = a;
    u.X.col(i) = u.bases[a] * u.Z.col(i);
  }
  u.Y = u.A * u.X;
  return u;
}

ProblemInstance reduce_samples(const ProblemInstance& inst) {
  const Index s = inst.s();
  if (numerical_rank(inst.Z) != s) throw std::invalid_argument("reduce_samples: Z rank deficient");
  const SvdResult f = econ_svd(inst.Z);
  ProblemInstance out;
  out.A = inst.A;
  out.R = inst.R;
  out.Z = f.u * f.s.asDiagonal();
  out.X = inst.R * out.Z;
  out.Y = inst.A * out.X;
  out.kappa_target = inst.kappa_target;
  out.seed = inst.seed;
  return out;
}

MatrixBundle to_bundle(const ProblemInstance& inst) {
  MatrixBundle b;
  b.meta["kind"] = "instance";
  b.meta["kappa_target"] = format_double(inst.kappa_target);
  b.meta["seed"] = std::to_string(inst.seed);
  b.blocks = {{"A", inst.A}, {"R", inst.R}, {"Z", inst.Z}, {"X", inst.X}, {"Y", inst.Y}};
  return b;
}

ProblemInstance instance_from_bundle(const MatrixBundle& b) {
  const auto kind = b.meta.find("kind");
  if (kind == b.meta.end() || kind->second != "instance") {
    throw std::runtime_error("bundle is not a problem instance");
  }
  const double kappa = b.meta.count("kappa_target") ? std::stod(b.meta.at("kappa_target")) : 1.0;
  const std::uint64_t seed = b.meta.count("seed") ? std::stoull(b.meta.at("seed")) : 0;
  ProblemInstance inst = assemble(b.at("A"), b.at("R"), b.at("Z"), kappa, seed);
  if (b.has("X")) inst.X = b.at("X");
  if (b.has("Y")) inst.Y = b.at("Y");
  return inst;
}

}  // namespace subgd
