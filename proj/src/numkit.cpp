#include "subgd/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace subgd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double relative_tol(const Mat& M, std::optional<double> rank_tol) {
  if (rank_tol) {
    if (*rank_tol < 0.0) throw std::invalid_argument("rank_tol must be nonnegative");
    return *rank_tol;
  }
  return default_rank_tol(M);
}

}  // namespace

void require_finite(const Mat& M, std::string_view what) {
  if (!M.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
  }
}

Mat gaussian(Index rows, Index cols, double std, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("gaussian: zero dimension");
  if (!(std > 0.0)) throw std::invalid_argument("gaussian: std must be positive");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = std * normal(gen);
  }
  return out;
}

std::uint64_t child_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ fnv1a(tag));
  return splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

SvdResult econ_svd(const Mat& M) {
  if (M.rows() < 1 || M.cols() < 1) throw std::invalid_argument("econ_svd: empty matrix");
  require_finite(M, "econ_svd");
  Eigen::BDCSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Vec singular_values(const Mat& M) {
  if (M.rows() < 1 || M.cols() < 1) throw std::invalid_argument("singular_values: empty matrix");
  require_finite(M, "singular_values");
  Eigen::BDCSVD<Mat> svd(M);
  return svd.singularValues();
}

double default_rank_tol(const Mat& M) {
  return static_cast<double>(std::max(M.rows(), M.cols())) *
         std::numeric_limits<double>::epsilon();
}

Mat pinv(const Mat& M, std::optional<double> rank_tol) {
  const double rel = relative_tol(M, rank_tol);
  const SvdResult f = econ_svd(M);
  Mat out = Mat::Zero(M.cols(), M.rows());
  if (f.s.size() == 0 || f.s(0) == 0.0) return out;
  const double cutoff = rel * f.s(0);
  for (Index k = 0; k < f.s.size(); ++k) {
    if (f.s(k) <= cutoff) break;
    out.noalias() += (f.v.col(k) / f.s(k)) * f.u.col(k).transpose();
  }
  return out;
}

Index numerical_rank(const Mat& M, std::optional<double> rank_tol) {
  const double rel = relative_tol(M, rank_tol);
  const Vec s = singular_values(M);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  while (r < s.size() && s(r) > rel * s(0)) ++r;
  return r;
}

Projectors range_projectors(const Mat& M, std::optional<double> rank_tol) {
  const double rel = relative_tol(M, rank_tol);
  const SvdResult f = econ_svd(M);
  Index r = 0;
  if (f.s.size() > 0 && f.s(0) > 0.0) {
    while (r < f.s.size() && f.s(r) > rel * f.s(0)) ++r;
  }
  Projectors out;
  const Mat Ur = f.u.leftCols(r);
  out.P = Ur * Ur.transpose();
  out.Pperp = Mat::Identity(M.rows(), M.rows()) - out.P;
  return out;
}

SpectralStats spec_stats(const Mat& M, std::optional<double> rank_tol) {
  const double rel = relative_tol(M, rank_tol);
  const Vec s = singular_values(M);
  if (s.size() == 0 || s(0) == 0.0) throw std::invalid_argument("spec_stats: zero matrix");
  SpectralStats st;
  st.op_norm = s(0);
  Index r = 0;
  while (r < s.size() && s(r) > rel * s(0)) ++r;
  st.sigma_min_nonzero = s(r - 1);
  st.kappa = st.op_norm / st.sigma_min_nonzero;
  st.frob_norm = M.norm();
  st.stable_rank = (st.frob_norm * st.frob_norm) / (st.op_norm * st.op_norm);
  return st;
}

Mat thin_q(const Mat& M) {
  require_finite(M, "thin_q");
  Eigen::HouseholderQR<Mat> qr(M);
  const Index k = std::min(M.rows(), M.cols());
  return qr.householderQ() * Mat::Identity(M.rows(), k);
}

PowerResult power_op_norm(const Mat& M, const PowerOptions& opts) {
  PowerResult res;
  if (M.rows() == 0 || M.cols() == 0) return res;
  Vec v;
  if (opts.start && opts.start->size() == M.cols() && opts.start->norm() > 0.0) {
    v = *opts.start;
  } else {
    v = gaussian(M.cols(), 1, 1.0, 0x5eed5eedULL).col(0);
  }
  v.normalize();
  Vec w = M * v;
  double sigma = w.norm();
  for (int it = 1; it <= opts.max_iter; ++it) {
    Vec z = M.transpose() * w;
    const double zn = z.norm();
    res.iterations = it;
    if (zn == 0.0) {
      sigma = 0.0;
      res.converged = true;
      break;
    }
    v = z / zn;
    w = M * v;
    const double next = w.norm();
    const bool done = std::abs(next - sigma) <= opts.tol * next;
    sigma = next;
    if (done) {
      res.converged = true;
      break;
    }
  }
  res.sigma = sigma;
  res.right = std::move(v);
  return res;
}

}  // namespace subgd
