#pragma once

// Dense real-matrix primitives shared by every other module.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string_view>

namespace subgd {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

struct SvdResult {
  Mat u;  // rows x k, orthonormal columns
  Vec s;  // k = min(rows, cols), nonincreasing
  Mat v;  // cols x k, orthonormal columns
};

struct Projectors {
  Mat P;      // onto range(M)
  Mat Pperp;  // I - P
};

struct SpectralStats {
  double op_norm = 0.0;
  double sigma_min_nonzero = 0.0;
  double kappa = 0.0;
  double stable_rank = 0.0;
  double frob_norm = 0.0;
};

/// Throws std::invalid_argument if any entry of `M` is NaN or infinite.
void require_finite(const Mat& M, std::string_view what);

/// i.i.d. N(0, std^2) entries. The stream is consumed in row-major order, so
/// `gaussian(r, c, a, seed) == a / b * gaussian(r, c, b, seed)` entrywise.
Mat gaussian(Index rows, Index cols, double std, std::uint64_t seed);

/// Derives an independent child seed from a master seed, a purpose tag and an
/// index. Adding a new consumer with a fresh tag never perturbs the others.
std::uint64_t child_seed(std::uint64_t master, std::string_view tag, std::uint64_t index = 0);

SvdResult econ_svd(const Mat& M);

/// Singular values only, nonincreasing.
Vec singular_values(const Mat& M);

/// Default relative rank tolerance: max(rows, cols) * machine epsilon.
double default_rank_tol(const Mat& M);

/// Moore-Penrose pseudoinverse. Singular values <= rank_tol * sigma_max are
/// treated as zero. An all-zero input yields an all-zero (cols x rows) result.
Mat pinv(const Mat& M, std::optional<double> rank_tol = std::nullopt);

/// Orthogonal projectors onto range(M) and its complement.
Projectors range_projectors(const Mat& M, std::optional<double> rank_tol = std::nullopt);

/// Number of singular values above rank_tol * sigma_max.
Index numerical_rank(const Mat& M, std::optional<double> rank_tol = std::nullopt);

SpectralStats spec_stats(const Mat& M, std::optional<double> rank_tol = std::nullopt);

/// Thin Q factor of a Householder QR (rows x min(rows, cols)).
Mat thin_q(const Mat& M);

struct PowerOptions {
  int max_iter = 50;
  double tol = 1e-10;
  /// Optional starting right vector (length cols). Falls back to a fixed
  /// deterministic vector when absent or degenerate.
  std::optional<Vec> start;
};

struct PowerResult {
  double sigma = 0.0;
  Vec right;  // unit right singular vector estimate
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value by power iteration on M^T M.
PowerResult power_op_norm(const Mat& M, const PowerOptions& opts = {});

}  // namespace subgd
