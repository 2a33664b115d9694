#pragma once

// Synthetic linear inverse problems y = A x with signals on a low-dimensional
// subspace (or a union of subspaces).

#include "subgd/matio.hpp"
#include "subgd/numkit.hpp"

#include <cstdint>
#include <vector>

namespace subgd {

struct ProblemInstance {
  Mat A;  // m x d measurement operator
  Mat R;  // d x s orthonormal basis of the signal subspace
  Mat Z;  // s x n coefficients, full row rank
  Mat X;  // d x n signals, X = R Z
  Mat Y;  // m x n measurements, Y = A X
  double kappa_target = 1.0;
  std::uint64_t seed = 0;

  Index m() const { return A.rows(); }
  Index d() const { return A.cols(); }
  Index s() const { return R.cols(); }
  Index n() const { return Z.cols(); }
};

struct UosInstance {
  std::vector<Mat> bases;        // k bases, each d x s orthonormal
  std::vector<int> assignments;  // per sample, 0-based index into bases
  Mat A, Z, X, Y;
  std::uint64_t seed = 0;

  Index m() const { return A.rows(); }
  Index d() const { return A.cols(); }
  Index s() const { return bases.front().cols(); }
  Index n() const { return X.cols(); }
};

struct RipReport {
  double sigma_min_AR = 0.0;
  double sigma_max_AR = 0.0;
  double delta_effective = 0.0;
  bool passes = false;
};

struct LowRankSplit {
  Mat X_r;
  Mat X_small;
};

/// A = G / sqrt(m) with G an m x d standard Gaussian matrix.
Mat gen_measurement(Index m, Index d, std::uint64_t seed);

/// Orthonormal d x s basis: thin Q factor of a d x s standard Gaussian matrix.
Mat gen_basis(Index d, Index s, std::uint64_t seed);

/// s x n coefficients with random orthonormal singular factors and singular
/// values on the uniform grid from 1 down to 1/kappa.
Mat gen_coefficients(Index s, Index n, double kappa, std::uint64_t seed);

ProblemInstance assemble(Mat A, Mat R, Mat Z, double kappa_target = 1.0, std::uint64_t seed = 0);

/// Draws A, R and Z from child seeds of `seed` and assembles the instance.
ProblemInstance generate_instance(Index m, Index d, Index s, Index n, double kappa,
                                  std::uint64_t seed);

RipReport rip_check(const Mat& A, const Mat& R, double delta);

/// Worst case of rip_check over every basis of a union of subspaces.
RipReport rip_check_union(const Mat& A, const std::vector<Mat>& bases, double delta);

/// Top-r singular truncation X_r and its remainder.
LowRankSplit split_lowrank(const Mat& X, Index r);

UosInstance gen_uos(Index m, Index d, Index s, Index k, Index n, double kappa, std::uint64_t seed);

/// Equivalent instance with n = s samples: X~ = R U_Z S_Z, Y~ = A X~.
ProblemInstance reduce_samples(const ProblemInstance& inst);

MatrixBundle to_bundle(const ProblemInstance& inst);
ProblemInstance instance_from_bundle(const MatrixBundle& bundle);

}  // namespace subgd
