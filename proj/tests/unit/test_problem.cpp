#include "subgd/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace subgd;

TEST(GenMeasurement, ScalarCaseIsOneDraw) {
  EXPECT_EQ(gen_measurement(1, 1, 42)(0, 0), gaussian(1, 1, 1.0, 42)(0, 0));
}

TEST(GenMeasurement, EntryStdNearInverseRootM) {
  const Mat A = gen_measurement(128, 256, 3);
  const double sd = std::sqrt((A.array() - A.mean()).square().mean());
  EXPECT_NEAR(sd * std::sqrt(128.0), 1.0, 0.05);
}

TEST(GenMeasurement, ColumnNormsConcentrate) {
  const Mat A = gen_measurement(512, 600, 4);
  const Vec norms = A.colwise().norm();
  // chi^2_512 / 512 has std sqrt(2/512) ~ 0.0625 in the squared norm
  EXPECT_GT(norms.minCoeff(), 0.8);
  EXPECT_LT(norms.maxCoeff(), 1.2);
  EXPECT_NEAR(norms.array().square().mean(), 1.0, 0.02);
}

TEST(GenMeasurement, RejectsWideProblems) {
  EXPECT_THROW(gen_measurement(5, 4, 1), std::invalid_argument);
}

TEST(GenBasis, SquareCaseIsOrthogonal) {
  const Mat Q = gen_basis(3, 3, 9);
  EXPECT_NEAR(std::abs(Q.determinant()), 1.0, 1e-10);
}

TEST(GenBasis, Orthonormal) {
  const Mat R = gen_basis(256, 16, 5);
  EXPECT_LE((R.transpose() * R - Mat::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(gen_basis(3, 4, 1), std::invalid_argument);
}

TEST(GenBasis, DistinctSeedsGiveDistinctSubspaces) {
  const Mat R1 = gen_basis(20, 3, 1), R2 = gen_basis(20, 3, 2);
  // cosines of principal angles are the singular values of R1^T R2
  const Vec cosines = singular_values(R1.transpose() * R2);
  EXPECT_LT(cosines(0), 1.0 - 1e-6);
}

TEST(GenCoefficients, PerfectlyConditioned) {
  const Vec s = singular_values(gen_coefficients(5, 30, 1.0, 3));
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(s(i), 1.0, 1e-12);
}

TEST(GenCoefficients, UniformGrid) {
  const Vec s = singular_values(gen_coefficients(4, 10, 2.0, 8));
  EXPECT_NEAR(s(0), 1.0, 1e-12);
  EXPECT_NEAR(s(1), 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(s(2), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(s(3), 0.5, 1e-12);
}

TEST(GenCoefficients, ConditionCarriesToSignals) {
  const ProblemInstance inst = generate_instance(20, 40, 5, 50, 7.5, 6);
  EXPECT_NEAR(spec_stats(inst.Z).kappa, 7.5, 1e-8);
  EXPECT_NEAR(spec_stats(inst.X).kappa, 7.5, 1e-8);
  EXPECT_THROW(gen_coefficients(3, 10, 0.5, 1), std::invalid_argument);
}

TEST(Assemble, IdentityPipeline) {
  const Index d = 6, s = 2;
  const ProblemInstance inst =
      assemble(Mat::Identity(d, d), Mat::Identity(d, s), Mat::Identity(s, s));
  EXPECT_EQ(inst.Y, Mat::Identity(d, s));
  EXPECT_EQ(inst.X, Mat::Identity(d, s));
}

TEST(Assemble, DefinitionalIdentities) {
  const ProblemInstance inst = generate_instance(12, 20, 3, 15, 2.0, 10);
  EXPECT_EQ(inst.Y, inst.A * (inst.R * inst.Z));
  const Mat Pperp = Mat::Identity(20, 20) - inst.R * inst.R.transpose();
  EXPECT_LE((Pperp * inst.X).colwise().norm().maxCoeff(), 1e-10);
}

TEST(Assemble, RejectsBadInput) {
  const Mat A = gen_measurement(4, 6, 1);
  const Mat R = gen_basis(6, 2, 2);
  EXPECT_THROW(assemble(A, R, Mat::Ones(3, 5)), std::invalid_argument);     // shape
  EXPECT_THROW(assemble(A, 2.0 * R, Mat::Identity(2, 2)), std::invalid_argument);  // not orthonormal
  EXPECT_THROW(assemble(A, R, Mat::Ones(2, 4)), std::invalid_argument);     // rank 1 < s
  EXPECT_THROW(assemble(gen_measurement(2, 6, 1), gen_basis(6, 3, 3), Mat::Identity(3, 3)),
               std::invalid_argument);  // s > m
}

TEST(RipCheck, IsometryAndScaledIsometry) {
  const Mat R = gen_basis(8, 3, 4);
  const RipReport id = rip_check(Mat::Identity(8, 8), R, 0.1);
  EXPECT_NEAR(id.delta_effective, 0.0, 1e-12);
  EXPECT_TRUE(id.passes);
  const RipReport twice = rip_check(2.0 * Mat::Identity(8, 8), R, 0.1);
  EXPECT_NEAR(twice.delta_effective, 3.0, 1e-12);
  EXPECT_FALSE(twice.passes);
}

TEST(RipCheck, UnionReportsWorstBasis) {
  const Mat A = gen_measurement(16, 32, 1);
  const std::vector<Mat> bases = {gen_basis(32, 3, 1), gen_basis(32, 3, 2)};
  const RipReport u = rip_check_union(A, bases, 0.5);
  const RipReport a = rip_check(A, bases[0], 0.5), b = rip_check(A, bases[1], 0.5);
  EXPECT_DOUBLE_EQ(u.delta_effective, std::max(a.delta_effective, b.delta_effective));
  EXPECT_DOUBLE_EQ(u.sigma_min_AR, std::min(a.sigma_min_AR, b.sigma_min_AR));
}

TEST(RipTransfer, SingularValuesOfAMBracketed) {
  const Mat A = gen_measurement(64, 128, 2);
  const Mat R = gen_basis(128, 6, 3);
  const RipReport rep = rip_check(A, R, 0.99);
  for (int k = 0; k < 5; ++k) {
    const Mat M = R * gaussian(6, 4, 1.0, 40 + k);
    const Vec sm = singular_values(M), sam = singular_values(A * M);
    for (Index j = 0; j < 4; ++j) {
      EXPECT_GE(sam(j), rep.sigma_min_AR * sm(j) * (1 - 1e-8));
      EXPECT_LE(sam(j), rep.sigma_max_AR * sm(j) * (1 + 1e-8));
    }
  }
}

TEST(SplitLowrank, FullRankAndDiagonal) {
  const Mat X = generate_instance(10, 20, 3, 8, 3.0, 1).X;
  EXPECT_LE(split_lowrank(X, 3).X_small.norm(), 1e-10 * X.norm());

  Mat D = Mat::Zero(3, 3);
  D.diagonal() << 4, 2, 1;
  const LowRankSplit s = split_lowrank(D, 1);
  Mat Xr = Mat::Zero(3, 3), Xs = Mat::Zero(3, 3);
  Xr(0, 0) = 4;
  Xs(1, 1) = 2;
  Xs(2, 2) = 1;
  EXPECT_LE((s.X_r - Xr).norm(), 1e-12);
  EXPECT_LE((s.X_small - Xs).norm(), 1e-12);
}

TEST(SplitLowrank, TailEnergyAndOrthogonality) {
  const Mat X = gaussian(9, 7, 1.0, 13);
  const Vec sv = singular_values(X);
  const LowRankSplit s = split_lowrank(X, 2);
  EXPECT_NEAR(s.X_small.squaredNorm(), sv.tail(5).squaredNorm(), 1e-10 * X.squaredNorm());
  EXPECT_NEAR(singular_values(s.X_small)(0), sv(2), 1e-10);
  EXPECT_LE((s.X_r + s.X_small - X).norm(), 1e-10);
  EXPECT_LE((s.X_r * s.X_small.transpose()).norm(), 1e-8 * X.squaredNorm());
  EXPECT_THROW(split_lowrank(X, 8), std::invalid_argument);
  EXPECT_THROW(split_lowrank(X, 0), std::invalid_argument);
}

TEST(GenUos, SingleSubspaceReducesToInstance) {
  const UosInstance u = gen_uos(12, 24, 3, 1, 10, 2.0, 77);
  const ProblemInstance p = generate_instance(12, 24, 3, 10, 2.0, 77);
  EXPECT_EQ(u.X, p.X);
  EXPECT_EQ(u.Y, p.Y);
}

TEST(GenUos, BalancedAssignmentsAndMembership) {
  const UosInstance u = gen_uos(128, 256, 4, 3, 600, 1.0, 5);
  std::vector<int> counts(3, 0);
  for (int a : u.assignments) ++counts[static_cast<std::size_t>(a)];
  for (int c : counts) {
    EXPECT_GE(c, 120);
    EXPECT_LE(c, 280);
  }
  for (Index i = 0; i < u.n(); ++i) {
    const Mat& R = u.bases[static_cast<std::size_t>(u.assignments[static_cast<std::size_t>(i)])];
    const Vec x = u.X.col(i);
    EXPECT_LE((x - R * (R.transpose() * x)).norm(), 1e-10);
  }
}

TEST(ReduceSamples, GramAndSpectrumPreserved) {
  const ProblemInstance inst = generate_instance(20, 40, 4, 50, 3.0, 12);
  const ProblemInstance red = reduce_samples(inst);
  EXPECT_EQ(red.n(), 4);
  EXPECT_LE((red.X * red.X.transpose() - inst.X * inst.X.transpose()).norm(), 1e-8);
  const Vec a = singular_values(inst.X).head(4), b = singular_values(red.X);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(spec_stats(red.X).stable_rank, spec_stats(inst.X).stable_rank, 1e-10);
}

TEST(ReduceSamples, SquareInputIsRotation) {
  const ProblemInstance inst = generate_instance(10, 20, 3, 3, 2.0, 1);
  const ProblemInstance red = reduce_samples(inst);
  const Mat Q = pinv(inst.X) * red.X;  // X~ = X Q with Q orthogonal
  EXPECT_LE((Q.transpose() * Q - Mat::Identity(3, 3)).norm(), 1e-10);
  EXPECT_LE((inst.X * Q - red.X).norm(), 1e-10);
}

TEST(InstanceBundle, RoundTripIsExact) {
  const ProblemInstance inst = generate_instance(6, 9, 2, 4, 2.0, 3);
  std::stringstream ss;
  write_bundle(ss, to_bundle(inst));
  const ProblemInstance back = instance_from_bundle(read_bundle(ss));
  EXPECT_EQ(back.A, inst.A);
  EXPECT_EQ(back.R, inst.R);
  EXPECT_EQ(back.Z, inst.Z);
  EXPECT_EQ(back.Y, inst.Y);
  EXPECT_EQ(back.seed, inst.seed);
}

TEST(MatrixContainer, RoundTripAndMalformedInput) {
  const Mat M = gaussian(3, 4, 1.0, 1) * 1e-7;
  std::stringstream ss;
  write_matrix(ss, M);
  EXPECT_EQ(read_matrix(ss), M);
  std::stringstream bad("2 2\n1 2\n3\n");
  EXPECT_THROW(read_matrix(bad), std::runtime_error);
}
