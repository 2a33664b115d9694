#include "subgd/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace subgd;

namespace {

double sample_variance(const std::vector<double>& xs) {
  double mean = 0, ss = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST(NetDims, ShapesAndValidation) {
  const NetDims d{4, 5, 7, 3};
  EXPECT_EQ(d.fan_in(1), 5);
  EXPECT_EQ(d.fan_out(1), 7);
  EXPECT_EQ(d.fan_in(2), 7);
  EXPECT_EQ(d.fan_out(4), 3);
  EXPECT_THROW((NetDims{1, 2, 2, 2}.validate()), std::invalid_argument);
  EXPECT_THROW(DeepNet(d, {Mat::Zero(7, 5)}, Param::raw), std::logic_error);
}

TEST(InitFanin, LayerVariances) {
  const NetDims dims{2, 4, 8, 3};
  std::vector<double> w1, w2;
  for (std::uint64_t seed = 0; seed < 3200; ++seed) {
    const DeepNet net = init_fanin(dims, seed);
    for (Index i = 0; i < net.W(1).size(); ++i) w1.push_back(net.W(1).data()[i]);
    for (Index i = 0; i < net.W(2).size(); ++i) w2.push_back(net.W(2).data()[i]);
  }
  ASSERT_GE(w1.size(), 100000u);
  EXPECT_NEAR(sample_variance(w1), 0.25, 0.25 * 0.02);
  EXPECT_NEAR(sample_variance(w2), 0.125, 0.125 * 0.02);
}

TEST(InitFanin, DeterministicAndFullScaleShapes) {
  const NetDims dims{3, 5, 6, 4};
  const DeepNet a = init_fanin(dims, 9), b = init_fanin(dims, 9);
  for (int l = 1; l <= 3; ++l) EXPECT_EQ(a.W(l), b.W(l));
  EXPECT_EQ(a.mode(), Param::raw);

  // shapes only; sampling 4096 x 4096 layers is not needed to check them
  const NetDims big{5, 128, 4096, 256};
  EXPECT_EQ(big.fan_out(1), 4096);
  EXPECT_EQ(big.fan_in(1), 128);
  for (int l = 2; l <= 4; ++l) {
    EXPECT_EQ(big.fan_out(l), 4096);
    EXPECT_EQ(big.fan_in(l), 4096);
  }
  EXPECT_EQ(big.fan_out(5), 256);
}

TEST(InitStandardNormal, UnitVarianceAndDeterminism) {
  const NetDims dims{3, 64, 128, 32};
  const DeepNet net = init_standard_normal(dims, 4);
  std::vector<double> all;
  for (const auto& w : net.weights()) all.insert(all.end(), w.data(), w.data() + w.size());
  EXPECT_NEAR(sample_variance(all), 1.0, 0.02);
  EXPECT_EQ(init_standard_normal(dims, 4).W(2), net.W(2));
  EXPECT_EQ(net.mode(), Param::normalized);
}

TEST(InitStandardNormal, NormalizedMapMatchesFaninProductInDistribution) {
  const NetDims dims{3, 32, 256, 48};
  const Mat F = end_to_end(init_standard_normal(dims, 100)).F;
  const Mat P = end_to_end(init_fanin(dims, 200)).W_prod;
  std::vector<double> a(F.data(), F.data() + F.size()), b(P.data(), P.data() + P.size());
  const double ratio = sample_variance(a) / sample_variance(b);
  EXPECT_GT(ratio, 0.85);
  EXPECT_LT(ratio, 1.15);
}

TEST(EndToEnd, IdentityAndScalars) {
  const DeepNet id(NetDims{2, 3, 3, 3}, {Mat::Identity(3, 3), Mat::Identity(3, 3)}, Param::raw);
  EXPECT_EQ(end_to_end(id).F, Mat::Identity(3, 3));

  const DeepNet sc(NetDims{3, 1, 1, 1}, {Mat::Constant(1, 1, 2), Mat::Constant(1, 1, 3), Mat::Constant(1, 1, 5)},
                   Param::raw);
  EXPECT_DOUBLE_EQ(end_to_end(sc).F(0, 0), 30.0);
}

TEST(EndToEnd, AgreesWithForwardAndRejectsRelu) {
  const DeepNet net = init_standard_normal(NetDims{4, 6, 9, 5}, 3);
  const Mat F = end_to_end(net).F;
  const Mat Y = gaussian(6, 10, 1.0, 8);
  EXPECT_LE((F * Y - forward(net, Y)).norm(), 1e-10 * (F * Y).norm());
  const double c = std::pow(9.0, -1.5) / std::sqrt(6.0);
  EXPECT_LE((F - c * net.W(4) * net.W(3) * net.W(2) * net.W(1)).norm(), 1e-12 * F.norm());
  EXPECT_THROW(end_to_end(init_fanin(NetDims{3, 2, 3, 2}, 1, true)), std::invalid_argument);
}

TEST(Forward, ZeroInputAndShapeErrors) {
  const DeepNet lin = init_fanin(NetDims{3, 4, 6, 5}, 2);
  const DeepNet relu = init_fanin(NetDims{3, 4, 6, 5}, 2, true);
  EXPECT_EQ(forward(lin, Mat::Zero(4, 3)), Mat::Zero(5, 3));
  EXPECT_EQ(forward(relu, Mat::Zero(4, 3)), Mat::Zero(5, 3));
  EXPECT_THROW(forward(lin, Mat::Zero(3, 3)), std::invalid_argument);
}

TEST(Forward, ReluInactiveOnNonnegativePreactivations) {
  // nonnegative weights and inputs keep every pre-activation >= 0
  std::vector<Mat> ws = {gaussian(6, 4, 1.0, 1).cwiseAbs(), gaussian(6, 6, 1.0, 2).cwiseAbs(),
                         gaussian(5, 6, 1.0, 3)};
  const DeepNet relu(NetDims{3, 4, 6, 5}, ws, Param::raw, true);
  const DeepNet lin(NetDims{3, 4, 6, 5}, ws, Param::raw, false);
  const Mat Y = gaussian(4, 7, 1.0, 4).cwiseAbs();
  EXPECT_LE((forward(relu, Y) - forward(lin, Y)).norm(), 1e-12);
}

TEST(Forward, ReluPositiveHomogeneity) {
  const DeepNet net = init_fanin(NetDims{4, 5, 8, 6}, 5, true);
  const Mat Y = gaussian(5, 9, 1.0, 6);
  for (double c : {0.1, 2.0, 37.5}) {
    EXPECT_LE((forward(net, c * Y) - c * forward(net, Y)).norm(), 1e-10 * c * forward(net, Y).norm());
  }
}

TEST(Forward, ColumnsOfInstanceMatchMap) {
  const DeepNet net = init_standard_normal(NetDims{3, 8, 10, 12}, 1);
  const Mat F = end_to_end(net).F;
  const Mat Y = gaussian(8, 5, 1.0, 2);
  const Mat out = forward(net, Y);
  for (Index i = 0; i < 5; ++i) EXPECT_LE((out.col(i) - F * Y.col(i)).norm(), 1e-10);
}

TEST(Reparameterize, PreservesTheMapAndRoundTrips) {
  const DeepNet net = init_standard_normal(NetDims{4, 5, 7, 6}, 11);
  const DeepNet raw = reparameterize(net, Param::raw);
  EXPECT_EQ(raw.mode(), Param::raw);
  EXPECT_LE((end_to_end(raw).F - end_to_end(net).F).norm(), 1e-10 * end_to_end(net).F.norm());
  // fan-in init is the raw image of the standard-normal init under the same seed
  const DeepNet fan = init_fanin(NetDims{4, 5, 7, 6}, 11);
  for (int l = 1; l <= 4; ++l) EXPECT_LE((fan.W(l) - raw.W(l)).norm(), 1e-14 * fan.W(l).norm());
  const DeepNet back = reparameterize(raw, Param::normalized);
  for (int l = 1; l <= 4; ++l) EXPECT_LE((back.W(l) - net.W(l)).norm(), 1e-12 * net.W(l).norm());
}

TEST(Checkpoint, RoundTripIsExact) {
  const DeepNet net = init_fanin(NetDims{3, 4, 5, 6}, 2, true);
  std::stringstream ss;
  write_bundle(ss, to_bundle(net));
  const DeepNet back = net_from_bundle(read_bundle(ss));
  EXPECT_EQ(back.mode(), Param::raw);
  EXPECT_TRUE(back.relu());
  for (int l = 1; l <= 3; ++l) EXPECT_EQ(back.W(l), net.W(l));
  MatrixBundle wrong;
  wrong.meta["kind"] = "instance";
  EXPECT_THROW(net_from_bundle(wrong), std::runtime_error);
}
