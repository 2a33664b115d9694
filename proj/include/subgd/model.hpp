#pragma once

// Bias-free deep linear networks W_L ... W_1, optionally with a ReLU in front
// of the last layer.

#include "subgd/matio.hpp"
#include "subgd/numkit.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace subgd {

/// How the weights enter the end-to-end map.
///   raw:        F = W_L ... W_1                (fan-in initialization)
///   normalized: F = d_w^{-(L-1)/2} m^{-1/2} W_L ... W_1   (unit-variance init)
enum class Param { raw, normalized };

std::string to_string(Param p);
Param param_from_string(const std::string& s);

struct NetDims {
  int L = 2;    // number of layers, >= 2
  int m = 1;    // input (measurement) dimension
  int d_w = 1;  // hidden width
  int d = 1;    // output (signal) dimension

  /// Validates the invariants, throwing std::invalid_argument.
  void validate() const;
  /// Fan-in of layer l (1-based): m for l = 1, d_w otherwise.
  int fan_in(int l) const { return l == 1 ? m : d_w; }
  int fan_out(int l) const { return l == L ? d : d_w; }
};

class DeepNet {
 public:
  DeepNet(NetDims dims, std::vector<Mat> weights, Param mode, bool relu_at_penultimate = false);

  const NetDims& dims() const { return dims_; }
  Param mode() const { return mode_; }
  bool relu() const { return relu_; }
  int depth() const { return dims_.L; }

  /// Layer l, 1-based.
  const Mat& W(int l) const { return weights_[static_cast<std::size_t>(l - 1)]; }
  Mat& W(int l) { return weights_[static_cast<std::size_t>(l - 1)]; }
  const std::vector<Mat>& weights() const { return weights_; }

  /// Scalar c with F = c * W_L ... W_1 (1 in raw mode).
  double output_scale() const;

  /// Throws if any weight lost its shape.
  void check_shapes() const;

 private:
  NetDims dims_;
  std::vector<Mat> weights_;
  Param mode_;
  bool relu_;
};

struct EndToEnd {
  Mat W_prod;  // d x m, W_L ... W_1
  Mat F;       // output_scale * W_prod
};

/// [W_l]_ij ~ N(0, 1/fan_in(l)), raw mode.
DeepNet init_fanin(const NetDims& dims, std::uint64_t seed, bool relu = false);

/// [W_l]_ij ~ N(0, 1), normalized mode.
DeepNet init_standard_normal(const NetDims& dims, std::uint64_t seed, bool relu = false);

/// Same end-to-end map in the other parameterization (W_l scaled by
/// 1/sqrt(fan_in) going to raw, by sqrt(fan_in) going to normalized).
DeepNet reparameterize(const DeepNet& net, Param target);

/// Linear nets only.
EndToEnd end_to_end(const DeepNet& net);

/// Network output for the columns of Yin (m x n).
Mat forward(const DeepNet& net, const Mat& Yin);

MatrixBundle to_bundle(const DeepNet& net);
DeepNet net_from_bundle(const MatrixBundle& bundle);

}  // namespace subgd
