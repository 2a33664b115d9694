#include "subgd/model.hpp"

#include <cmath>
#include <stdexcept>

namespace subgd {

std::string to_string(Param p) { return p == Param::raw ? "raw" : "normalized"; }

Param param_from_string(const std::string& s) {
  if (s == "raw") return Param::raw;
  if (s == "normalized") return Param::normalized;
  throw std::invalid_argument("unknown parameterization '" + s + "'");
}

void NetDims::validate() const {
  if (L < 2) throw std::invalid_argument("NetDims: L must be >= 2");
  if (m < 1 || d_w < 1 || d < 1) throw std::invalid_argument("NetDims: dimensions must be >= 1");
}

DeepNet::DeepNet(NetDims dims, std::vector<Mat> weights, Param mode, bool relu_at_penultimate)
    : dims_(dims), weights_(std::move(weights)), mode_(mode), relu_(relu_at_penultimate) {
  dims_.validate();
  check_shapes();
}

double DeepNet::output_scale() const {
  if (mode_ == Param::raw) return 1.0;
  return std::pow(static_cast<double>(dims_.d_w), -0.5 * (dims_.L - 1)) /
         std::sqrt(static_cast<double>(dims_.m));
}

void DeepNet::check_shapes() const {
  if (static_cast<int>(weights_.size()) != dims_.L) {
    throw std::logic_error("DeepNet: layer count does not match dims");
  }
  for (int l = 1; l <= dims_.L; ++l) {
    const Mat& w = W(l);
    if (w.rows() != dims_.fan_out(l) || w.cols() != dims_.fan_in(l)) {
      throw std::logic_error("DeepNet: layer " + std::to_string(l) + " has wrong shape");
    }
  }
}

namespace {

std::vector<Mat> sample_layers(const NetDims& dims, std::uint64_t seed, bool fanin) {
  dims.validate();
  std::vector<Mat> ws;
  ws.reserve(static_cast<std::size_t>(dims.L));
  for (int l = 1; l <= dims.L; ++l) {
    const double std = fanin ? 1.0 / std::sqrt(static_cast<double>(dims.fan_in(l))) : 1.0;
    ws.push_back(gaussian(dims.fan_out(l), dims.fan_in(l), std,
                          child_seed(seed, "layer", static_cast<std::uint64_t>(l))));
  }
  return ws;
}

}  // namespace

DeepNet init_fanin(const NetDims& dims, std::uint64_t seed, bool relu) {
  return DeepNet(dims, sample_layers(dims, seed, true), Param::raw, relu);
}

DeepNet init_standard_normal(const NetDims& dims, std::uint64_t seed, bool relu) {
  return DeepNet(dims, sample_layers(dims, seed, false), Param::normalized, relu);
}

DeepNet reparameterize(const DeepNet& net, Param target) {
  if (target == net.mode()) return net;
  std::vector<Mat> ws = net.weights();
  for (int l = 1; l <= net.depth(); ++l) {
    const double root = std::sqrt(static_cast<double>(net.dims().fan_in(l)));
    auto& w = ws[static_cast<std::size_t>(l - 1)];
    w = target == Param::raw ? Mat(w / root) : Mat(w * root);
  }
  return DeepNet(net.dims(), std::move(ws), target, net.relu());
}

EndToEnd end_to_end(const DeepNet& net) {
  if (net.relu()) throw std::invalid_argument("end_to_end: network has a ReLU layer");
  Mat prod = net.W(1);
  for (int l = 2; l <= net.depth(); ++l) prod = net.W(l) * prod;
  EndToEnd e;
  e.F = net.output_scale() * prod;
  e.W_prod = std::move(prod);
  return e;
}

Mat forward(const DeepNet& net, const Mat& Yin) {
  if (Yin.rows() != net.dims().m) throw std::invalid_argument("forward: input has wrong row count");
  Mat h = net.W(1) * Yin;
  for (int l = 2; l < net.depth(); ++l) h = net.W(l) * h;
  if (net.relu()) h = h.cwiseMax(0.0);
  return net.output_scale() * (net.W(net.depth()) * h);
}

MatrixBundle to_bundle(const DeepNet& net) {
  MatrixBundle b;
  const NetDims& d = net.dims();
  b.meta["kind"] = "net";
  b.meta["L"] = std::to_string(d.L);
  b.meta["m"] = std::to_string(d.m);
  b.meta["d_w"] = std::to_string(d.d_w);
  b.meta["d"] = std::to_string(d.d);
  b.meta["mode"] = to_string(net.mode());
  b.meta["relu"] = net.relu() ? "1" : "0";
  for (int l = 1; l <= d.L; ++l) b.blocks.emplace_back("W" + std::to_string(l), net.W(l));
  return b;
}

DeepNet net_from_bundle(const MatrixBundle& b) {
  if (!b.meta.count("kind") || b.meta.at("kind") != "net") {
    throw std::runtime_error("bundle is not a network checkpoint");
  }
  NetDims dims{std::stoi(b.meta.at("L")), std::stoi(b.meta.at("m")), std::stoi(b.meta.at("d_w")),
               std::stoi(b.meta.at("d"))};
  std::vector<Mat> ws;
  for (int l = 1; l <= dims.L; ++l) ws.push_back(b.at("W" + std::to_string(l)));
  return DeepNet(dims, std::move(ws), param_from_string(b.meta.at("mode")),
                 b.meta.at("relu") == "1");
}

}  // namespace subgd
