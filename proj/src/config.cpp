#include "subgd/config.hpp"

#include "subgd/matio.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace subgd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != static_cast<double>(static_cast<long>(x))) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return static_cast<long>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_value(xs[i]);
  }
  return out;
}

std::pair<std::string, std::string> split_pair(const std::string& line) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + line + "'");
  return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

}  // namespace

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double("list", item));
  }
  return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "experiment") {
    if (std::find(kExperiments.begin(), kExperiments.end(), v) == kExperiments.end()) {
      throw ConfigError("unknown experiment '" + v + "'");
    }
    experiment = v;
  } else if (key == "scale") {
    if (v != "desk" && v != "paper") throw ConfigError("scale must be desk or paper");
    scale = v;
  } else if (key == "m") m = static_cast<int>(to_long(key, v));
  else if (key == "d") d = static_cast<int>(to_long(key, v));
  else if (key == "s") s = static_cast<int>(to_long(key, v));
  else if (key == "n") n = static_cast<int>(to_long(key, v));
  else if (key == "subspaces") subspaces = static_cast<int>(to_long(key, v));
  else if (key == "kappa") kappa = to_double(key, v);
  else if (key == "r") rank_r = static_cast<int>(to_long(key, v));
  else if (key == "L") L = static_cast<int>(to_long(key, v));
  else if (key == "d_w") d_w = static_cast<int>(to_long(key, v));
  else if (key == "param") {
    try {
      param = param_from_string(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "relu") relu = to_bool(key, v);
  else if (key == "eta") eta = v == "auto" ? std::nullopt : std::optional<double>(to_double(key, v));
  else if (key == "prefactor") prefactor = to_double(key, v);
  else if (key == "lambda") lambda = v == "auto" ? std::nullopt : std::optional<double>(to_double(key, v));
  else if (key == "gamma") gamma = v == "auto" ? std::nullopt : std::optional<double>(to_double(key, v));
  else if (key == "T") T = to_long(key, v);
  else if (key == "C1") C1 = to_double(key, v);
  else if (key == "log_stride") log_stride = to_long(key, v);
  else if (key == "reduce") reduce = to_bool(key, v);
  else if (key == "sweep") sweep_axis = v == "none" ? "" : v;
  else if (key == "values") sweep_values = parse_list(v);
  else if (key == "runs") runs = static_cast<int>(to_long(key, v));
  else if (key == "master_seed") master_seed = std::strtoull(v.c_str(), nullptr, 10);
  else if (key == "output_dir") output_dir = v;
  else if (key == "sigma") sigma_grid = parse_list(v);
  else if (key == "trials") trials = static_cast<int>(to_long(key, v));
  else if (key == "assumption") assumptions.push_back(v);
  else throw ConfigError("unknown key '" + key + "'");
}

void ExperimentConfig::set_axis(const std::string& axis, double value) {
  set(axis, format_value(value));
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(m >= 1 && d >= 1 && s >= 1 && n >= 1, "dimensions must be positive");
  need(m <= d, "requires m <= d");
  need(s <= m && s <= n, "requires s <= min(m, n)");
  need(subspaces >= 1, "subspaces must be >= 1");
  need(kappa >= 1.0, "kappa must be >= 1");
  need(rank_r >= 0 && rank_r <= s, "r must lie in [0, s]");
  need(L >= 2, "L must be >= 2");
  need(d_w >= 1, "d_w must be >= 1");
  need(!eta || *eta >= 0.0, "eta must be >= 0");
  need(prefactor > 0.0, "prefactor must be > 0");
  need(!lambda || *lambda >= 0.0, "lambda must be >= 0");
  need(lambda || gamma, "set lambda or gamma");
  need(!gamma || (*gamma > 0.0 && *gamma <= 1.0), "gamma must lie in (0, 1]");
  need(T >= 1 && log_stride >= 1, "T and log_stride must be >= 1");
  need(C1 > 0.0, "C1 must be > 0");
  need(runs >= 1, "runs must be >= 1");
  need(trials >= 1, "trials must be >= 1");
  need(sweep_axis.empty() || !sweep_values.empty(), "sweep values must be nonempty");
  if (!sweep_axis.empty()) {
    ExperimentConfig probe = *this;
    for (double v : sweep_values) {
      probe.set_axis(sweep_axis, v);
      probe.sweep_axis.clear();
      probe.validate();
    }
  }
  need(!relu || subspaces >= 1, "");
  for (double sg : sigma_grid) need(sg >= 0.0, "sigma values must be >= 0");
}

std::map<std::string, std::string> ExperimentConfig::to_map() const {
  std::map<std::string, std::string> kv;
  kv["experiment"] = experiment;
  kv["scale"] = scale;
  kv["m"] = std::to_string(m);
  kv["d"] = std::to_string(d);
  kv["s"] = std::to_string(s);
  kv["n"] = std::to_string(n);
  kv["subspaces"] = std::to_string(subspaces);
  kv["kappa"] = format_value(kappa);
  kv["r"] = std::to_string(rank_r);
  kv["L"] = std::to_string(L);
  kv["d_w"] = std::to_string(d_w);
  kv["param"] = to_string(param);
  kv["relu"] = relu ? "1" : "0";
  kv["eta"] = eta ? format_value(*eta) : "auto";
  kv["prefactor"] = format_value(prefactor);
  kv["lambda"] = lambda ? format_value(*lambda) : "auto";
  kv["gamma"] = gamma ? format_value(*gamma) : "auto";
  kv["T"] = std::to_string(T);
  kv["C1"] = format_value(C1);
  kv["log_stride"] = std::to_string(log_stride);
  kv["reduce"] = reduce ? "1" : "0";
  kv["sweep"] = sweep_axis.empty() ? "none" : sweep_axis;
  kv["values"] = join(sweep_values);
  kv["runs"] = std::to_string(runs);
  kv["master_seed"] = std::to_string(master_seed);
  kv["sigma"] = join(sigma_grid);
  kv["trials"] = std::to_string(trials);
  return kv;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : to_map()) {
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig preset(const std::string& experiment, const std::string& scale) {
  if (scale != "desk" && scale != "paper") throw ConfigError("scale must be desk or paper");
  const bool paper = scale == "paper";
  ExperimentConfig c;
  c.experiment = experiment;
  c.scale = scale;
  if (experiment == "robustness-linear") {
    c.m = 128; c.d = 256; c.s = 16; c.n = paper ? 1000 : 200; c.kappa = 1.0;
    c.L = 5; c.d_w = paper ? 4096 : 512;
    c.param = Param::normalized;
    c.prefactor = 0.5;
    c.lambda = 0.0;
    c.T = paper ? 100000 : 6000;
    c.log_stride = paper ? 1000 : 100;
    c.sweep_axis = "lambda";
    c.sweep_values = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
    c.sigma_grid = {0.0, 0.05, 0.1, 0.2};
    c.trials = 100;
    c.assumptions = {"assumed sample count: n = 200 at desk scale, 1000 at full scale",
                     "test signals are unit-norm and lie in range(R)"};
  } else if (experiment == "robustness-uos") {
    c.m = 128; c.d = 256; c.s = 4; c.subspaces = 3; c.n = paper ? 1000 : 200; c.kappa = 1.0;
    c.L = 5; c.d_w = paper ? 4096 : 512; c.relu = true;
    c.param = Param::normalized;
    c.prefactor = 0.5;
    c.lambda = 0.0;
    c.T = paper ? 100000 : 20000;
    c.log_stride = paper ? 1000 : 200;
    c.reduce = false;
    c.sweep_axis = "lambda";
    c.sweep_values = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
    c.sigma_grid = {0.0, 0.05, 0.1, 0.2};
    c.trials = 100;
    c.assumptions = {"assumed sample count: n = 200 at desk scale, 1000 at full scale",
                     "test signals are unit-norm and lie in a uniformly chosen subspace"};
  } else if (experiment == "stepsize-sweep") {
    c.m = 128; c.d = 256; c.s = 4; c.n = paper ? 1000 : 200; c.kappa = 1.0;
    c.L = 3; c.d_w = 512;
    c.param = Param::normalized;
    c.lambda = 1e-3;
    c.T = paper ? 100000 : 10000;
    c.log_stride = 10;
    c.sweep_axis = "prefactor";
    c.sweep_values = {0.01, 0.1, 1.0, 5.0};
    c.assumptions = {"assumed hidden width: d_w = 512",
                     "assumed sample count and conditioning: n = 200 (desk), 1000 (full), kappa = 1"};
  } else if (experiment == "depth-sweep") {
    c.m = 32; c.d = 64; c.s = 4; c.n = paper ? 1000 : 200; c.kappa = 1.0;
    c.d_w = paper ? 1000 : 256;
    c.param = Param::raw;
    c.eta = 0.1;
    c.lambda = 1e-4;
    c.T = paper ? 100000 : 20000;
    c.log_stride = paper ? 100 : 50;
    c.runs = paper ? 1 : 3;
    c.sweep_axis = "L";
    c.sweep_values = {2, 3, 5};
    c.assumptions = {"assumed depths: L in {2, 3, 5}"};
  } else if (experiment == "subspace-sweep") {
    c.m = 128; c.d = 256; c.n = paper ? 1000 : 200; c.kappa = 1.0;
    c.L = 3; c.d_w = 512;
    c.param = Param::raw;
    c.eta = 0.1;
    c.lambda = 1e-3;
    c.T = paper ? 100000 : 10000;
    c.log_stride = paper ? 100 : 50;
    c.runs = 10;
    c.sweep_axis = "s";
    c.sweep_values = {2, 4, 8, 16, 32};
    c.s = 32;
    c.assumptions = {"assumed depth: L = 3"};
  } else if (experiment == "wd-sweep") {
    c.m = 32; c.d = 64; c.s = 4; c.n = paper ? 1000 : 200; c.kappa = 1.0;
    c.L = 3; c.d_w = paper ? 1000 : 256;
    c.param = Param::raw;
    c.eta = 0.1;
    c.lambda = 1e-4;
    c.T = paper ? 100000 : 20000;
    c.log_stride = paper ? 100 : 50;
    c.sweep_axis = "lambda";
    c.sweep_values = {1e-4, 1e-3, 1e-2};
    c.assumptions = {"assumed weight decay values: lambda in {1e-4, 1e-3, 1e-2}"};
  } else if (experiment == "custom") {
    c.lambda = 1e-3;
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> parse_kv(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    out.push_back(split_pair(line));
  }
  return out;
}

ExperimentConfig config_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const std::vector<std::string>& overrides,
                                   std::optional<std::string> scale) {
  std::vector<std::pair<std::string, std::string>> all = pairs;
  for (const auto& o : overrides) all.push_back(split_pair(o));
  std::string experiment = "custom";
  std::string sc = "desk";
  for (const auto& [k, v] : all) {
    if (k == "experiment") experiment = v;
    if (k == "scale") sc = v;
  }
  if (scale) sc = *scale;
  ExperimentConfig cfg = preset(experiment, sc);
  for (const auto& [k, v] : all) {
    if (k == "experiment" || k == "scale") continue;
    cfg.set(k, v);
  }
  if (const char* env = std::getenv("SUBSPACE_GD_SEED")) {
    cfg.set("master_seed", env);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides,
                             std::optional<std::string> scale) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  return config_from_pairs(parse_kv(is), overrides, scale);
}

}  // namespace subgd
