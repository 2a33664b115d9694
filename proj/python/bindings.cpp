#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "subgd/config.hpp"
#include "subgd/csv.hpp"
#include "subgd/experiment.hpp"
#include "subgd/metrics.hpp"
#include "subgd/model.hpp"
#include "subgd/numkit.hpp"
#include "subgd/oracle.hpp"
#include "subgd/plot.hpp"
#include "subgd/problem.hpp"
#include "subgd/trainer.hpp"

#include <cmath>

namespace py = pybind11;
using namespace subgd;

namespace {

py::dict trace_dict(const TrainTrace& tr) {
  std::vector<long> t;
  std::vector<double> loss, recon, restricted, off, oracle;
  for (const auto& r : tr.records) {
    t.push_back(r.t);
    loss.push_back(r.loss);
    recon.push_back(r.recon_norm);
    restricted.push_back(r.recon_restricted);
    off.push_back(r.off_sub);
    oracle.push_back(r.oracle_dist);
  }
  py::dict d;
  d["t"] = t;
  d["loss"] = loss;
  d["recon_norm"] = recon;
  d["recon_restricted"] = restricted;
  d["off_sub"] = off;
  d["oracle_dist"] = oracle;
  d["status"] = to_string(tr.status);
  d["diagnostic"] = tr.diagnostic;
  d["steps"] = tr.steps;
  d["tau_detected"] = tr.tau_detected ? py::cast(*tr.tau_detected) : py::none();
  d["wall_time"] = tr.wall_time;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deep linear networks trained by gradient descent with weight decay";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CsvError>(m, "CsvError", PyExc_ValueError);

  // numkit
  m.def("gaussian", &gaussian, py::arg("rows"), py::arg("cols"), py::arg("std"), py::arg("seed"));
  m.def("child_seed", &child_seed, py::arg("master"), py::arg("tag"), py::arg("index") = 0);
  m.def("pinv", &pinv, py::arg("M"), py::arg("rank_tol") = std::nullopt);
  m.def("numerical_rank", &numerical_rank, py::arg("M"), py::arg("rank_tol") = std::nullopt);
  m.def("singular_values", &singular_values);
  m.def("op_norm_power", [](const Mat& M, int max_iter, double tol) {
    PowerOptions o;
    o.max_iter = max_iter;
    o.tol = tol;
    const PowerResult r = power_op_norm(M, o);
    return py::make_tuple(r.sigma, r.iterations, r.converged);
  }, py::arg("M"), py::arg("max_iter") = 50, py::arg("tol") = 1e-10);

  // problem
  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def_readonly("A", &ProblemInstance::A)
      .def_readonly("R", &ProblemInstance::R)
      .def_readonly("Z", &ProblemInstance::Z)
      .def_readonly("X", &ProblemInstance::X)
      .def_readonly("Y", &ProblemInstance::Y)
      .def_readonly("seed", &ProblemInstance::seed)
      .def_property_readonly("m", &ProblemInstance::m)
      .def_property_readonly("d", &ProblemInstance::d)
      .def_property_readonly("s", &ProblemInstance::s)
      .def_property_readonly("n", &ProblemInstance::n);
  m.def("generate_instance", &generate_instance, py::arg("m"), py::arg("d"), py::arg("s"),
        py::arg("n"), py::arg("kappa"), py::arg("seed"));
  m.def("assemble", &assemble, py::arg("A"), py::arg("R"), py::arg("Z"), py::arg("kappa") = 1.0,
        py::arg("seed") = 0);
  m.def("reduce_samples", &reduce_samples);
  m.def("gen_measurement", &gen_measurement, py::arg("m"), py::arg("d"), py::arg("seed"));
  m.def("gen_basis", &gen_basis, py::arg("d"), py::arg("s"), py::arg("seed"));
  m.def("gen_coefficients", &gen_coefficients, py::arg("s"), py::arg("n"), py::arg("kappa"),
        py::arg("seed"));

  // model
  py::enum_<Param>(m, "Param").value("raw", Param::raw).value("normalized", Param::normalized);
  py::class_<NetDims>(m, "NetDims")
      .def(py::init([](int L, int m_, int d_w, int d) {
             NetDims nd{L, m_, d_w, d};
             nd.validate();
             return nd;
           }),
           py::arg("L"), py::arg("m"), py::arg("d_w"), py::arg("d"))
      .def_readonly("L", &NetDims::L)
      .def_readonly("m", &NetDims::m)
      .def_readonly("d_w", &NetDims::d_w)
      .def_readonly("d", &NetDims::d);
  py::class_<DeepNet>(m, "DeepNet")
      .def(py::init<NetDims, std::vector<Mat>, Param, bool>(), py::arg("dims"), py::arg("weights"),
           py::arg("mode"), py::arg("relu") = false)
      .def_property_readonly("weights", &DeepNet::weights)
      .def_property_readonly("mode", &DeepNet::mode)
      .def_property_readonly("relu", &DeepNet::relu)
      .def_property_readonly("output_scale", &DeepNet::output_scale)
      .def("end_to_end", [](const DeepNet& n) { return end_to_end(n).F; })
      .def("forward", [](const DeepNet& n, const Mat& Y) { return forward(n, Y); });
  m.def("init_fanin", &init_fanin, py::arg("dims"), py::arg("seed"), py::arg("relu") = false);
  m.def("init_standard_normal", &init_standard_normal, py::arg("dims"), py::arg("seed"),
        py::arg("relu") = false);
  m.def("reparameterize", &reparameterize);

  // trainer
  m.def("loss", &loss, py::arg("net"), py::arg("X"), py::arg("Y"), py::arg("lam"));
  m.def("gradients", &gradients, py::arg("net"), py::arg("X"), py::arg("Y"), py::arg("lam"));
  m.def("grad_check",
        py::overload_cast<const DeepNet&, const Mat&, const Mat&, double, double>(&grad_check),
        py::arg("net"), py::arg("X"), py::arg("Y"), py::arg("lam"), py::arg("epsilon") = 1e-5);
  m.def("train",
        [](const DeepNet& net, const ProblemInstance& inst, double eta, double lam, long T,
           long log_stride, double gamma) {
          DeepNet work = net;
          HyperParams hp;
          hp.eta = eta;
          hp.lambda = lam;
          hp.T = T;
          hp.log_stride = log_stride;
          hp.gamma = gamma;
          TrainTrace tr;
          {
            py::gil_scoped_release release;
            tr = train(work, inst, hp);
          }
          return py::make_tuple(work, trace_dict(tr));
        },
        py::arg("net"), py::arg("inst"), py::arg("eta"), py::arg("lam"), py::arg("T"),
        py::arg("log_stride") = 1, py::arg("gamma") = 1.0,
        "Returns (trained net, trace dict); the input net is left unchanged.");
  m.def("tau_upper_bound", &tau_upper_bound, py::arg("m"), py::arg("eta"), py::arg("L"),
        py::arg("sigma_min_r"), py::arg("lam"));
  m.def("gamma_cap", &gamma_cap, py::arg("d"), py::arg("m"), py::arg("L"));
  m.def("derive_hyperparams",
        [](const ProblemInstance& inst, int L, int d_w, double gamma) {
          const TheoryReport r = derive_hyperparams(inst, L, d_w, gamma);
          py::dict d;
          d["eta_star"] = r.eta_star;
          d["lambda_star"] = r.lambda_star;
          d["gamma"] = r.gamma;
          d["T_star"] = r.T_star;
          d["tau_ub"] = r.tau_ub;
          d["gamma_cap"] = r.gamma_cap;
          d["width_ratio"] = r.width_ratio;
          d["width_note"] = r.width_note;
          return d;
        },
        py::arg("inst"), py::arg("L"), py::arg("d_w"), py::arg("gamma"));

  // oracle and metrics
  m.def("oracle_map", [](const ProblemInstance& inst) { return oracle_map(inst).W; });
  m.def("oracle_noise_error",
        [](const ProblemInstance& inst, double sigma, int trials, std::uint64_t seed) {
          const NoiseError e = oracle_noise_error(inst, sigma, trials, seed);
          return py::make_tuple(e.mean_error, e.p95_error);
        },
        py::arg("inst"), py::arg("sigma"), py::arg("trials"), py::arg("seed"));
  m.def("recon_error", &recon_error, py::arg("F"), py::arg("X"), py::arg("Y"));
  m.def("off_subspace_error",
        [](const Mat& F, const Mat& Y) { return off_subspace_error(F, Y); }, py::arg("F"),
        py::arg("Y"));
  m.def("test_robustness",
        [](const Mat& F, const ProblemInstance& inst, const std::vector<double>& sigmas,
           int trials, std::uint64_t seed) {
          py::list out;
          for (const auto& r : test_robustness(F, inst, sigmas, trials, seed)) {
            out.append(py::make_tuple(r.sigma, r.mean_error, r.std_error, r.mean_rel_error));
          }
          return out;
        },
        py::arg("F"), py::arg("inst"), py::arg("sigmas"), py::arg("trials"), py::arg("seed"));

  // experiments
  m.def("preset_config",
        [](const std::string& experiment, const std::string& scale) {
          return preset(experiment, scale).to_map();
        },
        py::arg("experiment"), py::arg("scale") = "desk");
  m.def("run_experiment",
        [](const std::filesystem::path& config, const std::vector<std::string>& overrides,
           int threads) {
          const ExperimentConfig cfg = load_config(config, overrides);
          RunSummary s;
          {
            py::gil_scoped_release release;
            s = run(cfg, threads);
          }
          py::dict d;
          d["config_hash"] = s.config_hash;
          d["output_dir"] = s.output_dir;
          d["aggregates"] = s.aggregates;
          d["all_diverged"] = s.all_diverged;
          py::list runs;
          for (const auto& r : s.runs) {
            py::dict rd = trace_dict(r.trace);
            rd["sweep_value"] = r.sweep_value;
            rd["run"] = r.run;
            rd["csv"] = r.csv;
            rd["tau_ub"] = r.tau_ub;
            runs.append(rd);
          }
          d["runs"] = runs;
          return d;
        },
        py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
        py::arg("threads") = 1);
  m.def("aggregate_csv",
        [](const std::vector<std::filesystem::path>& paths, const std::filesystem::path& out) {
          std::vector<CsvTable> tables;
          for (const auto& p : paths) tables.push_back(read_csv(p));
          write_csv(out, aggregate(tables));
        },
        py::arg("paths"), py::arg("out"));
  m.def("plot_csv",
        [](const std::filesystem::path& csv, const std::filesystem::path& svg) { emit_plot(csv, svg); },
        py::arg("csv"), py::arg("svg"));
}
