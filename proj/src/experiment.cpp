#include "subgd/experiment.hpp"

#include "subgd/matio.hpp"
#include "subgd/metrics.hpp"
#include "subgd/oracle.hpp"
#include "subgd/problem.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace subgd {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Resolved {
  double eta = 0, lambda = 0, gamma = 0, sigma_min_r = 0, tau_ub = 0;
};

Resolved resolve(const ExperimentConfig& c, const Mat& X) {
  const SpectralStats sx = spec_stats(X);
  Resolved r;
  r.sigma_min_r = c.rank_r == 0 || c.rank_r == numerical_rank(X)
                      ? sx.sigma_min_nonzero
                      : spec_stats(split_lowrank(X, c.rank_r).X_r).sigma_min_nonzero;
  r.eta = c.eta ? *c.eta : c.prefactor * c.m / (c.L * sx.op_norm * sx.op_norm);
  const double scale = r.sigma_min_r * r.sigma_min_r * std::sqrt(static_cast<double>(c.m) / c.d);
  r.lambda = c.lambda ? *c.lambda : *c.gamma * scale;
  r.gamma = c.gamma ? *c.gamma : r.lambda / scale;
  r.tau_ub = tau_upper_bound(c.m, r.eta, c.L, r.sigma_min_r, r.lambda);
  return r;
}

HyperParams hyper(const ExperimentConfig& c, const Resolved& rv) {
  HyperParams hp;
  hp.eta = rv.eta;
  hp.lambda = rv.lambda;
  hp.gamma = rv.gamma;
  hp.T = c.T;
  hp.C1 = c.C1;
  hp.log_stride = c.log_stride;
  hp.prefactor = c.prefactor;
  return hp;
}

std::string series_name(double v) { return std::isnan(v) ? "single" : format_value(v); }

std::string point_dir(const ExperimentConfig& cfg, double v) {
  return cfg.sweep_axis.empty() ? "single" : cfg.sweep_axis + "=" + format_value(v);
}

std::string format_bound(double x) { return std::isinf(x) ? "inf" : format_double(x); }

// Appends the rows of `t` to `out` behind a leading `series` column.
void append_series(CsvTable& out, const CsvTable& t, const std::string& series) {
  if (out.header.empty()) {
    out.header = {"series"};
    out.header.insert(out.header.end(), t.header.begin(), t.header.end());
  }
  for (const auto& row : t.rows) {
    std::vector<std::string> r = {series};
    r.insert(r.end(), row.begin(), row.end());
    out.rows.push_back(std::move(r));
  }
}

}  // namespace

std::vector<ExperimentConfig> sweep_points(const ExperimentConfig& cfg) {
  if (cfg.sweep_axis.empty()) return {cfg};
  std::vector<ExperimentConfig> pts;
  for (double v : cfg.sweep_values) {
    ExperimentConfig p = cfg;
    p.set_axis(cfg.sweep_axis, v);
    p.sweep_axis.clear();
    p.sweep_values.clear();
    pts.push_back(std::move(p));
  }
  return pts;
}

RunResult run_single(const ExperimentConfig& c, int run) {
  if (!c.sweep_axis.empty()) throw std::invalid_argument("run_single: expects a single sweep point");
  const auto r = static_cast<std::uint64_t>(run);
  const std::uint64_t data_seed = child_seed(c.master_seed, "data", r);
  const std::uint64_t init_seed = child_seed(c.master_seed, "init", r);
  const std::uint64_t test_seed = child_seed(c.master_seed, "test", r);

  const NetDims dims{c.L, c.m, c.d_w, c.d};
  DeepNet net = c.param == Param::normalized ? init_standard_normal(dims, init_seed, c.relu)
                                             : init_fanin(dims, init_seed, c.relu);
  TrainOptions opts;
  opts.rank_r = c.rank_r;

  RunResult res;
  res.sweep_value = kNaN;
  res.run = run;
  Resolved rv;
  if (c.subspaces == 1) {
    const ProblemInstance inst = generate_instance(c.m, c.d, c.s, c.n, c.kappa, data_seed);
    rv = resolve(c, inst.X);
    // The linear loss only sees the data through X^T X and X Y^T, so an
    // n = s dataset with the same left singular structure trains identically.
    const ProblemInstance train_inst = c.reduce && !c.relu ? reduce_samples(inst) : inst;
    res.trace = train(net, make_context(train_inst, c.rank_r), hyper(c, rv), opts);
    if (!c.sigma_grid.empty() && res.trace.status == TrainStatus::ok) {
      res.robustness = test_robustness(net, inst, c.sigma_grid, c.trials, test_seed);
    }
  } else {
    const UosInstance inst = gen_uos(c.m, c.d, c.s, c.subspaces, c.n, c.kappa, data_seed);
    rv = resolve(c, inst.X);
    TrainContext ctx = make_context(inst.X, inst.Y);
    ctx.A = inst.A;
    ctx.Pperp = range_projectors(inst.Y).Pperp;
    res.trace = train(net, ctx, hyper(c, rv), opts);
    if (!c.sigma_grid.empty() && res.trace.status == TrainStatus::ok) {
      res.robustness = test_robustness([&net](const Mat& Y) -> Mat { return forward(net, Y); },
                                       inst, c.sigma_grid, c.trials, test_seed);
    }
  }
  res.tau_ub = rv.tau_ub;
  res.eta = rv.eta;
  res.lambda = rv.lambda;
  res.gamma = rv.gamma;
  return res;
}

RunSummary run(const ExperimentConfig& cfg, int threads, std::ostream* progress) {
  cfg.validate();
  const auto points = sweep_points(cfg);
  const fs::path out = cfg.output_dir;
  auto value_of = [&cfg](std::size_t p) { return cfg.sweep_axis.empty() ? kNaN : cfg.sweep_values[p]; };

  struct Task {
    std::size_t point;
    int run;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < points.size(); ++p) {
    fs::create_directories(out / point_dir(cfg, value_of(p)));
    for (int r = 0; r < cfg.runs; ++r) tasks.push_back({p, r});
  }

  std::vector<RunResult> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex log_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task task = tasks[i];
      RunResult& res = results[i];
      try {
        const double v = value_of(task.point);
        const fs::path dir = out / point_dir(cfg, v);
        res = run_single(points[task.point], task.run);
        res.sweep_value = v;
        res.csv = dir / ("run_" + std::to_string(task.run) + ".csv");
        write_csv(res.csv, trace_table(res.trace));
        if (!res.robustness.empty()) {
          write_csv(dir / ("robustness_" + std::to_string(task.run) + ".csv"),
                    robustness_table(res.robustness));
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      ++done;
      if (progress) {
        *progress << "[" << done << "/" << tasks.size() << "] ";
        if (!cfg.sweep_axis.empty()) *progress << cfg.sweep_axis << "=" << series_name(res.sweep_value) << " ";
        *progress << "run " << task.run << ": ";
        if (errors[i]) {
          *progress << "error\n";
        } else {
          const auto& tr = res.trace;
          *progress << to_string(tr.status) << ", " << tr.steps << " steps, "
                    << tr.wall_time << " s";
          if (!tr.records.empty()) {
            *progress << ", recon " << tr.records.back().recon_norm << ", off_sub "
                      << tr.records.back().off_sub;
          }
          if (tr.status == TrainStatus::diverged) *progress << " (" << tr.diagnostic << ")";
          *progress << "\n";
        }
        progress->flush();
      }
    }
  };

  const int n_threads = std::max(1, std::min(threads, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Aggregation after the pool has drained.
  RunSummary summary;
  summary.config_hash = cfg.hash();
  summary.output_dir = out;
  CsvTable curves, robustness;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double v = value_of(p);
    const fs::path dir = out / point_dir(cfg, v);
    std::vector<CsvTable> traces, robs;
    for (const auto& res : results) {
      if (res.sweep_value != v && !(std::isnan(v) && std::isnan(res.sweep_value))) continue;
      traces.push_back(trace_table(res.trace));
      if (!res.robustness.empty()) robs.push_back(robustness_table(res.robustness));
    }
    const CsvTable agg = aggregate(traces);
    summary.aggregates.push_back(dir / "aggregate.csv");
    write_csv(summary.aggregates.back(), agg);
    append_series(curves, agg, series_name(v));
    if (!robs.empty()) {
      const CsvTable ragg = aggregate(robs);
      write_csv(dir / "robustness_aggregate.csv", ragg);
      append_series(robustness, ragg, series_name(v));
    }
  }
  write_csv(out / "curves.csv", curves);
  if (!robustness.header.empty()) write_csv(out / "robustness.csv", robustness);

  CsvTable table;
  table.header = {"series", "run",        "status", "steps",        "loss",
                  "recon_norm", "recon_restricted", "off_sub", "oracle_dist", "tau_detected",
                  "tau_ub",  "eta",        "lambda", "gamma"};
  bool all_diverged = !results.empty();
  for (const auto& res : results) {
    const auto& tr = res.trace;
    all_diverged = all_diverged && tr.status == TrainStatus::diverged;
    MetricRecord last;
    last.loss = last.recon_norm = last.recon_restricted = last.off_sub = last.oracle_dist = kNaN;
    if (!tr.records.empty()) last = tr.records.back();
    table.rows.push_back({series_name(res.sweep_value), std::to_string(res.run), to_string(tr.status),
                          std::to_string(tr.steps), format_double(last.loss),
                          format_double(last.recon_norm), format_double(last.recon_restricted),
                          format_double(last.off_sub), format_double(last.oracle_dist),
                          tr.tau_detected ? std::to_string(*tr.tau_detected) : "none",
                          format_bound(res.tau_ub), format_double(res.eta),
                          format_double(res.lambda), format_double(res.gamma)});
  }
  write_csv(out / "summary.csv", table);
  summary.all_diverged = all_diverged;

  {
    std::ofstream meta(out / "meta.txt");
    meta << "# subspace-gd run metadata\n";
    meta << "config_hash=" << summary.config_hash << "\n";
    for (const auto& [k, v] : cfg.to_map()) meta << k << "=" << v << "\n";
    for (const auto& a : cfg.assumptions) meta << "assumption=" << a << "\n";
  }
  {
    // Wall times vary between reruns, so they stay out of the CSVs.
    std::ofstream timing(out / "timing.log");
    for (const auto& res : results) {
      timing << series_name(res.sweep_value) << " run " << res.run << " " << res.trace.wall_time
             << " s\n";
    }
  }
  summary.runs = std::move(results);
  return summary;
}

void print_theory(const ExperimentConfig& cfg, std::ostream& os) {
  cfg.validate();
  for (const auto& pc : sweep_points(cfg)) {
    if (pc.subspaces != 1) {
      os << "theory report needs a single-subspace configuration (subspaces = 1)\n";
      return;
    }
    const ProblemInstance inst = generate_instance(pc.m, pc.d, pc.s, pc.n, pc.kappa,
                                                   child_seed(pc.master_seed, "data", 0));
    const Resolved rv = resolve(pc, inst.X);
    const SpectralStats sx = spec_stats(inst.X);
    if (!cfg.sweep_axis.empty()) os << "[" << cfg.sweep_axis << " = " << pc.to_map()[cfg.sweep_axis] << "]\n";
    os << "data: sigma_max(X) = " << sx.op_norm << ", sigma_min(X) = " << sx.sigma_min_nonzero
       << ", kappa = " << sx.kappa << ", sr(X) = " << sx.stable_rank << "\n";
    os << "configured: eta = " << rv.eta << ", lambda = " << rv.lambda << ", gamma = " << rv.gamma
       << ", tau_ub = " << (std::isinf(rv.tau_ub) ? "unbounded" : std::to_string(rv.tau_ub)) << "\n";
    if (rv.gamma > 0.0 && rv.gamma <= 1.0) {
      const TheoryReport rep = derive_hyperparams(inst, pc.L, pc.d_w, rv.gamma, pc.rank_r);
      os << "theory at gamma = " << rep.gamma << ": eta* = " << rep.eta_star
         << ", lambda* = " << rep.lambda_star << ", T* = " << rep.T_star
         << ", tau_ub = " << rep.tau_ub << ", gamma_cap = " << rep.gamma_cap << "\n";
      os << "width: " << rep.width_note << "\n";
    } else {
      os << "theory: gamma = " << rv.gamma << " outside (0, 1]; no horizon derived\n";
    }
  }
}

}  // namespace subgd
