// subspace-gd: run, inspect and plot seeded training sweeps.

#include "CLI11.hpp"

#include "subgd/config.hpp"
#include "subgd/csv.hpp"
#include "subgd/experiment.hpp"
#include "subgd/plot.hpp"

#include <glob.h>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> paths;
  for (const auto& p : patterns) {
    glob_t g{};
    if (::glob(p.c_str(), 0, nullptr, &g) == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
  }
  return paths;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep linear network training sweeps on synthetic inverse problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string scale;
  std::string out_dir;
  int threads = 1;
  auto* run_cmd = app.add_subcommand("run", "Run a configured sweep");
  run_cmd->add_option("config", config_path, "key=value config file")->required();
  run_cmd->add_option("--set", overrides, "Override a key (key=value); repeatable");
  run_cmd->add_option("--scale", scale, "Preset scale")->check(CLI::IsMember({"desk", "paper"}));
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string theory_path;
  std::vector<std::string> theory_overrides;
  auto* theory_cmd = app.add_subcommand("theory", "Print derived hyperparameters");
  theory_cmd->add_option("config", theory_path, "key=value config file")->required();
  theory_cmd->add_option("--set", theory_overrides, "Override a key (key=value); repeatable");

  std::string plot_csv, plot_out, plot_x;
  std::vector<std::string> plot_y;
  std::optional<double> marker;
  bool linear = false;
  auto* plot_cmd = app.add_subcommand("plot", "Render a CSV as SVG");
  plot_cmd->add_option("csv", plot_csv, "Input CSV")->required();
  plot_cmd->add_option("--out", plot_out, "Output SVG")->required();
  plot_cmd->add_option("--x", plot_x, "x column");
  plot_cmd->add_option("--y", plot_y, "y column(s), one panel each");
  plot_cmd->add_option("--marker", marker, "Vertical marker position (e.g. tau_ub)");
  plot_cmd->add_flag("--linear", linear, "Linear y axis");

  std::vector<std::string> agg_patterns;
  std::string agg_out;
  auto* agg_cmd = app.add_subcommand("aggregate", "Median/std across run CSVs");
  agg_cmd->add_option("glob", agg_patterns, "Run CSV paths or glob patterns")->required();
  agg_cmd->add_option("--out", agg_out, "Output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      if (!out_dir.empty()) overrides.push_back("output_dir=" + out_dir);
      const auto cfg = subgd::load_config(config_path, overrides,
                                          scale.empty() ? std::nullopt : std::optional(scale));
      const auto summary = subgd::run(cfg, threads, &std::cerr);
      std::cout << "config " << summary.config_hash << ": " << summary.runs.size() << " runs -> "
                << summary.output_dir.string() << "\n";
      if (summary.all_diverged) {
        std::cerr << "all runs diverged\n";
        return 2;
      }
    } else if (*theory_cmd) {
      subgd::print_theory(subgd::load_config(theory_path, theory_overrides), std::cout);
    } else if (*plot_cmd) {
      subgd::PlotStyle style;
      style.x_column = plot_x;
      style.y_columns = plot_y;
      style.marker = marker;
      style.log_y = !linear;
      subgd::emit_plot(plot_csv, plot_out, style);
    } else if (*agg_cmd) {
      const auto paths = expand(agg_patterns);
      if (paths.empty()) {
        std::cerr << "aggregate: no files match\n";
        return 1;
      }
      std::vector<subgd::CsvTable> tables;
      for (const auto& p : paths) tables.push_back(subgd::read_csv(p));
      const auto agg = subgd::aggregate(tables);
      if (agg_out.empty()) {
        subgd::write_csv(std::cout, agg);
      } else {
        subgd::write_csv(agg_out, agg);
      }
    }
  } catch (const subgd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const subgd::CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
