#pragma once

// Minimal SVG line charts for the CSV outputs.

#include "subgd/csv.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace subgd {

struct PlotStyle {
  bool log_y = true;  // falls back to linear when a panel has no positive values
  std::string x_column;                // default: first numeric column
  std::vector<std::string> y_columns;  // default: recon_norm and off_sub panels when present
  std::optional<double> marker;        // vertical line, e.g. tau_ub
  std::string marker_label = "tau_ub";
  int panel_width = 560;
  int panel_height = 360;
};

/// One panel per y column, one polyline per value of a leading `series`
/// column (or a single line). Throws CsvError on tables without data.
std::string render_svg(const CsvTable& table, const PlotStyle& style = {});

void emit_plot(const std::filesystem::path& csv, const std::filesystem::path& svg,
               const PlotStyle& style = {});

}  // namespace subgd
