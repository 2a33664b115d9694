#pragma once

// Plain comma-separated tables: training traces, robustness tables and
// per-iteration aggregates. Floats are written with 17 significant digits so
// that parsing reproduces them exactly.

#include "subgd/metrics.hpp"
#include "subgd/trainer.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace subgd {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> kTraceColumns = {
    "t", "loss", "recon_norm", "recon_restricted", "off_sub", "oracle_dist", "status"};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws CsvError when absent.
  std::size_t index(const std::string& name) const;
  bool has(const std::string& name) const;
  std::vector<double> numeric(const std::string& name) const;
  /// True when every cell of the column parses as a number (nan/inf included).
  bool is_numeric(std::size_t col) const;
};

CsvTable read_csv(std::istream& is);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& os, const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// One row per record; hook columns follow `status`. A diverged trace ends
/// with a row `t = steps` carrying NaN metrics and status `diverged`.
CsvTable trace_table(const TrainTrace& trace);
TrainTrace trace_from_table(const CsvTable& table);

CsvTable robustness_table(const std::vector<RobustnessRow>& rows);

/// Per-key median and population std across tables that share a header. The
/// first column is the key; non-numeric columns are dropped; a trailing
/// `runs` column counts the tables contributing to each key.
CsvTable aggregate(const std::vector<CsvTable>& tables);

double median(std::vector<double> xs);
double population_std(const std::vector<double>& xs);

}  // namespace subgd
