#include "subgd/csv.hpp"

#include "subgd/matio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace subgd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return *end == '\0';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::size_t CsvTable::index(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw CsvError("csv: no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
  const std::size_t c = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    double x;
    if (!parse_number(row[c], x)) throw CsvError("csv: non-numeric cell '" + row[c] + "' in " + name);
    out.push_back(x);
  }
  return out;
}

bool CsvTable::is_numeric(std::size_t col) const {
  double x;
  return std::all_of(rows.begin(), rows.end(),
                     [&](const auto& row) { return parse_number(row[col], x); });
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw CsvError("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                     " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw CsvError("csv: empty input");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw CsvError("csv: cannot open " + path.string());
  return read_csv(is);
}

void write_csv(std::ostream& os, const CsvTable& table) {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream os(path);
  if (!os) throw CsvError("csv: cannot write " + path.string());
  write_csv(os, table);
}

CsvTable trace_table(const TrainTrace& trace) {
  CsvTable t;
  t.header = kTraceColumns;
  if (!trace.records.empty()) {
    for (const auto& [name, value] : trace.records.front().extra) t.header.push_back(name);
  }
  const std::size_t n_extra = t.header.size() - kTraceColumns.size();
  for (const auto& r : trace.records) {
    if (r.extra.size() != n_extra) throw CsvError("csv: records carry differing extra columns");
    std::vector<std::string> row = {std::to_string(r.t),        format_double(r.loss),
                                    format_double(r.recon_norm), format_double(r.recon_restricted),
                                    format_double(r.off_sub),    format_double(r.oracle_dist),
                                    "ok"};
    for (const auto& [name, value] : r.extra) row.push_back(format_double(value));
    t.rows.push_back(std::move(row));
  }
  if (trace.status == TrainStatus::diverged) {
    std::vector<std::string> row(t.header.size(), format_double(kNaN));
    row[0] = std::to_string(trace.steps);
    row[6] = "diverged";
    t.rows.push_back(std::move(row));
  }
  return t;
}

TrainTrace trace_from_table(const CsvTable& table) {
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    if (i >= table.header.size() || table.header[i] != kTraceColumns[i]) {
      throw CsvError("csv: not a trace table");
    }
  }
  TrainTrace trace;
  for (const auto& row : table.rows) {
    double v[6];
    for (int c = 0; c < 6; ++c) {
      if (!parse_number(row[static_cast<std::size_t>(c)], v[c])) {
        throw CsvError("csv: non-numeric cell '" + row[static_cast<std::size_t>(c)] + "'");
      }
    }
    if (row[6] == "diverged") {
      trace.status = TrainStatus::diverged;
      trace.steps = static_cast<long>(v[0]);
      continue;
    }
    MetricRecord r;
    r.t = static_cast<long>(v[0]);
    r.loss = v[1];
    r.recon_norm = v[2];
    r.recon_restricted = v[3];
    r.off_sub = v[4];
    r.oracle_dist = v[5];
    for (std::size_t c = kTraceColumns.size(); c < row.size(); ++c) {
      double x;
      if (!parse_number(row[c], x)) throw CsvError("csv: non-numeric cell '" + row[c] + "'");
      r.extra.emplace_back(table.header[c], x);
    }
    trace.records.push_back(std::move(r));
  }
  if (trace.status == TrainStatus::ok && !trace.records.empty()) trace.steps = trace.records.back().t;
  return trace;
}

CsvTable robustness_table(const std::vector<RobustnessRow>& rows) {
  CsvTable t;
  t.header = {"sigma", "mean_error", "std_error", "mean_rel_error"};
  for (const auto& r : rows) {
    t.rows.push_back({format_double(r.sigma), format_double(r.mean_error),
                      format_double(r.std_error), format_double(r.mean_rel_error)});
  }
  return t;
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double population_std(const std::vector<double>& xs) {
  if (xs.empty()) return kNaN;
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

CsvTable aggregate(const std::vector<CsvTable>& tables) {
  if (tables.empty()) throw CsvError("aggregate: no tables");
  const auto& header = tables.front().header;
  for (const auto& t : tables) {
    if (t.header != header) throw CsvError("aggregate: schema mismatch between run tables");
  }
  std::vector<std::size_t> cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (std::all_of(tables.begin(), tables.end(), [c](const CsvTable& t) { return t.is_numeric(c); })) {
      cols.push_back(c);
    }
  }

  // key -> per column finite values, plus the number of tables with that key
  struct Slot {
    std::string key_text;
    std::vector<std::vector<double>> values;
    int runs = 0;
  };
  std::map<double, Slot> slots;
  for (const auto& t : tables) {
    for (const auto& row : t.rows) {
      double key;
      if (!parse_number(row[0], key) || std::isnan(key)) {
        throw CsvError("aggregate: non-numeric key '" + row[0] + "'");
      }
      Slot& s = slots[key];
      if (s.values.empty()) {
        s.key_text = row[0];
        s.values.resize(cols.size());
      }
      ++s.runs;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        double x;
        parse_number(row[cols[i]], x);
        if (std::isfinite(x)) s.values[i].push_back(x);
      }
    }
  }

  CsvTable out;
  out.header.push_back(header[0]);
  for (std::size_t c : cols) {
    out.header.push_back(header[c] + "_median");
    out.header.push_back(header[c] + "_std");
  }
  out.header.push_back("runs");
  for (const auto& [key, s] : slots) {
    std::vector<std::string> row = {s.key_text};
    for (const auto& v : s.values) {
      row.push_back(format_double(median(v)));
      row.push_back(format_double(population_std(v)));
    }
    row.push_back(std::to_string(s.runs));
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace subgd
