#pragma once

// Plain-text matrix container.
//
// A single matrix is one header line "rows cols" followed by `rows` lines of
// `cols` whitespace-separated values in row-major order, printed with 17
// significant digits so a round trip is exact. A bundle holds several named
// matrices: optional "# key=value ..." metadata lines, then for every block a
// line "@name" followed by a single-matrix record. See docs/formats.md.

#include "subgd/numkit.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace subgd {

struct MatrixBundle {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Mat>> blocks;

  const Mat& at(const std::string& name) const;
  bool has(const std::string& name) const;
};

void write_matrix(std::ostream& os, const Mat& M);
Mat read_matrix(std::istream& is);

void save_matrix(const std::filesystem::path& path, const Mat& M);
Mat load_matrix(const std::filesystem::path& path);

void write_bundle(std::ostream& os, const MatrixBundle& bundle);
MatrixBundle read_bundle(std::istream& is);

void save_bundle(const std::filesystem::path& path, const MatrixBundle& bundle);
MatrixBundle load_bundle(const std::filesystem::path& path);

/// Decimal form with 17 significant digits; parses back to the same double.
std::string format_double(double x);

}  // namespace subgd
