#include "subgd/matio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace subgd {

namespace {

double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw std::runtime_error("matio: cannot parse number '" + tok + "'");
  }
  return v;
}

bool next_content_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    return true;
  }
  return false;
}

Mat read_body(std::istream& is, const std::string& header) {
  std::istringstream hs(header);
  long rows = 0, cols = 0;
  if (!(hs >> rows >> cols) || rows < 1 || cols < 1) {
    throw std::runtime_error("matio: bad header '" + header + "'");
  }
  Mat M(rows, cols);
  std::string line, tok;
  for (long i = 0; i < rows; ++i) {
    if (!next_content_line(is, line)) throw std::runtime_error("matio: truncated matrix");
    std::istringstream ls(line);
    for (long j = 0; j < cols; ++j) {
      if (!(ls >> tok)) throw std::runtime_error("matio: short row");
      M(i, j) = parse_double(tok);
    }
    if (ls >> tok) throw std::runtime_error("matio: long row");
  }
  return M;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const Mat& MatrixBundle::at(const std::string& name) const {
  for (const auto& [n, m] : blocks) {
    if (n == name) return m;
  }
  throw std::out_of_range("bundle has no block '" + name + "'");
}

bool MatrixBundle::has(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.first == name) return true;
  }
  return false;
}

void write_matrix(std::ostream& os, const Mat& M) {
  os << M.rows() << ' ' << M.cols() << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(M(i, j));
    }
    os << '\n';
  }
}

Mat read_matrix(std::istream& is) {
  std::string header;
  do {
    if (!next_content_line(is, header)) throw std::runtime_error("matio: empty input");
  } while (header[0] == '#');
  return read_body(is, header);
}

void save_matrix(const std::filesystem::path& path, const Mat& M) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_matrix(os, M);
}

Mat load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_matrix(is);
}

void write_bundle(std::ostream& os, const MatrixBundle& bundle) {
  os << "# subspace-gd container v1\n";
  for (const auto& [k, v] : bundle.meta) os << "# " << k << '=' << v << '\n';
  for (const auto& [name, M] : bundle.blocks) {
    os << '@' << name << '\n';
    write_matrix(os, M);
  }
}

MatrixBundle read_bundle(std::istream& is) {
  MatrixBundle b;
  std::string line;
  while (next_content_line(is, line)) {
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      b.meta[key] = line.substr(eq + 1);
    } else if (line[0] == '@') {
      const std::string name = line.substr(1);
      std::string header;
      if (!next_content_line(is, header)) throw std::runtime_error("matio: block without data");
      b.blocks.emplace_back(name, read_body(is, header));
    } else {
      throw std::runtime_error("matio: unexpected line '" + line + "'");
    }
  }
  return b;
}

void save_bundle(const std::filesystem::path& path, const MatrixBundle& bundle) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_bundle(os, bundle);
}

MatrixBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_bundle(is);
}

}  // namespace subgd
