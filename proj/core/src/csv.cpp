#include "streamgp/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace streamgp {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

Index CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<Index>(i);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, 0);

  CsvTable table;
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw ParseError("missing header row", 1);
  ++line_no;
  table.columns = split_line(line);
  if (table.columns.empty()) throw ParseError("empty header row", 1);

  std::vector<double> body;
  Index rows = 0;
  const auto ncols = table.columns.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != ncols) {
      throw ParseError("expected " + std::to_string(ncols) + " cells, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    for (const auto& cell : cells) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw ParseError("non-numeric cell '" + cell + "'", line_no);
      }
      if (!std::isfinite(v)) {
        throw ParseError("non-finite cell '" + cell + "'", line_no);
      }
      body.push_back(v);
    }
    ++rows;
  }

  table.values.resize(rows, static_cast<Index>(ncols));
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < table.values.cols(); ++c) {
      table.values(r, c) = body[static_cast<std::size_t>(r) * ncols + c];
    }
  }
  return table;
}

std::pair<Matrix, Vector> load_csv(const std::string& path,
                                   const std::vector<std::string>& x_cols,
                                   const std::string& y_col) {
  const CsvTable table = read_csv(path);
  const Index y_idx = table.column_index(y_col);
  if (y_idx < 0) throw ParseError("missing column '" + y_col + "'", 1);

  std::vector<Index> x_idx;
  if (x_cols.empty()) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      if (static_cast<Index>(i) != y_idx) x_idx.push_back(static_cast<Index>(i));
    }
  } else {
    for (const auto& name : x_cols) {
      const Index idx = table.column_index(name);
      if (idx < 0) throw ParseError("missing column '" + name + "'", 1);
      x_idx.push_back(idx);
    }
  }
  if (x_idx.empty()) throw ParseError("no input columns selected", 1);

  Matrix X(table.values.rows(), static_cast<Index>(x_idx.size()));
  for (std::size_t c = 0; c < x_idx.size(); ++c) {
    X.col(static_cast<Index>(c)) = table.values.col(x_idx[c]);
  }
  return {std::move(X), table.values.col(y_idx)};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path, 0);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << columns[i] << (i + 1 == columns.size() ? "\n" : ",");
  }
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      out << format_double(values(r, c)) << (c + 1 == values.cols() ? "\n" : ",");
    }
  }
}

}  // namespace streamgp
