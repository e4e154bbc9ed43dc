#pragma once

#include "streamgp/types.hpp"

#include <string>
#include <vector>

namespace streamgp {

/// Parsed CSV with a header row: column names plus a dense numeric body.
struct CsvTable {
  std::vector<std::string> columns;
  Matrix values;  // rows x columns

  Index column_index(const std::string& name) const;  // -1 if absent
};

/// Reads a decimal-real CSV with a header row, preserving row order.
/// Missing columns, non-numeric or non-finite cells and ragged rows raise
/// ParseError with the offending 1-based line number.
CsvTable read_csv(const std::string& path);

/// Extracts the named input columns and output column from a CSV file.
std::pair<Matrix, Vector> load_csv(const std::string& path,
                                   const std::vector<std::string>& x_cols,
                                   const std::string& y_col);

/// Writes a CSV with 17-significant-digit reals (round-trips doubles).
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const Matrix& values);

std::string format_double(double v);

}  // namespace streamgp
