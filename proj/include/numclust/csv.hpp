#pragma once

// CSV ingestion and emission for point files. Format: optional header, one row per
// observation, features first, optional trailing integer label column. Floats are
// written with shortest round-trip formatting.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace numclust {

enum class Normalize { kNone, kMean };

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) cells.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline bool parse_double(const std::string& cell, double& out) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e && !cell.empty();
}

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace detail

// Reads a point file. has_labels treats the last column as integer class ids.
// Normalize::kMean divides every feature column by its mean after ingestion.
// Error positions are 1-based file coordinates, counting any header line.
inline DataSet ingest_csv(const std::string& path, bool has_labels = false,
                          Normalize normalize = Normalize::kNone) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);

    if (rows.empty() && width == 0) {
      // first non-empty line: a header iff any cell fails numeric parsing
      bool numeric = true;
      double tmp;
      for (const auto& c : cells) numeric = numeric && detail::parse_double(c, tmp);
      width = cells.size();
      if (!numeric) continue;
    }

    if (cells.size() != width)
      throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " columns, got " + std::to_string(cells.size()));

    const std::size_t feat = has_labels ? width - 1 : width;
    if (feat < 1)
      throw ParseError(path + ": line " + std::to_string(line_no) + ": no feature columns");

    std::vector<double> row(feat);
    for (std::size_t c = 0; c < feat; ++c) {
      if (!detail::parse_double(cells[c], row[c]))
        throw ParseError(path + ": line " + std::to_string(line_no) + ", column " +
                         std::to_string(c + 1) + ": not a number: '" + cells[c] + "'");
    }
    if (has_labels) {
      double lv;
      if (!detail::parse_double(cells[feat], lv) ||
          lv != static_cast<double>(static_cast<long long>(lv)))
        throw ParseError(path + ": line " + std::to_string(line_no) + ", column " +
                         std::to_string(width) + ": not an integer label: '" + cells[feat] + "'");
      labels.push_back(static_cast<int>(lv));
    }
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw ParseError(path + ": no data rows");

  Matrix x(static_cast<long>(rows.size()), static_cast<long>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) x(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];

  if (normalize == Normalize::kMean) {
    for (long j = 0; j < x.cols(); ++j) {
      const double mean = x.col(j).mean();
      if (std::abs(mean) < 1e-300)
        throw ZeroMeanColumn("mean normalization: column " + std::to_string(j + 1) +
                             " has zero mean");
      x.col(j) /= mean;
    }
  }

  return make_dataset(std::move(x), std::move(labels));
}

// Writes header f1..fr[,label] then one row per observation.
inline void write_points_csv(const std::string& path, const Matrix& x,
                             const std::vector<int>& labels = {}) {
  if (!labels.empty() && static_cast<long>(labels.size()) != x.rows())
    throw InvalidArgument("write_points_csv: label count != row count");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (long j = 0; j < x.cols(); ++j) out << (j ? ",f" : "f") << (j + 1);
  if (!labels.empty()) out << ",label";
  out << "\n";
  for (long i = 0; i < x.rows(); ++i) {
    for (long j = 0; j < x.cols(); ++j) {
      if (j) out << ",";
      out << detail::format_double(x(i, j));
    }
    if (!labels.empty()) out << "," << labels[static_cast<std::size_t>(i)];
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace numclust
