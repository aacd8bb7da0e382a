#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace glauber {

inline constexpr const char* kVersion = "0.1.0";

// 17 significant digits; NaN written as NA.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// CSV table with `#` provenance lines ahead of the header row.
class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> provenance, std::vector<std::string> columns)
      : provenance_(std::move(provenance)), columns_(std::move(columns)) {}

  CsvWriter& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvWriter& operator<<(double v) { return cell(fmt_double(v)); }
  CsvWriter& operator<<(std::int64_t v) { return cell(std::to_string(v)); }
  CsvWriter& operator<<(std::uint64_t v) { return cell(std::to_string(v)); }
  CsvWriter& operator<<(const std::string& s) { return cell(s); }

  std::string str() const {
    std::ostringstream os;
    for (const auto& p : provenance_) os << "# " << p << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
    return os.str();
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << str();
  }

 private:
  CsvWriter& cell(std::string s) {
    if (rows_.empty()) throw std::logic_error("CsvWriter: call row() first");
    rows_.back().push_back(std::move(s));
    return *this;
  }

  std::vector<std::string> provenance_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw std::runtime_error("missing CSV column '" + name + "'");
  }

  std::vector<double> column(const std::string& name) const {
    const std::size_t i = index(name);
    std::vector<double> out;
    for (const auto& r : rows) {
      if (i >= r.size()) throw std::runtime_error("short CSV row");
      out.push_back(r[i] == "NA" ? std::nan("") : std::stod(r[i]));
    }
    return out;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  CsvTable t;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    if (t.columns.empty()) t.columns = split_csv_line(line);
    else t.rows.push_back(split_csv_line(line));
  }
  if (t.columns.empty()) throw std::runtime_error("no CSV header in " + path);
  return t;
}

}  // namespace glauber
