#pragma once

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hcb/common.hpp"

namespace hcb::io {

/// Shortest round-trip decimal form; identical bytes on every run.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

using Cell = std::variant<double, std::int64_t, std::string>;

inline std::string to_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

/// Column-named table; the frozen schema of each experiment kind is its header.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  void add(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw DomainError("row width does not match the table header");
    rows_.push_back(std::move(row));
  }

  std::size_t index(const std::string& name) const {
    for (std::size_t k = 0; k < columns_.size(); ++k)
      if (columns_[k] == name) return k;
    throw DomainError("table has no column '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& c : columns_)
      if (c == name) return true;
    return false;
  }

  const Cell& at(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

  double number(std::size_t row, std::size_t col) const {
    const Cell& c = at(row, col);
    if (const double* d = std::get_if<double>(&c)) return *d;
    if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return double(*i);
    throw DomainError("column '" + columns_[col] + "' is not numeric");
  }
  std::vector<double> column(const std::string& name) const {
    const std::size_t k = index(name);
    std::vector<double> out(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) out[r] = number(r, k);
    return out;
  }
  std::vector<std::string> text_column(const std::string& name) const {
    const std::size_t k = index(name);
    std::vector<std::string> out(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) out[r] = to_text(rows_[r][k]);
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

/// RFC-4180 style: header row, comma separated, quoted where needed, LF line ends.
inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t k = 0; k < t.columns().size(); ++k) os << (k ? "," : "") << csv_field(t.columns()[k]);
  os << '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t k = 0; k < t.columns().size(); ++k) os << (k ? "," : "") << csv_field(to_text(t.at(r, k)));
    os << '\n';
  }
  return os.str();
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), std::streamsize(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace hcb::io
