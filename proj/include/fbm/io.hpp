#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbm {

/// Shortest-faithful decimal with 17 significant digits, independent of
/// the global locale.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  class RowBuilder {
   public:
    explicit RowBuilder(std::size_t expect) { cells_.reserve(expect); }
    RowBuilder& col(double v) { cells_.push_back(format_double(v)); return *this; }
    RowBuilder& col(int v) { cells_.push_back(std::to_string(v)); return *this; }
    RowBuilder& col(std::int64_t v) { cells_.push_back(std::to_string(v)); return *this; }
    RowBuilder& col(std::uint64_t v) { cells_.push_back(std::to_string(v)); return *this; }
    RowBuilder& col(std::string v) { cells_.push_back(std::move(v)); return *this; }
    std::vector<std::string> cells_;
  };

  RowBuilder row() const { return RowBuilder(header_.size()); }

  void append(RowBuilder b) {
    if (b.cells_.size() != header_.size())
      throw std::logic_error("CsvWriter: row width mismatch");
    rows_.push_back(std::move(b.cells_));
  }

  std::string str() const {
    std::string out = join(header_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("CsvWriter: cannot open " + path);
    f << str();
  }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    line += '\n';
    return line;
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses "a:b:step" (arithmetic, inclusive) or "dyadic:a:b" (powers of
/// two from a up to b, both rounded to exact powers required).
inline std::vector<int> parse_n_grid(const std::string& text) {
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
      std::size_t c = s.find(':', pos);
      parts.push_back(s.substr(pos, c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    return parts;
  };
  auto to_int = [](const std::string& s) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw std::invalid_argument("parse_n_grid: bad integer '" + s + "'");
    return v;
  };
  auto parts = split(text);
  std::vector<int> grid;
  if (parts.size() == 3 && parts[0] == "dyadic") {
    int a = to_int(parts[1]), b = to_int(parts[2]);
    if (a < 1 || b < a || (a & (a - 1)) != 0)
      throw std::invalid_argument("parse_n_grid: dyadic:a:b needs a power of two a <= b");
    for (long long n = a; n <= b; n *= 2) grid.push_back(static_cast<int>(n));
    return grid;
  }
  if (parts.size() == 3) {
    int a = to_int(parts[0]), b = to_int(parts[1]), step = to_int(parts[2]);
    if (a < 1 || step < 1 || b < a)
      throw std::invalid_argument("parse_n_grid: a:b:step needs 1 <= a <= b, step >= 1");
    for (int n = a; n <= b; n += step) grid.push_back(n);
    return grid;
  }
  if (parts.size() == 1) return {to_int(parts[0])};
  throw std::invalid_argument("parse_n_grid: expected 'a:b:step', 'dyadic:a:b' or 'n'");
}

}  // namespace fbm
