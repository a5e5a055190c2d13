#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fbm/coefficients.hpp"
#include "fbm/rng.hpp"

namespace fbm {

/// A finite +/-1 word: the jump history identifying a node of the binary
/// tree. Serialized as a string over {u, d}, index 1 first.
struct PathWord {
  std::vector<std::int8_t> signs;

  PathWord() = default;
  explicit PathWord(std::vector<std::int8_t> s) : signs(std::move(s)) {
    for (auto v : signs)
      if (v != 1 && v != -1) throw std::invalid_argument("PathWord: entries must be +/-1");
  }

  int size() const { return static_cast<int>(signs.size()); }
  /// 1-based step index, matching the time index of the jump.
  int at(int step) const { return signs.at(step - 1); }

  PathWord prefix(int len) const {
    return PathWord(std::vector<std::int8_t>(signs.begin(), signs.begin() + len));
  }
  PathWord extended(int sign) const {
    PathWord p = *this;
    p.signs.push_back(static_cast<std::int8_t>(sign));
    return p;
  }
  static PathWord all_down(int len) {
    return PathWord(std::vector<std::int8_t>(len, -1));
  }
  static PathWord all_up(int len) {
    return PathWord(std::vector<std::int8_t>(len, 1));
  }

  std::string str() const {
    std::string s;
    s.reserve(signs.size());
    for (auto v : signs) s += (v > 0 ? 'u' : 'd');
    return s;
  }
  static PathWord parse(std::string_view s) {
    std::vector<std::int8_t> v;
    v.reserve(s.size());
    for (char c : s) {
      if (c == 'u') v.push_back(1);
      else if (c == 'd') v.push_back(-1);
      else throw std::invalid_argument("PathWord::parse: expected 'u' or 'd'");
    }
    return PathWord(std::move(v));
  }

  friend bool operator==(const PathWord&, const PathWord&) = default;
  friend auto operator<=>(const PathWord& a, const PathWord& b) {
    return a.signs <=> b.signs;
  }
};

/// Y_n(x) = sum_{i<n} j(n,i) x_i, the predictable part of the excess X_n.
inline double excess_Y(const CoeffTable& t, int n, const PathWord& prefix) {
  if (prefix.size() != n - 1)
    throw std::invalid_argument("excess_Y: prefix length must be n-1");
  if (n > t.n_max) throw std::out_of_range("excess_Y: n exceeds table");
  double y = 0.0;
  std::size_t off = n >= 2 ? CoeffTable::row_offset(n) : 0;
  for (int i = 1; i <= n - 1; ++i) y += t.j_cells[off + i - 1] * prefix.signs[i - 1];
  return y;
}

/// The N-step fractional binary market with zero drift:
///   S_n = (1 + (Y_n + g_n xi_n) / N^H) S_{n-1}.
class MarketModel {
 public:
  MarketModel(std::shared_ptr<const CoeffTable> table, int N, double s0 = 1.0)
      : table_(std::move(table)), N_(N), s0_(s0) {
    if (!table_) throw std::invalid_argument("MarketModel: null table");
    if (N < 1 || N > table_->n_max)
      throw std::invalid_argument("MarketModel: need 1 <= N <= table n_max");
    if (!(s0 > 0.0)) throw std::invalid_argument("MarketModel: s0 > 0 required");
    nh_ = std::pow(static_cast<double>(N), table_->params.H);
    // Worst-case |X_n| is attained at the all-up / all-down prefixes; the
    // price stays positive iff 1 - (sum j + g)/N^H > 0 at every level.
    for (int n = 1; n <= N; ++n) {
      if (table_->sum_j(n) + table_->g(n) >= nh_)
        throw std::invalid_argument(
            "MarketModel: nonpositive price possible at n=" + std::to_string(n) +
            " (market scale too coarse for this horizon)");
    }
  }

  const CoeffTable& table() const { return *table_; }
  std::shared_ptr<const CoeffTable> table_ptr() const { return table_; }
  int steps() const { return N_; }
  double initial_price() const { return s0_; }
  double nh_scale() const { return nh_; }  // N^H

  /// (u_n, d_n) at the node reached by `prefix` (length n-1).
  std::pair<double, double> node_moves(int n, const PathWord& prefix) const {
    if (n < 1 || n > N_) throw std::out_of_range("node_moves: n in [1, N]");
    double y = excess_Y(*table_, n, prefix);
    double g = table_->g(n);
    return {(y + g) / nh_, (y - g) / nh_};
  }

  /// Price factor of step n given the full sign of that step.
  double step_factor(int n, const PathWord& prefix, int sign) const {
    double y = excess_Y(*table_, n, prefix);
    return 1.0 + (y + table_->g(n) * sign) / nh_;
  }

  /// (S_0, ..., S_len) along a path of length len <= N.
  std::vector<double> price_along_path(const PathWord& path) const {
    if (path.size() > N_) throw std::invalid_argument("price_along_path: path too long");
    std::vector<double> prices(path.size() + 1);
    prices[0] = s0_;
    for (int n = 1; n <= path.size(); ++n) {
      double f = step_factor(n, path.prefix(n - 1), path.at(n));
      prices[n] = prices[n - 1] * f;
      if (!(prices[n] > 0.0))
        throw std::runtime_error("price_along_path: nonpositive price at n=" +
                                 std::to_string(n));
    }
    return prices;
  }

  /// S at the node reached by `prefix`.
  double price_at(const PathWord& prefix) const {
    return price_along_path(prefix).back();
  }

 private:
  std::shared_ptr<const CoeffTable> table_;
  int N_;
  double s0_;
  double nh_ = 0.0;
};

/// `count` i.i.d. uniform +/-1 words of length N. Counter-based, so the
/// batch is a pure function of (seed, count, N).
inline std::vector<PathWord> sample_paths(const MarketModel& m, int count,
                                          std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_paths: count >= 1");
  CounterRng rng{seed};
  std::vector<PathWord> out(count);
  for (int s = 0; s < count; ++s) {
    std::vector<std::int8_t> signs(m.steps());
    for (int k = 0; k < m.steps(); ++k)
      signs[k] = static_cast<std::int8_t>(rng.sign(static_cast<std::uint64_t>(s), k));
    out[s] = PathWord(std::move(signs));
  }
  return out;
}

}  // namespace fbm
