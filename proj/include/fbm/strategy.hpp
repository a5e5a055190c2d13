#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fbm/market.hpp"

namespace fbm {

struct Holdings {
  double bond = 0.0;
  double stock = 0.0;
  friend bool operator==(const Holdings&, const Holdings&) = default;
};

/// Liquidated value: bond plus the stock position closed at the bid
/// (1-lambda)S when long, at the ask S when short.
inline double liquidation_value(const Holdings& h, double price, double lambda) {
  double pos = h.stock > 0.0 ? h.stock : 0.0;
  double neg = h.stock < 0.0 ? -h.stock : 0.0;
  return h.bond + (1.0 - lambda) * pos * price - neg * price;
}

/// An adapted portfolio process, stored sparsely: only prefixes where the
/// holdings differ from the parent node's are recorded; everything else is
/// inherited along the path. Start holdings are (0,0).
class Strategy {
 public:
  using Map = std::map<std::vector<std::int8_t>, Holdings>;

  void set(const PathWord& prefix, Holdings h) { entries_[prefix.signs] = h; }

  std::optional<Holdings> entry(const PathWord& prefix) const {
    auto it = entries_.find(prefix.signs);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  /// Holdings at times 0..len along the path (inherits sparsely).
  std::vector<Holdings> holdings_along(const PathWord& path) const {
    std::vector<Holdings> out(path.size() + 1);
    Holdings cur{};
    std::vector<std::int8_t> key;
    key.reserve(path.size());
    for (int n = 0; n <= path.size(); ++n) {
      if (n > 0) key.push_back(path.signs[n - 1]);
      auto it = entries_.find(key);
      if (it != entries_.end()) cur = it->second;
      out[n] = cur;
    }
    return out;
  }

  /// True iff some recorded prefix strictly extends `prefix` (holdings can
  /// still change below this node).
  bool has_extension(const PathWord& prefix) const {
    auto it = entries_.upper_bound(prefix.signs);
    if (it == entries_.end()) return false;
    const auto& k = it->first;
    if (k.size() <= prefix.signs.size()) return false;
    return std::equal(prefix.signs.begin(), prefix.signs.end(), k.begin());
  }

  const Map& entries() const { return entries_; }
  int max_entry_length() const {
    int m = 0;
    for (const auto& [k, h] : entries_) m = std::max<int>(m, static_cast<int>(k.size()));
    return m;
  }

 private:
  Map entries_;
};

struct ValueSeries {
  std::vector<double> values;  // V_0 .. V_N
  double lambda = 0.0;
};

/// V_n^lambda(phi) along a full path.
inline ValueSeries evaluate_value_process(const MarketModel& m, const Strategy& s,
                                          const PathWord& path, double lambda) {
  if (path.size() != m.steps())
    throw std::invalid_argument("evaluate_value_process: path length must be N");
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("evaluate_value_process: lambda in [0,1]");
  auto prices = m.price_along_path(path);
  auto holds = s.holdings_along(path);
  ValueSeries v;
  v.lambda = lambda;
  v.values.resize(path.size() + 1);
  for (int n = 0; n <= path.size(); ++n)
    v.values[n] = liquidation_value(holds[n], prices[n], lambda);
  return v;
}

struct SelfFinancingAudit {
  std::vector<double> slack;  // RHS - LHS of the budget inequality, n = 0..N
  bool pass = false;
};

/// Audits phi_n^0 - phi_{n-1}^0 <= -(dphi^1)^+ S_n + (1-lambda)(dphi^1)^- S_n
/// at every step of the path.
inline SelfFinancingAudit check_self_financing(const MarketModel& m, const Strategy& s,
                                               const PathWord& path, double lambda,
                                               double tol = 1e-12) {
  auto prices = m.price_along_path(path);
  auto holds = s.holdings_along(path);
  SelfFinancingAudit a;
  a.slack.resize(path.size() + 1);
  a.pass = true;
  Holdings prev{};  // (0,0) at n = -1
  for (int n = 0; n <= path.size(); ++n) {
    double d1 = holds[n].stock - prev.stock;
    double pos = d1 > 0.0 ? d1 : 0.0;
    double neg = d1 < 0.0 ? -d1 : 0.0;
    double rhs = -pos * prices[n] + (1.0 - lambda) * neg * prices[n];
    a.slack[n] = rhs - (holds[n].bond - prev.bond);
    if (a.slack[n] < -tol) a.pass = false;
    prev = holds[n];
  }
  return a;
}

/// A_gamma^N(k): worst-case (all-up continuation) excess-plus-g after an
/// all-down prefix of length floor(gamma N):
///   -sum_{i<=gn} j_{gn+k}(i) + sum_{i=gn+1}^{gn+k-1} j_{gn+k}(i) + g_{gn+k}.
inline double a_gamma(const CoeffTable& t, double gamma, int N, int k) {
  int gn = static_cast<int>(gamma * N);
  if (gn < 1) throw std::out_of_range("a_gamma: floor(gamma N) >= 1 required");
  if (k < 1 || gn + k > t.n_max) throw std::out_of_range("a_gamma: k out of range");
  int m = gn + k;
  double down = 0.0;
  std::size_t off = CoeffTable::row_offset(m);
  for (int i = 1; i <= gn; ++i) down += t.j_cells[off + i - 1];
  return t.sum_j(m) - 2.0 * down + t.g(m);
}

/// Length of the certified decrease run: the largest k such that
/// A_gamma^N(j) <= 0 for every j <= k (capped by the horizon and the
/// table). This is the maximal admissible holding period for the
/// short-at-floor(gamma N) strategy; the closed-form constant P_gamma is a
/// conservative lower bound for it.
inline int decrease_run(const CoeffTable& t, double gamma, int N) {
  int gn = static_cast<int>(gamma * N);
  if (gn < 1) throw std::out_of_range("decrease_run: floor(gamma N) >= 1 required");
  int cap = std::min(N - gn, t.n_max - gn);
  int run = 0;
  for (int k = 1; k <= cap; ++k) {
    if (a_gamma(t, gamma, N, k) <= 0.0) run = k;
    else break;
  }
  return run;
}

/// The 1-step short strategy at level n0 on the all-down event: short one
/// unit at n0-1, buy it back at n0, frozen afterwards.
inline Strategy sottinen_strategy(const MarketModel& m, double lambda, int n0) {
  if (n0 < 1 || n0 > m.steps())
    throw std::out_of_range("sottinen_strategy: n0 in [1, N]");
  Strategy s;
  PathWord event = PathWord::all_down(n0 - 1);
  double s_before = m.price_at(event);
  s.set(event, {(1.0 - lambda) * s_before, -1.0});
  for (int sign : {-1, 1}) {
    double s_after = s_before * m.step_factor(n0, event, sign);
    s.set(event.extended(sign), {(1.0 - lambda) * s_before - s_after, 0.0});
  }
  return s;
}

/// The gamma-family strategy: short one unit at floor(gamma N) on the
/// all-down event, hold through the certified decrease run, liquidate.
/// `hold_k < 0` selects the empirical run length.
inline Strategy gamma_strategy(const MarketModel& m, double lambda, double gamma,
                               int hold_k = -1) {
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw std::out_of_range("gamma_strategy: gamma in (0,1)");
  int gn = static_cast<int>(gamma * m.steps());
  if (gn < 1) throw std::out_of_range("gamma_strategy: floor(gamma N) >= 1 required");
  int k = hold_k < 0 ? decrease_run(m.table(), gamma, m.steps()) : hold_k;
  if (k < 1)
    throw std::domain_error("gamma_strategy: no certified decrease run at this (gamma, N)");
  if (gn + k > m.steps())
    throw std::out_of_range("gamma_strategy: liquidation step exceeds horizon");

  Strategy s;
  PathWord event = PathWord::all_down(gn);
  double s_short = m.price_at(event);
  s.set(event, {(1.0 - lambda) * s_short, -1.0});
  // Liquidation bond depends on the whole continuation; record every leaf
  // of the depth-k subtree below the event node.
  struct Frame { PathWord p; double price; };
  std::vector<Frame> stack{{event, s_short}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.p.size() == gn + k) {
      s.set(f.p, {(1.0 - lambda) * s_short - f.price, 0.0});
      continue;
    }
    int n = f.p.size() + 1;
    for (int sign : {-1, 1})
      stack.push_back({f.p.extended(sign), f.price * m.step_factor(n, f.p, sign)});
  }
  return s;
}

/// q * phi: all holdings scaled. The value process scales linearly.
inline Strategy scaled_strategy(const Strategy& s, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("scaled_strategy: q > 0 required");
  Strategy out;
  for (const auto& [k, h] : s.entries())
    out.set(PathWord(std::vector<std::int8_t>(k)), {q * h.bond, q * h.stock});
  return out;
}

/// General 1-step strategy: at level n, short q(x) on x in A, long q(x) on
/// the complement, liquidate at n+1. Nodes are indexed by bits, bit k set
/// iff the sign at step k+1 is +1.
struct OneStepSpec {
  int n = 1;
  std::vector<std::uint8_t> shorted;  // size 2^n, 1 = in the short set A
  std::vector<double> quantity;       // size 2^n, nonnegative

  static PathWord node(int n, std::uint32_t index) {
    std::vector<std::int8_t> signs(n);
    for (int k = 0; k < n; ++k) signs[k] = (index >> k) & 1 ? 1 : -1;
    return PathWord(std::move(signs));
  }
};

inline Strategy one_step_strategy(const MarketModel& m, double lambda,
                                  const OneStepSpec& spec) {
  if (spec.n < 1 || spec.n > m.steps() - 1)
    throw std::invalid_argument("one_step_strategy: n in [1, N-1]");
  std::size_t nodes = std::size_t{1} << spec.n;
  if (spec.shorted.size() != nodes || spec.quantity.size() != nodes)
    throw std::invalid_argument("one_step_strategy: spec arrays must have 2^n entries");
  Strategy s;
  for (std::size_t idx = 0; idx < nodes; ++idx) {
    double q = spec.quantity[idx];
    if (q < 0.0) throw std::invalid_argument("one_step_strategy: quantity must be >= 0");
    if (q == 0.0) continue;
    PathWord p = OneStepSpec::node(spec.n, static_cast<std::uint32_t>(idx));
    double sn = m.price_at(p);
    bool sell = spec.shorted[idx] != 0;
    s.set(p, sell ? Holdings{(1.0 - lambda) * sn * q, -q}
                  : Holdings{-sn * q, q});
    for (int sign : {-1, 1}) {
      double snext = sn * m.step_factor(spec.n + 1, p, sign);
      double bond = sell ? (1.0 - lambda) * sn * q - snext * q
                         : -sn * q + (1.0 - lambda) * snext * q;
      s.set(p.extended(sign), {bond, 0.0});
    }
  }
  return s;
}

}  // namespace fbm
