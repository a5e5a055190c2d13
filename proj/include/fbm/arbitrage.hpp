#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fbm/parallel.hpp"
#include "fbm/rng.hpp"
#include "fbm/strategy.hpp"

namespace fbm {

/// Exact dyadic probability num / 2^log2_den.
struct DyadicProb {
  std::uint64_t num = 0;
  int log2_den = 0;

  void normalize() {
    while (num != 0 && (num & 1) == 0) {
      num >>= 1;
      --log2_den;
    }
    if (num == 0) log2_den = 0;
  }

  void add_pow2(int k) {
    if (num == 0) {
      num = 1;
      log2_den = k;
      return;
    }
    normalize();
    int e = std::max(log2_den, k);
    int sh = e - log2_den;
    if (sh >= 64 || (sh > 0 && (num >> (64 - sh)) != 0))
      throw std::overflow_error("DyadicProb: numerator overflow");
    std::uint64_t lifted = num << sh;
    std::uint64_t add = std::uint64_t{1} << (e - k);
    if (lifted > ~add) throw std::overflow_error("DyadicProb: numerator overflow");
    num = lifted + add;
    log2_den = e;
  }

  double value() const { return num == 0 ? 0.0 : std::ldexp(static_cast<double>(num), -log2_den); }
  std::string str() const { return std::to_string(num) + "/2^" + std::to_string(log2_den); }
  bool positive() const { return num > 0; }
};

/// lambda(Phi^N(n0)) = -u_{n0}(-1) = (sum_{i<n0} j_{n0}(i) - g_{n0}) / N^H.
/// Nonpositive means the family is not an arbitrage at that node.
inline double lambda_phi(const MarketModel& m, int n0) {
  if (n0 < 1 || n0 > m.steps()) throw std::out_of_range("lambda_phi: n0 in [1, N]");
  const CoeffTable& t = m.table();
  return (t.sum_j(n0) - t.g(n0)) / m.nh_scale();
}

/// Smallest n* such that sum_{i<n} j_n(i) > g_n for EVERY n in
/// [n*, horizon]; nullopt when even the horizon level fails. Certified
/// only up to the scanned horizon.
inline std::optional<int> find_n_H(const CoeffTable& t, int horizon) {
  if (horizon < 1 || horizon > t.n_max) throw std::out_of_range("find_n_H: horizon");
  int last_fail = 0;
  for (int n = 1; n <= horizon; ++n)
    if (!(t.sum_j(n) > t.g(n))) last_fail = n;
  if (last_fail == horizon) return std::nullopt;
  return last_fail + 1;
}

/// The constants of the decrease-run lemma for the gamma family.
struct GammaConstants {
  double gamma = 0.0;
  double P_gamma = 0.0;
  double C_gamma = 0.0;
  double C_hat_gamma = 0.0;
  std::int64_t N0_gamma = 0;
  std::int64_t n_gamma = 0;  // smallest N with floor(gamma N)/N > gamma/2
};

inline GammaConstants gamma_constants(const HurstParams& p, double gamma,
                                      double tol = 1e-12) {
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw std::domain_error("gamma_constants: gamma in (0,1)");
  const double a = p.alpha;
  const double c_star = p.sigma * normalizing_constant(p);
  double half = 0.5 * gamma;
  double G = gap_function_G(half, p, tol);
  GammaConstants c;
  c.gamma = gamma;
  c.P_gamma = std::min(1.0 - gamma, std::pow(std::pow(half, 2.0 * a) * G / 2.0, 1.0 / a));
  c.C_gamma = c_star * std::pow(half, a) * G / 2.0;
  c.C_hat_gamma = c_star * std::pow(half, -a) / (a + 1.0);
  c.n_gamma = 1;
  while (std::floor(gamma * c.n_gamma) <= half * c.n_gamma) ++c.n_gamma;
  double ratio = std::pow(c.C_hat_gamma / c.C_gamma, 1.0 / a);
  c.N0_gamma = std::max<std::int64_t>(c.n_gamma, static_cast<std::int64_t>(ratio) + 1);
  return c;
}

struct LambdaPsiResult {
  double lambda = 0.0;   // 1 - prod_{k<=run} (1 + A_gamma^N(k)/N^H)
  int run = 0;           // empirical decrease-run length used
  int theoretical_run = 0;  // floor(P_gamma N), clamped to the horizon
  bool condition_ok = false;  // A <= 0 up to the theoretical run
  int failing_k = 0;          // first k with A > 0 (run+1), 0 if none in horizon
};

/// Critical cost of the gamma family Psi^N. The product runs over the
/// empirical decrease run, which dominates floor(P_gamma N) whenever the
/// lemma applies.
inline LambdaPsiResult lambda_psi(const MarketModel& m, double gamma) {
  const CoeffTable& t = m.table();
  int N = m.steps();
  int gn = static_cast<int>(gamma * N);
  LambdaPsiResult r;
  r.run = decrease_run(t, gamma, N);
  auto gc = gamma_constants(t.params, gamma);
  double theo = std::floor(gc.P_gamma * N);
  r.theoretical_run = static_cast<int>(std::min<double>(theo, N - gn));
  r.condition_ok = r.theoretical_run <= r.run;
  r.failing_k = (r.run < N - gn) ? r.run + 1 : 0;
  double prod = 1.0;
  for (int k = 1; k <= r.run; ++k) prod *= 1.0 + a_gamma(t, gamma, N, k) / m.nh_scale();
  r.lambda = 1.0 - prod;
  return r;
}

/// Lower bound for the critical cost from the 1-step sub-markets,
/// reduced to the extremal nodes (min u at all-down, max d at all-up).
inline double lower_bound_lowbd(const MarketModel& m) {
  const CoeffTable& t = m.table();
  double worst = 1.0;
  for (int n = 1; n <= m.steps(); ++n) {
    double theta = (t.sum_j(n) - t.g(n)) / m.nh_scale();
    double u_min = 1.0 - theta;            // 1 + u_n(-1)
    double d_inv = 1.0 / (1.0 + theta);    // 1 / (1 + d_n(+1))
    worst = std::min({worst, u_min, d_inv});
  }
  return 1.0 - worst;
}

/// Exact 1-step critical cost: max_n max(theta_n, 0) with
/// theta_n = (sum_{i<n} j_n(i) - g_n)/N^H.
inline double exact_one_step_critical(const MarketModel& m) {
  const CoeffTable& t = m.table();
  double best = 0.0;
  for (int n = 1; n <= m.steps(); ++n)
    best = std::max(best, (t.sum_j(n) - t.g(n)) / m.nh_scale());
  return best;
}

struct ArbitrageCertificate {
  double lambda = 0.0;
  double min_terminal_value = 0.0;
  DyadicProb profit_probability;
  PathWord witness_path;       // a profitable path when one exists, else the minimizer
  bool self_financing_pass = false;
  bool is_arbitrage = false;
  std::uint64_t nodes_visited = 0;
};

namespace detail {

struct ExhaustiveState {
  const MarketModel* market;
  const Strategy* strategy;
  double lambda;
  double tie_tol;
  std::uint64_t node_cap;
  std::uint64_t visited = 0;
  double min_value = std::numeric_limits<double>::infinity();
  PathWord min_path;
  std::optional<PathWord> witness;
  DyadicProb prob;

  void leaf(double value, const PathWord& at, int depth) {
    if (value < min_value) {
      min_value = value;
      min_path = padded(at);
    }
    if (value > tie_tol) {
      prob.add_pow2(depth);
      if (!witness) witness = padded(at);
    }
  }

  PathWord padded(const PathWord& p) const {
    PathWord out = p;
    out.signs.resize(market->steps(), -1);
    return out;
  }

  void dfs(PathWord& p, Holdings h, double price) {
    if (++visited > node_cap)
      throw std::length_error("verify_arbitrage_exhaustive: strategy support too large");
    if (auto e = strategy->entry(p)) h = *e;
    int d = p.size();
    if (d == market->steps()) {
      leaf(liquidation_value(h, price, lambda), p, d);
      return;
    }
    if (!strategy->has_extension(p) && h.stock == 0.0) {
      // Holdings frozen with no stock exposure: every continuation ends
      // at V_N = bond. Collapse the whole subtree.
      leaf(h.bond, p, d);
      return;
    }
    for (int sign : {-1, 1}) {
      double f = market->step_factor(d + 1, p, sign);
      p.signs.push_back(static_cast<std::int8_t>(sign));
      dfs(p, h, price * f);
      p.signs.pop_back();
    }
  }
};

}  // namespace detail

/// Enumerates every continuation that can influence the terminal value
/// (subtrees where the strategy is frozen without stock collapse to a
/// single leaf). Exact minimum, exact dyadic profit probability.
inline ArbitrageCertificate verify_arbitrage_exhaustive(const MarketModel& m,
                                                        const Strategy& s, double lambda,
                                                        double tie_tol = 1e-12) {
  detail::ExhaustiveState st{&m, &s, lambda, tie_tol, std::uint64_t{1} << 26};
  PathWord root;
  st.dfs(root, Holdings{}, m.initial_price());

  ArbitrageCertificate cert;
  cert.lambda = lambda;
  cert.min_terminal_value = st.min_value;
  cert.profit_probability = st.prob;
  cert.nodes_visited = st.visited;
  cert.witness_path = st.witness ? *st.witness : st.min_path;

  cert.self_financing_pass = true;
  std::vector<PathWord> audit_paths{cert.witness_path, st.min_path,
                                    PathWord::all_down(m.steps())};
  for (const auto& p : audit_paths)
    if (!check_self_financing(m, s, p, lambda).pass) cert.self_financing_pass = false;

  cert.is_arbitrage = cert.min_terminal_value >= -tie_tol &&
                      cert.profit_probability.positive() && cert.self_financing_pass;
  return cert;
}

enum class CensusMethod { exhaustive, monte_carlo };

struct CensusResult {
  int n = 0;
  CensusMethod method = CensusMethod::exhaustive;
  std::uint64_t count_u = 0;  // nodes with u_n <= 0
  std::uint64_t count_d = 0;  // nodes with d_n >= 0
  double ratio = 0.0;         // |A_n^H| / 2^{n-1}
  double ci_low = 0.0, ci_high = 0.0;  // 99% Wilson interval (MC only)
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Exact census of the level-n arbitrage points by full enumeration of
/// {-1,1}^{n-1}. Each word's Y is evaluated by a fresh sequential dot
/// product, which makes the count sign-symmetric bit for bit.
inline CensusResult census_exhaustive(const CoeffTable& t, int n, int threads = 0) {
  if (n < 1 || n > t.n_max) throw std::out_of_range("census_exhaustive: n");
  if (n - 1 > 26) throw std::length_error("census_exhaustive: n-1 <= 26 required");
  CensusResult r;
  r.n = n;
  r.method = CensusMethod::exhaustive;
  const double g = t.g(n);
  if (n == 1) {
    r.ratio = 0.0;  // Y_1 = 0 and g_1 > 0: the root is never an arbitrage point
    return r;
  }
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  const double* row = t.j_cells.data() + CoeffTable::row_offset(n);
  const int nthreads = effective_threads(threads);
  std::vector<std::uint64_t> cu(nthreads, 0), cd(nthreads, 0);
  const std::uint64_t chunk = (total + nthreads - 1) / nthreads;
  parallel_for(static_cast<std::size_t>(nthreads), [&](std::size_t tid) {
    std::uint64_t lo = tid * chunk, hi = std::min(total, lo + chunk);
    std::uint64_t u = 0, d = 0;
    for (std::uint64_t word = lo; word < hi; ++word) {
      double y = 0.0;
      for (int i = 0; i < n - 1; ++i)
        y += (word >> i) & 1 ? row[i] : -row[i];
      if (y <= -g) ++u;
      if (y >= g) ++d;
    }
    cu[tid] = u;
    cd[tid] = d;
  }, nthreads);
  for (int i = 0; i < nthreads; ++i) {
    r.count_u += cu[i];
    r.count_d += cd[i];
  }
  r.ratio = static_cast<double>(r.count_u + r.count_d) / static_cast<double>(total);
  return r;
}

/// 99% Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval_99(std::uint64_t hits,
                                                    std::uint64_t samples) {
  const double z = 2.5758293035489004;  // Phi^{-1}(0.995)
  double n = static_cast<double>(samples);
  double p = static_cast<double>(hits) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// Monte Carlo estimate of P(|Y_n| >= g_n) with a 99% Wilson interval.
/// Counter-based streams keep the result independent of thread count.
inline CensusResult census_monte_carlo(const CoeffTable& t, int n, std::uint64_t samples,
                                       std::uint64_t seed, int threads = 0) {
  if (n < 1 || n > t.n_max) throw std::out_of_range("census_monte_carlo: n");
  if (samples < 1000) throw std::invalid_argument("census_monte_carlo: samples >= 1000");
  CensusResult r;
  r.n = n;
  r.method = CensusMethod::monte_carlo;
  r.samples = samples;
  r.seed = seed;
  const double g = t.g(n);
  if (n == 1) return r;
  const double* row = t.j_cells.data() + CoeffTable::row_offset(n);
  CounterRng rng{seed};
  const int nthreads = effective_threads(threads);
  std::vector<std::uint64_t> cu(nthreads, 0), cd(nthreads, 0);
  const std::uint64_t chunk = (samples + nthreads - 1) / nthreads;
  parallel_for(static_cast<std::size_t>(nthreads), [&](std::size_t tid) {
    std::uint64_t lo = tid * chunk, hi = std::min(samples, lo + chunk);
    std::uint64_t u = 0, d = 0;
    for (std::uint64_t s = lo; s < hi; ++s) {
      double y = 0.0;
      for (int i = 0; i < n - 1; ++i) y += rng.sign(s, i) * row[i];
      if (y <= -g) ++u;
      if (y >= g) ++d;
    }
    cu[tid] = u;
    cd[tid] = d;
  }, nthreads);
  for (int i = 0; i < nthreads; ++i) {
    r.count_u += cu[i];
    r.count_d += cd[i];
  }
  std::uint64_t hits = r.count_u + r.count_d;
  r.ratio = static_cast<double>(hits) / static_cast<double>(samples);
  auto [lo, hi] = wilson_interval_99(hits, samples);
  r.ci_low = lo;
  r.ci_high = hi;
  return r;
}

struct NuEstimate {
  double nu_hat = 0.0;  // a LOWER estimate of sup_n |A_n^H|/2^{n-1}
  std::vector<CensusResult> levels;
};

/// Probes the arbitrage-point density on the given levels: exhaustive
/// where cheap, MC upper confidence bound elsewhere.
inline NuEstimate nu_H_estimate(const CoeffTable& t, const std::vector<int>& n_list,
                                std::uint64_t mc_samples, std::uint64_t seed,
                                int exhaustive_limit = 21) {
  NuEstimate e;
  for (int n : n_list) {
    CensusResult c = (n - 1 < exhaustive_limit)
                         ? census_exhaustive(t, n)
                         : census_monte_carlo(t, n, mc_samples, seed);
    double contribution =
        c.method == CensusMethod::exhaustive ? c.ratio : c.ci_high;
    e.nu_hat = std::max(e.nu_hat, contribution);
    e.levels.push_back(std::move(c));
  }
  return e;
}

}  // namespace fbm
