// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier than the unit suite; budget a few minutes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "fbm/arbitrage.hpp"
#include "fbm/asymptotics.hpp"
#include "fbm/coefficients.hpp"
#include "fbm/market.hpp"
#include "fbm/rng.hpp"
#include "fbm/strategy.hpp"

using namespace fbm;

namespace {

int g_failures = 0;

void report(int k, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", k, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. coefficient sandwich and g-envelope bounds for three Hurst values
void criterion_1(const CoeffTable& t55, const CoeffTable& t75,
                 const CoeffTable& t90) {
  bool pass = true;
  std::string detail;
  for (const CoeffTable* t : {&t55, &t75, &t90}) {
    BoundReport r = validate_coeff_bounds(*t, 1e-8);
    pass = pass && r.pass;
    detail += "H=" + fmt(t->params.H) + " min_margin=" + fmt(r.min_margin) +
              " (" + r.worst_bound + ") ";
  }
  report(1, pass, detail);
}

// ---------------------------------------------------------------------------
// 2. closed-form integral identity vs direct cell-by-cell quadrature
void criterion_2() {
  HurstParams p(0.75, 1.0);
  CounterRng rng{20240514};
  bool pass = true;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    int m = 1 + static_cast<int>(rng.word(1, trial) % 400);
    int k = 1 + static_cast<int>(rng.word(2, trial) % (500 - m));
    double closed = phi_integral(m, k, p);
    double direct = 0.0;
    for (int i = 1; i <= m; ++i) direct += envelope_integral(m + k, i, p);
    double rel = std::abs(closed - direct) / std::abs(direct);
    worst = std::max(worst, rel);
    pass = pass && rel <= 1e-8;
  }
  report(2, pass, "50 seeded (m,k) pairs, worst relative diff " + fmt(worst));
}

// ---------------------------------------------------------------------------
// 3. last-step critical cost scales like 1/sqrt(N); the strategy survives
//    costs lambda_N = N^-0.6 at the largest grid size
void criterion_3(const std::shared_ptr<const CoeffTable>& t75) {
  std::vector<double> scaled;
  for (int N = 64; N <= 1024; N *= 2) {
    MarketModel m(t75, N);
    scaled.push_back(lambda_phi(m, N) * std::sqrt(static_cast<double>(N)));
  }
  double lo = *std::min_element(scaled.begin(), scaled.end());
  double hi = *std::max_element(scaled.begin(), scaled.end());
  bool pass = lo > 0.0 && (hi - lo) / hi < 0.5;

  int N = 1024;
  MarketModel m(t75, N);
  double lamN = std::pow(static_cast<double>(N), -0.6);
  // the event-node price at depth N-1 is ~1e-150, far below any absolute
  // tie tolerance; off-event leaf values are exact zeros, so compare at 0
  auto cert = verify_arbitrage_exhaustive(m, sottinen_strategy(m, lamN, N),
                                          lamN, 0.0);
  pass = pass && cert.is_arbitrage;
  report(3, pass,
         "lambda*sqrt(N) in [" + fmt(lo) + ", " + fmt(hi) + "], N=1024 at N^-0.6 arbitrage=" +
             (cert.is_arbitrage ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 4. gamma-family drift bound (vacuous below N0) and increasing lambda_psi
void criterion_4(const std::shared_ptr<const CoeffTable>& t75) {
  HurstParams p(0.75, 1.0);
  const double gamma = 0.25;
  GammaConstants gc = gamma_constants(p, gamma);
  bool pass = true;
  std::string note;

  std::vector<int> grid;
  for (int N = 64; N <= 1024; N *= 2) grid.push_back(N);

  // the theoretical bound applies from N0 on; certify it wherever the grid
  // reaches, and record explicitly when it reaches nowhere
  double bound_checked = 0;
  for (int N : grid) {
    if (N < gc.N0_gamma) continue;
    int kmax = static_cast<int>(gc.P_gamma * N);
    double cap = -gc.C_gamma * std::pow(static_cast<double>(N), p.alpha) +
                 gc.C_hat_gamma;
    pass = pass && cap <= 0.0;
    for (int k = 1; k <= kmax; ++k)
      pass = pass && a_gamma(*t75, gamma, N, k) <= cap;
    ++bound_checked;
  }
  if (bound_checked == 0) note = "drift bound vacuous (N0=" +
                                 std::to_string(gc.N0_gamma) + " above grid); ";

  double prev = -1.0, min_rate = 1e300;
  for (int N : grid) {
    MarketModel m(t75, N);
    double lam = lambda_psi(m, gamma).lambda;
    pass = pass && lam > prev;
    prev = lam;
    min_rate = std::min(min_rate, -std::log1p(-lam) / std::sqrt(double(N)));
  }
  pass = pass && min_rate > 0.0;
  report(4, pass, note + "lambda_psi increasing to " + fmt(prev) +
                      ", min rate constant " + fmt(min_rate));
}

// ---------------------------------------------------------------------------
// 5. exhaustive boundary oracle for the gamma family on a small run
void criterion_5(const std::shared_ptr<const CoeffTable>& t75) {
  // reduced-gamma fallback: the theoretical run window never reaches desk
  // sizes, so certify the empirical run at gamma = 0.4 instead
  const double gamma = 0.4;
  int N = 0, K = 0;
  for (int cand = 16; cand <= 1024; cand *= 2) {
    MarketModel m(t75, cand);
    int run = lambda_psi(m, gamma).run;
    if (run >= 1 && run <= 16) { N = cand; K = run; break; }
  }
  if (N == 0) { report(5, false, "no grid size with a usable decrease run"); return; }

  MarketModel m(t75, N);
  double lam_psi = lambda_psi(m, gamma).lambda;
  int gn = static_cast<int>(gamma * N);

  // terminal value at cost lam, minimized over all 2^K continuations of the
  // all-down prefix (the strategy holds the short for K steps)
  auto min_terminal = [&](double lam) {
    Strategy s = gamma_strategy(m, lam, gamma);
    double best = 1e300;
    bool worst_is_all_up = false;
    for (std::uint32_t w = 0; w < (1u << K); ++w) {
      std::vector<int8_t> path(N, -1);
      for (int k = 0; k < K; ++k) path[gn + k] = (w >> k) & 1 ? 1 : -1;
      ValueSeries v = evaluate_value_process(m, s, PathWord{path}, lam);
      if (v.values.back() < best) {
        best = v.values.back();
        worst_is_all_up = (w + 1 == (1u << K));
      }
    }
    return std::pair{best, worst_is_all_up};
  };

  auto [at_psi, worst_up] = min_terminal(lam_psi);
  // bisect for the zero of the worst-case terminal value
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    double mid = 0.5 * (lo + hi);
    (min_terminal(mid).first > 0.0 ? lo : hi) = mid;
  }
  double boundary = 0.5 * (lo + hi);
  bool pass = std::abs(boundary - lam_psi) <= 1e-12 && worst_up &&
              std::abs(at_psi) <= 1e-12;
  report(5, pass, "N=" + std::to_string(N) + " run=" + std::to_string(K) +
                      " |boundary - lambda_psi|=" + fmt(std::abs(boundary - lam_psi)) +
                      (worst_up ? ", worst case all-up" : ", worst case NOT all-up"));
}

// ---------------------------------------------------------------------------
// 6. one-step critical cost identity and a full brute-force scan at N = 10
void criterion_6(const std::shared_ptr<const CoeffTable>& t75) {
  bool pass = true;
  std::string detail;
  for (int N : {10, 64, 256}) {
    MarketModel m(t75, N);
    double lb = lower_bound_lowbd(m);
    double ex = exact_one_step_critical(m);
    double cap = t75->c_X / std::sqrt(static_cast<double>(N));
    pass = pass && std::abs(lb - ex) <= 1e-12 && lb <= cap && ex <= cap;
    detail += "N=" + std::to_string(N) + ":" + fmt(ex) + " ";
  }

  // brute force at N = 10: every node, both trade directions
  MarketModel m(t75, 10);
  const CoeffTable& t = *t75;
  double nh = m.nh_scale();
  double brute = 0.0;
  for (int n = 1; n <= 9; ++n) {
    for (std::uint32_t w = 0; w < (1u << n); ++w) {
      std::vector<int8_t> prefix(n);
      for (int k = 0; k < n; ++k) prefix[k] = (w >> k) & 1 ? 1 : -1;
      double Y = excess_Y(t, n + 1, PathWord{prefix});
      // short at the node: profits iff lambda < -(Y + g)/N^H
      brute = std::max(brute, -(Y + t.g(n + 1)) / nh);
      // long at the node: profits iff lambda/(1-lambda) < (Y - g)/N^H
      double lam_long = (Y - t.g(n + 1)) / nh;
      if (lam_long > 0.0) brute = std::max(brute, lam_long / (1.0 + lam_long));
    }
  }
  pass = pass && std::abs(brute - exact_one_step_critical(m)) <= 1e-12;
  report(6, pass, detail + "brute(N=10)=" + fmt(brute));
}

// ---------------------------------------------------------------------------
// 7. arbitrage-point census invariants and the density / variance caps
void criterion_7(const CoeffTable& t55, const CoeffTable& t75,
                 const CoeffTable& t90) {
  bool pass = true;
  std::string note;

  CensusResult base = census_exhaustive(t75, 1);
  pass = pass && base.count_u + base.count_d == 0;

  double bound75 = (0.75 + 0.5) * (0.75 + 0.5) / (t75.c_H * t75.c_H) - 1.0;
  for (int n = 2; n <= 20; ++n) {
    CensusResult c = census_exhaustive(t75, n);
    pass = pass && c.count_u == c.count_d;
    if (bound75 < 1.0) pass = pass && c.ratio <= bound75;
  }

  CensusResult ex18 = census_exhaustive(t75, 18);
  CensusResult mc18 = census_monte_carlo(t75, 18, 1000000, 424242);
  pass = pass && ex18.ratio >= mc18.ci_low && ex18.ratio <= mc18.ci_high;
  note = "n=18 ratio " + fmt(ex18.ratio) + " in [" + fmt(mc18.ci_low) + ", " +
         fmt(mc18.ci_high) + "]";

  for (const CoeffTable* t : {&t55, &t75, &t90}) {
    const HurstParams& p = t->params;
    double cap = p.sigma * p.sigma *
                 (1.0 - t->c_H * t->c_H / ((p.H + 0.5) * (p.H + 0.5)));
    for (int n = 2; n <= std::min(t->n_max, 500); ++n)
      pass = pass && t->sum_j_sq(n) <= cap;
  }
  report(7, pass, note);
}

// ---------------------------------------------------------------------------
// 8. scaled shorting family on the dyadic grid: exact event mass, monotone
//    bounds, and power-law rates
void criterion_8(const CoeffTable& t75) {
  std::vector<int> grid;
  for (int N = 64; N <= 16384; N *= 2) grid.push_back(N);
  AA1Report rep = aa1_verify(t75, 1.0, aa1_schedule(0.75, 1.25, grid));
  bool pass = true;
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    const AA1Row& r = rep.rows[k];
    DyadicProb prob = r.profit_probability;
    prob.normalize();
    pass = pass && prob.num == 1 && prob.log2_den == rep.n_H - 1;
    pass = pass && r.admissible && r.min_value == -r.c_N;
    if (k > 0) {
      pass = pass && r.c_N < rep.rows[k - 1].c_N;
      pass = pass && r.C_N > rep.rows[k - 1].C_N;
    }
  }
  pass = pass && std::abs(rep.slope_c - (-0.25)) <= 0.05;
  pass = pass && std::abs(rep.slope_C - 0.25) <= 0.05;
  report(8, pass, "n_H=" + std::to_string(rep.n_H) + " slope_c=" +
                      fmt(rep.slope_c) + " slope_C=" + fmt(rep.slope_C));
}

// ---------------------------------------------------------------------------
// 9. impossibility above c_X/sqrt(N), plus the frictionless census cap
void criterion_9(const std::shared_ptr<const CoeffTable>& t75) {
  const int N = 14;
  MarketModel m(t75, N);
  double lam = t75->c_X / std::sqrt(static_cast<double>(N));
  CounterRng rng{777};
  bool pass = true;
  double worst_leaf = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    OneStepSpec spec;
    spec.n = 1 + static_cast<int>(rng.word(0, trial) % 9);
    std::size_t nodes = std::size_t{1} << spec.n;
    spec.shorted.resize(nodes);
    spec.quantity.resize(nodes);
    for (std::size_t x = 0; x < nodes; ++x) {
      std::uint64_t w = rng.word(1000 + trial, x);
      spec.shorted[x] = w & 1;
      spec.quantity[x] = 0.25 + static_cast<double>((w >> 1) % 1024) / 256.0;
    }
    Strategy s = one_step_strategy(m, lam, spec);

    // exhaustive leaf maximum via direct evaluation of all 2^N paths
    for (std::uint32_t w = 0; w < (1u << N); ++w) {
      std::vector<int8_t> path(N);
      for (int k = 0; k < N; ++k) path[k] = (w >> k) & 1 ? 1 : -1;
      ValueSeries v = evaluate_value_process(m, s, PathWord{path}, lam);
      worst_leaf = std::max(worst_leaf, v.values.back());
    }

    // frictionless bound: P(V > 0) <= 1/2 + |A_{n+1}| / 2^{n+1}
    Strategy s0 = one_step_strategy(m, 0.0, spec);
    auto cert0 = verify_arbitrage_exhaustive(m, s0, 0.0);
    pass = pass && cert0.profit_probability.value() <=
                       aa2_upper_bound(*t75, spec.n);
  }
  pass = pass && worst_leaf <= 1e-10;
  report(9, pass, "100 seeded specs, max leaf value " + fmt(worst_leaf) +
                      " at lambda=" + fmt(lam));
}

// ---------------------------------------------------------------------------
// 10. variance-scaling diagnostic converges toward sigma^2
void criterion_10() {
  HurstParams p(0.75, 1.0);
  std::vector<double> err;
  std::string series;
  for (int N : {512, 1024, 2048, 4096, 8192}) {
    double V = variance_scaling(p, N, 1e-9);
    err.push_back(std::abs(V - 1.0));
    series += "V(" + std::to_string(N) + ")=" + fmt(V) + " ";
  }
  int improving = 0;
  for (std::size_t k = 1; k < err.size(); ++k)
    if (err[k] <= err[k - 1]) ++improving;
  report(10, improving >= 3, series);
}

}  // namespace

int main() {
  auto start = std::chrono::steady_clock::now();
  HurstParams p55(0.55, 1.0), p75(0.75, 1.0), p90(0.9, 1.0);

  auto t55 = build_coeff_table(500, p55);
  auto t90 = build_coeff_table(500, p90);
  auto t75 = std::make_shared<const CoeffTable>(build_coeff_table(1024, p75));

  criterion_1(t55, *t75, t90);
  criterion_2();
  criterion_3(t75);
  criterion_4(t75);
  criterion_5(t75);
  criterion_6(t75);
  criterion_7(t55, *t75, t90);
  criterion_8(*t75);
  criterion_9(t75);
  criterion_10();

  double wall = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 10 criteria passed (%.1f s)\n", 10 - g_failures, wall);
  return g_failures == 0 ? 0 : 1;
}
