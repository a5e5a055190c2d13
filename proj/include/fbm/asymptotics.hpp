#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fbm/arbitrage.hpp"

namespace fbm {

/// Power-law schedule: lambda_N = N^{-p}, q_N = N^{q_exponent}. With
/// H < q_exponent < p the scaled position grows faster than N^H while the
/// total cost lambda_N * q_N still vanishes.
struct AA1Schedule {
  double H = 0.0;
  double p = 0.0;
  double q_exponent = 0.0;
  std::vector<int> N_grid;
};

inline AA1Schedule aa1_schedule(double H, double p, std::vector<int> N_grid) {
  if (!(p > H)) throw std::invalid_argument("aa1_schedule: p > H required");
  return AA1Schedule{H, p, 0.5 * (H + p), std::move(N_grid)};
}

struct AA1Row {
  int N = 0;
  double lambda_N = 0.0;
  double q_N = 0.0;
  double c_N = 0.0;  // admissibility level, attained at the shorting step
  double C_N = 0.0;  // guaranteed profit level on the event
  DyadicProb profit_probability;
  bool admissible = false;
  double min_value = 0.0;  // min over steps of V_i along the event path
};

struct AA1Report {
  int n_H = 0;
  std::vector<AA1Row> rows;
  double slope_c = 0.0;  // fitted d log c_N / d log N, expect (H-p)/2
  double slope_C = 0.0;  // fitted growth rate of C_N + c_N, expect (p-H)/2
};

namespace detail {

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = x.size();
  if (n < 2) return 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double d = static_cast<double>(n);
  return (d * sxy - sx * sy) / (d * sxx - sx * sx);
}

}  // namespace detail

/// Verifies the scaled shorting family q_N * phi^N(lambda_N, n_H) on its
/// activation event. Everything is closed-form on that event (off it the
/// value is identically 0), so the table only needs rows up to n_H even
/// for very large N.
inline AA1Report aa1_verify(const CoeffTable& t, double s0, const AA1Schedule& sched) {
  auto nh_opt = find_n_H(t, t.n_max);
  if (!nh_opt) throw std::runtime_error("aa1_verify: no persistent arbitrage level found");
  const int n0 = *nh_opt;
  AA1Report rep;
  rep.n_H = n0;
  const double theta = t.sum_j(n0) - t.g(n0);  // > 0 by choice of n0
  for (int N : sched.N_grid) {
    if (N < n0) throw std::invalid_argument("aa1_verify: every grid N must be >= n_H");
    AA1Row row;
    row.N = N;
    row.lambda_N = std::pow(static_cast<double>(N), -sched.p);
    row.q_N = std::pow(static_cast<double>(N), sched.q_exponent);
    const double nh = std::pow(static_cast<double>(N), sched.H);
    double S = s0;  // price at the all-down node of depth n0-1
    for (int n = 1; n < n0; ++n) {
      double f = 1.0 - (t.sum_j(n) + t.g(n)) / nh;
      if (!(f > 0.0)) throw std::domain_error("aa1_verify: price positivity fails");
      S *= f;
    }
    row.c_N = row.lambda_N * row.q_N * S;
    row.C_N = row.q_N * (-row.lambda_N + theta / nh) * S;  // up branch, the worse one
    double v_down = row.q_N * (-row.lambda_N + (t.sum_j(n0) + t.g(n0)) / nh) * S;
    row.min_value = std::min({0.0, -row.c_N, row.C_N, v_down});
    row.admissible = row.min_value >= -row.c_N;
    // Restricted enumeration over the two continuations of the activation
    // node: C_N is the smaller of the two terminal values, so both qualify
    // and the mass is exactly 2^{-(n0-1)} at every N.
    for (double v : {row.C_N, v_down})
      if (v >= row.C_N) row.profit_probability.add_pow2(n0);
    rep.rows.push_back(row);
  }
  std::vector<double> ns, cs, Cs;
  for (const auto& r : rep.rows) {
    ns.push_back(r.N);
    cs.push_back(r.c_N);
    // C_N = q_N*theta/N^H*S - c_N can sit below zero at moderate N even
    // though it increases toward +inf, so the growth-rate fit uses the
    // positive profit component q_N*theta/N^H*S = C_N + c_N.
    Cs.push_back(r.C_N + r.c_N);
  }
  rep.slope_c = detail::loglog_slope(ns, cs);
  rep.slope_C = detail::loglog_slope(ns, Cs);
  return rep;
}

/// Cost level above which no 1-step strategy profits: c_X / sqrt(N).
inline double no_arbitrage_threshold(const MarketModel& m) {
  return m.table().c_X / std::sqrt(static_cast<double>(m.steps()));
}

/// Frictionless upper bound on P(V_N >= alpha) for any 1-step strategy
/// trading at level n: 1/2 + |A_{n+1}| / 2^{n+1}.
inline double aa2_upper_bound(const CoeffTable& t, int n, int threads = 0) {
  CensusResult c = census_exhaustive(t, n + 1, threads);
  return 0.5 + static_cast<double>(c.count_u + c.count_d) /
                   std::ldexp(1.0, n + 1);
}

}  // namespace fbm
