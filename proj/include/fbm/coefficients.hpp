#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbm/parallel.hpp"
#include "fbm/quadrature.hpp"
#include "fbm/special.hpp"

namespace fbm {

// The market coefficients are the double integrals
//
//   j_n(i) = sigma c_H (H-1/2) int_{i-1}^{i} x^{1/2-H}
//              ( int_0^1 (v+n-1)^{H-1/2} (v+n-1-x)^{H-3/2} dv ) dx,
//   g_n    = sigma c_H (H-1/2) int_{n-1}^{n} x^{1/2-H} (n-x)^{H-1/2}
//              ( int_0^1 (y(n-x)+x)^{H-1/2} y^{H-3/2} dy ) dx.
//
// For j we evaluate the inner integral after the substitution
// s = 1 - (w-x)/w, w = v+n-1, which turns it into
//
//   int_0^1 (v+n-1)^a (v+n-1-x)^{a-1} dv
//     = x^{2a} int_{x/n}^{x/(n-1)} (1-s)^{a-1} s^{-2a-1} ds,   a = H-1/2.
//
// The same substitution with w running over (i, n] gives the whole column
// sum  sum_{m=i+1}^{n} j_m(i)  as a single integral, which is what makes
// the exact variance diagnostic affordable at large horizons.

namespace detail {

// Inner integral  int_{x/nn}^{x/dd} (1-s)^{a-1} s^{-2a-1} ds  via one of
// two changes of variable, chosen so that neither intermediate overflow
// (s^{-2a-1} for tiny s) nor endpoint cancellation (1-s for s near 1) can
// occur:
//   r-form, s = x r / nn (s_hi away from 1):
//     (x/nn)^{-2a} int_1^{nn/dd} (1 - x r/nn)^{a-1} r^{-2a-1} dr
//   w-form, w = 1 - s (s_hi near 1):
//     int_{(dd-x)/dd}^{(nn-x)/nn} w^{a-1} (1-w)^{-2a-1} dw
// dist_dd must be an exactly-computed dd - x whenever x can be close
// to dd; reconstructing it from x alone loses all relative accuracy.
inline double j_inner(double x, double nn, double dd, double a, double tol,
                      double dist_dd) {
  if (x > 0.9 * dd) {
    double w_lo = dist_dd / dd, w_hi = (nn - x) / nn;
    auto kw = [a](double w) {
      return std::pow(w, a - 1.0) * std::pow(1.0 - w, -2.0 * a - 1.0);
    };
    return TanhSinh().integrate(kw, w_lo, w_hi, tol);
  }
  auto kr = [&](double r) {
    return std::pow(1.0 - x * r / nn, a - 1.0) * std::pow(r, -2.0 * a - 1.0);
  };
  double ratio = nn / dd;
  double jr = ratio <= 2.0 ? GaussLegendre::order32().integrate(kr, 1.0, ratio)
                           : TanhSinh().integrate(kr, 1.0, ratio, tol);
  return std::pow(x / nn, -2.0 * a) * jr;
}

}  // namespace detail

/// j_n(i) for n >= 2, 1 <= i <= n-1, evaluated to ~tol relative accuracy.
inline double coeff_j(int n, int i, const HurstParams& p, double tol = 1e-10) {
  if (n < 2) throw std::out_of_range("coeff_j: n >= 2 required");
  if (i < 1 || i > n - 1) throw std::out_of_range("coeff_j: i in [1, n-1] required");
  const double a = p.alpha;
  const double nn = n, dd = n - 1.0;
  auto f = [&](double x, double, double db) {
    // db = i - x exactly; it equals dd - x only on the last cell, which is
    // the only one where x approaches dd.
    double dist_dd = (i == n - 1) ? db : dd - x;
    return std::pow(x, a) * detail::j_inner(x, nn, dd, a, 0.1 * tol, dist_dd);
  };
  const double lo = i - 1.0, hi = i;
  double cja = p.sigma * normalizing_constant(p) * a;
  if (i == 1 || i == n - 1) {
    // x^{-alpha} blows up at x=0 (i=1); the inner kernel loses smoothness
    // at x=n-1 (i=n-1). Both are endpoint effects.
    return cja * TanhSinh().integrate_endpoint(f, lo, hi, tol);
  }
  auto fp = [&](double x) { return f(x, x - lo, hi - x); };
  double est1 = GaussLegendre::order24().integrate(fp, lo, hi);
  double est2 = GaussLegendre::order32().integrate(fp, lo, hi);
  if (std::abs(est2 - est1) <= tol * std::max(std::abs(est2), 1e-250)) return cja * est2;
  return cja * TanhSinh().integrate_endpoint(f, lo, hi, tol);
}

/// g_n for n >= 1. The y^{H-3/2} endpoint singularity of the inner
/// integral and the x^{1/2-H} one of the outer (n = 1 only) are handled by
/// the double exponential rule.
inline double coeff_g(int n, const HurstParams& p, double tol = 1e-10) {
  if (n < 1) throw std::out_of_range("coeff_g: n >= 1 required");
  const double a = p.alpha;
  TanhSinh quad;
  auto f = [&](double x) {
    double c = n - x;
    auto ky = [&](double y) { return std::pow(y * c + x, a) * std::pow(y, a - 1.0); };
    double inner = quad.integrate(ky, 0.0, 1.0, 0.1 * tol);
    return std::pow(x, -a) * std::pow(c, a) * inner;
  };
  return p.sigma * normalizing_constant(p) * a *
         quad.integrate(f, n - 1.0, static_cast<double>(n), tol);
}

/// Closed form of int_0^m x^{-alpha} phi_{m+k}(x) dx via the incomplete
/// beta integral:  (m+k) I(m/(m+k)) - (m+k-1) I(m/(m+k-1)).
inline double phi_integral(int m, int k, const HurstParams& p, double tol = 1e-12) {
  if (m < 1 || k < 1) throw std::out_of_range("phi_integral: m, k >= 1 required");
  double n1 = m + k, n0 = m + k - 1.0;
  return n1 * incomplete_beta_I(m / n1, p, tol) - n0 * incomplete_beta_I(m / n0, p, tol);
}

/// I_n(i) = int_{i-1}^i x^{-alpha} [ (n-x)^alpha - (n-1-x)^alpha ] dx,
/// the envelope factor of the sandwich bounds for j_n(i).
inline double envelope_integral(int n, int i, const HurstParams& p, double tol = 1e-11) {
  const double a = p.alpha;
  auto f = [&](double x) {
    // (n-x)^a - (n-1-x)^a = (n-x)^a * (-expm1(a log1p(-1/(n-x)))),
    // cancellation-free for large n.
    double nx = n - x;
    double phi = std::pow(nx, a) * (-std::expm1(a * std::log1p(-1.0 / nx)));
    return std::pow(x, -a) * phi;
  };
  if (i == 1 || i == n - 1) return TanhSinh().integrate(f, i - 1.0, i, tol);
  return GaussLegendre::order32().integrate(f, i - 1.0, i);
}

/// Exact column sum  sum_{m=i+1}^{n_upper} j_m(i)  as one double integral.
inline double column_sum_j(int i, int n_upper, const HurstParams& p, double tol = 1e-10) {
  if (i < 1) throw std::out_of_range("column_sum_j: i >= 1 required");
  if (n_upper <= i) return 0.0;
  const double a = p.alpha;
  auto f = [&](double x, double, double db) {
    // the upper cell endpoint is dd = i itself, so db = i - x exactly
    return std::pow(x, a) *
           detail::j_inner(x, static_cast<double>(n_upper), static_cast<double>(i), a,
                           0.1 * tol, db);
  };
  return p.sigma * normalizing_constant(p) * a *
         TanhSinh().integrate_endpoint(f, i - 1.0, i, tol);
}

/// Precomputed coefficient table: triangular j(n,i) for 2 <= n <= n_max,
/// g(n) for 1 <= n <= n_max, plus the derived constants. Immutable after
/// build; shareable across threads.
struct CoeffTable {
  HurstParams params;
  int n_max = 0;
  double quad_tol = 0.0;
  double c_H = 0.0;
  double c_star = 0.0;   // sigma * c_H
  double g_limit = 0.0;  // sigma * c_H / (H + 1/2)
  double c_X = 0.0;      // c_star/(3/2 - H) + g_limit

  std::vector<double> j_cells;     // row n starts at (n-2)(n-1)/2, length n-1
  std::vector<double> g_values;    // g(n) at index n-1
  std::vector<double> row_sums;    // sum_{i<n} j(n,i) at index n-1 (0 for n=1)
  std::vector<double> row_sum_sq;  // sum_{i<n} j(n,i)^2 at index n-1

  static std::size_t row_offset(int n) {
    return static_cast<std::size_t>(n - 2) * (n - 1) / 2;
  }

  double j(int n, int i) const {
    if (n < 2 || n > n_max || i < 1 || i > n - 1)
      throw std::out_of_range("CoeffTable::j index");
    return j_cells[row_offset(n) + i - 1];
  }
  double g(int n) const {
    if (n < 1 || n > n_max) throw std::out_of_range("CoeffTable::g index");
    return g_values[n - 1];
  }
  double sum_j(int n) const {
    if (n < 1 || n > n_max) throw std::out_of_range("CoeffTable::sum_j index");
    return row_sums[n - 1];
  }
  double sum_j_sq(int n) const {
    if (n < 1 || n > n_max) throw std::out_of_range("CoeffTable::sum_j_sq index");
    return row_sum_sq[n - 1];
  }
};

/// Builds the full table; cells are independent, rows computed in parallel.
/// Deterministic for fixed (params, n_max, quad_tol).
inline CoeffTable build_coeff_table(int n_max, const HurstParams& p,
                                    double quad_tol = 1e-10, int threads = 0) {
  if (n_max < 2) throw std::invalid_argument("build_coeff_table: n_max >= 2 required");
  CoeffTable t{p};
  t.n_max = n_max;
  t.quad_tol = quad_tol;
  t.c_H = normalizing_constant(p);
  t.c_star = p.sigma * t.c_H;
  t.g_limit = t.c_star / (p.H + 0.5);
  t.c_X = t.c_star / (1.5 - p.H) + t.g_limit;

  t.j_cells.assign(CoeffTable::row_offset(n_max + 1), 0.0);
  t.g_values.assign(n_max, 0.0);
  t.row_sums.assign(n_max, 0.0);
  t.row_sum_sq.assign(n_max, 0.0);

  parallel_for(static_cast<std::size_t>(n_max), [&](std::size_t idx) {
    int n = static_cast<int>(idx) + 1;
    try {
      t.g_values[idx] = coeff_g(n, p, quad_tol);
      if (n >= 2) {
        double sum = 0.0, sumsq = 0.0;
        std::size_t off = CoeffTable::row_offset(n);
        for (int i = 1; i <= n - 1; ++i) {
          double v = coeff_j(n, i, p, quad_tol);
          t.j_cells[off + i - 1] = v;
          sum += v;
          sumsq += v * v;
        }
        t.row_sums[idx] = sum;
        t.row_sum_sq[idx] = sumsq;
      }
    } catch (const QuadratureError& e) {
      throw QuadratureError("row n=" + std::to_string(n) + ": " + e.what());
    }
  }, threads);
  return t;
}

/// Margins for every bound the coefficients must satisfy. A margin is
/// (satisfied amount); the bound holds iff the margin is >= -slack.
struct BoundReport {
  bool pass = false;
  double slack = 0.0;
  double min_margin = 0.0;
  std::string worst_bound;  // which invariant produced min_margin
  int worst_n = 0, worst_i = 0;

  std::vector<double> sandwich_lower;  // j - c* (n-1)^a I_n(i), per cell
  std::vector<double> sandwich_upper;  // c* n^a I_n(i) - j, per cell
  std::vector<double> positivity;      // j, per cell
  std::vector<double> g_lower;         // g(n) - g_limit, n >= 2
  std::vector<double> g_upper;         // g_limit (1+1/(n-1))^a - g(n), n >= 2
  std::vector<double> cx_margin;       // c_X n^a - (sum j + g), n >= 2
  std::vector<double> var_margin;      // sigma^2 (1 - c_H^2/(H+1/2)^2) - sum j^2, n >= 2
};

inline BoundReport validate_coeff_bounds(const CoeffTable& t, double slack = -1.0,
                                         int threads = 0) {
  const HurstParams& p = t.params;
  const double a = p.alpha;
  BoundReport r;
  r.slack = slack < 0.0 ? t.quad_tol : slack;
  std::size_t cells = t.j_cells.size();
  r.sandwich_lower.assign(cells, 0.0);
  r.sandwich_upper.assign(cells, 0.0);
  r.positivity = t.j_cells;
  int rows = t.n_max - 1;  // n = 2 .. n_max
  r.g_lower.assign(rows, 0.0);
  r.g_upper.assign(rows, 0.0);
  r.cx_margin.assign(rows, 0.0);
  r.var_margin.assign(rows, 0.0);
  const double var_bound =
      p.sigma * p.sigma * (1.0 - t.c_H * t.c_H / ((p.H + 0.5) * (p.H + 0.5)));

  parallel_for(static_cast<std::size_t>(rows), [&](std::size_t idx) {
    int n = static_cast<int>(idx) + 2;
    std::size_t off = CoeffTable::row_offset(n);
    double lo_scale = t.c_star * std::pow(n - 1.0, a);
    double hi_scale = t.c_star * std::pow(static_cast<double>(n), a);
    for (int i = 1; i <= n - 1; ++i) {
      double env = envelope_integral(n, i, p, 0.1 * t.quad_tol);
      double jv = t.j_cells[off + i - 1];
      r.sandwich_lower[off + i - 1] = jv - lo_scale * env;
      r.sandwich_upper[off + i - 1] = hi_scale * env - jv;
    }
    r.g_lower[idx] = t.g(n) - t.g_limit;
    r.g_upper[idx] = t.g_limit * std::pow(1.0 + 1.0 / (n - 1.0), a) - t.g(n);
    r.cx_margin[idx] = t.c_X * std::pow(static_cast<double>(n), a) -
                       (t.sum_j(n) + t.g(n));
    r.var_margin[idx] = var_bound - t.sum_j_sq(n);
  }, threads);

  r.pass = true;
  r.min_margin = std::numeric_limits<double>::infinity();
  auto scan = [&](const std::vector<double>& m, const char* name, bool per_cell) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k] < r.min_margin) {
        r.min_margin = m[k];
        r.worst_bound = name;
        if (per_cell) {
          // invert the triangular index
          int n = 2;
          while (CoeffTable::row_offset(n + 1) <= k) ++n;
          r.worst_n = n;
          r.worst_i = static_cast<int>(k - CoeffTable::row_offset(n)) + 1;
        } else {
          r.worst_n = static_cast<int>(k) + 2;
          r.worst_i = 0;
        }
      }
      if (m[k] < -r.slack) r.pass = false;
    }
  };
  scan(r.sandwich_lower, "sandwich_lower", true);
  scan(r.sandwich_upper, "sandwich_upper", true);
  scan(r.positivity, "positivity", true);
  scan(r.g_lower, "g_lower", false);
  scan(r.g_upper, "g_upper", false);
  scan(r.cx_margin, "cx_margin", false);
  scan(r.var_margin, "var_margin", false);
  return r;
}

/// Exact variance-scaling diagnostic
///   V(N) = Var( sum_{k<=N} X_k ) / N^{2H}
///        = sum_{i<=N} ( g_i + sum_{n=i+1}^{N} j_n(i) )^2 / N^{2H},
/// computed from closed column sums, no sampling involved.
inline double variance_scaling(const HurstParams& p, int N, double tol = 1e-9,
                               int threads = 0) {
  std::vector<double> coeff(N, 0.0);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t idx) {
    int i = static_cast<int>(idx) + 1;
    coeff[idx] = coeff_g(i, p, tol) + column_sum_j(i, N, p, tol);
  }, threads);
  double sum = 0.0;
  for (double c : coeff) sum += c * c;
  return sum / std::pow(static_cast<double>(N), 2.0 * p.H);
}

}  // namespace fbm
