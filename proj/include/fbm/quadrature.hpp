#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fbm {

/// Thrown when an adaptive rule cannot reach the requested tolerance
/// within its refinement budget.
struct QuadratureError : std::runtime_error {
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

/// Tanh-sinh (double exponential) quadrature on a finite interval.
///
/// Nodes cluster double-exponentially at the endpoints, so integrable
/// algebraic endpoint singularities (x^p with p > -1) are absorbed without
/// analytic splitting. The integrand is evaluated at x strictly inside
/// (a, b); the distance to the nearer endpoint is computed in a
/// cancellation-free way, which matters for integrands like x^{-alpha}
/// with a ~ 0.
class TanhSinh {
 public:
  explicit TanhSinh(int max_levels = 14) : max_levels_(max_levels) {}

  template <class F>
  double integrate(F&& f, double a, double b, double tol) const {
    return integrate_endpoint([&](double x, double, double) { return f(x); }, a, b, tol);
  }

  /// Same rule, but the integrand receives (x, x - a, b - x) with the
  /// distance to the nearer endpoint taken straight from the node
  /// parameter. Integrands with (near-)singularities at an endpoint must
  /// use the distances: reconstructing them from x cancels catastrophically.
  template <class F>
  double integrate_endpoint(F&& f, double a, double b, double tol) const {
    double sign = 1.0;
    if (!(a < b)) {
      if (a == b) return 0.0;
      std::swap(a, b);
      sign = -1.0;  // distances passed to f keep the (a, b) order of the call
    }
    const double len = b - a;
    const double half = 0.5 * len;
    const bool flipped = sign < 0.0;

    auto eval = [&](double t, double offset) -> double {
      double v;
      if (t < 0.0) {
        double da = half * offset;
        v = flipped ? f(a + da, len - da, da) : f(a + da, da, len - da);
      } else {
        double db = half * offset;
        v = flipped ? f(b - db, db, len - db) : f(b - db, len - db, db);
      }
      if (!std::isfinite(v)) throw QuadratureError("tanh-sinh: non-finite integrand value");
      return v;
    };

    // Level 0: h = 1. Node parameter u = k*h, abscissa t = tanh(pi/2 sinh u).
    double h = 1.0;
    double sum = node_weight(0.0) * eval(0.0, 1.0);
    double abs_sum = std::abs(sum);
    sum += trunc_tail(eval, h, h, abs_sum);  // k = 1, 2, ... at spacing h
    double integral = sum * h;

    for (int level = 1; level <= max_levels_; ++level) {
      h *= 0.5;
      // New nodes are the odd multiples of the refined h.
      sum += trunc_tail(eval, h, 2.0 * h, abs_sum);
      double prev = integral;
      integral = sum * h;
      if (level >= 2) {
        double err = std::abs(integral - prev);
        // Roundoff floor: once the level difference is at the noise level
        // of the accumulated magnitude, refining cannot help.
        double floor = 4e-16 * abs_sum * h;
        if (err <= tol * std::max(std::abs(integral), 1e-250) || (level >= 4 && err <= floor))
          return sign * integral * half;
      }
    }
    throw QuadratureError("tanh-sinh did not converge to tol=" + std::to_string(tol));
  }

 private:
  int max_levels_;

  static double node_weight(double u) {
    double s = std::sinh(u);
    double c = std::cosh(0.5 * M_PI * s);
    return 0.5 * M_PI * std::cosh(u) / (c * c);
  }

  // Sum of w(u) * [f(t(u)) + f(-t(u))] over u = start, start+step, ...
  // truncated when the contribution underflows.
  template <class Eval>
  static double trunc_tail(Eval&& eval, double start, double step, double& abs_sum) {
    double sum = 0.0;
    for (double u = start; u < 6.2; u += step) {
      double s = std::sinh(u);
      double w = node_weight(u);
      // 1 - tanh(z) = 2 / (e^{2z} + 1), evaluated without cancellation.
      double offset = 2.0 / (std::exp(M_PI * s) + 1.0);
      if (offset < 1e-290) break;
      double t = 1.0 - offset;
      double term = w * (eval(t, offset) + eval(-t, offset));
      sum += term;
      abs_sum += std::abs(term);
      if (std::abs(term) < 1e-300 && u > 3.0) break;
    }
    return sum;
  }
};

/// Fixed-order Gauss-Legendre rule; nodes computed once per order by
/// Newton iteration on the Legendre recurrence.
class GaussLegendre {
 public:
  explicit GaussLegendre(int order) : x_(order), w_(order) {
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      // Chebyshev initial guess.
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double p1 = 0.0, p2 = 0.0;
      auto legendre = [n, &p1, &p2](double z) {
        p1 = 1.0;
        p2 = 0.0;
        for (int k = 0; k < n; ++k) {
          double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * k + 1.0) * z * p2 - k * p3) / (k + 1.0);
        }
      };
      for (int it = 0; it < 100; ++it) {
        legendre(x);
        double dx = p1 * (x * x - 1.0) / (n * (x * p1 - p2));
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      legendre(x);
      double dp = n * (x * p1 - p2) / (x * x - 1.0);
      x_[i] = -x;
      x_[n - 1 - i] = x;
      w_[i] = w_[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) sum += w_[i] * f(mid + half * x_[i]);
    return sum * half;
  }

  static const GaussLegendre& order16() { static const GaussLegendre g(16); return g; }
  static const GaussLegendre& order24() { static const GaussLegendre g(24); return g; }
  static const GaussLegendre& order32() { static const GaussLegendre g(32); return g; }
  static const GaussLegendre& order48() { static const GaussLegendre g(48); return g; }

 private:
  std::vector<double> x_, w_;
};

}  // namespace fbm
