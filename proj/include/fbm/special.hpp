#pragma once

#include <cmath>
#include <stdexcept>

#include "fbm/quadrature.hpp"

namespace fbm {

/// Hurst exponent / volatility pair with the derived exponent
/// alpha = H - 1/2 used throughout the coefficient integrals.
struct HurstParams {
  double H;
  double sigma;
  double alpha;

  HurstParams(double hurst, double vol) : H(hurst), sigma(vol), alpha(hurst - 0.5) {
    if (!(hurst > 0.5) || !(hurst < 1.0))
      throw std::domain_error("Hurst exponent must lie in (1/2, 1)");
    if (!(vol > 0.0)) throw std::domain_error("sigma must be positive");
  }
};

/// c_H = sqrt(2H Gamma(3/2-H) / (Gamma(H+1/2) Gamma(2-2H))).
/// Tends to 1 as H -> 1/2+.
inline double normalizing_constant(const HurstParams& p) {
  return std::sqrt(2.0 * p.H * std::tgamma(1.5 - p.H) /
                   (std::tgamma(p.H + 0.5) * std::tgamma(2.0 - 2.0 * p.H)));
}

/// Integral of v^{-alpha} (1-v)^{alpha} over [lo, hi] in [0, 1].
/// Building block for I(z) and for the per-cell lower/upper envelopes.
inline double incomplete_beta_range(double lo, double hi, const HurstParams& p,
                                    double tol = 1e-12) {
  if (!(lo >= 0.0) || !(hi <= 1.0) || lo > hi)
    throw std::domain_error("incomplete_beta_range: need 0 <= lo <= hi <= 1");
  if (lo == hi) return 0.0;
  const double a = p.alpha;
  return TanhSinh().integrate(
      [a](double v) { return std::pow(v, -a) * std::pow(1.0 - v, a); }, lo, hi, tol);
}

/// I(z) = int_0^z v^{-alpha} (1-v)^{alpha} dv.
/// I(1) = alpha pi / sin(alpha pi) by the reflection formula.
inline double incomplete_beta_I(double z, const HurstParams& p, double tol = 1e-12) {
  return incomplete_beta_range(0.0, z, p, tol);
}

/// G(z) = I(z) - (1-z)^{alpha} z^{1-alpha}; strictly increasing on (0,1),
/// G(0+) = 0.
inline double gap_function_G(double z, const HurstParams& p, double tol = 1e-12) {
  if (!(z > 0.0) || !(z < 1.0)) throw std::domain_error("gap_function_G: z in (0,1)");
  return incomplete_beta_I(z, p, tol) -
         std::pow(1.0 - z, p.alpha) * std::pow(z, 1.0 - p.alpha);
}

}  // namespace fbm
