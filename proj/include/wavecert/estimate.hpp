#pragma once

#include <cmath>
#include <limits>

#include "wavecert/errors.hpp"

namespace wavecert {

// A numerical result together with a bound on its combined truncation +
// discretization error. Every constant this library computes numerically is
// carried as one of these so downstream checks can budget for it.
struct EstimatedValue {
  double value = 0.0;
  double error_bound = 0.0;

  bool valid() const {
    return std::isfinite(value) && std::isfinite(error_bound) && error_bound >= 0.0;
  }

  EstimatedValue operator+(const EstimatedValue& o) const {
    return {value + o.value, error_bound + o.error_bound};
  }
  EstimatedValue operator-(const EstimatedValue& o) const {
    return {value - o.value, error_bound + o.error_bound};
  }
  EstimatedValue scaled(double c) const { return {c * value, std::abs(c) * error_bound}; }
};

inline EstimatedValue product(const EstimatedValue& a, const EstimatedValue& b) {
  return {a.value * b.value,
          std::abs(a.value) * b.error_bound + std::abs(b.value) * a.error_bound +
              a.error_bound * b.error_bound};
}

// |v|^r with first-order error propagation (r >= 0, v.value >= 0 expected).
inline EstimatedValue pow_estimate(const EstimatedValue& v, double r) {
  double base = std::max(v.value, 0.0);
  double val = std::pow(base, r);
  double hi = std::pow(base + v.error_bound, r);
  double lo = std::pow(std::max(base - v.error_bound, 0.0), r);
  return {val, std::max(hi - val, val - lo)};
}

// Two-sided decay envelope for a function g on the line:
//   |g(xi)| <= c_small * |xi|^eps            for |xi| <= 1,
//   |g(xi)| <= c_large * |xi|^-large_exponent for |xi| >= 1.
struct DecayEnvelope {
  double eps = 1.0;
  double c_small = 1.0;
  double c_large = 1.0;
  double large_exponent = 2.0;

  double bound(double xi) const {
    double a = std::abs(xi);
    if (a <= 1.0) return c_small * std::pow(a, eps);
    return c_large * std::pow(a, -large_exponent);
  }

  double sup_norm() const { return std::max(c_small, c_large); }

  // int_{|xi|>R} c_large |xi|^-q dxi  (two-sided), q > 1 required.
  double tail_integral(double radius) const {
    if (!(large_exponent > 1.0))
      throw NonIntegrableTail("decay exponent " + std::to_string(large_exponent) +
                              " <= 1: tail not integrable");
    double r = std::max(radius, 1.0);
    return 2.0 * c_large * std::pow(r, 1.0 - large_exponent) / (large_exponent - 1.0);
  }

  bool integrable() const { return large_exponent > 1.0; }
};

} // namespace wavecert
