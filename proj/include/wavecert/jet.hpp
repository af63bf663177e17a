#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "wavecert/errors.hpp"

namespace wavecert::numerics {

// Truncated Taylor series (value + derivatives) at a point: coefficient c[k]
// is f^(k)(x0)/k!. Arithmetic propagates derivatives exactly, which is how
// the built-in generators expose closed-form Fourier derivative oracles of
// arbitrary order without symbolic algebra.
class Jet {
 public:
  Jet() : c_(1, 0.0) {}
  explicit Jet(std::size_t order, double constant = 0.0) : c_(order + 1, 0.0) {
    c_[0] = constant;
  }

  static Jet variable(double x0, std::size_t order) {
    Jet j(order);
    j.c_[0] = x0;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }
  static Jet constant(double v, std::size_t order) { return Jet(order, v); }

  std::size_t order() const { return c_.size() - 1; }
  double coeff(std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
  double value() const { return c_[0]; }

  // k!-scaled coefficient, i.e. the k-th derivative.
  double derivative(std::size_t k) const {
    double fact = 1.0;
    for (std::size_t i = 2; i <= k; ++i) fact *= static_cast<double>(i);
    return coeff(k) * fact;
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r(std::max(a.order(), b.order()));
    for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = a.coeff(k) + b.coeff(k);
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r(std::max(a.order(), b.order()));
    for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = a.coeff(k) - b.coeff(k);
    return r;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(std::max(a.order(), b.order()));
    for (std::size_t n = 0; n < r.c_.size(); ++n) {
      double s = 0.0;
      for (std::size_t k = 0; k <= n; ++k) s += a.coeff(k) * b.coeff(n - k);
      r.c_[n] = s;
    }
    return r;
  }
  friend Jet operator*(double s, const Jet& a) {
    Jet r = a;
    for (auto& v : r.c_) v *= s;
    return r;
  }
  friend Jet operator*(const Jet& a, double s) { return s * a; }
  friend Jet operator+(const Jet& a, double s) {
    Jet r = a;
    r.c_[0] += s;
    return r;
  }
  friend Jet operator+(double s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, double s) { return a + (-s); }
  friend Jet operator-(double s, const Jet& a) { return s + (-1.0) * a; }
  friend Jet operator-(const Jet& a) { return -1.0 * a; }

  friend Jet operator/(const Jet& u, const Jet& v) {
    if (v.coeff(0) == 0.0) throw Error("Jet division by zero value");
    Jet r(std::max(u.order(), v.order()));
    for (std::size_t n = 0; n < r.c_.size(); ++n) {
      double s = u.coeff(n);
      for (std::size_t k = 1; k <= n; ++k) s -= v.coeff(k) * r.c_[n - k];
      r.c_[n] = s / v.coeff(0);
    }
    return r;
  }

  friend Jet exp(const Jet& a) {
    Jet r(a.order());
    r.c_[0] = std::exp(a.coeff(0));
    for (std::size_t n = 1; n <= a.order(); ++n) {
      double s = 0.0;
      for (std::size_t k = 1; k <= n; ++k)
        s += static_cast<double>(k) * a.coeff(k) * r.c_[n - k];
      r.c_[n] = s / static_cast<double>(n);
    }
    return r;
  }

  friend void sincos(const Jet& a, Jet& s, Jet& c) {
    s = Jet(a.order());
    c = Jet(a.order());
    s.c_[0] = std::sin(a.coeff(0));
    c.c_[0] = std::cos(a.coeff(0));
    for (std::size_t n = 1; n <= a.order(); ++n) {
      double ds = 0.0, dc = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        ds += static_cast<double>(k) * a.coeff(k) * c.c_[n - k];
        dc += static_cast<double>(k) * a.coeff(k) * s.c_[n - k];
      }
      s.c_[n] = ds / static_cast<double>(n);
      c.c_[n] = -dc / static_cast<double>(n);
    }
  }
  friend Jet sin(const Jet& a) {
    Jet s, c;
    sincos(a, s, c);
    return s;
  }
  friend Jet cos(const Jet& a) {
    Jet s, c;
    sincos(a, s, c);
    return c;
  }

  // u^r for real r, u(x0) > 0.
  friend Jet pow(const Jet& u, double r) {
    if (!(u.coeff(0) > 0.0)) throw Error("Jet pow: base must be positive");
    Jet p(u.order());
    p.c_[0] = std::pow(u.coeff(0), r);
    for (std::size_t n = 1; n <= u.order(); ++n) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        s += (r * static_cast<double>(n - k) - static_cast<double>(k)) * u.coeff(n - k) *
             p.c_[k];
      }
      p.c_[n] = s / (static_cast<double>(n) * u.coeff(0));
    }
    return p;
  }

 private:
  std::vector<double> c_;
};

// Evaluates a polynomial (coefficients low to high) as a jet.
inline Jet poly_eval(const std::vector<double>& coeffs, const Jet& x) {
  Jet r = Jet::constant(0.0, x.order());
  for (std::size_t i = coeffs.size(); i-- > 0;) r = r * x + coeffs[i];
  return r;
}

} // namespace wavecert::numerics
