#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "wavecert/generator.hpp"
#include "wavecert/jet.hpp"

namespace wavecert::generators {

namespace detail {

// C^7 smoothstep: S(0)=0, S(1)=1, S^{(k)} = 0 at both ends for k=1..7,
// S(u) + S(1-u) = 1.
inline const std::vector<double>& smoothstep7_coeffs() {
  static const std::vector<double> c = {0, 0, 0, 0, 0, 0, 0, 0, 6435.0, -40040.0,
                                        108108.0, -163800.0, 150150.0, -83160.0,
                                        25740.0, -3432.0};
  return c;
}

inline numerics::Jet smoothstep7(const numerics::Jet& u) {
  return numerics::poly_eval(smoothstep7_coeffs(), u);
}

inline std::vector<DecayEnvelope> fit_all_envelopes(
    const std::function<Complex(double, int)>& fourier, int max_order,
    const std::vector<double>& eps_by_order, double large_exponent, double support) {
  std::vector<DecayEnvelope> envs;
  envs.reserve(static_cast<std::size_t>(max_order) + 1);
  for (int m = 0; m <= max_order; ++m) {
    const double eps =
        m < static_cast<int>(eps_by_order.size()) ? eps_by_order[static_cast<std::size_t>(m)] : 1e-9;
    envs.push_back(fit_envelope(
        [&, m](double xi) { return std::abs(fourier(xi, m)); }, eps, large_exponent,
        support));
  }
  return envs;
}

} // namespace detail

// Mexican hat psi(x) = (1 - x^2) e^{-x^2/2};
// psi-hat(xi) = 4 pi^2 sqrt(2 pi) xi^2 e^{-2 pi^2 xi^2}.
inline GeneratorFunction mexican_hat() {
  GeneratorFunction g;
  g.label = "mexican_hat";
  g.max_order = 16;
  const double c = 4.0 * std::numbers::pi * std::numbers::pi *
                   std::sqrt(2.0 * std::numbers::pi);
  const double a = 2.0 * std::numbers::pi * std::numbers::pi;
  g.fourier = [c, a](double xi, int order) -> Complex {
    auto x = numerics::Jet::variable(xi, static_cast<std::size_t>(order));
    auto f = c * (x * x) * exp(-a * (x * x));
    return {f.derivative(static_cast<std::size_t>(order)), 0.0};
  };
  g.time_form = [](double x, int order) {
    auto t = numerics::Jet::variable(x, static_cast<std::size_t>(order));
    auto f = (1.0 - t * t) * exp(-0.5 * (t * t));
    return f.derivative(static_cast<std::size_t>(order));
  };
  g.declared_vanishing_moments = 2;
  g.envelopes = detail::fit_all_envelopes(g.fourier, g.max_order,
                                          {1.0, 1.0, 1e-9}, 12.0,
                                          std::numeric_limits<double>::infinity());
  // |psi^{(n)}(x)| <= C_n e^{-x^2/4}; C_n fitted once per order
  auto time_form = g.time_form;
  struct DecayFit {
    std::mutex mutex;
    std::map<int, double> consts;
  };
  auto fit = std::make_shared<DecayFit>();
  g.time_decay = [time_form, fit](int beta, double u) {
    std::lock_guard<std::mutex> lock(fit->mutex);
    auto it = fit->consts.find(beta);
    if (it == fit->consts.end()) {
      double cmax = 0.0;
      for (double x = 0.0; x <= 42.0; x += 1.0 / 64.0)
        cmax = std::max(cmax, std::abs(time_form(x, beta)) * std::exp(0.25 * x * x));
      it = fit->consts.emplace(beta, 1.05 * cmax).first;
    }
    return it->second * std::exp(-0.25 * u * u);
  };
  return g;
}

inline GeneratorFunction zero_generator() {
  GeneratorFunction g;
  g.label = "zero";
  g.max_order = 16;
  g.fourier = [](double, int) -> Complex { return {0.0, 0.0}; };
  g.time_form = [](double, int) { return 0.0; };
  g.time_decay = [](int, double) { return 0.0; };
  g.declared_vanishing_moments = 16;
  g.fourier_support = 1e-12;
  g.envelopes.assign(static_cast<std::size_t>(g.max_order) + 1,
                     DecayEnvelope{1.0, 1e-300, 1e-300, 12.0});
  return g;
}

// Dyadic Meyer-type orthonormal wavelet: |psi-hat| is a cosine-taper profile
// on 1/3 <= |xi| <= 4/3 and the half-integer phase e^{i pi xi} makes the
// integer translates orthonormal (exact duals with itself, U = Id).
inline GeneratorFunction meyer_orthonormal() {
  GeneratorFunction g;
  g.label = "meyer";
  g.max_order = 7;
  g.fourier_support = 4.0 / 3.0;

  // magnitude profile m(t), t > 0, as a jet; the falling branch is written
  // through the smoothstep symmetry S(u)+S(1-u)=1 so both edges evaluate
  // with full relative precision
  auto profile = [](double t, std::size_t order) -> numerics::Jet {
    using numerics::Jet;
    if (t <= 1.0 / 3.0 || t >= 4.0 / 3.0) return Jet::constant(0.0, order);
    auto tt = Jet::variable(t, order);
    if (t <= 2.0 / 3.0)
      return sin((std::numbers::pi / 2.0) *
                 detail::smoothstep7(3.0 * tt - 1.0));
    return sin((std::numbers::pi / 2.0) *
               detail::smoothstep7(2.0 - 1.5 * tt));
  };

  g.fourier = [profile](double xi, int order) -> Complex {
    const auto n = static_cast<std::size_t>(order);
    if (xi == 0.0) return {0.0, 0.0};
    if (xi < 0.0) {
      // \hat g real-generator symmetry: g^{(n)}(-xi) = (-1)^n conj(g^{(n)}(xi))
      Complex v = std::conj([&] {
        const double t = -xi;
        auto m = profile(t, n);
        Complex s{0.0, 0.0};
        const Complex phase = std::polar(1.0, std::numbers::pi * t);
        for (std::size_t k = 0; k <= n; ++k)
          s += detail::binomial(static_cast<int>(n), static_cast<int>(k)) *
               std::pow(Complex(0.0, std::numbers::pi), k) * phase *
               m.derivative(n - k);
        return s;
      }());
      return (n % 2 == 0 ? 1.0 : -1.0) * v;
    }
    auto m = profile(xi, n);
    Complex s{0.0, 0.0};
    const Complex phase = std::polar(1.0, std::numbers::pi * xi);
    for (std::size_t k = 0; k <= n; ++k)
      s += detail::binomial(static_cast<int>(n), static_cast<int>(k)) *
           std::pow(Complex(0.0, std::numbers::pi), k) * phase * m.derivative(n - k);
    return s;
  };
  g.declared_vanishing_moments = 8; // \hat g vanishes identically near 0
  g.envelopes = detail::fit_all_envelopes(g.fourier, g.max_order, {1.0, 1.0, 1.0},
                                          9.0, g.fourier_support);
  return g;
}

// Smooth even real bump in frequency, supported on lo <= |xi| <= hi. Not a
// dual pair member; used where a compactly supported spectrum with exact
// support control is wanted.
inline GeneratorFunction fourier_bump(double lo, double hi, double amplitude = 1.0) {
  if (!(0.0 < lo && lo < hi)) throw Error("fourier_bump: need 0 < lo < hi");
  GeneratorFunction g;
  g.label = "fourier_bump";
  g.max_order = 7;
  g.fourier_support = hi;
  const double width = hi - lo;
  auto bump = [lo, width, amplitude](double t, std::size_t order) -> numerics::Jet {
    using numerics::Jet;
    if (t <= lo || t >= lo + width) return Jet::constant(0.0, order);
    auto u = (Jet::variable(t, order) - lo) * (1.0 / width);
    const double uv = (t - lo) / width;
    auto s = uv <= 0.5 ? detail::smoothstep7(2.0 * u)
                       : detail::smoothstep7(2.0 * (1.0 - u));
    return amplitude * s;
  };
  g.fourier = [bump](double xi, int order) -> Complex {
    const auto n = static_cast<std::size_t>(order);
    const double t = std::abs(xi);
    auto b = bump(t, n);
    double v = b.derivative(n);
    if (xi < 0.0 && n % 2 == 1) v = -v; // even function
    return {v, 0.0};
  };
  g.declared_vanishing_moments = 8;
  g.envelopes = detail::fit_all_envelopes(g.fourier, g.max_order, {1.0, 1.0, 1.0},
                                          9.0, g.fourier_support);
  return g;
}

// a*g1 + b*g2 as a generator (Fourier-linear).
inline GeneratorFunction combine(double a, const GeneratorFunction& g1, double b,
                                 const GeneratorFunction& g2) {
  GeneratorFunction g;
  g.label = g1.label + "+" + g2.label;
  g.max_order = std::min(g1.max_order, g2.max_order);
  auto f1 = g1.fourier, f2 = g2.fourier;
  g.fourier = [a, b, f1, f2](double xi, int order) {
    return a * f1(xi, order) + b * f2(xi, order);
  };
  g.fourier_support = std::max(g1.fourier_support, g2.fourier_support);
  g.declared_vanishing_moments =
      std::min(g1.declared_vanishing_moments, g2.declared_vanishing_moments);
  g.envelopes.reserve(static_cast<std::size_t>(g.max_order) + 1);
  for (int m = 0; m <= g.max_order; ++m) {
    const auto& e1 = g1.envelope_for(m);
    const auto& e2 = g2.envelope_for(m);
    g.envelopes.push_back(DecayEnvelope{
        std::min(e1.eps, e2.eps), std::abs(a) * e1.c_small + std::abs(b) * e2.c_small,
        std::abs(a) * e1.c_large + std::abs(b) * e2.c_large,
        std::min(e1.large_exponent, e2.large_exponent)});
  }
  if (g1.time_form && g2.time_form) {
    auto t1 = g1.time_form, t2 = g2.time_form;
    g.time_form = [a, b, t1, t2](double x, int order) {
      return a * t1(x, order) + b * t2(x, order);
    };
  }
  if (g1.time_decay && g2.time_decay) {
    auto d1 = g1.time_decay, d2 = g2.time_decay;
    g.time_decay = [a, b, d1, d2](int beta, double u) {
      return std::abs(a) * d1(beta, u) + std::abs(b) * d2(beta, u);
    };
  }
  return g;
}

inline GeneratorFunction scaled(double c, const GeneratorFunction& g) {
  return combine(c, g, 0.0, zero_generator());
}

// The built-in exact-dual quadruple: the dyadic Meyer wavelet paired with
// itself. Exact for dilation A = 2 only.
inline GeneratorQuadruple bandlimited_orthonormal_pair(double A = 2.0) {
  if (std::abs(A - 2.0) > 1e-12)
    throw InvalidDilation("built-in orthonormal pair is dyadic (A = 2)");
  GeneratorQuadruple q;
  q.psi = meyer_orthonormal();
  q.phi = q.psi;
  q.psi_star = q.psi;
  q.phi_star = q.psi;
  q.exact_dual_declared = true;
  return q;
}

// Tabulated Fourier data with natural cubic spline interpolation. Derivative
// orders are limited to 2 and reported in max_order.
inline GeneratorFunction tabulated(const std::vector<double>& grid,
                                   const std::vector<Complex>& values) {
  if (grid.size() != values.size() || grid.size() < 4)
    throw ConfigError("tabulated generator: need >= 4 matching grid/value entries");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError("tabulated generator: grid must be strictly increasing");

  struct Spline {
    std::vector<double> x, y, m; // natural cubic: second derivatives m
    void build() {
      const std::size_t n = x.size();
      m.assign(n, 0.0);
      std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
      b[0] = 1.0;
      b[n - 1] = 1.0;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        a[i] = h0 / 6.0;
        b[i] = (h0 + h1) / 3.0;
        c[i] = h1 / 6.0;
        d[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
      }
      for (std::size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
      }
      m[n - 1] = d[n - 1] / b[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
    }
    double eval(double t, int order) const {
      if (t <= x.front() || t >= x.back()) return 0.0;
      std::size_t i =
          static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) -
                                   x.begin()) - 1;
      const double h = x[i + 1] - x[i];
      const double u = (x[i + 1] - t) / h, v = (t - x[i]) / h;
      switch (order) {
        case 0:
          return u * y[i] + v * y[i + 1] +
                 ((u * u * u - u) * m[i] + (v * v * v - v) * m[i + 1]) * h * h / 6.0;
        case 1:
          return (y[i + 1] - y[i]) / h +
                 (-(3.0 * u * u - 1.0) * m[i] + (3.0 * v * v - 1.0) * m[i + 1]) * h /
                     6.0;
        default:
          return u * m[i] + v * m[i + 1];
      }
    }
  };

  auto re = std::make_shared<Spline>();
  auto im = std::make_shared<Spline>();
  re->x = grid;
  im->x = grid;
  for (const auto& v : values) {
    re->y.push_back(v.real());
    im->y.push_back(v.imag());
  }
  re->build();
  im->build();

  GeneratorFunction g;
  g.label = "tabulated";
  g.max_order = 2;
  g.fourier_support = std::max(std::abs(grid.front()), std::abs(grid.back()));
  g.fourier = [re, im](double xi, int order) -> Complex {
    return {re->eval(xi, order), im->eval(xi, order)};
  };
  int vm = 0;
  while (vm <= 2 && std::abs(g.fourier(0.0, vm)) < 1e-9) ++vm;
  g.declared_vanishing_moments = vm;
  g.envelopes = detail::fit_all_envelopes(g.fourier, g.max_order,
                                          {1e-9, 1e-9, 1e-9}, 8.0, g.fourier_support);
  return g;
}

} // namespace wavecert::generators
