#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "wavecert/estimate.hpp"
#include "wavecert/errors.hpp"
#include "wavecert/fft.hpp"
#include "wavecert/quadrature.hpp"

namespace wavecert::generators {

using Complex = std::complex<double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Sampled time-domain profile of g^{(beta)}, built once per (generator, order)
// by periodizing the inverse Fourier integral on a uniform frequency grid.
// The trapezoid sum at spacing dxi is exactly the periodization
// sum_q g(x + q/dxi) (Poisson summation), so the only errors are the alias
// terms, the frequency cutoff, interpolation, and roundoff - all of which are
// bounded and carried in eval_error / decay bounds.
struct TimeTable {
  double h = 0.0;
  double window = 0.0;
  std::vector<double> values; // g^{(beta)}(m h), m = -M..M
  double eval_error = 0.0;
  // (l, ||d^l/dxi^l [(2 pi i xi)^beta g-hat]||_L1) pairs for decay majorants
  std::vector<std::pair<int, double>> decay_norms;

  double interp(double x) const {
    const auto m = static_cast<std::int64_t>(values.size() / 2);
    const double t = x / h;
    auto i = static_cast<std::int64_t>(std::floor(t));
    if (i < -m + 1) i = -m + 1;
    if (i > m - 3) i = m - 3;
    const double u = t - static_cast<double>(i);
    const double f0 = values[static_cast<std::size_t>(i - 1 + m)];
    const double f1 = values[static_cast<std::size_t>(i + 0 + m)];
    const double f2 = values[static_cast<std::size_t>(i + 1 + m)];
    const double f3 = values[static_cast<std::size_t>(i + 2 + m)];
    // cubic Lagrange through the 4 nearest samples
    const double um1 = u + 1.0, u1 = u - 1.0, u2 = u - 2.0;
    return -f0 * u * u1 * u2 / 6.0 + f1 * um1 * u1 * u2 / 2.0 -
           f2 * um1 * u * u2 / 2.0 + f3 * um1 * u * u1 / 6.0;
  }

  double decay_bound(double u) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [l, norm] : decay_norms) {
      const double denom = l == 0 ? 1.0 : std::pow(kTwoPi * std::max(u, 1e-300), l);
      best = std::min(best, norm / denom);
    }
    return best;
  }
};

struct TimeCache {
  std::mutex mutex;
  std::map<int, TimeTable> tables;
};

// A generator modeled through its Fourier-domain derivative oracle.
// fourier(xi, m) returns \hat g^{(m)}(xi) for m <= max_order; envelopes[m]
// bounds |\hat g^{(m)}|. Time-domain values are derived (closed form when
// time_form is set, periodized tables otherwise).
struct GeneratorFunction {
  std::function<Complex(double, int)> fourier;
  int max_order = 0;
  std::vector<DecayEnvelope> envelopes;
  int declared_vanishing_moments = 0;
  std::string label;
  double fourier_support = std::numeric_limits<double>::infinity();
  std::function<double(double, int)> time_form;             // optional
  std::function<double(int, double)> time_decay;            // optional majorant
  std::shared_ptr<TimeCache> cache = std::make_shared<TimeCache>();

  const DecayEnvelope& envelope_for(int order) const {
    if (order < 0 || order >= static_cast<int>(envelopes.size()))
      throw OrderUnavailable(label + ": no envelope for derivative order " +
                             std::to_string(order));
    return envelopes[static_cast<std::size_t>(order)];
  }
  // The certification envelope (for \hat g^{(N+1)}; N=0 default).
  const DecayEnvelope& envelope() const { return envelope_for(std::min(1, max_order)); }

  Complex fourier_at(double xi, int order) const {
    if (order < 0 || order > max_order)
      throw OrderUnavailable(label + ": derivative order " + std::to_string(order) +
                             " exceeds max_order " + std::to_string(max_order));
    return fourier(xi, order);
  }

  bool band_limited() const { return std::isfinite(fourier_support); }
};

struct GeneratorQuadruple {
  GeneratorFunction psi, phi, psi_star, phi_star;
  bool exact_dual_declared = false;
};

inline int moments_required(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error("p must lie in (0,1]");
  return static_cast<int>(std::floor(1.0 / p - 1.0 + 1e-12));
}

// Fits envelope constants as the max of |fn| over the declared shape on a log
// grid; the shape exponents are declared, the constants never assumed.
inline DecayEnvelope fit_envelope(const std::function<double(double)>& magnitude,
                                  double eps, double large_exponent,
                                  double support = std::numeric_limits<double>::infinity()) {
  DecayEnvelope env{eps, 1e-300, 1e-300, large_exponent};
  const double hi = std::min(1e6, std::isfinite(support) ? support * 1.0000001 : 1e6);
  auto absorb = [&](double xi) {
    const double v = magnitude(xi);
    if (xi <= 1.0)
      env.c_small = std::max(env.c_small, v / std::pow(xi, eps));
    else
      env.c_large = std::max(env.c_large, v * std::pow(xi, large_exponent));
  };
  constexpr int kLogSamples = 1200;
  for (int i = 0; i <= kLogSamples; ++i)
    absorb(1e-6 * std::pow(hi / 1e-6, static_cast<double>(i) / kLogSamples));
  // dense linear sweep over the oscillation-prone band
  const double lin_hi = std::min(hi, 8.0);
  constexpr int kLinSamples = 4000;
  for (int i = 0; i <= kLinSamples; ++i)
    absorb(1e-3 + (lin_hi - 1e-3) * static_cast<double>(i) / kLinSamples);
  env.c_small *= 1.1;
  env.c_large *= 1.1;
  return env;
}

namespace detail {

// d^i/dxi^i [(2 pi i xi)^beta] = (2 pi i)^beta beta!/(beta-i)! xi^{beta-i}
inline Complex monomial_factor_derivative(int beta, int i, double xi) {
  if (i > beta) return {0.0, 0.0};
  double fall = 1.0;
  for (int k = 0; k < i; ++k) fall *= static_cast<double>(beta - k);
  Complex c = std::pow(Complex(0.0, kTwoPi), beta);
  return c * fall * std::pow(xi, beta - i);
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r *= static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// |d^l/dxi^l [(2 pi i xi)^beta g-hat(xi)]| via Leibniz over the oracle.
inline double weighted_derivative_abs(const GeneratorFunction& g, int beta, int l,
                                      double xi) {
  Complex s{0.0, 0.0};
  for (int i = 0; i <= std::min(l, beta); ++i)
    s += binomial(l, i) * monomial_factor_derivative(beta, i, xi) *
         g.fourier_at(xi, l - i);
  return std::abs(s);
}

inline double cutoff_radius(const GeneratorFunction& g, int beta) {
  if (g.band_limited()) return g.fourier_support;
  const auto& env = g.envelope_for(0);
  double r = 1.0;
  // stop when the weighted tail int_{|xi|>R} (2 pi xi)^beta c |xi|^-Q is tiny
  const double q = env.large_exponent - beta;
  if (q <= 1.0)
    throw NonIntegrableTail(g.label + ": envelope too weak for time table");
  while (r < 480.0) {
    const double tail =
        2.0 * env.c_large * std::pow(kTwoPi, beta) * std::pow(r, 1.0 - q) / (q - 1.0);
    if (tail < 1e-19 * (1.0 + env.c_large)) break;
    r *= 2.0;
  }
  return r;
}

inline const TimeTable& time_table(const GeneratorFunction& g, int beta) {
  std::lock_guard<std::mutex> lock(g.cache->mutex);
  auto it = g.cache->tables.find(beta);
  if (it != g.cache->tables.end()) return it->second;

  TimeTable table;
  constexpr double kPeriod = 256.0;     // alias period 1/dxi
  constexpr std::size_t kN = 1u << 18;  // 262144 -> h = 1/1024
  const double dxi = 1.0 / kPeriod;
  table.h = kPeriod / static_cast<double>(kN);
  table.window = 100.0;

  const double cutoff = cutoff_radius(g, beta);
  std::vector<Complex> freq(kN, Complex{0.0, 0.0});
  const auto half = static_cast<std::int64_t>(kN / 2);
  for (std::int64_t n = -half; n < half; ++n) {
    const double xi = static_cast<double>(n) * dxi;
    if (std::abs(xi) > cutoff) continue;
    const Complex v =
        g.fourier_at(xi, 0) * std::pow(Complex(0.0, kTwoPi * xi), beta) * dxi;
    freq[static_cast<std::size_t>((n + static_cast<std::int64_t>(kN)) %
                                  static_cast<std::int64_t>(kN))] = v;
  }
  numerics::fft_pow2(freq, +1);

  const auto m_max = static_cast<std::int64_t>(table.window / table.h);
  table.values.resize(static_cast<std::size_t>(2 * m_max + 1));
  double imag_residual = 0.0;
  for (std::int64_t m = -m_max; m <= m_max; ++m) {
    const Complex v = freq[static_cast<std::size_t>(
        (m + static_cast<std::int64_t>(kN)) % static_cast<std::int64_t>(kN))];
    table.values[static_cast<std::size_t>(m + m_max)] = v.real();
    imag_residual = std::max(imag_residual, std::abs(v.imag()));
  }

  // L1 norms of d^l [(2 pi i xi)^beta g-hat] for the decay majorant
  const double quad_hi = std::min(cutoff, 512.0);
  for (int l : {0, 2, 4}) {
    if (l > g.max_order) break;
    auto r = numerics::integrate_segment(
        [&](double xi) { return weighted_derivative_abs(g, beta, l, xi); }, -quad_hi,
        quad_hi, 1e-8, numerics::QuadratureOptions{1 << 15});
    table.decay_norms.emplace_back(l, r.value + r.error_bound);
  }
  if (g.max_order >= 6)
    for (int l : {6, std::min(7, g.max_order)}) {
      auto r = numerics::integrate_segment(
          [&](double xi) { return weighted_derivative_abs(g, beta, l, xi); }, -quad_hi,
          quad_hi, 1e-8, numerics::QuadratureOptions{1 << 15});
      table.decay_norms.emplace_back(l, r.value + r.error_bound);
      if (l == std::min(7, g.max_order)) break;
    }

  // alias bound: images live at distance >= q*period - window
  double alias = 0.0;
  for (int q = 1; q <= 64; ++q)
    alias += 2.0 * table.decay_bound(static_cast<double>(q) * kPeriod - table.window);
  // frequency cutoff bound
  double cut_tail = 0.0;
  if (!g.band_limited()) {
    const auto& env = g.envelope_for(0);
    const double qq = env.large_exponent - beta;
    cut_tail = 2.0 * env.c_large * std::pow(kTwoPi, beta) *
               std::pow(cutoff, 1.0 - qq) / (qq - 1.0);
  }
  // interpolation: cubic Lagrange, |f''''| <= int (2 pi xi)^{beta+4} |g-hat|
  auto r4 = numerics::integrate_segment(
      [&](double xi) {
        return std::pow(kTwoPi * std::abs(xi), beta + 4) * std::abs(g.fourier_at(xi, 0));
      },
      -quad_hi, quad_hi, 1e-8, numerics::QuadratureOptions{1 << 15});
  const double interp =
      0.0235 * std::pow(table.h, 4) * (r4.value + r4.error_bound);

  double sup = table.decay_bound(0.0);
  if (!table.decay_norms.empty()) sup = table.decay_norms.front().second;
  table.eval_error = alias + cut_tail + interp + imag_residual + 1e-14 * (1.0 + sup);

  auto [pos, inserted] = g.cache->tables.emplace(beta, std::move(table));
  (void)inserted;
  return pos->second;
}

} // namespace detail

struct TimePoint {
  double value = 0.0;
  double error = 0.0;
};

// g^{(beta)}(x): closed form when available, periodized table otherwise.
inline TimePoint time_value(const GeneratorFunction& g, int beta, double x) {
  if (g.time_form) return {g.time_form(x, beta), 0.0};
  const auto& table = detail::time_table(g, beta);
  if (std::abs(x) <= table.window - 1.0)
    return {table.interp(x), table.eval_error};
  return {0.0, table.decay_bound(std::abs(x))};
}

// Majorant for |g^{(beta)}(x)| valid on |x| >= u.
inline double time_decay_bound(const GeneratorFunction& g, int beta, double u) {
  if (g.time_decay) return g.time_decay(beta, u);
  return detail::time_table(g, beta).decay_bound(u);
}

// Bound for sum_{m >= 0} sup_{|x| >= from + m} |g^{(beta)}(x)| — the
// unit-lattice tail used when truncating translation sums.
inline double time_decay_lattice_tail(const GeneratorFunction& g, int beta,
                                      double from) {
  from = std::max(from, 1.0);
  if (g.time_decay) {
    double total = 0.0, u = from, prev = g.time_decay(beta, u);
    for (int m = 0; m < 4096; ++m) {
      total += prev;
      if (prev < 1e-300) return total;
      u += 1.0;
      const double next = g.time_decay(beta, u);
      if (m > 8 && next > 0.9 * prev)
        throw DivergentTail(g.label + ": time decay majorant too slow for lattice tail");
      prev = next;
    }
    return total + prev / (1.0 - 0.9); // geometric remainder, ratio <= 0.9
  }
  const auto& table = detail::time_table(g, beta);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [l, norm] : table.decay_norms) {
    if (l < 2) continue;
    const double c = norm / std::pow(kTwoPi, l);
    // B(from) + int_from^inf c u^{-l} du
    best = std::min(best, c * std::pow(from, -l) +
                              c * std::pow(from, 1.0 - l) / (l - 1.0));
  }
  return best;
}

// int g(x) x^beta dx = (-2 pi i)^{-beta} \hat g^{(beta)}(0)
inline EstimatedValue moment(const GeneratorFunction& g, int beta) {
  if (beta > g.max_order)
    throw OrderUnavailable(g.label + ": moment order " + std::to_string(beta) +
                           " exceeds max_order");
  const Complex m = g.fourier_at(0.0, beta) / std::pow(Complex(0.0, -kTwoPi), beta);
  return {m.real(), std::abs(m.imag())};
}

// g(x) = int \hat g(xi) e^{2 pi i x xi} dxi, via the line quadrature engine.
inline EstimatedValue time_eval(const GeneratorFunction& g, double x,
                                double rel_tol = 1e-10) {
  const auto& env = g.envelope_for(0);
  if (!env.integrable())
    throw NonIntegrableTail(g.label + ": order-0 envelope exponent <= 1");
  auto re = numerics::integrate_line(
      [&](double xi) {
        return (g.fourier_at(xi, 0) * std::polar(1.0, kTwoPi * x * xi)).real();
      },
      env, rel_tol);
  auto im = numerics::integrate_line(
      [&](double xi) {
        return (g.fourier_at(xi, 0) * std::polar(1.0, kTwoPi * x * xi)).imag();
      },
      env, rel_tol);
  return {re.value, re.error_bound + std::abs(im.value) + im.error_bound};
}

enum class Role { Synthesizer, Analyzer };

struct HypothesisReport {
  struct Row {
    std::string name;
    bool pass = false;
    double measured = 0.0;  // fitted constant, integral value, or |moment|
    double threshold = 0.0;
    double margin = 0.0;
  };
  int n = 0; // moment/smoothness order floor(1/p - 1)
  Role role = Role::Synthesizer;
  std::vector<Row> rows;
  bool all_pass = false;
  bool series_expansion = false; // extra xi*psi-hat in W^{N+2,1} flag
};

// Checks the certification hypotheses for one generator in one role: the
// derivative decay envelope, L1/L2 Sobolev integrability surrogates, and
// vanishing moments up to N = floor(1/p - 1).
inline HypothesisReport check_hypotheses(const GeneratorFunction& g, double p,
                                         Role role) {
  HypothesisReport rep;
  rep.n = moments_required(p);
  rep.role = role;
  const int n = rep.n;
  if (n + 3 > g.max_order)
    throw OrderUnavailable(g.label + ": hypotheses need derivative order " +
                           std::to_string(n + 3) + " > max_order " +
                           std::to_string(g.max_order));

  auto add = [&](std::string name, bool pass, double measured, double threshold,
                 double margin) {
    rep.rows.push_back({std::move(name), pass, measured, threshold, margin});
  };

  // decay of \hat g^{(N+1)}
  {
    const double required = role == Role::Synthesizer
                                ? g.envelope_for(n + 1).eps + n + 1.5
                                : g.envelope_for(n + 1).eps + 2.0 * n + 2.5;
    const auto& env = g.envelope_for(n + 1);
    double worst = 0.0; // sampled envelope violation ratio
    for (int i = 0; i <= 160; ++i) {
      const double xi = 1e-6 * std::pow(1e12, i / 160.0);
      const double v = std::abs(g.fourier_at(xi, n + 1));
      const double bound = env.bound(xi);
      if (bound > 0.0) worst = std::max(worst, v / bound);
    }
    const bool pass = env.large_exponent >= required - 1e-12 && worst <= 1.0 + 1e-9;
    add("decay(order " + std::to_string(n + 1) + ")", pass, env.large_exponent,
        required, env.large_exponent - required);
  }

  const int weight1 = role == Role::Synthesizer ? 0 : n + 1;
  for (int m = 0; m <= n + 3; ++m) {
    const auto& env = g.envelope_for(m);
    const double q_left = env.large_exponent - weight1;
    bool pass = q_left > 1.0;
    double integral = std::numeric_limits<double>::infinity();
    if (pass) {
      DecayEnvelope weighted{env.eps, env.c_small * 2.0,
                             env.c_large * std::pow(2.0, weight1), q_left};
      auto r = numerics::integrate_line(
          [&](double xi) {
            return std::pow(1.0 + std::abs(xi), weight1) *
                   std::abs(g.fourier_at(xi, m));
          },
          weighted, 1e-8);
      integral = r.value;
      pass = std::isfinite(integral);
    }
    add("W1(order " + std::to_string(m) + ", weight " + std::to_string(weight1) + ")",
        pass, integral, 1.0, q_left - 1.0);
  }

  const int weight2 = role == Role::Synthesizer ? 0 : n + 1;
  for (int m = 0; m <= n + 3; ++m) {
    const auto& env = g.envelope_for(m);
    const double q_left = 2.0 * env.large_exponent - 2.0 * weight2;
    bool pass = q_left > 1.0;
    double integral = std::numeric_limits<double>::infinity();
    if (pass) {
      DecayEnvelope weighted{2.0 * env.eps, env.c_small * env.c_small * 4.0,
                             env.c_large * env.c_large * std::pow(4.0, weight2),
                             q_left};
      auto r = numerics::integrate_line(
          [&](double xi) {
            const double v = std::abs(g.fourier_at(xi, m));
            return std::pow(1.0 + std::abs(xi), 2 * weight2) * v * v;
          },
          weighted, 1e-8);
      integral = r.value;
      pass = std::isfinite(integral);
    }
    add("W2(order " + std::to_string(m) + ", weight " + std::to_string(weight2) + ")",
        pass, integral, 1.0, q_left - 1.0);
  }

  double scale = std::max(1.0, g.envelope_for(0).sup_norm());
  for (int beta = 0; beta <= n; ++beta) {
    auto m = moment(g, beta);
    const double tol = 1e-8 * scale;
    const double a = std::abs(m.value) + m.error_bound;
    add("moment(" + std::to_string(beta) + ")", a <= tol, a, tol, tol - a);
  }

  rep.all_pass = true;
  for (const auto& row : rep.rows) rep.all_pass = rep.all_pass && row.pass;

  if (role == Role::Synthesizer) {
    bool ok = true;
    for (int m = 0; m <= n + 2 && ok; ++m)
      ok = g.envelope_for(m).large_exponent - 1.0 > 1.0;
    rep.series_expansion = ok;
  }
  return rep;
}

} // namespace wavecert::generators
