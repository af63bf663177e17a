#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavecert/estimate.hpp"
#include "wavecert/errors.hpp"
#include "wavecert/generator.hpp"
#include "wavecert/lattice.hpp"
#include "wavecert/quadrature.hpp"

namespace wavecert::cz {

using generators::GeneratorFunction;

// kappa_alpha(A) = A (2 A^alpha + sum_{k=0}^{alpha-1} A^k) / (A^{alpha+1} - 1)
inline double kappa_alpha(double A, int alpha) {
  if (!(A > 1.0)) throw InvalidDilation("kappa_alpha: dilation must exceed 1");
  double geom = 0.0;
  for (int k = 0; k < alpha; ++k) geom += std::pow(A, k);
  return A * (2.0 * std::pow(A, alpha) + geom) / (std::pow(A, alpha + 1) - 1.0);
}

struct CrossOptions {
  double rel_tol = 1e-9;                         // per-integral tolerance
  numerics::LatticeSumOptions lattice{1e-10, 1e-14, 1 << 20};
};

namespace detail {

using generators::Complex;
using generators::kTwoPi;

inline double falling_monomial(int alpha, int i, double xi) {
  if (i > alpha) return 0.0;
  double fall = 1.0;
  for (int k = 0; k < i; ++k) fall *= static_cast<double>(alpha - k);
  return fall * std::pow(xi, alpha - i);
}

inline double trinomial(int n, int i, int j) {
  // n! / (i! j! (n-i-j)!)
  return generators::detail::binomial(n, i) * generators::detail::binomial(n - i, j);
}

// (d/dxi)^n [ xi^alpha conj(phi-hat(xi)) psi-hat(xi + l) ]; n = 0 is the
// plain cross product, n = alpha + 2 the tau integrand.
inline Complex cross_derivative(const GeneratorFunction& psi,
                                const GeneratorFunction& phi, int alpha, int n,
                                double xi, double l) {
  Complex acc{0.0, 0.0};
  for (int i = 0; i <= std::min(n, alpha); ++i) {
    const double u = falling_monomial(alpha, i, xi);
    if (u == 0.0 && xi != 0.0) continue;
    for (int j = 0; i + j <= n; ++j) {
      const int k = n - i - j;
      acc += trinomial(n, i, j) * u * std::conj(phi.fourier_at(xi, j)) *
             psi.fourier_at(xi + l, k);
    }
  }
  return acc;
}

// int |xi|^m |phi-hat^{(j)}(xi)| dxi with its error bound
inline EstimatedValue weighted_l1(const GeneratorFunction& phi, int m, int j,
                                  double rel_tol) {
  auto f = [&](double xi) {
    return std::pow(std::abs(xi), m) * std::abs(phi.fourier_at(xi, j));
  };
  if (phi.band_limited()) {
    const double s = phi.fourier_support;
    return numerics::integrate_segment(f, -s, s, rel_tol,
                                       numerics::QuadratureOptions{1 << 15});
  }
  const auto& env = phi.envelope_for(j);
  const double q = env.large_exponent - m;
  if (q <= 1.0)
    throw DivergentTail(phi.label + ": |xi|^" + std::to_string(m) +
                        " phi^(" + std::to_string(j) + ") not integrable");
  DecayEnvelope weighted{1e-9, env.c_small, env.c_large, q};
  return numerics::integrate_line(f, weighted, rel_tol);
}

// Ingredients for the lattice-tail majorant of one (i,j,k) Leibniz term.
struct TermMajorant {
  double coeff = 0.0;      // trinomial * falling-factorial scale
  double m_phi = 0.0;      // int |xi|^{alpha-i} |phi^{(j)}|
  double sup_psi = 0.0;    // sup |psi^{(k)}|
  double c_psi = 0.0;      // envelope constant of psi^{(k)}
  double q_psi = 0.0;
  double c_phi = 0.0;      // envelope constant of phi^{(j)}
  double q_phi = 0.0;
  int weight = 0;          // alpha - i
};

// uniform bound for one Leibniz term at any l
inline double term_sup(const TermMajorant& t) { return t.coeff * t.m_phi * t.sup_psi; }

// sum_{|l| > L} bound(term l) for one Leibniz term, L >= 2: split each
// integral at |xi| = |l|/2; the inner part sees the psi-envelope at distance
// >= |l|/2, the outer part is the phi weighted-L1 tail.
inline double term_tail(const TermMajorant& t, double L) {
  double tail = 0.0;
  if (t.q_psi > 1.0) {
    tail += t.m_phi * t.c_psi * std::pow(2.0, t.q_psi) *
            std::pow(L, 1.0 - t.q_psi) / (t.q_psi - 1.0);
  } else {
    return std::numeric_limits<double>::infinity();
  }
  const double s = t.q_phi - t.weight - 1.0; // phi-tail integral exponent
  if (s > 1.0) {
    tail += t.sup_psi * 2.0 * t.c_phi * std::pow(2.0, s) * std::pow(L, 1.0 - s) /
            ((s) * (s - 1.0));
  } else {
    return std::numeric_limits<double>::infinity();
  }
  return 2.0 * t.coeff * tail;
}

// Shared engine for sigma (derivative order 0) and tau (order alpha+2).
inline EstimatedValue cross_lattice_norm(const GeneratorFunction& psi,
                                         const GeneratorFunction& phi, int alpha,
                                         int deriv_order, const CrossOptions& opts) {
  const bool compact = psi.band_limited() && phi.band_limited();
  const double span = psi.fourier_support + phi.fourier_support;

  std::vector<TermMajorant> majorants;
  if (!compact) {
    for (int i = 0; i <= std::min(deriv_order, alpha); ++i) {
      double fall = 1.0;
      for (int k = 0; k < i; ++k) fall *= static_cast<double>(alpha - k);
      for (int j = 0; i + j <= deriv_order; ++j) {
        const int k = deriv_order - i - j;
        TermMajorant t;
        t.coeff = trinomial(deriv_order, i, j) * fall;
        t.weight = alpha - i;
        auto m = weighted_l1(phi, t.weight, j, opts.rel_tol);
        t.m_phi = m.value + m.error_bound;
        const auto& ep = psi.envelope_for(k);
        t.sup_psi = ep.sup_norm();
        t.c_psi = ep.c_large;
        t.q_psi = ep.large_exponent;
        const auto& eq = phi.envelope_for(j);
        t.c_phi = eq.c_large;
        t.q_phi = eq.large_exponent;
        majorants.push_back(t);
      }
    }
  }

  auto term = [&](std::int64_t l) -> EstimatedValue {
    const double lf = static_cast<double>(l);
    auto f = [&](double xi) {
      return std::abs(cross_derivative(psi, phi, alpha, deriv_order, xi, lf));
    };
    if (compact) {
      // integrand support: supp(phi) cap (supp(psi) - l)
      const double lo = std::max(-phi.fourier_support, -lf - psi.fourier_support);
      const double hi = std::min(phi.fourier_support, -lf + psi.fourier_support);
      if (!(lo < hi)) return {0.0, 0.0};
      return numerics::integrate_segment(f, lo, hi, opts.rel_tol,
                                         numerics::QuadratureOptions{1 << 15});
    }
    double c_small = 0.0, c_large = 0.0, q = std::numeric_limits<double>::infinity();
    for (const auto& t : majorants) {
      c_small += t.coeff * t.m_phi; // small side never feeds tail bounds
      c_large += t.coeff * t.c_phi * t.sup_psi;
      q = std::min(q, t.q_phi - t.weight);
    }
    if (q <= 1.0)
      throw DivergentTail("cross integrand tail exponent <= 1 for alpha=" +
                          std::to_string(alpha));
    DecayEnvelope env{1e-9, std::max(c_small, c_large) + 1e-300, c_large + 1e-300, q};
    return numerics::integrate_line(f, env, opts.rel_tol);
  };

  auto majorant = [&](std::int64_t L) -> double {
    if (compact)
      return static_cast<double>(L) >= span ? 0.0
                                            : std::numeric_limits<double>::max();
    double total = 0.0;
    for (const auto& t : majorants)
      total += term_tail(t, std::max<double>(static_cast<double>(L), 2.0));
    if (L < 2) {
      // the split argument needs |l| >= 2; cover the remaining |l| by sups
      double per = 0.0;
      for (const auto& t : majorants) per += term_sup(t);
      total += 2.0 * static_cast<double>(2 - L) * per;
    }
    return total;
  };

  return numerics::lattice_sum(term, majorant, opts.lattice);
}

} // namespace detail

// sigma_alpha = (2 pi)^alpha sum_l || xi^alpha conj(phi-hat) psi-hat(.+l) ||_L1
inline EstimatedValue sigma_alpha(const GeneratorFunction& psi,
                                  const GeneratorFunction& phi, int alpha,
                                  const CrossOptions& opts = {}) {
  return detail::cross_lattice_norm(psi, phi, alpha, 0, opts)
      .scaled(std::pow(2.0 * std::numbers::pi, alpha));
}

// tau_alpha = (1/4 pi^2) sum_l || (xi^alpha conj(phi-hat) psi-hat(.+l))^{(alpha+2)} ||_L1
inline EstimatedValue tau_alpha(const GeneratorFunction& psi,
                                const GeneratorFunction& phi, int alpha,
                                const CrossOptions& opts = {}) {
  if (alpha + 2 > psi.max_order || alpha + 2 > phi.max_order)
    throw OrderUnavailable("tau_alpha needs derivative order " +
                           std::to_string(alpha + 2));
  return detail::cross_lattice_norm(psi, phi, alpha, alpha + 2, opts)
      .scaled(1.0 / (4.0 * std::numbers::pi * std::numbers::pi));
}

struct CZConstants {
  int alpha_max = 0; // = N_p + 1
  std::vector<EstimatedValue> sigma, tau, c_alpha;
  std::vector<double> kappa;
  EstimatedValue cz_constant{0.0, 0.0};
  int argmax_alpha = 0;
  double dilation = 2.0;
};

// All C_alpha = kappa_alpha(A) sigma^{1/(alpha+2)} tau^{(alpha+1)/(alpha+2)}
// for alpha = 0..N_p+1 and their max.
inline CZConstants cz_constant(const GeneratorFunction& psi,
                               const GeneratorFunction& phi, double p, double A,
                               const CrossOptions& opts = {}) {
  if (!(A > 1.0)) throw InvalidDilation("cz_constant: dilation must exceed 1");
  CZConstants out;
  out.dilation = A;
  out.alpha_max = generators::moments_required(p) + 1;
  for (int alpha = 0; alpha <= out.alpha_max; ++alpha) {
    auto s = sigma_alpha(psi, phi, alpha, opts);
    auto t = tau_alpha(psi, phi, alpha, opts);
    const double k = kappa_alpha(A, alpha);
    auto c = product(pow_estimate(s, 1.0 / (alpha + 2)),
                     pow_estimate(t, static_cast<double>(alpha + 1) / (alpha + 2)))
                 .scaled(k);
    out.sigma.push_back(s);
    out.tau.push_back(t);
    out.kappa.push_back(k);
    out.c_alpha.push_back(c);
    if (alpha == 0 || c.value > out.cz_constant.value) {
      out.cz_constant = c;
      out.argmax_alpha = alpha;
    }
  }
  return out;
}

struct K0Options {
  double tol = 1e-12;
  int max_pad = 1 << 15;
  std::optional<int> fixed_pad; // truncation-refinement experiments
};

// partial^alpha_y K_0(x,y) = sum_k psi(x-k) conj(phi^{(alpha)}(y-k)).
// Only translations within pad of x or of y are summed; terms outside both
// windows are covered by the lattice-tail majorant, and cross terms (near one
// center, far from the other) ride on the per-sample decay bounds that
// time_value reports.
inline EstimatedValue eval_K0_partial(const GeneratorFunction& psi,
                                      const GeneratorFunction& phi, int alpha,
                                      double x, double y, const K0Options& opts = {}) {
  auto term = [&](std::int64_t k) {
    auto pv = generators::time_value(psi, 0, x - static_cast<double>(k));
    auto fv = generators::time_value(phi, alpha, y - static_cast<double>(k));
    return EstimatedValue{pv.value * fv.value,
                          std::abs(pv.value) * fv.error + std::abs(fv.value) * pv.error +
                              pv.error * fv.error};
  };
  auto sum_windows = [&](std::int64_t pad) {
    auto c1 = static_cast<std::int64_t>(std::llround(std::min(x, y)));
    auto c2 = static_cast<std::int64_t>(std::llround(std::max(x, y)));
    const std::int64_t a1 = c1 - pad, b1 = c1 + pad;
    const std::int64_t a2 = c2 - pad, b2 = c2 + pad;
    EstimatedValue acc{0.0, 0.0};
    if (b1 >= a2 - 1) {
      for (std::int64_t k = a1; k <= b2; ++k) acc = acc + term(k);
    } else {
      for (std::int64_t k = a1; k <= b1; ++k) acc = acc + term(k);
      for (std::int64_t k = a2; k <= b2; ++k) acc = acc + term(k);
    }
    return acc;
  };
  auto residual = [&](double pad) {
    const double right = generators::time_decay_lattice_tail(psi, 0, pad) *
                         generators::time_decay_bound(phi, alpha, 0.0);
    const double right2 = generators::time_decay_lattice_tail(phi, alpha, pad) *
                          generators::time_decay_bound(psi, 0, 0.0);
    return 2.0 * std::min(right, right2); // both directions
  };

  int pad = opts.fixed_pad.value_or(16);
  for (;;) {
    auto acc = sum_windows(pad);
    const double res = residual(static_cast<double>(pad) - 1.0);
    if (opts.fixed_pad || res <= opts.tol * (1.0 + std::abs(acc.value)) ||
        pad >= opts.max_pad) {
      acc.error_bound += res;
      return acc;
    }
    pad *= 2;
  }
}

struct KPartialResult {
  EstimatedValue value{0.0, 0.0};
  int j_lo = 0, j_hi = 0;
  double level_tail = 0.0; // omitted-level geometric bound
};

// partial^alpha_y K(x,y) = sum_j A^{j(alpha+1)} partial^alpha_y K_0(A^j x, A^j y),
// truncated where A^{j(alpha+1)} sigma (low side) and A^{-j} tau |x-y|^{-alpha-2}
// (high side) drop below tol; both tails are geometric.
inline KPartialResult eval_K_partial(const GeneratorFunction& psi,
                                     const GeneratorFunction& phi, int alpha,
                                     double x, double y, double A, double sigma,
                                     double tau, double tol,
                                     std::optional<std::pair<int, int>> level_range =
                                         std::nullopt,
                                     const K0Options& k0opts = {}) {
  if (x == y) throw Error("eval_K_partial: diagonal point");
  const double d = std::abs(x - y);
  const double lnA = std::log(A);
  KPartialResult out;
  if (!level_range && (sigma <= 1e-280 || tau <= 1e-280)) {
    // degenerate pair: every level is below the floor; the whole j-sum is
    // bounded by the closed-form level-sum estimate
    out.level_tail = kappa_alpha(A, alpha) * std::pow(sigma, 1.0 / (alpha + 2)) *
                     std::pow(tau, (alpha + 1.0) / (alpha + 2)) /
                     std::pow(d, alpha + 1.0);
    out.value = {0.0, out.level_tail};
    return out;
  }
  if (level_range) {
    out.j_lo = level_range->first;
    out.j_hi = level_range->second;
  } else {
    // sum_{j<=J} A^{j(a+1)} sigma = sigma A^{J(a+1)} A^{a+1}/(A^{a+1}-1)
    const double pw = alpha + 1.0;
    out.j_lo = static_cast<int>(std::floor(
        std::log(std::max(tol, 1e-300) * (std::pow(A, pw) - 1.0) /
                 (std::max(sigma, 1e-300) * std::pow(A, pw))) /
        (pw * lnA)));
    // sum_{j>=J} tau d^{-a-2} A^{-j} = tau d^{-a-2} A^{-J} A/(A-1)
    out.j_hi = static_cast<int>(std::ceil(
        std::log(std::max(tau, 1e-300) * std::pow(d, -alpha - 2.0) * A / (A - 1.0) /
                 std::max(tol, 1e-300)) /
        lnA));
    out.j_lo = std::clamp(out.j_lo, -512, 512);
    out.j_hi = std::clamp(out.j_hi, out.j_lo, 512);
  }
  for (int j = out.j_lo; j <= out.j_hi; ++j) {
    const double scale = std::pow(A, j);
    auto k0 = eval_K0_partial(psi, phi, alpha, scale * x, scale * y, k0opts);
    out.value = out.value + k0.scaled(std::pow(A, j * (alpha + 1.0)));
  }
  const double pw = alpha + 1.0;
  out.level_tail =
      sigma * std::pow(A, out.j_lo * pw) / (1.0 - std::pow(A, -pw)) * std::pow(A, -pw) +
      tau * std::pow(d, -alpha - 2.0) * std::pow(A, -out.j_hi - 1.0) * A / (A - 1.0);
  out.value.error_bound += out.level_tail;
  return out;
}

struct KernelGrid {
  std::vector<std::pair<double, double>> points; // off-diagonal (x, y)
  int j_min = -24, j_max = 24;
  int translation_radius = 64;
};

struct KernelBoundRow {
  double x = 0.0, y = 0.0;
  int alpha = 0;
  double k0_lhs = 0.0, k0_bound = 0.0, k0_margin = 0.0;
  bool k0_pass = false;
  double k_lhs = 0.0, k_bound = 0.0, k_margin = 0.0;
  bool k_pass = false;
};

struct KernelBoundReport {
  CZConstants constants;
  std::vector<KernelBoundRow> rows;
  bool all_pass = true;
};

// Checks, at every grid point and order alpha <= N_p+1,
//   |partial^alpha_y K_0| <= min{sigma_alpha, tau_alpha/|x-y|^{alpha+2}}
//   |partial^alpha_y K|   <= max_alpha C_alpha / |x-y|^{alpha+1}
// with error budgets = quadrature/lattice bounds + 1e-9 absolute.
inline KernelBoundReport verify_kernel_bounds(const GeneratorFunction& psi,
                                              const GeneratorFunction& phi, double p,
                                              double A, const KernelGrid& grid,
                                              const CrossOptions& opts = {}) {
  KernelBoundReport rep;
  rep.constants = cz_constant(psi, phi, p, A, opts);
  for (const auto& [x, y] : grid.points) {
    if (!(std::abs(x - y) > 0.0)) throw Error("verify_kernel_bounds: diagonal point");
    for (int alpha = 0; alpha <= rep.constants.alpha_max; ++alpha) {
      KernelBoundRow row;
      row.x = x;
      row.y = y;
      row.alpha = alpha;
      const double d = std::abs(x - y);
      const auto& sg = rep.constants.sigma[static_cast<std::size_t>(alpha)];
      const auto& tu = rep.constants.tau[static_cast<std::size_t>(alpha)];

      auto k0 = eval_K0_partial(psi, phi, alpha, x, y);
      row.k0_lhs = std::abs(k0.value);
      const double b1 = sg.value + sg.error_bound;
      const double b2 = (tu.value + tu.error_bound) / std::pow(d, alpha + 2.0);
      row.k0_bound = std::min(b1, b2);
      const double budget0 = k0.error_bound + 1e-9;
      row.k0_margin = row.k0_bound + budget0 - row.k0_lhs;
      row.k0_pass = row.k0_lhs <= row.k0_bound + budget0;

      auto kp = eval_K_partial(psi, phi, alpha, x, y, A, sg.value, tu.value,
                               1e-12 * (1.0 + sg.value));
      row.k_lhs = std::abs(kp.value.value);
      const auto& cz = rep.constants.cz_constant;
      row.k_bound = (cz.value + cz.error_bound) / std::pow(d, alpha + 1.0);
      const double budget = kp.value.error_bound + 1e-9;
      row.k_margin = row.k_bound + budget - row.k_lhs;
      row.k_pass = row.k_lhs <= row.k_bound + budget;

      rep.all_pass = rep.all_pass && row.k0_pass && row.k_pass;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

} // namespace wavecert::cz
