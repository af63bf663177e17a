#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wavecert/builtins.hpp"
#include "wavecert/czkernel.hpp"
#include "wavecert/errors.hpp"
#include "wavecert/frameops.hpp"
#include "wavecert/generator.hpp"
#include "wavecert/minimize.hpp"

namespace wavecert::hardy {

// delta(b) = 0.5 ((2n+3)/(2b) + sqrt(4 + ((2n+3)/(2b))^2)); always > 1,
// decreasing in b, -> 1 as b -> infinity.
inline double delta_of_b(double b, int n) {
  if (!(b > 0.0)) throw InvalidB("delta_of_b: b must be positive");
  const double t = (2.0 * n + 3.0) / (2.0 * b);
  return 0.5 * (t + std::sqrt(4.0 + t * t));
}

struct HardyParams {
  double p = 1.0;
  int n_p = 0;
  double b = 250.0;
  double zeta = 5.0;
  double eta = 5.0;
  double delta = 1.0;
  double calG = 1.0;

  static HardyParams make(double p, double b, double calG, double zeta,
                          std::optional<double> eta = std::nullopt) {
    if (!(p > 0.0 && p <= 1.0)) throw Error("HardyParams: p must lie in (0,1]");
    if (!(b > 2.0 / p)) throw InvalidB("HardyParams: need b > 2/p");
    HardyParams h;
    h.p = p;
    h.n_p = generators::moments_required(p);
    h.b = b;
    h.delta = delta_of_b(b, h.n_p);
    h.zeta = zeta;
    h.eta = eta.value_or(zeta);
    h.calG = calG;
    if (!(h.zeta >= h.delta && h.eta >= h.delta))
      throw Error("HardyParams: zeta/eta must be >= delta(b)");
    return h;
  }
};

inline double c1_constant(double p, int n, double calG) {
  return std::pow(1.0 + calG * (n + 1), p);
}

namespace detail {
inline double alpha_sum(double p, int n, double b) {
  double s = 0.0;
  for (int alpha = 0; alpha <= n; ++alpha)
    s += std::pow((2.0 + std::pow(2.0, -alpha)) / (b - alpha - 1.0), p);
  return s;
}
} // namespace detail

// log C3 is kept alongside: (zeta/2)^b overflows for large b even though
// C3^p C4 stays moderate
inline double log_c3_constant(int n, double b, double zeta) {
  double fact = 1.0;
  for (int i = 2; i <= n + 1; ++i) fact *= i;
  const double lead = std::pow(2.0, n + 3) / (fact * std::sqrt(2.0 * n + 3.0));
  const double inner = (1.0 / (2.0 * zeta)) *
                       (std::pow(zeta + 1.0, -(2.0 * n + 3.0)) +
                        std::pow(zeta - 1.0, -(2.0 * n + 3.0)));
  return std::log(lead) + 0.5 * std::log(inner) + b * std::log(zeta / 2.0);
}

inline double c3_constant(int n, double b, double zeta) {
  return std::exp(log_c3_constant(n, b, zeta));
}

inline double log_c4_constant(double p, int n, double calG, double b, double zeta) {
  const double tail = 2.0 * std::pow(2.0 * b - 1.0, -0.5 * p) * c1_constant(p, n, calG) +
                      3.0 * std::pow(calG, p) * detail::alpha_sum(p, n, b);
  return b * p * std::log(2.0) + (1.0 - b * p) * std::log(zeta) + std::log(tail);
}

inline double c4_constant(double p, int n, double calG, double b, double zeta) {
  return std::exp(log_c4_constant(p, n, calG, b, zeta));
}

inline double c2_constant(double p, int n, double calG, double b, double zeta) {
  double fact = 1.0;
  for (int i = 2; i <= n + 1; ++i) fact *= i;
  const double lead =
      std::pow(std::pow(2.0, n + 3) / (fact * std::sqrt(2.0 * n + 3.0)), p);
  const double mid = std::pow(
      0.5 *
          (std::pow(zeta + 1.0, -(2.0 * n + 3.0)) +
           std::pow(zeta - 1.0, -(2.0 * n + 3.0))) *
          std::pow(zeta, 2.0 / p - 1.0),
      0.5 * p);
  const double tail = 2.0 * std::pow(2.0 * b - 1.0, -0.5 * p) * c1_constant(p, n, calG) +
                      3.0 * std::pow(calG, p) * detail::alpha_sum(p, n, b);
  return lead * mid * tail;
}

struct ConstantSet {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
};

// C1..C4 at (p, n, calG, b, zeta); also checks the algebraic identity
// C2 = C3^p C4 that the two-constant and one-constant routes must satisfy
// (in log space: the factors individually overflow for large b).
inline ConstantSet constants_c1_c4(const HardyParams& h) {
  ConstantSet c;
  c.c1 = c1_constant(h.p, h.n_p, h.calG);
  c.c2 = c2_constant(h.p, h.n_p, h.calG, h.b, h.zeta);
  c.c3 = c3_constant(h.n_p, h.b, h.zeta);
  c.c4 = c4_constant(h.p, h.n_p, h.calG, h.b, h.zeta);
  const double log_alt = h.p * log_c3_constant(h.n_p, h.b, h.zeta) +
                         log_c4_constant(h.p, h.n_p, h.calG, h.b, h.zeta);
  if (std::abs(log_alt - std::log(c.c2)) > 1e-12 * std::max(1.0, std::abs(std::log(c.c2))))
    throw Error("constants_c1_c4: C2 != C3^p C4 (internal inconsistency)");
  return c;
}

// operator bound ||Z||^p_{Hp->Hp} <= C1 zeta^{p(1/p-1/2)} ||Z||^p_{L2->L2} + C2 Z^p
inline double hp_bound(double l2_norm, double cz_const, const HardyParams& h) {
  if (l2_norm < 0.0 || cz_const < 0.0) throw Error("hp_bound: norms must be >= 0");
  return c1_constant(h.p, h.n_p, h.calG) *
             std::pow(h.zeta, h.p * (1.0 / h.p - 0.5)) * std::pow(l2_norm, h.p) +
         c2_constant(h.p, h.n_p, h.calG, h.b, h.zeta) * std::pow(cz_const, h.p);
}

// ---------------------------------------------------------------------------
// moment polynomials on the dyadic annuli E_0 = [-R, R],
// E_k = { 2^{k-1} R < |x| <= 2^k R }

struct MomentPolynomialSystem {
  int n = 0;
  double r = 1.0;
  // coeffs[k][alpha] = polynomial coefficients (low to high) of g_alpha^k,
  // stored for k = 0 and k = 1; k >= 2 follows by dilation scaling.
  std::vector<std::vector<std::vector<double>>> coeffs;
  std::vector<double> g_alpha; // the constants G_alpha
  double calG = 0.0;

  std::vector<double> coefficients(int alpha, int k) const {
    const auto& base =
        coeffs[static_cast<std::size_t>(std::min(k, 1))][static_cast<std::size_t>(alpha)];
    if (k <= 1) return base;
    // g_alpha^k(x) = s^{-alpha} g_alpha^1(x / s), s = 2^{k-1}
    const double s = std::pow(2.0, k - 1);
    std::vector<double> out(base.size());
    for (std::size_t m = 0; m < base.size(); ++m)
      out[m] = base[m] * std::pow(s, -static_cast<double>(alpha) -
                                         static_cast<double>(m));
    return out;
  }

  double eval(int alpha, int k, double x) const {
    const auto c = coefficients(alpha, k);
    double v = 0.0;
    for (std::size_t m = c.size(); m-- > 0;) v = v * x + c[m];
    return v;
  }

  // measure of E_k
  double measure(int k) const { return k == 0 ? 2.0 * r : std::pow(2.0, k) * r; }
  double outer_radius(int k) const { return std::pow(2.0, k) * r; }
  double inner_radius(int k) const { return k == 0 ? 0.0 : std::pow(2.0, k - 1) * r; }
};

namespace detail {

// (1/|E_k|) int_{E_k} x^m dx, closed form
inline double annulus_moment(int k, double r, int m) {
  if (m % 2 == 1) return 0.0;
  if (k == 0) return std::pow(r, m) / (m + 1.0);
  const double outer = std::pow(2.0, k) * r;
  const double inner = std::pow(2.0, k - 1) * r;
  return 2.0 * (std::pow(outer, m + 1) - std::pow(inner, m + 1)) /
         ((m + 1.0) * std::pow(2.0, k) * r);
}

inline std::vector<std::vector<double>> solve_moment_system(int n, double r, int k) {
  const int dim = n + 1;
  // Gram matrix M[beta][gamma] = (1/|E_k|) int x^{beta+gamma}
  std::vector<std::vector<double>> m(static_cast<std::size_t>(dim),
                                     std::vector<double>(static_cast<std::size_t>(dim)));
  for (int b = 0; b < dim; ++b)
    for (int g = 0; g < dim; ++g)
      m[static_cast<std::size_t>(b)][static_cast<std::size_t>(g)] =
          annulus_moment(k, r, b + g);

  // one RHS per alpha; plain Gaussian elimination with partial pivoting
  std::vector<std::vector<double>> rhs(static_cast<std::size_t>(dim),
                                       std::vector<double>(static_cast<std::size_t>(dim),
                                                           0.0));
  for (int a = 0; a < dim; ++a) rhs[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] = 1.0;

  for (int col = 0; col < dim; ++col) {
    int piv = col;
    for (int row = col + 1; row < dim; ++row)
      if (std::abs(m[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]) >
          std::abs(m[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]))
        piv = row;
    if (std::abs(m[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]) < 1e-300)
      throw SingularSystem("moment polynomial Gram matrix is singular");
    std::swap(m[static_cast<std::size_t>(col)], m[static_cast<std::size_t>(piv)]);
    for (auto& rr : rhs) std::swap(rr[static_cast<std::size_t>(col)], rr[static_cast<std::size_t>(piv)]);
    for (int row = 0; row < dim; ++row) {
      if (row == col) continue;
      const double f = m[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] /
                       m[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      for (int cc = col; cc < dim; ++cc)
        m[static_cast<std::size_t>(row)][static_cast<std::size_t>(cc)] -=
            f * m[static_cast<std::size_t>(col)][static_cast<std::size_t>(cc)];
      for (auto& rr : rhs)
        rr[static_cast<std::size_t>(row)] -= f * rr[static_cast<std::size_t>(col)];
    }
  }
  // columns of rhs now hold the solutions: coeff_gamma of g_alpha
  std::vector<std::vector<double>> out(static_cast<std::size_t>(dim),
                                       std::vector<double>(static_cast<std::size_t>(dim)));
  for (int a = 0; a < dim; ++a)
    for (int g = 0; g < dim; ++g)
      out[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)] =
          rhs[static_cast<std::size_t>(a)][static_cast<std::size_t>(g)] /
          m[static_cast<std::size_t>(g)][static_cast<std::size_t>(g)];
  return out;
}

// sup |poly| over [a, b]: exact via critical points for degree <= 2, dense
// sampling plus a derivative Lipschitz pad otherwise
inline double poly_sup_abs(const std::vector<double>& c, double a, double b) {
  auto eval = [&](double x) {
    double v = 0.0;
    for (std::size_t m = c.size(); m-- > 0;) v = v * x + c[m];
    return std::abs(v);
  };
  double best = std::max(eval(a), eval(b));
  const int deg = static_cast<int>(c.size()) - 1;
  if (deg <= 1) return best;
  if (deg == 2) {
    const double crit = -c[1] / (2.0 * c[2]);
    if (crit > a && crit < b) best = std::max(best, eval(crit));
    return best;
  }
  double dmax = 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  for (std::size_t m = 1; m < c.size(); ++m)
    dmax += static_cast<double>(m) * std::abs(c[m]) * std::pow(scale, m - 1.0);
  const int samples = 8192;
  const double h = (b - a) / samples;
  for (int i = 0; i <= samples; ++i) best = std::max(best, eval(a + i * h));
  return best + 0.5 * h * dmax;
}

} // namespace detail

// Solves the biorthogonal moment systems on E_0 and E_1, extends to k >= 1 by
// dilation, and computes the normalized sups G_alpha and their max.
inline MomentPolynomialSystem moment_polynomials(int n, double r) {
  if (n < 0 || !(r > 0.0)) throw Error("moment_polynomials: need n >= 0, r > 0");
  MomentPolynomialSystem sys;
  sys.n = n;
  sys.r = r;
  sys.coeffs.push_back(detail::solve_moment_system(n, r, 0));
  sys.coeffs.push_back(detail::solve_moment_system(n, r, 1));

  // the Gram matrices couple same-parity monomials only, so |g| on the
  // negative half of an annulus mirrors the positive half
  auto normalized_sup = [&](int alpha, int k, const std::vector<double>& c) {
    const double lo = k == 0 ? -sys.outer_radius(0) : sys.inner_radius(k);
    const double hi = sys.outer_radius(k);
    return detail::poly_sup_abs(c, lo, hi) * std::pow(sys.outer_radius(k), alpha);
  };

  const auto direct2 = detail::solve_moment_system(n, r, 2);
  sys.g_alpha.resize(static_cast<std::size_t>(n) + 1);
  for (int alpha = 0; alpha <= n; ++alpha) {
    const double s0 = normalized_sup(alpha, 0, sys.coefficients(alpha, 0));
    const double s1 = normalized_sup(alpha, 1, sys.coefficients(alpha, 1));
    sys.g_alpha[static_cast<std::size_t>(alpha)] = std::max(s0, s1);
    // dilation invariance: a direct solve at k = 2 must reproduce k = 1
    const double s2_direct =
        normalized_sup(alpha, 2, direct2[static_cast<std::size_t>(alpha)]);
    if (std::abs(s2_direct - s1) > 1e-10 * std::max(1.0, s1))
      throw SingularSystem("moment polynomials: k=2 normalized sup differs from k=1");
  }
  sys.calG = *std::max_element(sys.g_alpha.begin(), sys.g_alpha.end());
  return sys;
}

// ---------------------------------------------------------------------------
// certification

enum class Provenance { Computed, External };

struct OperatorInputs {
  double u1 = 0.0, c1 = 0.0; // L2->L2 norm and CZ constant of the first piece
  double u2 = 0.0, c2 = 0.0; // and of the second piece
  Provenance provenance = Provenance::External;
  bool u_is_empirical = false; // set when u_i came from the Rayleigh probe
};

struct CertificateReport {
  double p = 1.0;
  double b = 0.0;
  double mp_bound = 0.0;
  double zeta_star = 0.0, term1 = 0.0;
  double eta_star = 0.0, term2 = 0.0;
  OperatorInputs inputs;
  double calG = 1.0;
  int n = 0;
  bool certified = false;
  double neumann_rate = 0.0; // mp_bound^{1/p}, contraction proxy
};

// one term of the infimand: C1 z^{p(1/p-1/2)} U^p + C2(b,z) C^p
inline double certificate_term(double z, double u, double c, double p, int n,
                               double calG, double b) {
  return c1_constant(p, n, calG) * std::pow(z, p * (1.0 / p - 0.5)) * std::pow(u, p) +
         c2_constant(p, n, calG, b, z) * std::pow(c, p);
}

// Minimizes each term independently over zeta, eta in [delta(b), 1e6] (or
// evaluates at the pinned values) and reports the certificate.
inline CertificateReport mp_bound(const OperatorInputs& in, double p, int n,
                                  double calG, double b,
                                  std::optional<double> fixed_zeta = std::nullopt,
                                  std::optional<double> fixed_eta = std::nullopt) {
  if (!(b > 2.0 / p)) throw InvalidB("mp_bound: need b > 2/p");
  if (in.u1 < 0 || in.c1 < 0 || in.u2 < 0 || in.c2 < 0)
    throw Error("mp_bound: inputs must be >= 0");
  const double delta = delta_of_b(b, n);
  CertificateReport rep;
  rep.p = p;
  rep.b = b;
  rep.n = n;
  rep.calG = calG;
  rep.inputs = in;

  auto optimize = [&](double u, double c, double& star, double& value) {
    if (u == 0.0 && c == 0.0) {
      star = delta;
      value = 0.0;
      return;
    }
    auto f = [&](double z) { return certificate_term(z, u, c, p, n, calG, b); };
    auto m = numerics::minimize_scalar(f, delta, 1e6, 1e-10);
    star = m.argmin;
    value = m.min;
  };

  if (fixed_zeta) {
    rep.zeta_star = *fixed_zeta;
    rep.term1 = certificate_term(*fixed_zeta, in.u1, in.c1, p, n, calG, b);
  } else {
    optimize(in.u1, in.c1, rep.zeta_star, rep.term1);
  }
  if (fixed_eta) {
    rep.eta_star = *fixed_eta;
    rep.term2 = certificate_term(*fixed_eta, in.u2, in.c2, p, n, calG, b);
  } else {
    optimize(in.u2, in.c2, rep.eta_star, rep.term2);
  }
  rep.mp_bound = rep.term1 + rep.term2;
  rep.certified = rep.mp_bound < 1.0;
  rep.neumann_rate = std::pow(rep.mp_bound, 1.0 / p);
  return rep;
}

// mp_bound over a b grid; the report with the smallest bound wins.
inline CertificateReport certify_from_constants(const OperatorInputs& in, double p,
                                                int n, double calG,
                                                const std::vector<double>& b_grid) {
  if (b_grid.empty()) throw Error("certify_from_constants: empty b grid");
  std::optional<CertificateReport> best;
  for (double b : b_grid) {
    auto rep = mp_bound(in, p, n, calG, b);
    if (!best || rep.mp_bound < best->mp_bound) best = rep;
  }
  return *best;
}

inline std::vector<double> default_b_grid(double p) {
  return {4.0 / p, 10.0, 50.0, 250.0, 1000.0};
}

// Empirical L2->L2 probe: max Rayleigh quotient ||U f|| / ||f|| over a small
// probe family. A lower-bound-style estimate, never a rigorous norm.
inline double empirical_l2_norm(const generators::GeneratorFunction& psi,
                                const generators::GeneratorFunction& phi,
                                const ops::DilationGrid& grid) {
  std::vector<std::function<generators::Complex(double)>> probes = {
      [](double x) { return std::exp(-0.5 * x * x); },
      [](double x) { return x * std::exp(-0.5 * x * x); },
      [](double x) { return (1.0 - x * x) * std::exp(-0.5 * x * x); },
      [](double x) { return std::exp(-x * x) * std::cos(3.0 * x); },
      [](double x) { return std::exp(-0.25 * (x - 1.5) * (x - 1.5)); },
      [](double x) { return std::exp(-2.0 * x * x) * std::sin(5.0 * x); },
  };
  double best = 0.0;
  for (const auto& pf : probes) {
    auto f = ops::sample(grid, pf);
    const double fn = f.norm2();
    if (fn == 0.0) continue;
    auto uf = ops::apply_U(psi, phi, grid, f);
    best = std::max(best, uf.signal.norm2() / fn);
  }
  return best;
}

struct CertifyOptions {
  cz::CrossOptions cross{};
  ops::DilationGrid probe_grid{2.0, -4, 3, 192, -16.0, 1.0 / 64.0, 2048};
};

// Full pipeline on a generator quadruple: hypothesis checks for every role,
// CZ constants of the two difference pieces, empirical L2 probes, then the
// two-term certificate per b.
inline CertificateReport certify(const generators::GeneratorQuadruple& quad, double p,
                                 double A, const std::vector<double>& b_grid,
                                 const CertifyOptions& opts = {}) {
  using generators::Role;
  struct Named {
    const generators::GeneratorFunction* g;
    Role role;
    const char* name;
  };
  const Named checks[] = {{&quad.psi, Role::Synthesizer, "psi"},
                          {&quad.phi, Role::Analyzer, "phi"},
                          {&quad.psi_star, Role::Synthesizer, "psi_star"},
                          {&quad.phi_star, Role::Analyzer, "phi_star"}};
  for (const auto& c : checks) {
    auto rep = generators::check_hypotheses(*c.g, p, c.role);
    if (!rep.all_pass) {
      std::string failing;
      for (const auto& row : rep.rows)
        if (!row.pass) {
          failing = row.name;
          break;
        }
      throw HypothesisFailure(std::string(c.name) + " fails hypothesis check: " +
                              failing);
    }
  }

  const int n = generators::moments_required(p);
  auto diff_psi = generators::combine(1.0, quad.psi, -1.0, quad.psi_star);
  auto diff_phi = generators::combine(1.0, quad.phi, -1.0, quad.phi_star);

  OperatorInputs in;
  in.provenance = Provenance::Computed;
  in.u_is_empirical = true;
  in.c1 = cz::cz_constant(diff_psi, quad.phi, p, A, opts.cross).cz_constant.value;
  in.c2 = cz::cz_constant(quad.psi_star, diff_phi, p, A, opts.cross).cz_constant.value;

  ops::DilationGrid grid = opts.probe_grid;
  grid.A = A;
  in.u1 = empirical_l2_norm(diff_psi, quad.phi, grid);
  in.u2 = empirical_l2_norm(quad.psi_star, diff_phi, grid);

  auto sys = moment_polynomials(n, 1.0);
  std::optional<CertificateReport> best;
  for (double b : b_grid.empty() ? default_b_grid(p) : b_grid) {
    auto rep = mp_bound(in, p, n, sys.calG, b);
    if (!best || rep.mp_bound < best->mp_bound) best = rep;
  }
  return *best;
}

// Closed-form bound for ||U - Id||_{Hp->Hp} itself (norm scale, not its p-th
// power) in the single-difference configuration with n = 0 and unit
// moment-polynomial constant:
//   2^{1+1/p} zeta^{1/p} ( U / zeta^{1/2}
//     + (4/sqrt3) (zeta^2+3)^{1/2} (zeta^2-1)^{-3/2}
//       ( 2*4^{1/p} (2b-1)^{-1/2} + 3*6^{1/p} (b-1)^{-1} ) C ).
// Every p-dependent factor is nonincreasing in p, so evaluating at the worst
// exponent p covers all larger p up to 1.
inline double single_term_norm_bound(double u, double c, double zeta, double b,
                                     double p) {
  if (!(zeta > 1.0)) throw Error("single_term_norm_bound: need zeta > 1");
  if (!(b > 2.0 / p)) throw InvalidB("single_term_norm_bound: need b > 2/p");
  const double q = 1.0 / p;
  return std::pow(2.0, 1.0 + q) * std::pow(zeta, q) *
         (u / std::sqrt(zeta) +
          (4.0 / std::sqrt(3.0)) * std::sqrt(zeta * zeta + 3.0) /
              std::pow(zeta * zeta - 1.0, 1.5) *
              (2.0 * std::pow(4.0, q) / std::sqrt(2.0 * b - 1.0) +
               3.0 * std::pow(6.0, q) / (b - 1.0)) *
              c);
}

} // namespace wavecert::hardy
