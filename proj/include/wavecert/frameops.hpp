#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "wavecert/errors.hpp"
#include "wavecert/generator.hpp"

namespace wavecert::ops {

using generators::Complex;
using generators::GeneratorFunction;

struct DilationGrid {
  double A = 2.0;
  int j_min = -8, j_max = 8;
  int k_radius = 256;
  // uniform sample grid
  double x0 = -32.0;
  double dx = 1.0 / 64.0;
  std::size_t n_samples = 4096;

  double x_at(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double x_end() const { return x_at(n_samples - 1); }
  void validate() const {
    if (!(A > 1.0)) throw InvalidDilation("dilation grid: A must exceed 1");
    if (j_min > j_max) throw GridMismatch("dilation grid: j_min > j_max");
    if (k_radius <= 0 || n_samples < 2 || !(dx > 0.0))
      throw GridMismatch("dilation grid: bad sampling parameters");
  }
};

struct SampledSignal {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<Complex> values;

  double x_at(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double norm2() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return std::sqrt(s * dx);
  }
  bool compatible(const SampledSignal& o) const {
    return values.size() == o.values.size() && std::abs(x0 - o.x0) < 1e-12 &&
           std::abs(dx - o.dx) < 1e-12;
  }
};

inline SampledSignal zero_signal(const DilationGrid& grid) {
  return {grid.x0, grid.dx, std::vector<Complex>(grid.n_samples, Complex{0.0, 0.0})};
}

inline SampledSignal sample(const DilationGrid& grid,
                            const std::function<Complex(double)>& f) {
  auto s = zero_signal(grid);
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = f(s.x_at(i));
  return s;
}

inline Complex inner(const SampledSignal& f, const SampledSignal& g) {
  if (!f.compatible(g)) throw GridMismatch("inner: incompatible sample grids");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < f.values.size(); ++i)
    s += f.values[i] * std::conj(g.values[i]);
  return s * f.dx;
}

// fraction of |f|^2 mass in the outer 5% of the window; analyze() callers use
// it as the decay-within-window check
inline double boundary_mass_fraction(const SampledSignal& f) {
  const std::size_t n = f.values.size();
  const std::size_t edge = std::max<std::size_t>(1, n / 20);
  double total = 0.0, outer = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::norm(f.values[i]);
    total += m;
    if (i < edge || i + edge >= n) outer += m;
  }
  return total > 0.0 ? outer / total : 0.0;
}

struct CoefficientArray {
  double A = 2.0;
  std::map<std::pair<int, int>, Complex> entries;

  Complex at(int j, int k) const {
    auto it = entries.find({j, k});
    return it == entries.end() ? Complex{0.0, 0.0} : it->second;
  }
};

namespace detail {

// effective one-sided support of the time profile (true cutoff folded into
// time_value error bounds)
inline double time_window(const GeneratorFunction& g) {
  if (g.time_form) {
    return 44.0; // closed-form profiles here decay at least like e^{-x^2/4}
  }
  return 99.0;
}

// band-limited generators make the aliasing threshold explicit: the top
// retained level must stay below the sample-grid Nyquist rate
inline void check_sampling(const GeneratorFunction& g, const DilationGrid& grid) {
  if (!g.band_limited()) return;
  const double top = g.fourier_support * std::pow(grid.A, grid.j_max);
  const double nyquist = 0.5 / grid.dx;
  if (top > nyquist)
    throw GridMismatch(g.label + ": level " + std::to_string(grid.j_max) +
                       " reaches frequency " + std::to_string(top) +
                       " beyond the grid Nyquist rate " + std::to_string(nyquist) +
                       "; lower j_max or refine dx");
}

} // namespace detail

// t(f) = { <f, phi_jk> }, phi_jk = A^{j/2} phi(A^j x - k), trapezoid on the
// common grid.
inline CoefficientArray analyze(const GeneratorFunction& phi, const DilationGrid& grid,
                                const SampledSignal& f) {
  grid.validate();
  if (f.values.size() != grid.n_samples || std::abs(f.x0 - grid.x0) > 1e-12 ||
      std::abs(f.dx - grid.dx) > 1e-12)
    throw GridMismatch("analyze: signal does not live on the dilation grid");
  detail::check_sampling(phi, grid);
  CoefficientArray out;
  out.A = grid.A;
  const double window = detail::time_window(phi);
  const auto n = static_cast<std::int64_t>(grid.n_samples);
  for (int j = grid.j_min; j <= grid.j_max; ++j) {
    const double aj = std::pow(grid.A, j);
    const double root = std::sqrt(aj);
    for (int k = -grid.k_radius; k <= grid.k_radius; ++k) {
      // phi_jk supported in x within [(k - w)/A^j, (k + w)/A^j]
      const double lo = (k - window) / aj;
      const double hi = (k + window) / aj;
      auto i_lo = static_cast<std::int64_t>(std::ceil((lo - grid.x0) / grid.dx));
      auto i_hi = static_cast<std::int64_t>(std::floor((hi - grid.x0) / grid.dx));
      i_lo = std::max<std::int64_t>(i_lo, 0);
      i_hi = std::min<std::int64_t>(i_hi, n - 1);
      if (i_lo > i_hi) continue;
      Complex acc{0.0, 0.0};
      for (std::int64_t i = i_lo; i <= i_hi; ++i) {
        const double x = f.x_at(static_cast<std::size_t>(i));
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const double pv = generators::time_value(phi, 0, aj * x - k).value;
        acc += w * f.values[static_cast<std::size_t>(i)] * (root * pv);
      }
      const Complex c = acc * grid.dx;
      if (std::abs(c) > 0.0) out.entries[{j, k}] = c;
    }
  }
  return out;
}

// s(c) = sum c_jk psi_jk, pointwise on the sample grid.
inline SampledSignal synthesize(const GeneratorFunction& psi, const DilationGrid& grid,
                                const CoefficientArray& c) {
  grid.validate();
  detail::check_sampling(psi, grid);
  auto out = zero_signal(grid);
  const double window = detail::time_window(psi);
  const auto n = static_cast<std::int64_t>(grid.n_samples);
  for (const auto& [jk, coeff] : c.entries) {
    const auto [j, k] = jk;
    const double aj = std::pow(grid.A, j);
    const double root = std::sqrt(aj);
    const double lo = (k - window) / aj;
    const double hi = (k + window) / aj;
    auto i_lo = static_cast<std::int64_t>(std::ceil((lo - grid.x0) / grid.dx));
    auto i_hi = static_cast<std::int64_t>(std::floor((hi - grid.x0) / grid.dx));
    i_lo = std::max<std::int64_t>(i_lo, 0);
    i_hi = std::min<std::int64_t>(i_hi, n - 1);
    for (std::int64_t i = i_lo; i <= i_hi; ++i) {
      const double x = out.x_at(static_cast<std::size_t>(i));
      out.values[static_cast<std::size_t>(i)] +=
          coeff * (root * generators::time_value(psi, 0, aj * x - k).value);
    }
  }
  return out;
}

struct ApplyResult {
  SampledSignal signal;
  double truncation_budget = 0.0; // edge-coefficient extrapolation estimate
  double boundary_mass = 0.0;
};

namespace detail {

inline double edge_truncation_estimate(const CoefficientArray& c,
                                       const DilationGrid& grid) {
  // heuristic: omitted translations/levels are extrapolated from the
  // outermost retained coefficients (factor 2 geometric allowance)
  double edge = 0.0;
  for (int j = grid.j_min; j <= grid.j_max; ++j) {
    edge += std::norm(c.at(j, grid.k_radius)) + std::norm(c.at(j, -grid.k_radius));
  }
  for (const auto& [jk, v] : c.entries) {
    if (jk.first == grid.j_min || jk.first == grid.j_max) edge += std::norm(v);
  }
  return 2.0 * std::sqrt(edge);
}

} // namespace detail

// U f = s(t(f)) with a truncation report.
inline ApplyResult apply_U(const GeneratorFunction& psi, const GeneratorFunction& phi,
                           const DilationGrid& grid, const SampledSignal& f) {
  auto coeffs = analyze(phi, grid, f);
  ApplyResult out{synthesize(psi, grid, coeffs),
                  detail::edge_truncation_estimate(coeffs, grid),
                  boundary_mass_fraction(f)};
  return out;
}

struct NeumannResult {
  SampledSignal u;
  int iterations = 0;
  double residual = 0.0;             // final ||f - U u|| / ||f||
  std::vector<double> residual_history; // relative residuals per iteration
};

// u <- u + (f - U u) from u0 = f; converges iff ||U - Id|| < 1 at the
// discrete scale.
inline NeumannResult neumann_invert(
    const std::function<SampledSignal(const SampledSignal&)>& op,
    const SampledSignal& f, double tol, int max_iter) {
  if (!(tol > 0.0)) throw Error("neumann_invert: tol must be positive");
  const double f_norm = f.norm2();
  NeumannResult out;
  out.u = f;
  if (f_norm == 0.0) {
    out.residual = 0.0;
    return out;
  }
  for (int it = 0; it < max_iter; ++it) {
    auto uf = op(out.u);
    if (!uf.compatible(f)) throw GridMismatch("neumann_invert: operator changed grid");
    SampledSignal r = f;
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= uf.values[i];
    const double rel = r.norm2() / f_norm;
    out.residual_history.push_back(rel);
    out.iterations = it + 1;
    out.residual = rel;
    if (rel <= tol) return out;
    for (std::size_t i = 0; i < out.u.values.size(); ++i)
      out.u.values[i] += r.values[i];
  }
  const double ratio =
      out.residual_history.size() >= 2
          ? out.residual_history.back() /
                out.residual_history[out.residual_history.size() - 2]
          : 1.0;
  throw NoConvergence("neumann_invert: residual " + std::to_string(out.residual) +
                      " after " + std::to_string(max_iter) +
                      " iterations (last contraction ratio " + std::to_string(ratio) +
                      "; the discrete operator may not satisfy ||U - Id|| < 1)");
}

struct ExpandResult {
  CoefficientArray coeffs;
  SampledSignal reconstruction;
  double relative_error = 0.0; // ||recon - f||_2 / ||f||_2
  double f02p_norm = 0.0;
  NeumannResult inversion;
};

// exact evaluation of the sequence quasi-norm of Def-style dyadic intervals:
// the squared sum is piecewise constant on the endpoint partition
inline double f02p_seqnorm(const CoefficientArray& c, double p, double A) {
  if (!(p > 0.0 && p <= 1.0)) throw Error("f02p_seqnorm: p must lie in (0,1]");
  if (c.entries.empty()) return 0.0;
  struct Box {
    double lo, hi, weight;
  };
  std::vector<Box> boxes;
  std::vector<double> ends;
  for (const auto& [jk, v] : c.entries) {
    const auto [j, k] = jk;
    const double len = std::pow(A, -j);
    const double lo = len * k;
    const double hi = len * (k + 1);
    boxes.push_back({lo, hi, std::norm(v) * std::pow(A, j)});
    ends.push_back(lo);
    ends.push_back(hi);
  }
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-15; }),
             ends.end());
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < ends.size(); ++i) {
    const double mid = 0.5 * (ends[i] + ends[i + 1]);
    double s = 0.0;
    for (const auto& b : boxes)
      if (b.lo <= mid && mid < b.hi) s += b.weight;
    if (s > 0.0) integral += (ends[i + 1] - ends[i]) * std::pow(s, 0.5 * p);
  }
  return std::pow(integral, 1.0 / p);
}

// || c ||_{l^{n+1,2}} = sqrt( sum (1 + A^{-2j(n+1)} (1 + k^{2(n+1)})) |c_jk|^2 )
inline double weighted_seqnorm(const CoefficientArray& c, double A, int n) {
  double s = 0.0;
  for (const auto& [jk, v] : c.entries) {
    const auto [j, k] = jk;
    const double w =
        1.0 + std::pow(A, -2.0 * j * (n + 1)) *
                  (1.0 + std::pow(static_cast<double>(k), 2.0 * (n + 1)));
    s += w * std::norm(v);
  }
  return std::sqrt(s);
}

// int (1 + x^{2n+2}) |f(x)|^2 dx  (the weighted-space functional, not its root)
inline double k_space_norm(const SampledSignal& f, int n) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double x = f.x_at(i);
    const double w = (i == 0 || i + 1 == f.values.size()) ? 0.5 : 1.0;
    s += w * (1.0 + std::pow(x, 2 * n + 2)) * std::norm(f.values[i]);
  }
  return s * f.dx;
}

// c = t(U^{-1} f), recon = s(c); Neumann-series inversion drives U^{-1}.
inline ExpandResult expand(const GeneratorFunction& psi, const GeneratorFunction& phi,
                           const DilationGrid& grid, const SampledSignal& f, double p,
                           double tol = 1e-8, int max_iter = 200) {
  auto op = [&](const SampledSignal& u) { return apply_U(psi, phi, grid, u).signal; };
  ExpandResult out;
  out.inversion = neumann_invert(op, f, tol, max_iter);
  out.coeffs = analyze(phi, grid, out.inversion.u);
  out.reconstruction = synthesize(psi, grid, out.coeffs);
  const double fn = f.norm2();
  if (fn > 0.0) {
    SampledSignal diff = out.reconstruction;
    for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= f.values[i];
    out.relative_error = diff.norm2() / fn;
  }
  out.f02p_norm = f02p_seqnorm(out.coeffs, p, grid.A);
  return out;
}

struct RatioReportRow {
  std::string label;
  double analysis_ratio = 0.0;  // ||t(f)||_{l^{n+1,2}} / sqrt(||f||_K)
  double synthesis_ratio = 0.0; // sqrt(||s(c)||_K) / ||c||_{l^{n+1,2}}
};

// report-only boundedness ratios for the analysis/synthesis restrictions
inline std::vector<RatioReportRow> operator_ratio_report(
    const GeneratorFunction& psi, const GeneratorFunction& phi,
    const DilationGrid& grid, int n,
    const std::vector<std::pair<std::string, SampledSignal>>& corpus) {
  std::vector<RatioReportRow> rows;
  for (const auto& [label, f] : corpus) {
    RatioReportRow row;
    row.label = label;
    const double kf = k_space_norm(f, n);
    auto coeffs = analyze(phi, grid, f);
    if (kf > 0.0) row.analysis_ratio = weighted_seqnorm(coeffs, grid.A, n) / std::sqrt(kf);
    auto s = synthesize(psi, grid, coeffs);
    const double cn = weighted_seqnorm(coeffs, grid.A, n);
    if (cn > 0.0) row.synthesis_ratio = std::sqrt(k_space_norm(s, n)) / cn;
    rows.push_back(row);
  }
  return rows;
}

} // namespace wavecert::ops
