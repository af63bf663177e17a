#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "wavecert/estimate.hpp"
#include "wavecert/errors.hpp"

namespace wavecert::numerics {

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1] (QUADPACK values).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGK15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
  double kronrod = 0.0;
  double gauss = 0.0;
  double resabs = 0.0; // int of |f|, Kronrod rule
};

template <class F>
PanelResult gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  PanelResult r;
  for (int i = 0; i < 8; ++i) {
    const double x = kGK15Nodes[i] * h;
    double fv;
    if (i == 7) {
      fv = f(c);
      r.kronrod += kGK15WeightsK[7] * fv;
      r.resabs += kGK15WeightsK[7] * std::abs(fv);
      r.gauss += kGK15WeightsG[3] * fv;
    } else {
      const double f1 = f(c - x);
      const double f2 = f(c + x);
      fv = f1 + f2;
      r.kronrod += kGK15WeightsK[i] * fv;
      r.resabs += kGK15WeightsK[i] * (std::abs(f1) + std::abs(f2));
      if (i % 2 == 1) r.gauss += kGK15WeightsG[i / 2] * fv;
    }
  }
  r.kronrod *= h;
  r.gauss *= h;
  r.resabs *= std::abs(h);
  return r;
}

struct Segment {
  double a, b;
  double integral;
  double err;
  double resabs;
};

} // namespace detail

struct QuadratureOptions {
  std::size_t max_panels = 8192;
  double max_radius = std::ldexp(1.0, 60); // truncation cap, dyadic
};

// Adaptive Gauss-Kronrod on a finite interval. Bisects the worst panel until
// the summed embedded-rule error estimate drops below the target.
template <class F>
EstimatedValue integrate_segment(F&& f, double a, double b, double rel_tol,
                                 const QuadratureOptions& opts = {}) {
  std::vector<detail::Segment> segs;
  auto push = [&](double lo, double hi) {
    auto p = detail::gk15(f, lo, hi);
    segs.push_back({lo, hi, p.kronrod, std::abs(p.kronrod - p.gauss), p.resabs});
  };
  auto refinable = [](const detail::Segment& s) {
    const double mid = 0.5 * (s.a + s.b);
    return s.err > 1e-16 * s.resabs + 1e-305 && s.a < mid && mid < s.b;
  };
  push(a, b);
  double prev_err = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (;;) {
    double total = 0.0, err = 0.0, resabs = 0.0;
    std::size_t worst = segs.size();
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].integral;
      err += segs[i].err;
      resabs += segs[i].resabs;
      if (refinable(segs[i]) && (worst == segs.size() || segs[i].err > segs[worst].err))
        worst = i;
    }
    const double target =
        0.25 * rel_tol * std::max(std::abs(total), 1e-2 * resabs) + 1e-305;
    if (err <= target || worst == segs.size()) return {total, err + 5e-16 * resabs};
    // an error estimate that bisection stopped improving is evaluation noise
    // (cancellation in the integrand), not discretization error: keep it as
    // the bound instead of grinding
    stall = err > 0.99 * prev_err ? stall + 1 : 0;
    prev_err = std::min(prev_err, err);
    if (stall >= 64) return {total, err + 5e-16 * resabs};
    if (segs.size() >= opts.max_panels)
      throw NoConvergence("adaptive quadrature exceeded " +
                          std::to_string(opts.max_panels) + " panels");
    auto s = segs[worst];
    const double mid = 0.5 * (s.a + s.b);
    segs.erase(segs.begin() + static_cast<long>(worst));
    push(s.a, mid);
    push(mid, s.b);
  }
}

// integral of f over the whole line. The envelope supplies the analytic tail
// bound: truncation stops at the smallest dyadic R whose tail is below
// rel_tol times the running value.
template <class F>
EstimatedValue integrate_line(F&& f, const DecayEnvelope& envelope, double rel_tol,
                              const QuadratureOptions& opts = {}) {
  if (!envelope.integrable())
    throw NonIntegrableTail("integrate_line: envelope exponent <= 1");
  if (!(rel_tol > 0.0)) throw Error("integrate_line: rel_tol must be positive");

  double radius = 1.0;
  EstimatedValue acc = integrate_segment(f, -radius, radius, rel_tol, opts);
  for (;;) {
    const double tail = envelope.tail_integral(radius);
    if (tail <= rel_tol * std::abs(acc.value) || tail <= 1e-300 ||
        radius >= opts.max_radius) {
      return {acc.value, acc.error_bound + tail};
    }
    acc = acc + integrate_segment(f, radius, 2.0 * radius, rel_tol, opts);
    acc = acc + integrate_segment(f, -2.0 * radius, -radius, rel_tol, opts);
    radius *= 2.0;
  }
}

inline EstimatedValue integrate_line(const std::function<double(double)>& f,
                                     const DecayEnvelope& envelope, double rel_tol) {
  return integrate_line<const std::function<double(double)>&>(f, envelope, rel_tol);
}

} // namespace wavecert::numerics
