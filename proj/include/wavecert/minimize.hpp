#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "wavecert/errors.hpp"

namespace wavecert::numerics {

struct ScalarMinimum {
  double argmin = 0.0;
  double min = 0.0;
};

// Bracketed scalar minimization: a coarse 64-point scan (log-spaced when the
// interval is positive, linear otherwise) locates the basin, golden-section
// refines it. The scan guards against smooth-but-not-proven-unimodal
// objectives; golden section then converges unconditionally inside the
// bracket.
inline ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo,
                                     double hi, double tol) {
  if (!(lo < hi)) throw InvalidBracket("minimize_scalar: lo >= hi");
  constexpr int kScanPoints = 64;

  const bool log_spaced = lo > 0.0;
  auto point = [&](int i) {
    const double t = static_cast<double>(i) / (kScanPoints - 1);
    if (log_spaced) return lo * std::pow(hi / lo, t);
    return lo + t * (hi - lo);
  };

  int best = 0;
  double fbest = f(point(0));
  for (int i = 1; i < kScanPoints; ++i) {
    const double fi = f(point(i));
    if (fi < fbest) {
      fbest = fi;
      best = i;
    }
  }

  double a = point(best > 0 ? best - 1 : 0);
  double b = point(best < kScanPoints - 1 ? best + 1 : kScanPoints - 1);
  if (!(a < b)) return {point(best), fbest};

  constexpr double kInvPhi = 0.6180339887498948482;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b)) && b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = f1 <= f2 ? x1 : x2;
  const double fm = std::min(f1, f2);
  if (fbest < fm) return {point(best), fbest};
  return {xm, fm};
}

} // namespace wavecert::numerics
