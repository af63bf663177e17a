#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "wavecert/estimate.hpp"
#include "wavecert/errors.hpp"

namespace wavecert::numerics {

struct LatticeSumOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  std::int64_t max_radius = 1 << 24;
};

// Sum over l in Z of term(l), accumulated in symmetric pairs and truncated at
// the smallest dyadic radius whose tail majorant is below tolerance.
// tail_majorant(L) must bound sum_{|l|>L} |term(l)| and tend to zero.
template <class Term, class Majorant>
EstimatedValue lattice_sum(Term&& term, Majorant&& tail_majorant,
                           const LatticeSumOptions& opts = {}) {
  const EstimatedValue head = term(std::int64_t{0});
  double sum = head.value, comp = 0.0; // Kahan accumulation
  double err = head.error_bound;
  double absacc = std::abs(head.value);
  auto absorb = [&](const EstimatedValue& t) {
    const double y = t.value - comp;
    const double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
    err += t.error_bound;
    absacc += std::abs(t.value);
  };
  std::int64_t done = 0;
  for (std::int64_t radius = 1;; radius *= 2) {
    const double tail = tail_majorant(done);
    if (tail <= std::max(opts.rel_tol * std::abs(sum), opts.abs_tol) ||
        tail <= 1e-300) {
      return {sum, err + std::max(tail, 0.0) + 4e-16 * absacc};
    }
    if (done >= opts.max_radius)
      throw DivergentTail("lattice_sum: majorant still " + std::to_string(tail) +
                          " at radius " + std::to_string(done));
    for (std::int64_t l = done + 1; l <= radius; ++l) {
      absorb(term(l));
      absorb(term(-l));
    }
    done = radius;
  }
}

} // namespace wavecert::numerics
