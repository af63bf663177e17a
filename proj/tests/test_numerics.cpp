#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "wavecert/fft.hpp"
#include "wavecert/jet.hpp"
#include "wavecert/lattice.hpp"
#include "wavecert/minimize.hpp"
#include "wavecert/quadrature.hpp"

using namespace wavecert;
using namespace wavecert::numerics;

namespace {
constexpr double kPi = std::numbers::pi;

DecayEnvelope gaussian_envelope() {
  // |exp(-x^2/2)/sqrt(2pi)| <= 0.4 and <= 0.61 |x|^-6 for |x| >= 1.
  return {1e-9, 0.42, 0.61, 6.0};
}
} // namespace

TEST_CASE("integrate_line: closed-form suite with honest error bounds") {
  struct Case {
    std::function<double(double)> f;
    DecayEnvelope env;
    double oracle;
  };
  const std::vector<Case> cases = {
      {[](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); },
       gaussian_envelope(), 1.0},
      {[](double x) { return 1.0 / (1.0 + x * x); }, {1e-9, 1.1, 1.1, 2.0}, kPi},
      {[](double x) { return std::exp(-std::abs(x)); }, {1e-9, 1.1, 2.8, 4.0}, 2.0},
  };
  for (const auto& c : cases) {
    auto r = integrate_line(c.f, c.env, 1e-10);
    CHECK(r.valid());
    CHECK(std::abs(r.value - c.oracle) <= r.error_bound);
  }
}

TEST_CASE("integrate_line: Gaussian density mass 1 within 1e-8") {
  auto r = integrate_line(
      [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); },
      gaussian_envelope(), 1e-10);
  CHECK(std::abs(r.value - 1.0) <= 1e-8);
  CHECK(r.error_bound <= 1e-8);
}

TEST_CASE("integrate_line: zero integrand") {
  DecayEnvelope tiny{1e-9, 1e-300, 1e-300, 2.0};
  auto r = integrate_line([](double) { return 0.0; }, tiny, 1e-10);
  CHECK(r.value == 0.0);
  CHECK(r.error_bound <= 1e-15);
}

TEST_CASE("integrate_line: arctan oracle for 1/(1+x^2)") {
  auto r = integrate_line([](double x) { return 1.0 / (1.0 + x * x); },
                          {1e-9, 1.1, 1.1, 2.0}, 1e-9);
  CHECK(std::abs(r.value - kPi) <= r.error_bound);
  CHECK(std::abs(r.value - kPi) <= 1e-6);
}

TEST_CASE("integrate_line: non-integrable tail rejected") {
  DecayEnvelope bad{1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(integrate_line([](double) { return 0.0; }, bad, 1e-8),
                  NonIntegrableTail);
}

TEST_CASE("integrate_line: halving rel_tol never increases error_bound") {
  auto f = [](double x) { return std::cos(3.0 * x) * std::exp(-0.5 * x * x); };
  DecayEnvelope env{1e-9, 1.1, 2.8, 6.0};
  double prev = integrate_line(f, env, 1e-4).error_bound;
  for (double tol = 5e-5; tol >= 1e-10; tol *= 0.5) {
    const double cur = integrate_line(f, env, tol).error_bound;
    CHECK(cur <= prev * (1.0 + 1e-12));
    prev = cur;
  }
}

TEST_CASE("lattice_sum: zero term") {
  auto r = lattice_sum([](std::int64_t) { return EstimatedValue{0.0, 0.0}; },
                       [](std::int64_t) { return 0.0; });
  CHECK(r.value == 0.0);
  CHECK(r.error_bound == 0.0);
}

TEST_CASE("lattice_sum: geometric series 2^-|l| -> 3") {
  auto r = lattice_sum(
      [](std::int64_t l) {
        return EstimatedValue{std::pow(2.0, -std::abs(static_cast<double>(l))), 0.0};
      },
      [](std::int64_t L) { return 2.0 * std::pow(2.0, -static_cast<double>(L)); });
  CHECK(std::abs(r.value - 3.0) <= 1e-10);
  CHECK(std::abs(r.value - 3.0) <= r.error_bound);
}

TEST_CASE("lattice_sum: 1/(1+l^2) -> pi coth(pi)") {
  const double oracle = kPi / std::tanh(kPi); // = pi coth(pi)
  auto r = lattice_sum(
      [](std::int64_t l) {
        const double x = static_cast<double>(l);
        return EstimatedValue{1.0 / (1.0 + x * x), 0.0};
      },
      [](std::int64_t L) { return 2.0 * std::atan(1.0 / std::max<double>(L, 1)); },
      LatticeSumOptions{0.0, 4e-9, std::int64_t{1} << 31});
  CHECK(std::abs(r.value - oracle) <= r.error_bound);
  CHECK(std::abs(r.value - oracle) <= 1e-8);
}

TEST_CASE("lattice_sum: symmetric under l -> -l relabeling") {
  auto term = [](std::int64_t l) {
    const double x = static_cast<double>(l);
    return EstimatedValue{std::exp(-0.3 * std::abs(x)) * (1.0 + 0.1 * x), 0.0};
  };
  auto reflected = [&](std::int64_t l) { return term(-l); };
  auto maj = [](std::int64_t L) {
    return 8.0 * std::exp(-0.3 * static_cast<double>(L)) * (2.0 + 0.4 * L);
  };
  auto a = lattice_sum(term, maj);
  auto b = lattice_sum(reflected, maj);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-15));
}

TEST_CASE("lattice_sum: divergent majorant rejected") {
  CHECK_THROWS_AS(lattice_sum([](std::int64_t) { return EstimatedValue{1.0, 0.0}; },
                              [](std::int64_t) { return 1.0; },
                              LatticeSumOptions{1e-12, 0.0, 1024}),
                  DivergentTail);
}

TEST_CASE("minimize_scalar: quadratic") {
  auto r = minimize_scalar([](double x) { return (x - 2.0) * (x - 2.0); }, 0.0, 10.0,
                           1e-8);
  CHECK(std::abs(r.argmin - 2.0) <= 1e-6);
}

TEST_CASE("minimize_scalar: x + 4/x has minimum 4 at x=2") {
  auto r = minimize_scalar([](double x) { return x + 4.0 / x; }, 0.1, 100.0, 1e-10);
  CHECK(std::abs(r.argmin - 2.0) <= 1e-6);
  CHECK(r.min == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("minimize_scalar: constant objective") {
  auto r = minimize_scalar([](double) { return 7.5; }, 1.0, 9.0, 1e-8);
  CHECK(r.min == 7.5);
  CHECK(r.argmin >= 1.0);
  CHECK(r.argmin <= 9.0);
}

TEST_CASE("minimize_scalar: invalid bracket") {
  CHECK_THROWS_AS(minimize_scalar([](double x) { return x; }, 1.0, 1.0, 1e-8),
                  InvalidBracket);
}

TEST_CASE("Jet: derivatives of x^2 exp(-x^2) match closed forms") {
  const double x0 = 0.7;
  auto x = Jet::variable(x0, 4);
  auto f = x * x * exp(-1.0 * (x * x));
  const double e = std::exp(-x0 * x0);
  CHECK(f.derivative(0) == doctest::Approx(x0 * x0 * e).epsilon(1e-14));
  CHECK(f.derivative(1) ==
        doctest::Approx((2.0 * x0 - 2.0 * x0 * x0 * x0) * e).epsilon(1e-13));
  // f'' = (2 - 10 x^2 + 4 x^4) e^{-x^2}
  CHECK(f.derivative(2) ==
        doctest::Approx((2.0 - 10.0 * x0 * x0 + 4.0 * std::pow(x0, 4)) * e)
            .epsilon(1e-13));
}

TEST_CASE("Jet: sin/div/pow recurrences") {
  auto x = Jet::variable(0.3, 5);
  auto g = sin(x) / (1.0 + x * x);
  // compare against central finite differences of the scalar function
  auto scalar = [](double t) { return std::sin(t) / (1.0 + t * t); };
  const double h = 1e-5;
  const double d1 = (scalar(0.3 + h) - scalar(0.3 - h)) / (2.0 * h);
  CHECK(g.derivative(1) == doctest::Approx(d1).epsilon(1e-8));
  auto p = pow(1.0 + x * x, 1.5);
  const double pd1 = 3.0 * 0.3 * std::sqrt(1.0 + 0.09);
  CHECK(p.derivative(1) == doctest::Approx(pd1).epsilon(1e-12));
}

TEST_CASE("fft_pow2: transform of a delta and linearity round trip") {
  std::vector<std::complex<double>> a(8, {0.0, 0.0});
  a[1] = {1.0, 0.0};
  auto b = a;
  fft_pow2(b, +1);
  for (std::size_t k = 0; k < 8; ++k) {
    const double ang = 2.0 * kPi * static_cast<double>(k) / 8.0;
    CHECK(b[k].real() == doctest::Approx(std::cos(ang)).epsilon(1e-12));
    CHECK(b[k].imag() == doctest::Approx(std::sin(ang)).epsilon(1e-12));
  }
  fft_pow2(b, -1);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(std::abs(b[k] / 8.0 - a[k]) < 1e-12);
  }
}

TEST_CASE("integrate_segment: panel budget exhaustion reported") {
  // highly oscillatory with a tiny panel budget
  auto f = [](double x) { return std::cos(4000.0 * x * x); };
  CHECK_THROWS_AS(
      integrate_segment(f, 0.0, 10.0, 1e-12, QuadratureOptions{16}),
      NoConvergence);
}
