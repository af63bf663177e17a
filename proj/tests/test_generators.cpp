#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "wavecert/builtins.hpp"
#include "wavecert/generator.hpp"

using namespace wavecert;
using namespace wavecert::generators;

namespace {
constexpr double kPi = std::numbers::pi;

// dense numerical Fourier transform of a sampled time profile (test oracle)
Complex dft_oracle(const std::function<double(double)>& f, double xi, double half_width,
                   int n) {
  const double h = 2.0 * half_width / n;
  Complex acc{0.0, 0.0};
  for (int i = 0; i <= n; ++i) {
    const double x = -half_width + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * f(x) * std::polar(1.0, -2.0 * kPi * x * xi);
  }
  return acc * h;
}
} // namespace

TEST_CASE("mexican hat: Fourier transform normalization") {
  auto g = mexican_hat();
  CHECK(std::abs(g.fourier_at(0.0, 0)) == 0.0);

  // oracle: numerically transform the sampled time profile
  auto psi = [](double x) { return (1.0 - x * x) * std::exp(-0.5 * x * x); };
  const Complex oracle = dft_oracle(psi, 0.25, 30.0, 1 << 15);
  const Complex got = g.fourier_at(0.25, 0);
  CHECK(std::abs(got - oracle) <= 1e-6);

  CHECK(g.time_form(0.0, 0) == doctest::Approx(1.0));
}

TEST_CASE("mexican hat: time_eval through the line quadrature") {
  auto g = mexican_hat();
  auto v0 = time_eval(g, 0.0);
  CHECK(std::abs(v0.value - 1.0) <= v0.error_bound + 1e-9);
  auto v1 = time_eval(g, 1.0);
  CHECK(std::abs(v1.value) <= v1.error_bound + 1e-9);
  auto v2 = time_eval(g, 2.0);
  CHECK(v2.value == doctest::Approx(-3.0 * std::exp(-2.0)).epsilon(1e-7));
}

TEST_CASE("mexican hat: moments") {
  auto g = mexican_hat();
  // quadrature oracle for the 0th moment
  double direct = 0.0;
  const double h = 1.0 / 512.0;
  for (double x = -30.0; x <= 30.0; x += h)
    direct += (1.0 - x * x) * std::exp(-0.5 * x * x) * h;
  CHECK(std::abs(direct) <= 1e-10);

  auto m0 = moment(g, 0);
  CHECK(std::abs(m0.value) <= 1e-12);
  auto m1 = moment(g, 1);
  CHECK(std::abs(m1.value) <= 1e-12);
  auto m2 = moment(g, 2);
  // Gaussian moment identities: int x^2 e^{-x^2/2} = sqrt(2pi), int x^4 = 3 sqrt(2pi)
  CHECK(m2.value == doctest::Approx(-2.0 * std::sqrt(2.0 * kPi)).epsilon(1e-12));
  CHECK_THROWS_AS(moment(g, g.max_order + 1), OrderUnavailable);
}

TEST_CASE("moments vanish below declared_vanishing_moments") {
  for (const auto& g : {mexican_hat(), meyer_orthonormal(),
                        fourier_bump(0.125, 0.5)}) {
    for (int beta = 0; beta < std::min(g.declared_vanishing_moments, g.max_order + 1);
         ++beta) {
      auto m = moment(g, beta);
      CHECK(std::abs(m.value) <= 1e-10);
    }
  }
}

TEST_CASE("derivative oracles: finite differences match next order") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  auto near_seam = [](double x) {
    // the taper profile is C^7 with seams at |xi| in {1/3, 2/3, 4/3}; the
    // stencil's error expansion is not valid across them
    for (double s : {1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0})
      if (std::abs(std::abs(x) - s) < 0.02) return true;
    return false;
  };
  for (const auto& g : {mexican_hat(), meyer_orthonormal()}) {
    int checked = 0;
    for (int trial = 0; checked < 100; ++trial) {
      const double xi = uni(rng);
      if (g.band_limited() && near_seam(xi)) continue;
      const int k = trial % std::min(3, g.max_order);
      const double h = 3e-4;
      const Complex fd = (8.0 * (g.fourier_at(xi + h, k) - g.fourier_at(xi - h, k)) -
                          (g.fourier_at(xi + 2 * h, k) - g.fourier_at(xi - 2 * h, k))) /
                         (12.0 * h);
      const Complex d = g.fourier_at(xi, k + 1);
      CHECK(std::abs(fd - d) <= std::max(1e-6, 1e-4 * std::abs(d)));
      ++checked;
    }
  }
}

TEST_CASE("envelopes hold on sampled grid for every order") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> logu(-6.0, 6.0);
  for (const auto& g : {mexican_hat(), meyer_orthonormal(),
                        fourier_bump(0.125, 0.5)}) {
    for (int m = 0; m <= std::min(4, g.max_order); ++m) {
      const auto& env = g.envelope_for(m);
      for (int i = 0; i < 200; ++i) {
        const double xi = std::pow(10.0, logu(rng));
        CHECK(std::abs(g.fourier_at(xi, m)) <= env.bound(xi) * (1.0 + 1e-9) + 1e-300);
      }
    }
  }
}

TEST_CASE("real-generator symmetries") {
  auto mh = mexican_hat();  // real and even: \hat g real even
  auto my = meyer_orthonormal(); // real: \hat g(-xi) = conj(\hat g(xi))
  for (double xi : {0.07, 0.31, 0.9, 1.21}) {
    CHECK(std::abs(mh.fourier_at(xi, 0).imag()) <= 1e-14);
    CHECK(std::abs(mh.fourier_at(xi, 0) - mh.fourier_at(-xi, 0)) <= 1e-14);
    const Complex a = my.fourier_at(-xi, 0);
    const Complex b = std::conj(my.fourier_at(xi, 0));
    CHECK(std::abs(a - b) <= 1e-14);
  }
}

TEST_CASE("meyer: Calderon partition of unity") {
  auto g = meyer_orthonormal();
  for (double xi : {1.0, 0.5, 0.77, 2.3, 1e-2, 31.0}) {
    double sum = 0.0;
    for (int j = -40; j <= 40; ++j) {
      const double t = std::ldexp(xi, -j); // A^{-j} xi, A = 2
      if (t > 4.0 / 3.0 || t < 1.0 / 3.0) continue;
      sum += std::norm(g.fourier_at(t, 0));
    }
    CHECK(std::abs(sum - 1.0) <= 1e-10);
  }
  CHECK(std::abs(g.fourier_at(0.0, 0)) == 0.0);
}

TEST_CASE("meyer: integer translates and dyadic dilates are orthonormal") {
  auto g = meyer_orthonormal();
  // <psi_jk, psi_00> over the Fourier side; supports overlap only for |j| <= 1
  auto inner = [&](int j, int k) {
    auto integrand_re = [&](double xi) {
      const Complex a = std::pow(2.0, -0.5 * j) * g.fourier_at(std::ldexp(xi, -j), 0) *
                        std::polar(1.0, -2.0 * kPi * k * std::ldexp(xi, -j));
      const Complex b = g.fourier_at(xi, 0);
      return (a * std::conj(b)).real();
    };
    const double hi = 4.0 / 3.0 * std::pow(2.0, std::max(j, 0));
    auto r = numerics::integrate_segment(integrand_re, -hi, hi, 1e-11,
                                         numerics::QuadratureOptions{1 << 14});
    return r.value;
  };
  CHECK(inner(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  for (auto [j, k] : {std::pair{0, 1}, {0, 2}, {0, -3}, {1, 0}, {1, 1}, {1, -2},
                      {-1, 0}, {-1, 1}}) {
    CHECK(std::abs(inner(j, k)) <= 1e-9);
  }
}

TEST_CASE("bandlimited pair: declared exact duals, zero moments") {
  auto q = bandlimited_orthonormal_pair();
  CHECK(q.exact_dual_declared);
  for (int beta = 0; beta <= q.psi_star.max_order; ++beta)
    CHECK(std::abs(moment(q.psi_star, beta).value) <= 1e-12);
  CHECK_THROWS_AS(bandlimited_orthonormal_pair(3.0), InvalidDilation);
}

TEST_CASE("check_hypotheses: mexican hat passes as synthesizer for p=1, p=0.6") {
  auto g = mexican_hat();
  for (double p : {1.0, 0.6}) {
    auto rep = check_hypotheses(g, p, Role::Synthesizer);
    CHECK(rep.n == 0);
    CHECK(rep.all_pass);
    CHECK(rep.series_expansion);
  }
  auto repan = check_hypotheses(g, 1.0, Role::Analyzer);
  CHECK(repan.all_pass);
}

TEST_CASE("check_hypotheses: zero generator passes trivially") {
  auto rep = check_hypotheses(zero_generator(), 0.8, Role::Synthesizer);
  CHECK(rep.all_pass);
}

TEST_CASE("check_hypotheses: meyer passes both roles for p in (1/2,1]") {
  auto g = meyer_orthonormal();
  CHECK(check_hypotheses(g, 1.0, Role::Synthesizer).all_pass);
  CHECK(check_hypotheses(g, 0.6, Role::Analyzer).all_pass);
}

TEST_CASE("time tables agree with the quadrature contract path") {
  auto g = meyer_orthonormal();
  for (double x : {0.0, 0.4, -1.3, 2.7, 9.25}) {
    auto fast = time_value(g, 0, x);
    auto slow = time_eval(g, x, 1e-11);
    CHECK(std::abs(fast.value - slow.value) <=
          fast.error + slow.error_bound + 1e-10);
  }
}

TEST_CASE("combine: generator linear combinations") {
  auto a = mexican_hat();
  auto b = meyer_orthonormal();
  auto c = combine(2.0, a, -0.5, b);
  const double xi = 0.41;
  const Complex expect = 2.0 * a.fourier_at(xi, 1) - 0.5 * b.fourier_at(xi, 1);
  CHECK(std::abs(c.fourier_at(xi, 1) - expect) <= 1e-14);
  CHECK(c.max_order == std::min(a.max_order, b.max_order));
  const auto& env = c.envelope_for(0);
  CHECK(std::abs(c.fourier_at(0.8, 0)) <= env.bound(0.8) * (1.0 + 1e-9));
}

TEST_CASE("tabulated generator: spline round trip and limited orders") {
  std::vector<double> grid;
  std::vector<Complex> vals;
  for (int i = 0; i <= 200; ++i) {
    const double xi = -2.0 + 4.0 * i / 200.0;
    grid.push_back(xi);
    vals.emplace_back(xi * xi * std::exp(-xi * xi), 0.0);
  }
  auto g = tabulated(grid, vals);
  CHECK(g.max_order == 2);
  CHECK(std::abs(g.fourier_at(0.5, 0) -
                 Complex(0.25 * std::exp(-0.25), 0.0)) <= 1e-5);
  CHECK_THROWS_AS(g.fourier_at(0.5, 3), OrderUnavailable);
}

#include "wavecert/io.hpp"

TEST_CASE("JSON generator specs: builtins and tabulated data") {
  auto mh = io::generator_from_json(io::json{{"builtin", "mexican_hat"}});
  CHECK(mh.label == "mexican_hat");
  auto bump = io::generator_from_json(
      io::json{{"builtin", "fourier_bump"},
               {"params", {{"lo", 0.25}, {"hi", 0.75}, {"amplitude", 2.0}}}});
  CHECK(bump.fourier_support == doctest::Approx(0.75));
  CHECK(std::abs(bump.fourier_at(0.5, 0)) == doctest::Approx(2.0).epsilon(1e-12));

  io::json tab;
  tab["samples"]["grid"] = io::json::array();
  tab["samples"]["values"] = io::json::array();
  for (int i = 0; i <= 120; ++i) {
    const double xi = -1.5 + 3.0 * i / 120.0;
    tab["samples"]["grid"].push_back(xi);
    tab["samples"]["values"].push_back(xi * std::exp(-2.0 * xi * xi));
  }
  auto g = io::generator_from_json(tab);
  CHECK(g.max_order == 2);
  CHECK(std::abs(g.fourier_at(0.4, 0) -
                 Complex{0.4 * std::exp(-0.32), 0.0}) <= 2e-4);

  CHECK_THROWS_AS(io::generator_from_json(io::json{{"builtin", "nonsense"}}),
                  ConfigError);
}

TEST_CASE("check_hypotheses: required orders beyond max_order rejected") {
  std::vector<double> grid;
  std::vector<Complex> vals;
  for (int i = 0; i <= 40; ++i) {
    const double xi = -2.0 + 4.0 * i / 40.0;
    grid.push_back(xi);
    vals.emplace_back(xi * std::exp(-xi * xi), 0.0);
  }
  auto g = tabulated(grid, vals); // max_order = 2 < n+3
  CHECK_THROWS_AS(check_hypotheses(g, 1.0, Role::Synthesizer), OrderUnavailable);
}
