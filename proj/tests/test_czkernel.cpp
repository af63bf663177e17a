#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "wavecert/builtins.hpp"
#include "wavecert/czkernel.hpp"

using namespace wavecert;
using namespace wavecert::cz;
using namespace wavecert::generators;

namespace {

// dense Riemann oracle for one lattice term of sigma/tau at resolution h
double riemann_cross_norm(const GeneratorFunction& psi, const GeneratorFunction& phi,
                          int alpha, int deriv, double l, double h) {
  const double span = phi.fourier_support + 0.25;
  double acc = 0.0;
  for (double xi = -span; xi <= span; xi += h)
    acc += std::abs(cz::detail::cross_derivative(psi, phi, alpha, deriv, xi, l)) * h;
  return acc;
}

GeneratorFunction reflected_conjugate(const GeneratorFunction& g) {
  GeneratorFunction out = g;
  auto f = g.fourier;
  out.fourier = [f](double xi, int order) {
    const double sign = order % 2 == 0 ? 1.0 : -1.0;
    return sign * f(-xi, order);
  };
  out.cache = std::make_shared<TimeCache>();
  return out;
}

} // namespace

TEST_CASE("kappa_alpha closed forms") {
  CHECK(kappa_alpha(2.0, 0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(kappa_alpha(2.0, 1) == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
  CHECK(kappa_alpha(3.0, 0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(kappa_alpha(1.0, 0), InvalidDilation);
}

TEST_CASE("sigma_alpha: zero generators give zero") {
  auto z = zero_generator();
  auto g = fourier_bump(0.125, 0.5);
  CHECK(sigma_alpha(z, g, 0).value == 0.0);
  CHECK(sigma_alpha(g, z, 1).value == 0.0);
  CHECK(tau_alpha(z, g, 0).value == 0.0);
}

TEST_CASE("sigma_alpha: band-limited pair matches dense Riemann oracle") {
  // Fourier support inside [-1/2, 1/2]\{0}: only l in {-1, 0, 1} contribute
  auto g = fourier_bump(0.125, 0.5);
  for (int alpha : {0, 1}) {
    auto impl = sigma_alpha(g, g, alpha);
    for (double l = -3; l <= 3; ++l) {
      if (std::abs(l) >= 2)
        CHECK(riemann_cross_norm(g, g, alpha, 0, l, 1e-4) == 0.0);
    }
    double coarse = 0.0, fine = 0.0;
    for (double l = -1; l <= 1; ++l) {
      coarse += riemann_cross_norm(g, g, alpha, 0, l, 2e-4);
      fine += riemann_cross_norm(g, g, alpha, 0, l, 1e-4);
    }
    const double scale = std::pow(2.0 * std::numbers::pi, alpha);
    const double oracle = fine * scale;
    const double oracle_err = 3.0 * std::abs(fine - coarse) * scale + 1e-10;
    CHECK(std::abs(impl.value - oracle) <= impl.error_bound + oracle_err);
    CHECK(impl.value > 0.0);
  }
}

TEST_CASE("tau_alpha: band-limited pair matches dense Riemann oracle") {
  auto g = fourier_bump(0.125, 0.5);
  for (int alpha : {0, 1}) {
    auto impl = tau_alpha(g, g, alpha);
    double coarse = 0.0, fine = 0.0;
    for (double l = -1; l <= 1; ++l) {
      coarse += riemann_cross_norm(g, g, alpha, alpha + 2, l, 2e-4);
      fine += riemann_cross_norm(g, g, alpha, alpha + 2, l, 1e-4);
    }
    const double scale = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);
    const double oracle = fine * scale;
    const double oracle_err = 3.0 * std::abs(fine - coarse) * scale + 1e-10;
    CHECK(std::abs(impl.value - oracle) <= impl.error_bound + oracle_err);
  }
}

TEST_CASE("tau_alpha: Leibniz expansion agrees with finite differences") {
  auto psi = mexican_hat();
  auto phi = mexican_hat();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> xi_d(-2.0, 2.0);
  std::uniform_int_distribution<int> l_d(-2, 2);
  const double h = 1e-4;
  for (int trial = 0; trial < 50; ++trial) {
    const double xi = xi_d(rng);
    const double l = l_d(rng);
    const int alpha = trial % 2;
    for (int n = 1; n <= alpha + 2; ++n) {
      const auto fd = (cz::detail::cross_derivative(psi, phi, alpha, n - 1, xi + h, l) -
                       cz::detail::cross_derivative(psi, phi, alpha, n - 1, xi - h, l)) /
                      (2.0 * h);
      const auto d = cz::detail::cross_derivative(psi, phi, alpha, n, xi, l);
      CHECK(std::abs(fd - d) <= 1e-5 * std::max(1.0, std::abs(d)));
    }
  }
  // order-2 check straight against the plain product
  auto prod = [&](double xi, double l) {
    return std::conj(phi.fourier_at(xi, 0)) * psi.fourier_at(xi + l, 0);
  };
  const double xi = 0.37, l = 1.0, hh = 1e-3;
  const auto second =
      (prod(xi + hh, l) - 2.0 * prod(xi, l) + prod(xi - hh, l)) / (hh * hh);
  const auto direct = cz::detail::cross_derivative(psi, phi, 0, 2, xi, l);
  CHECK(std::abs(second - direct) <= 1e-4 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("cz_constant: max over alpha of kappa sigma^{1/(a+2)} tau^{(a+1)/(a+2)}") {
  auto g = fourier_bump(0.125, 0.5);
  auto c = cz_constant(g, g, 0.8, 2.0);
  REQUIRE(c.alpha_max == 1);
  const double c0 = 4.0 * std::sqrt(c.sigma[0].value * c.tau[0].value);
  const double c1 =
      (10.0 / 3.0) * std::cbrt(c.sigma[1].value * c.tau[1].value * c.tau[1].value);
  CHECK(c.c_alpha[0].value == doctest::Approx(c0).epsilon(1e-12));
  CHECK(c.c_alpha[1].value == doctest::Approx(c1).epsilon(1e-12));
  CHECK(c.cz_constant.value == doctest::Approx(std::max(c0, c1)).epsilon(1e-12));
  CHECK(c.argmax_alpha == (c1 > c0 ? 1 : 0));
}

TEST_CASE("cz_constant: zero synthesizer gives zero") {
  auto c = cz_constant(zero_generator(), fourier_bump(0.125, 0.5), 1.0, 2.0);
  CHECK(c.cz_constant.value == 0.0);
}

TEST_CASE("homogeneity: scaling the synthesizer scales sigma, tau, C linearly") {
  auto g = fourier_bump(0.125, 0.5);
  auto g2 = scaled(2.5, g);
  for (int alpha : {0, 1}) {
    auto s1 = sigma_alpha(g, g, alpha);
    auto s2 = sigma_alpha(g2, g, alpha);
    CHECK(s2.value == doctest::Approx(2.5 * s1.value).epsilon(1e-12));
    auto t1 = tau_alpha(g, g, alpha);
    auto t2 = tau_alpha(g2, g, alpha);
    CHECK(t2.value == doctest::Approx(2.5 * t1.value).epsilon(1e-12));
  }
  auto c1 = cz_constant(g, g, 1.0, 2.0);
  auto c2 = cz_constant(g2, g, 1.0, 2.0);
  CHECK(c2.cz_constant.value ==
        doctest::Approx(2.5 * c1.cz_constant.value).epsilon(1e-11));
}

TEST_CASE("sigma/tau invariant under simultaneous conjugation-reflection") {
  auto psi = meyer_orthonormal();
  auto phi = meyer_orthonormal();
  auto psi_r = reflected_conjugate(psi);
  auto phi_r = reflected_conjugate(phi);
  for (int alpha : {0, 1}) {
    auto a = sigma_alpha(psi, phi, alpha);
    auto b = sigma_alpha(psi_r, phi_r, alpha);
    CHECK(std::abs(a.value - b.value) <= a.error_bound + b.error_bound + 1e-10);
  }
}

TEST_CASE("eval_K0_partial: zero synthesizer, symmetry, brute-force oracle") {
  auto z = zero_generator();
  auto mh = mexican_hat();
  CHECK(eval_K0_partial(z, mh, 0, 0.3, 1.9).value == 0.0);

  // real psi = phi, alpha = 0: K0 symmetric in (x, y)
  auto a = eval_K0_partial(mh, mh, 0, 0.35, 1.72);
  auto b = eval_K0_partial(mh, mh, 0, 1.72, 0.35);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (int trial = 0; trial < 4; ++trial) {
    const double x = uni(rng), y = uni(rng);
    auto impl = eval_K0_partial(mh, mh, 0, x, y);
    double dense = 0.0;
    for (int k = -10000; k <= 10000; ++k)
      dense += mh.time_form(x - k, 0) * mh.time_form(y - k, 0);
    CHECK(std::abs(impl.value - dense) <= impl.error_bound + 1e-12);
  }
}

TEST_CASE("eval_K0_partial: truncation refinement stays within prior error bound") {
  auto my = meyer_orthonormal();
  K0Options base;
  base.fixed_pad = 24;
  K0Options fine;
  fine.fixed_pad = 48;
  auto coarse = eval_K0_partial(my, my, 1, 0.4, 2.3, base);
  auto refined = eval_K0_partial(my, my, 1, 0.4, 2.3, fine);
  CHECK(std::abs(refined.value - coarse.value) <= coarse.error_bound);
}

TEST_CASE("eval_K_partial: dilation reindexing identity") {
  auto my = meyer_orthonormal();
  const double A = 2.0, x = 0.31, y = 1.07;
  auto s = sigma_alpha(my, my, 0);
  auto t = tau_alpha(my, my, 0);
  auto base = eval_K_partial(my, my, 0, x, y, A, s.value, t.value, 1e-12,
                             std::pair{-10, 10});
  auto scaled_pt = eval_K_partial(my, my, 0, A * x, A * y, A, s.value, t.value, 1e-12,
                                  std::pair{-11, 9});
  CHECK(scaled_pt.value.value ==
        doctest::Approx(base.value.value / A).epsilon(1e-10));
}

TEST_CASE("verify_kernel_bounds: zero pair holds with margin = bound") {
  KernelGrid grid;
  grid.points = {{0.0, 1.0}, {-0.7, 0.4}};
  auto rep = verify_kernel_bounds(zero_generator(), mexican_hat(), 1.0, 2.0, grid);
  CHECK(rep.all_pass);
  for (const auto& row : rep.rows) {
    CHECK(row.k0_lhs == 0.0);
    CHECK(row.k0_bound <= 1e-290); // envelope floors only
    CHECK(row.k0_margin >= row.k0_bound);
  }
}

TEST_CASE("verify_kernel_bounds: built-in pair on a few off-diagonal points") {
  auto my = meyer_orthonormal();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(-4.0, 4.0);
  KernelGrid grid;
  while (grid.points.size() < 6) {
    const double x = uni(rng), y = uni(rng);
    if (std::abs(x - y) > 0.05) grid.points.emplace_back(x, y);
  }
  auto rep = verify_kernel_bounds(my, my, 1.0, 2.0, grid);
  CHECK(rep.all_pass);
  CHECK(rep.rows.size() == 12); // 6 points x alpha in {0, 1}
}
