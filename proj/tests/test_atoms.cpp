#include <doctest.h>

#include <cmath>

#include "wavecert/atoms.hpp"

using namespace wavecert;
using namespace wavecert::atoms;

namespace {
double gaussian_tail_molecule(double x) { return x * std::exp(-0.5 * x * x); }
// exactly |x|^{-b} decay at infinity, one vanishing moment (odd)
double power_tail_molecule(double x, double b) {
  return x * std::pow(1.0 + x * x, -(b + 1.0) / 2.0);
}
// two vanishing moments: odd with int x M = int (x^4 - 3x^2) e^{-x^2/2} = 0
double hermite_molecule(double x) { return (x * x * x - 3.0 * x) * std::exp(-0.5 * x * x); }
} // namespace

TEST_CASE("make_atom: linear profile on [0,1) at p=1") {
  auto a = make_atom(1.0, {0.0, 1.0}, [](double x) { return x; });
  // oracle: int_0^1 (x - 1/2)^2 dx = 1/12, so h = sqrt(12) (x - 1/2)
  CHECK(a.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  const double c = std::sqrt(12.0);
  CHECK(a.samples[100] ==
        doctest::Approx(c * (a.x_at(100) - 0.5)).epsilon(1e-6));
  CHECK(std::abs(a.moment(0)) <= 1e-12);
}

TEST_CASE("make_atom: mean-zero profile is a fixed point up to scaling") {
  auto a = make_atom(1.0, {0.0, 1.0}, [](double x) { return x - 0.5; });
  const double c = std::sqrt(12.0);
  for (std::size_t i = 0; i < a.samples.size(); i += 511)
    CHECK(a.samples[i] == doctest::Approx(c * (a.x_at(i) - 0.5)).epsilon(1e-7));
}

TEST_CASE("make_atom: p=0.4 kills moments 0 and 1") {
  auto a = make_atom(0.4, {-1.0, 2.0}, [](double x) { return std::cos(x) + x * x; });
  CHECK(generators::moments_required(0.4) == 1);
  const double scale = a.norm2() * std::pow(a.support.length(), 1.5);
  CHECK(std::abs(a.moment(0)) <= 1e-10 * std::max(1.0, scale));
  CHECK(std::abs(a.moment(1)) <= 1e-10 * std::max(1.0, scale));
  // size condition met with equality
  CHECK(a.norm2() ==
        doctest::Approx(std::pow(3.0, 0.5 - 2.5)).epsilon(1e-12));
}

TEST_CASE("make_atom: Def-4 invariants to 1e-10 across profiles") {
  struct Case {
    double p;
    Interval I;
    std::function<double(double)> f;
  };
  const Case cases[] = {
      {1.0, {0.0, 1.0}, [](double x) { return std::exp(x); }},
      {0.7, {-2.0, 1.0}, [](double x) { return 1.0 / (1.0 + x * x); }},
      {0.4, {0.5, 4.5}, [](double x) { return std::sin(3.0 * x); }},
  };
  for (const auto& c : cases) {
    auto a = make_atom(c.p, c.I, c.f);
    const int n = generators::moments_required(c.p);
    CHECK(a.norm2() <=
          std::pow(c.I.length(), 0.5 - 1.0 / c.p) * (1.0 + 1e-12));
    for (int beta = 0; beta <= n; ++beta) {
      const double tol = 1e-10 * std::pow(c.I.length(), beta) * a.norm2() *
                         std::sqrt(c.I.length());
      CHECK(std::abs(a.moment(beta)) <= std::max(tol, 1e-13));
    }
  }
}

TEST_CASE("make_atom: degenerate profile rejected") {
  CHECK_THROWS_AS(make_atom(1.0, {0.0, 1.0}, [](double) { return 3.0; }),
                  DegenerateProfile);
}

TEST_CASE("molecule_decompose: zero molecule") {
  auto sys = hardy::moment_polynomials(0, 1.0);
  auto dec = molecule_decompose([](double) { return 0.0; }, {-0.5, 0.5}, 1.0, 10.0,
                                2.0, sys);
  CHECK(dec.c_m == 0.0);
  for (const auto& piece : dec.pieces) {
    CHECK(piece.lambda == 0.0);
    CHECK(piece.mk_norm2 == 0.0);
  }
  auto bound = hp_atomic_bound(dec, 0.0);
  CHECK(bound.total == 0.0);
  auto bound2 = hp_atomic_bound(dec, 0.7);
  CHECK(bound2.total ==
        doctest::Approx(std::pow(0.7, 1.0) *
                        hardy::c4_constant(1.0, 0, 1.0, 10.0, 2.0))
            .epsilon(1e-12));
}

TEST_CASE("molecule_decompose: annuli partition the mass") {
  auto sys = hardy::moment_polynomials(0, 1.0);
  auto dec = molecule_decompose(gaussian_tail_molecule, {-0.5, 0.5}, 1.0, 10.0, 2.0,
                                sys);
  // independent fine quadrature of ||M||^2 over the covered window
  const double hi = dec.sys.outer_radius(dec.k_max);
  double msq = 0.0;
  const int m = 400000;
  for (int i = 0; i <= m; ++i) {
    const double x = -hi + 2.0 * hi * i / m;
    const double w = (i == 0 || i == m) ? 0.5 : 1.0;
    msq += w * gaussian_tail_molecule(x) * gaussian_tail_molecule(x);
  }
  msq *= 2.0 * hi / m;
  CHECK(dec.m_norm2 * dec.m_norm2 == doctest::Approx(msq).epsilon(1e-7));
}

TEST_CASE("molecule_decompose: lambda_0 within the first claimed branch") {
  auto sys = hardy::moment_polynomials(0, 1.0);
  auto dec = molecule_decompose(gaussian_tail_molecule, {-0.5, 0.5}, 1.0, 10.0, 2.0,
                                sys);
  const double bound = (1.0 + dec.sys.calG * 1.0) *
                       std::pow(dec.zeta * 1.0, 1.0 / dec.p - 0.5) * dec.m_norm2;
  CHECK(dec.pieces[0].lambda <= bound * (1.0 + 1e-9));
}

TEST_CASE("molecule_decompose: telescoping reproduces the vanishing moment") {
  auto sys = hardy::moment_polynomials(0, 1.0);
  auto dec = molecule_decompose(gaussian_tail_molecule, {-0.5, 0.5}, 1.0, 10.0, 2.0,
                                sys);
  // sum_{j >= 0} m_alpha^j |E_j| = int M x^alpha = 0 for the odd molecule
  double total = 0.0;
  for (int k = 0; k <= dec.k_max; ++k)
    total += dec.pieces[static_cast<std::size_t>(k)].m_alpha[0] * dec.sys.measure(k);
  CHECK(std::abs(total) <= 1e-10);
  // which is the k = -1 ... telescoped head: N_alpha^{-1} would vanish; at
  // k = 0 the tail equals minus the head annulus mass
  const double head = dec.pieces[0].m_alpha[0] * dec.sys.measure(0);
  CHECK(std::abs(dec.tails[0][0].n_alpha_k + head) <=
        1e-10 + dec.tails[0][0].n_tail_bound);
}

TEST_CASE("molecule_decompose: decay violation detected") {
  auto sys = hardy::moment_polynomials(0, 1.0);
  CHECK_THROWS_AS(molecule_decompose(gaussian_tail_molecule, {-0.5, 0.5}, 1.0, 10.0,
                                     2.0, sys, 1e-8),
                  DecayViolation);
}

TEST_CASE("verify_decomposition: gaussian-tail molecule at b=10, zeta=2, p=1") {
  auto sys = hardy::moment_polynomials(0, 1.0);
  auto dec = molecule_decompose(gaussian_tail_molecule, {-0.5, 0.5}, 1.0, 10.0, 2.0,
                                sys);
  auto rep = verify_decomposition(dec);
  CHECK(rep.all_pass);
  CHECK(rep.rows.size() == static_cast<std::size_t>(dec.k_max) + 1);
  for (const auto& row : rep.rows) {
    CHECK(row.c1_ok);
    CHECK(row.lambda_ok);
    CHECK(row.moments_ok);
  }
  for (const auto& row : rep.tail_rows) {
    CHECK(row.mu_ok);
    CHECK(row.h_moments_ok);
  }
}

TEST_CASE("verify_decomposition: two-moment molecule at p=0.5") {
  auto sys = hardy::moment_polynomials(1, 1.0);
  auto dec =
      molecule_decompose(hermite_molecule, {-0.5, 0.5}, 0.5, 9.0, 2.5, sys);
  auto rep = verify_decomposition(dec);
  CHECK(rep.all_pass);
}

TEST_CASE("hp_atomic_bound: computed sums respect both displayed bounds") {
  auto sys0 = hardy::moment_polynomials(0, 1.0);
  for (double b : {8.0, 10.0, 16.0}) {
    auto dec = molecule_decompose(
        [b](double x) { return power_tail_molecule(x, b); }, {-0.5, 0.5}, 1.0, b,
        2.0, sys0);
    auto bound = hp_atomic_bound(dec, dec.c_m);
    CHECK(bound.lambda_within);
    CHECK(bound.nmu_within);
    CHECK(bound.sum_lambda_p > 0.0);
    CHECK(bound.total > 0.0);
  }
}

TEST_CASE("geometric tail: lambda_k^p ratios eventually below 2^{1-bp}") {
  const double b = 8.0, p = 1.0;
  auto sys = hardy::moment_polynomials(0, 1.0);
  auto dec = molecule_decompose([&](double x) { return power_tail_molecule(x, b); },
                                {-0.5, 0.5}, p, b, 2.0, sys, std::nullopt, 64, 9);
  const double ratio_bound = std::pow(2.0, 1.0 - b * p);
  REQUIRE(dec.k_max >= 6);
  for (int k = 3; k < dec.k_max; ++k) {
    const double lk = std::pow(dec.pieces[static_cast<std::size_t>(k)].lambda, p);
    const double lk1 = std::pow(dec.pieces[static_cast<std::size_t>(k + 1)].lambda, p);
    if (lk <= 1e-280) continue;
    // the claimed envelope ratio, with slack for the pre-asymptotic range
    CHECK(lk1 / lk <= 2.0 * ratio_bound);
  }
}

TEST_CASE("projection round trip: integrating P_k reproduces each m_alpha^k") {
  auto sys = hardy::moment_polynomials(1, 1.0);
  auto dec = molecule_decompose(hermite_molecule, {-0.5, 0.5}, 0.5, 9.0, 2.5, sys);
  for (int k : {0, 1, 2}) {
    const auto& piece = dec.pieces[static_cast<std::size_t>(k)];
    const double lo = dec.sys.inner_radius(k), hi = dec.sys.outer_radius(k);
    for (int beta = 0; beta <= 1; ++beta) {
      auto piece_int = [&](double a, double b) {
        const int m = 4000;
        const double h = (b - a) / m;
        double s = 0.0;
        for (int i = 0; i <= m; ++i) {
          const double x = a + i * h;
          const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
          double pk = 0.0;
          for (std::size_t mm = piece.p_coeffs.size(); mm-- > 0;)
            pk = pk * x + piece.p_coeffs[mm];
          s += w * pk * std::pow(x, beta);
        }
        return s * h / 3.0;
      };
      const double v =
          (k == 0 ? piece_int(-hi, hi) : piece_int(lo, hi) + piece_int(-hi, -lo)) /
          dec.sys.measure(k);
      CHECK(std::abs(v - piece.m_alpha[static_cast<std::size_t>(beta)]) <= 1e-10);
    }
  }
}

TEST_CASE("verify_decomposition: zero molecule passes vacuously") {
  auto sys = hardy::moment_polynomials(0, 1.0);
  auto dec = molecule_decompose([](double) { return 0.0; }, {-0.5, 0.5}, 1.0, 10.0,
                                2.0, sys);
  auto rep = verify_decomposition(dec);
  CHECK(rep.all_pass);
}
