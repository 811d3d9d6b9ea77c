#include <catch_amalgamated.hpp>

#include "g2zhu/bernoulli.hpp"
#include "g2zhu/elliptic.hpp"

using namespace g2zhu;
using Catch::Matchers::WithinAbs;

TEST_CASE("Eisenstein series values", "[elliptic]") {
  Torus t(cplx(0, 1));
  CHECK(t.E(3) == cplx(0.0));
  for (int k = 3; k <= 99; k += 2) CHECK(t.E(k) == cplx(0.0));
  CHECK_THROWS_AS(t.E(1), DomainViolation);
  Torus far(cplx(0, 40));
  CHECK_THAT(std::abs(far.E(2) + 1.0 / 12.0), WithinAbs(0, 1e-12));
}

TEST_CASE("weight-k modular transformation for k >= 4", "[elliptic]") {
  for (double y : {2.0, 3.0}) {
    cplx tau(0, y);
    Torus t(tau), s(-1.0 / tau);
    for (int k : {4, 6, 8, 10}) {
      cplx lhs = s.E(k), rhs = std::pow(tau, k) * t.E(k);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
    }
  }
}

TEST_CASE("Eisenstein series against a direct lattice sum on both routes", "[elliptic]") {
  cplx tau(0.3, 1.0);
  Torus t(tau);
  for (int k : {4, 8, 62, 66, 80}) {
    cplx ref = 0.0;
    int R = k < 10 ? 400 : 4;
    for (int m = -R; m <= R; ++m)
      for (int n = -R; n <= R; ++n)
        if (m || n) ref += std::pow(two_pi_i * (double(m) + double(n) * tau), -k);
    double tol = k < 10 ? 1e-5 : 1e-12;  // the k = 4 lattice sum converges slowly
    CHECK(std::abs(t.E(k) - ref) <= tol * std::abs(ref));
  }
  double h = 1e-5;
  Torus tp(tau + h), tm(tau - h);
  CHECK(std::abs((tp.E(4) - tm.E(4)) / (2 * h) / two_pi_i - t.E_qderiv(4)) < 1e-8);
}

TEST_CASE("Bernoulli numbers", "[elliptic]") {
  CHECK(static_cast<double>(bernoulli(2)) == Catch::Approx(1.0 / 6));
  CHECK(static_cast<double>(bernoulli(4)) == Catch::Approx(-1.0 / 30));
  CHECK(static_cast<double>(bernoulli(3)) == 0.0);
}

TEST_CASE("Dedekind eta", "[elliptic]") {
  Torus t(cplx(0, 1));
  CHECK_THAT(t.eta().real(), WithinAbs(0.76822542232605665, 1e-14));
  SeriesConfig big;
  big.q_terms = 256;
  Torus t2(cplx(0, 1), big);
  CHECK(std::abs(t.eta() - t2.eta()) < 1e-12);
  cplx tau(0.2, 0.9);
  Torus a(tau), b(tau + 1.0);
  CHECK(std::abs(b.eta() - std::exp(I * pi / 12.0) * a.eta()) < 1e-13);
  Torus far(cplx(0, 30));
  CHECK(std::abs(far.eta() / std::exp(two_pi_i * far.tau() / 24.0) - 1.0) < 1e-12);
}

TEST_CASE("Weierstrass functions", "[elliptic]") {
  Torus t(cplx(0.3, 1.1));
  cplx z0(1e-6, 0);
  CHECK(std::abs(z0 * t.P(1, z0) - 1.0) < 1e-6);
  cplx z(0.4, -0.7);
  CHECK(std::abs(t.P(2, -z) - t.P(2, z)) < 1e-13);
  CHECK(std::abs(t.P(1, -z) + t.P(1, z)) < 1e-13);
  // P_{k+1} = -(1/k) d/dz P_k
  for (int k = 1; k <= 4; ++k) {
    double h = 1e-4;
    cplx d = (t.P(k, z + h) - t.P(k, z - h)) / (2 * h);
    CHECK(std::abs(-d / static_cast<double>(k) - t.P(k + 1, z)) < 1e-7 * std::max(1.0, std::abs(t.P(k + 1, z))));
  }
  cplx w(1e-4, 0);
  CHECK(std::abs(t.P(2, w) - 1.0 / (w * w) - t.E(2)) < 1e-9 * std::abs(1.0 / (w * w)));
  // quasi-periodicity of P_1 in the 2 pi i tau direction, P_2 elliptic
  cplx per = two_pi_i * t.tau();
  cplx u(0.3, 0.2);
  CHECK(std::abs(t.P(1, u + per) - (t.P(1, u) - 1.0)) < 1e-10);
  CHECK(std::abs(t.P(2, u + per) - t.P(2, u)) < 1e-10);
  CHECK(std::abs(t.P(2, u + two_pi_i) - t.P(2, u)) < 1e-10);
  // Laurent-only path agrees inside the disc and refuses outside
  CHECK(std::abs(t.P(3, u, false) - t.P(3, u)) < 1e-12);
  CHECK_THROWS_AS(t.P(2, cplx(0.96 * t.D(), 0), false), DomainViolation);
}

TEST_CASE("minimal lattice distance", "[elliptic]") {
  CHECK_THAT(min_lattice_distance(cplx(0, 1)), WithinAbs(2 * pi, 1e-12));
  CHECK_THAT(min_lattice_distance(cplx(0, 2)), WithinAbs(2 * pi, 1e-12));
  CHECK_THAT(min_lattice_distance(cplx(0.5, 0.5)), WithinAbs(pi * std::sqrt(2.0), 1e-12));
}
