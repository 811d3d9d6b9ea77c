#include <catch_amalgamated.hpp>

#include "g2zhu/calculus.hpp"
#include "g2zhu/grid.hpp"
#include "g2zhu/zhu.hpp"

using namespace g2zhu;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
}  // namespace

TEST_CASE("shift matrices", "[zhu]") {
  auto s1 = shift_matrices(1, 12);
  CHECK(s1.gamma.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s1.pi.cwiseAbs().maxCoeff() == 0.0);
  CHECK((s1.delta - Mat::Identity(12, 12)).cwiseAbs().maxCoeff() == 0.0);
  auto s2 = shift_matrices(2, 12);
  CHECK(s2.gamma(0, 0) == cplx(1.0));
  CHECK(s2.gamma.cwiseAbs().sum() == 1.0);
  CHECK((s2.pi - s2.gamma).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s2.delta(2, 0) == cplx(1.0));
  for (int N : {2, 3}) {
    auto s = shift_matrices(N, 14);
    int K = s.K;
    CHECK((s.gamma * s.delta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.delta.transpose() * s.gamma).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.pi * s.gamma - s.gamma).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.gamma * s.pi - s.gamma).cwiseAbs().maxCoeff() == 0.0);
    Mat dd = s.delta.transpose() * s.delta;
    CHECK((dd.topLeftCorner(14 - K, 14 - K) - Mat::Identity(14 - K, 14 - K)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(shift_matrices(0, 10), DomainViolation);
}

TEST_CASE("R and P columns", "[zhu]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 0.3);
  Sewing s(p, 24);
  Zhu z(s, 1);
  SurfacePoint x{1, cplx(1.1, 0.4)}, y{2, cplx(-0.8, 1.2)};
  Row r = z.R(x);
  CHECK(rel(r(0), p.sigma() * p.torus(1).P(2, x.z)) < 1e-13);
  Sewing f(p.flipped(), 24);
  Zhu zf(f, 1);
  Row rf = zf.R(x);
  for (int m = 1; m <= 6; ++m) CHECK(std::abs(r(m - 1) - ((m % 2) ? -1.0 : 1.0) * rf(m - 1)) < 1e-13 * std::max(1.0, std::abs(r(m - 1))));
  Vec c0 = z.Pcol(0, y), c1 = z.Pcol(1, y);
  CHECK(rel(c0(0), p.sigma() * p.torus(2).P(1, y.z)) < 1e-13);
  CHECK(rel(c1(0), p.sigma() * p.torus(2).P(2, y.z)) < 1e-13);
  // P_{1+j} = ((-1)^j / j!) d^j/dy^j P_1 on the columns, j = 1
  double h = 1e-4;
  Vec d = (z.Pcol(0, {2, y.z + h}) - z.Pcol(0, {2, y.z - h})) / (2 * h);
  for (int m = 1; m <= 6; ++m) CHECK(std::abs(-d(m - 1) - c1(m - 1)) < 1e-7 * std::max(1.0, std::abs(c1(m - 1))));
  // eps = 0: everything vanishes
  Sewing s0(p.with_eps(0.0), 24);
  Zhu z0(s0, 1);
  CHECK(z0.R(x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weight one coefficients", "[zhu]") {
  for (const auto& p : standard_grid()) {
    Sewing s(p, choose_truncation(p));
    Zhu z(s, 1);
    CHECK(z.FPi(surface_points(p, 1)[0]).cwiseAbs().maxCoeff() == 0.0);
    for (int a = 1; a <= 2; ++a)
      for (const auto& x : surface_points(p, a)) {
        CHECK(rel(z.F(1, x), s.nu(1, x)) < 1e-10);
        CHECK(rel(z.F(2, x), s.nu(2, x)) < 1e-10);
        for (const auto& y : surface_points(p, other(a))) CHECK(rel(z.P(0, 1, x, y), s.omega(x, y)) < 1e-10);
      }
  }
  ModuliPoint q(cplx(0, 1), cplx(0, 1), 0.0);
  Sewing s0(q, 16);
  Zhu z0(s0, 2);
  SurfacePoint x{1, cplx(0.7, 0.2)};
  CHECK(z0.F(1, x) == cplx(1.0));
  CHECK(z0.F(2, x) == cplx(0.0));
}

TEST_CASE("generalized Weierstrass functions", "[zhu]") {
  ModuliPoint p(cplx(0, 1), cplx(0.3, 1.1), 0.8);
  Sewing s(p, choose_truncation(p));
  for (int N : {1, 2}) {
    Zhu z(s, N);
    SurfacePoint x{1, cplx(1.6, 0.5)};
    for (const auto& y : {SurfacePoint{1, cplx(-1.2, 1.0)}, SurfacePoint{2, cplx(1.4, -1.1)}}) {
      // d/dy NP_1 = NP_2
      double h = 1e-4;
      cplx d = (z.P(0, 0, x, {y.torus, y.z + h}) - z.P(0, 0, x, {y.torus, y.z - h})) / (2 * h);
      CHECK(rel(d, z.P(0, 1, x, y)) < 1e-7);
      // NP_{1,3} = (1/2) d/dy NP_{1,2}
      cplx d2 = (z.P(0, 1, x, {y.torus, y.z + h}) - z.P(0, 1, x, {y.torus, y.z - h})) / (2 * h);
      CHECK(rel(0.5 * d2, z.P(0, 2, x, y)) < 1e-7);
    }
    // regular part near the diagonal stays bounded
    cplx prev = 0.0;
    for (double r : {1e-2, 1e-3}) {
      SurfacePoint y{1, x.z + r};
      cplx reg = z.P(0, 1, x, y) - p.torus(1).P(2, x.z - y.z);
      if (r < 1e-2) CHECK(std::abs(reg - prev) < 1e-1);
      prev = reg;
    }
  }
  Zhu z(s, 2);
  CHECK_THROWS_AS(z.P(0, 0, {1, 0.5}, {1, 0.5}), DomainViolation);
  CHECK_THROWS_AS(z.P(1, 0, {1, 0.5}, {1, 0.7}), DomainViolation);
}

TEST_CASE("2P_1 closed form, pole and residue", "[zhu][calculus]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 1.2);
  int M = choose_truncation(p);
  ModuliStencil st(p, M, {});
  Zhu z(st.base(), 2);
  SurfacePoint x{1, cplx(1.9, 0.6)};
  for (const auto& y : {SurfacePoint{1, cplx(-1.5, 1.2)}, SurfacePoint{2, cplx(1.7, -1.5)}})
    CHECK(rel(p21_closed(st, z, x, y), z.P(0, 0, x, y)) < 1e-6);
  SurfacePoint y{1, x.z + 1e-5};
  CHECK(std::abs((x.z - y.z) * z.P(0, 0, x, y) - 1.0) < 1e-4);
  // residue at y = x by a small circle
  cplx res = 0.0;
  int n = 64;
  double r = 0.05;
  for (int k = 0; k < n; ++k) {
    cplx e = std::polar(1.0, 2 * pi * k / n);
    cplx yy = x.z + r * e;
    res += z.P(0, 0, {1, yy}, x) * (I * r * e) * (2 * pi / n);
  }
  CHECK(std::abs(res / two_pi_i - 1.0) < 1e-10);
}

TEST_CASE("two-differential basis", "[zhu][calculus]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 1.5);
  Sewing s(p, choose_truncation(p));
  Zhu z(s, 2);
  Xi3 N = phi_normalization(z);
  CHECK((N - Xi3::Identity()).cwiseAbs().maxCoeff() < 1e-7);
  Xi3 X = xi_matrix(s);
  Sewing f(p.flipped(), s.order());
  Zhu zf(f, 2);
  for (const auto& x : surface_points(p, 2)) {
    auto ph = z.Phi(x), pf = zf.Phi(x);
    Eigen::Vector3cd v(ph[0], ph[1], ph[2]);
    CHECK((X * v - psi_vector(s, x)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(rel(ph[2], pf[2]) < 1e-12);
  }
  CHECK_THROWS_AS(Zhu(s, 1).Phi({1, 0.5}), DomainViolation);
}
