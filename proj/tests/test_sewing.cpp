#include <catch_amalgamated.hpp>

#include "g2zhu/calculus.hpp"
#include "g2zhu/grid.hpp"
#include "g2zhu/sewing.hpp"

using namespace g2zhu;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
}  // namespace

TEST_CASE("sewing domain", "[sewing]") {
  CHECK_NOTHROW(validate_moduli(cplx(0, 1), cplx(0, 1), 0.0));
  CHECK_NOTHROW(validate_moduli(cplx(0, 1), cplx(0, 1), 1.0));
  CHECK_THROWS_AS(validate_moduli(cplx(0, 1), cplx(0, 1), pi * pi), DomainViolation);
  ModuliPoint p(cplx(0, 1), cplx(0, 1), 0.2);
  CHECK_THROWS_AS(p.check({1, cplx(3.5, 0)}), DomainViolation);
  CHECK_THROWS_AS(p.check({3, cplx(1, 0)}), DomainViolation);
  CHECK_THROWS_AS(ModuliPoint(p.torus_ptr(1), p.torus_ptr(2), 0.2, 0.5), DomainViolation);
}

TEST_CASE("A matrices", "[sewing]") {
  ModuliPoint p(cplx(0, 1), cplx(0.3, 1.1), 0.3);
  Sewing s(p, 16);
  for (int a = 1; a <= 2; ++a) {
    const Mat& A = s.A(a);
    CHECK(rel(A(0, 0), 0.3 * p.torus(a).E(2)) < 1e-14);
    CHECK(std::abs(A(0, 1)) == 0.0);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("Neumann inverse and log det", "[sewing]") {
  ModuliPoint p0(cplx(0, 1), cplx(0, 1.2), 0.0);
  auto n0 = neumann(p0, 16);
  CHECK((n0.inv - Mat::Identity(16, 16)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(n0.logdet == cplx(0.0));
  // leading order -eps^2 E2 E2
  double e = 1e-3;
  ModuliPoint p = p0.with_eps(e);
  cplx lead = -e * e * p.torus(1).E(2) * p.torus(2).E(2);
  CHECK(std::abs(neumann(p, 16).logdet - lead) < 1e-4 * std::abs(lead));
  // log det through LU agrees with the trace series
  ModuliPoint q(cplx(0, 1), cplx(0, 1), 0.2);
  auto n = neumann(q, 16);
  CHECK(std::abs(n.logdet - n.logdet_series) < 1e-13);
  CHECK(std::abs(neumann(q, 32).logdet - n.logdet) < 1e-12);
}

TEST_CASE("period matrix", "[sewing]") {
  ModuliPoint p0(cplx(0.3, 1), cplx(0, 1.1), 0.0);
  auto om = period_matrix(p0, 16);
  CHECK(om.om11 == p0.tau(1));
  CHECK(om.om22 == p0.tau(2));
  CHECK(om.om12 == cplx(0.0));
  double e = 1e-3;
  auto o = period_matrix(p0.with_eps(e), 16);
  CHECK(std::abs(o.om12 + e / two_pi_i) < 1e-8);
  for (const auto& p : standard_grid()) {
    int M = choose_truncation(p);
    auto a = period_matrix(p, M);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a.matrix().imag());
    CHECK(es.eigenvalues().minCoeff() > 0);
    // tau_1 -> tau_1 + 1 gives Omega + E11; swap exchanges the indices
    auto b = period_matrix(p.with_tau(1, p.tau(1) + 1.0), M);
    CHECK(std::abs(b.om11 - a.om11 - 1.0) < 1e-10);
    CHECK(std::abs(b.om22 - a.om22) < 1e-10);
    CHECK(std::abs(b.om12 - a.om12) < 1e-10);
    auto c = period_matrix(p.swapped(), M);
    CHECK(std::abs(c.om11 - a.om22) < 1e-10);
    CHECK(std::abs(c.om12 - a.om12) < 1e-10);
    // M -> 2M stability
    auto d = period_matrix(p, 2 * M);
    CHECK((d.matrix() - a.matrix()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("annular forms", "[sewing]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 0.4);
  SurfacePoint x{1, cplx(1.2, 0.5)};
  CHECK(annular_form(x, 1, p.with_eps(0.0)) == cplx(0.0));
  CHECK(rel(annular_form(x, 1, p) / p.sigma(), p.torus(1).P(2, x.z)) < 1e-13);
  for (int k = 1; k <= 4; ++k) {
    cplx a = annular_form(x, k, p), b = annular_form(x, k, p.flipped());
    CHECK(std::abs(a - ((k % 2) ? -1.0 : 1.0) * b) < 1e-14 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("forms at eps = 0", "[sewing]") {
  ModuliPoint p(cplx(0, 1), cplx(0.3, 1.1), 0.0);
  Sewing s(p, 16);
  SurfacePoint x{1, cplx(0.8, 0.3)}, y{1, cplx(-0.5, 0.6)}, w{2, cplx(0.4, -0.9)};
  CHECK(s.nu(1, x) == cplx(1.0));
  CHECK(s.nu(2, x) == cplx(0.0));
  CHECK(rel(s.omega(x, y), p.torus(1).P(2, x.z - y.z)) < 1e-14);
  CHECK(s.omega(x, w) == cplx(0.0));
  CHECK(rel(s.projective(x), 6.0 * p.torus(1).E(2)) < 1e-13);
}

TEST_CASE("omega symmetry and the projective connection limit", "[sewing]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1), 0.2);
  Sewing s(p, 32);
  std::vector<SurfacePoint> pts = {{1, cplx(1.1, 0.4)}, {1, cplx(-0.9, 1.3)}, {2, cplx(0.7, -1.2)}, {2, cplx(-1.4, -0.3)}};
  for (const auto& a : pts)
    for (const auto& b : pts)
      if (a.torus != b.torus || a.z != b.z) CHECK(std::abs(s.omega(a, b) - s.omega(b, a)) < 1e-12);
  SurfacePoint x = pts[0], y{1, x.z + 1e-4};
  cplx lim = 6.0 * (s.omega(x, y) - 1.0 / ((x.z - y.z) * (x.z - y.z)));
  CHECK(rel(lim, s.projective(x)) < 1e-5);
}

TEST_CASE("branch invariance and truncation stability", "[sewing]") {
  ModuliPoint p(cplx(0.3, 1), cplx(0, 1.1), cplx(1.1, 0.6));
  int M = choose_truncation(p);
  Sewing s(p, M), f(p.flipped(), M), d(p, 2 * M);
  auto xs = surface_points(p, 1), ys = surface_points(p, 2);
  for (int k = 0; k < 4; ++k) {
    for (int i = 1; i <= 2; ++i) {
      CHECK(rel(f.nu(i, xs[k]), s.nu(i, xs[k])) < 1e-12);
      CHECK(rel(d.nu(i, ys[k]), s.nu(i, ys[k])) < 1e-10);
    }
    CHECK(rel(f.omega(xs[k], ys[k]), s.omega(xs[k], ys[k])) < 1e-12);
    CHECK(rel(d.omega(xs[k], ys[k]), s.omega(xs[k], ys[k])) < 1e-10);
    CHECK(rel(f.projective(ys[k]), s.projective(ys[k])) < 1e-12);
    CHECK(rel(d.projective(ys[k]), s.projective(ys[k])) < 1e-10);
  }
  CHECK(std::abs(f.logdet() - s.logdet()) < 1e-12);
}

TEST_CASE("contour integrals of the forms", "[sewing][calculus]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1), 0.2);
  Sewing s(p, 32);
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) {
      cplx a = contour_integral([&](const SurfacePoint& y) { return s.nu(j, y); }, Cycle::alpha, i, p);
      CHECK(std::abs(a / two_pi_i - (i == j ? 1.0 : 0.0)) < 1e-8);
      cplx b = contour_integral([&](const SurfacePoint& y) { return s.nu(j, y); }, Cycle::beta, i, p);
      auto om = s.period().matrix();
      CHECK(std::abs(b / two_pi_i - om(i - 1, j - 1)) < 1e-8);
    }
}
