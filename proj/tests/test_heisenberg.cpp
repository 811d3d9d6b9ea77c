#include <catch_amalgamated.hpp>

#include "g2zhu/calculus.hpp"
#include "g2zhu/fock.hpp"
#include "g2zhu/heisenberg.hpp"

using namespace g2zhu;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }
}  // namespace

TEST_CASE("partition function", "[heisenberg]") {
  ModuliPoint p0(cplx(0, 1), cplx(0.3, 1.1), 0.0);
  Sewing s0(p0, 16);
  cplx e1 = p0.torus(1).eta(), e2 = p0.torus(2).eta();
  CHECK(rel(z2_partition(s0), 1.0 / (e1 * e2)) < 1e-14);
  // eps^2 coefficient of Z eta1 eta2 is E2 E2 / 2
  double e = 1e-3;
  Sewing s(p0.with_eps(e), 16);
  cplx c2 = (z2_partition(s) * e1 * e2 - 1.0) / (e * e);
  cplx half = 0.5 * p0.torus(1).E(2) * p0.torus(2).E(2);
  CHECK(rel(c2, half) < 1e-5);
  // lattice factor
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 0.7);
  Sewing t(p, 32);
  cplx r = z2_partition(t, {1, 0}) / z2_partition(t);
  CHECK(rel(r, std::exp(I * pi * t.period().om11)) < 1e-13);
  // simultaneous swap
  Sewing w(p.swapped(), 32);
  CHECK(rel(z2_partition(w, {-0.4, 0.7}), z2_partition(t, {0.7, -0.4})) < 1e-12);
}

TEST_CASE("nu_lambda", "[heisenberg]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 0.7);
  Sewing s(p, 32), s0(p.with_eps(0.0), 32);
  SurfacePoint x{1, cplx(1.3, 0.4)};
  CHECK(nu_lambda(s, {0, 0}, x) == cplx(0.0));
  CHECK(nu_lambda(s0, {1, 0}, x) == cplx(1.0));
  cplx a = nu_lambda(s, {1, 0}, x), b = nu_lambda(s, {0, 1}, x), c = nu_lambda(s, {2, -3}, x);
  CHECK(std::abs(c - (2.0 * a - 3.0 * b)) < 1e-14);
}

TEST_CASE("Heisenberg n-point functions", "[heisenberg]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 0.7);
  Sewing s(p, 32);
  SurfacePoint x{1, cplx(1.3, 0.4)}, y{2, cplx(-1.1, 1.2)}, u{1, cplx(-0.9, -1.5)}, v{2, cplx(0.8, -1.6)};
  cplx Z = z2_partition(s);
  ModulePair lam{0.7, -0.4};
  CHECK(rel(h_npoint(s, lam, {x}), nu_lambda(s, lam, x) * z2_partition(s, lam)) < 1e-13);
  CHECK(rel(h_npoint(s, {}, {x, y}), s.omega(x, y) * Z) < 1e-13);
  CHECK(h_npoint(s, {}, {x, y, u}) == cplx(0.0));
  cplx a = h_npoint(s, lam, {x, y, u, v}), b = h_npoint(s, lam, {v, x, u, y});
  CHECK(rel(a, b) < 1e-13);
  CHECK_THROWS_AS(h_npoint(s, lam, {x, x}), DomainViolation);
  std::vector<SurfacePoint> many(9, x);
  CHECK_THROWS_AS(h_npoint(s, lam, many), DomainViolation);
}

TEST_CASE("Virasoro one-point function", "[heisenberg]") {
  ModuliPoint p0(cplx(0, 1), cplx(0, 1.2), 0.0);
  Sewing s0(p0, 16);
  SurfacePoint x{1, cplx(1.0, 0.3)};
  cplx Z = z2_partition(s0), E2 = p0.torus(1).E(2);
  CHECK(rel(virasoro_one_point(s0, {}, x), 0.5 * E2 * Z) < 1e-13);
  CHECK(rel(virasoro_one_point(s0, {1, 0}, x), (0.5 + 0.5 * E2) * z2_partition(s0, {1, 0})) < 1e-13);
  // half the regularized coincidence limit of the h two-point function
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 0.7);
  Sewing s(p, 32);
  ModulePair lam{0.7, -0.4};
  // symmetric offsets cancel the O(x - y) term, one Richardson step the O(d^2) one
  cplx Zl = z2_partition(s, lam);
  auto sym = [&](double d) {
    cplx v = 0.0;
    for (double e : {d, -d}) v += 0.25 * (h_npoint(s, lam, {x, {1, x.z + e}}) - Zl / (e * e));
    return v;
  };
  cplx lim = (4.0 * sym(5e-3) - sym(1e-2)) / 3.0;
  CHECK(rel(lim, virasoro_one_point(s, lam, x)) < 1e-6);
}

TEST_CASE("holomorphy of Z", "[heisenberg]") {
  ModuliPoint p(cplx(0, 1), cplx(0.3, 1.1), cplx(0.6, 0.3));
  double h = 1e-5;
  auto Z = [&](const ModuliPoint& q) { return z2_partition(Sewing(q, 32), {0.7, -0.4}); };
  for (int a = 1; a <= 2; ++a) {
    cplx dx = (Z(p.with_tau(a, p.tau(a) + h)) - Z(p.with_tau(a, p.tau(a) - h))) / (2 * h);
    cplx dy = (Z(p.with_tau(a, p.tau(a) + I * h)) - Z(p.with_tau(a, p.tau(a) - I * h))) / (2 * h);
    CHECK(std::abs(dy - I * dx) < 1e-7 * std::max(1.0, std::abs(dx)));
  }
  cplx dx = (Z(p.with_eps(p.eps() + h)) - Z(p.with_eps(p.eps() - h))) / (2 * h);
  cplx dy = (Z(p.with_eps(p.eps() + I * h)) - Z(p.with_eps(p.eps() - I * h))) / (2 * h);
  CHECK(std::abs(dy - I * dx) < 1e-7 * std::max(1.0, std::abs(dx)));
}

TEST_CASE("eps^2 coefficient against the Fock oracle", "[heisenberg][fock]") {
  ModuliPoint base(cplx(0, 1), cplx(0, 1.2), 0.0);
  auto closed = fock::eps_coefficients([&](cplx e) { return z2_partition(Sewing(base.with_eps(e), 32)); }, 2, 0.5);
  fock::BruteConfig bc;
  bc.level_cap = 2;
  auto brute = fock::eps_coefficients([&](cplx e) { return fock::genus2_brute({}, {}, base.with_eps(e), bc); }, 2, 0.5);
  CHECK(rel(brute[2], closed[2]) < 1e-9);
}
