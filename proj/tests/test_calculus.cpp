#include <catch_amalgamated.hpp>

#include "g2zhu/calculus.hpp"

using namespace g2zhu;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }
}  // namespace

TEST_CASE("moduli derivative", "[calculus]") {
  ModuliPoint p(cplx(0, 1), cplx(0.2, 1.1), 0.3);
  auto t1 = [](const ModuliPoint& q) { return q.tau(1) * q.tau(1); };
  CHECK(rel(moduli_derivative(t1, Direction::tau1, p), 2.0 * p.tau(1) / two_pi_i) < 1e-12);
  CHECK(std::abs(moduli_derivative(t1, Direction::tau2, p)) < 1e-12);
  auto e3 = [](const ModuliPoint& q) { return q.eps() * q.eps() * q.eps(); };
  CHECK(rel(moduli_derivative(e3, Direction::eps, p), 3.0 * std::pow(p.eps(), 3)) < 1e-10);
  CHECK(moduli_derivative(e3, Direction::eps, p.with_eps(0.0)) == 0.0);

  // Richardson levels agree on a smooth functional
  auto om12 = [](const ModuliPoint& q) { return Sewing(q, 24).period().om12; };
  FDConfig a{1e-4, 1}, b{5e-4, 2};
  cplx da = moduli_derivative(om12, Direction::eps, p, a), db = moduli_derivative(om12, Direction::eps, p, b);
  CHECK(rel(da, db) < 1e-8);
  // leading order eps d/deps Omega_12 = Omega_12 at small eps
  ModuliPoint ps = p.with_eps(1e-3);
  CHECK(rel(moduli_derivative(om12, Direction::eps, ps), om12(ps)) < 1e-4);

  CHECK_THROWS_AS(moduli_derivative(t1, Direction::tau1, p, FDConfig{1e-2, 1}), DomainViolation);
  CHECK_THROWS_AS(moduli_derivative(t1, Direction::tau1, p, FDConfig{1e-4, 0}), DomainViolation);
}

TEST_CASE("stencil and D_x", "[calculus]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 0.4);
  SurfacePoint x{1, cplx(0.8, 0.3)};
  CHECK(apply_Dx([](const Sewing&) { return cplx(2.5); }, x, p, 24) == 0.0);
  ModuliStencil st(p, 24);
  auto g = st.gradient([](const Sewing& s) { return s.point().tau(2); });
  CHECK(std::abs(g[0]) < 1e-13);
  CHECK(rel(g[1], 1.0 / two_pi_i) < 1e-12);
  CHECK(std::abs(g[2]) < 1e-13);

  // Serre derivative: k = 0 on a constant vanishes, linearity in F
  auto one = [](const Sewing&) { return cplx(1); };
  CHECK(std::abs(serre_derivative(one, 0, x, p, 24)) < 1e-14);
  auto Z = [](const Sewing& s) { return z2_partition(s); };
  auto Z3 = [](const Sewing& s) { return 3.0 * z2_partition(s); };
  cplx g1 = serre_derivative(Z, -1, x, p, 24), g3 = serre_derivative(Z3, -1, x, p, 24);
  CHECK(rel(g3, 3.0 * g1) < 1e-10);
  // Z satisfies D_x Z = s Z / 12, so its weight -1/2 Serre derivative vanishes
  Sewing s(p, 24);
  CHECK(std::abs(serre_derivative(Z, 0, x, p, 24) - s.projective(x) * Z(s) / 12.0) < 1e-7 * std::abs(Z(s)));
}

TEST_CASE("contour integrals", "[calculus]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 0.3);
  auto one = [](const SurfacePoint&) { return cplx(1); };
  CHECK(rel(contour_integral(one, Cycle::alpha, 1, p), two_pi_i) < 1e-14);
  CHECK(rel(contour_integral(one, Cycle::beta, 2, p), two_pi_i * p.tau(2)) < 1e-13);
  CHECK(std::abs(contour_integral(one, Cycle::circle, 1, p)) < 1e-14);
  auto inv = [](const SurfacePoint& x) { return 1.0 / x.z; };
  CHECK(rel(contour_integral(inv, Cycle::circle, 1, p), two_pi_i) < 1e-13);

  // refinement reaches the default tolerance and agrees with a finer start
  Sewing s(p, 24);
  auto nu = [&](const SurfacePoint& x) { return s.nu(1, x); };
  QuadratureConfig fine;
  fine.alpha_nodes = 128;
  fine.beta_order = 32;
  for (Cycle c : {Cycle::alpha, Cycle::beta})
    CHECK(std::abs(contour_integral(nu, c, 1, p) - contour_integral(nu, c, 1, p, fine)) < 1e-12);

  QuadratureConfig bad;
  bad.base_point = cplx(1e-3, 0);
  CHECK_THROWS_AS(contour_integral(one, Cycle::alpha, 1, p, bad), DomainViolation);
  QuadratureConfig few;
  few.alpha_nodes = 4;
  CHECK_THROWS_AS(contour_integral(one, Cycle::alpha, 1, p, few), DomainViolation);
}

TEST_CASE("Xi matrix and period Jacobian", "[calculus]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.2), 0.2);
  IdentitySample smp{p, {1, cplx(0.7, 0.2)}, std::nullopt, std::nullopt, {}};
  auto rep = verify_identity("jacobian", {smp});
  CHECK(rep.errors.empty());
  CHECK(rep.worst() < 1e-7);
  Sewing s(p, 24);
  CHECK(std::abs(xi_matrix(s).determinant()) > 1e-8);
}

TEST_CASE("verify_identity", "[calculus]") {
  ModuliPoint p(cplx(0, 1), cplx(0, 1.1), 0.15);
  SurfacePoint x{1, cplx(0.9, 0.4)}, y{2, cplx(-0.6, 0.8)};
  auto heis = verify_identity("heis_de", {{p, x, y, std::nullopt, {0.7, -0.4}}});
  CHECK(heis.pass());
  CHECK(heis.worst() < 1e-7);
  auto nu0 = verify_identity("nu_de", {{p.with_eps(0.0), x, y, std::nullopt, {}}});
  CHECK(nu0.errors.empty());
  CHECK(nu0.worst() < 1e-8);
  CHECK(verify_identity("dx_omega", {{p, x, y, std::nullopt, {}}}).pass());
  // missing y is a per-sample error, not an exception
  auto miss = verify_identity("omega_de", {{p, x, std::nullopt, std::nullopt, {}}});
  CHECK(miss.errors.size() == 1);
  CHECK_FALSE(miss.pass());
  CHECK_THROWS_AS(verify_identity("no_such_identity", {}), DomainViolation);
}
