#pragma once

#include <random>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "fock.hpp"
#include "heisenberg.hpp"
#include "zhu.hpp"

// Fock-model checks of the closed forms and of the genus-two Zhu recursion.
namespace g2zhu::fock {

struct OracleConfig {
  cplx tau1{0, 1}, tau2{0, 1.2};
  cplx eps = 0.1;
  int level_cap = 6;
  int M = 32;
  double coeff_radius = 0.5;  // |eps| of the samples used for coefficient extraction
  FDConfig fd{};
};

enum class ZhuVector { h, omega };

namespace detail {

// insertion points well outside |eps|^{1/2}: level-n terms decay like (eps/(x y))^n
inline cplx pt(double r, double a) { return std::polar(r, a); }

inline Insertions hs(std::vector<cplx> z) { return {std::nullopt, std::move(z)}; }

// derivative of f in a complex coordinate by central differences with one Richardson step
inline cplx coord_derivative(const std::function<cplx(cplx)>& f, cplx z, double h = 1e-3) {
  cplx d1 = (f(z + h) - f(z - h)) / (2 * h), d2 = (f(z + h / 2) - f(z - h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

// |omitted tail| / |sum| estimated from the last two levels as a geometric series
inline double tail_estimate(const std::vector<cplx>& lv) {
  cplx sum = 0.0;
  for (cplx c : lv) sum += c;
  if (lv.size() < 2 || std::abs(sum) == 0) return 0;
  double a = std::abs(lv[lv.size() - 2]), b = std::abs(lv.back());
  if (a == 0) return 0;
  double r = std::min(b / a, 0.5);
  return b * r / (1 - r) / std::abs(sum);
}

// The stated tolerances hold at level cap >= 6; below that the O(eps^{L+1}) truncation dominates and the
// tolerance widens to 3 (L+1) times the estimated tail (eps d/deps weights level n by n).
inline double cap_tolerance(double tol, int cap, double tail) {
  return cap >= 6 ? tol : std::max(tol, 3.0 * (cap + 1) * tail);
}

}  // namespace detail

// Truncated genus-two sums against the genus-two Zhu recursion with coefficients from module zhu.
inline ResidualReport verify_genus2_zhu(ZhuVector v, const OracleConfig& cfg = {}) {
  ResidualReport rep;
  rep.name = v == ZhuVector::h ? "genus2_zhu_h" : "genus2_zhu_omega";
  rep.tolerance = 1e-5;
  ModuliPoint p(cfg.tau1, cfg.tau2, cfg.eps);
  Sewing s(p, cfg.M);
  BruteConfig bc;
  bc.level_cap = cfg.level_cap;
  double tail = 0;
  auto Z = [&](const Insertions& l, const Insertions& r) {
    auto lv = genus2_levels(l, r, p, bc);
    tail = std::max(tail, detail::tail_estimate(lv));
    cplx t = 0.0;
    for (cplx c : lv) t += c;
    return t;
  };
  cplx Z0 = Z({}, {});
  cplx x1 = detail::pt(1.8, 0.4), x2 = detail::pt(2.0, 2.3), y1 = detail::pt(1.9, 1.2), y2 = detail::pt(2.1, 4.0);

  try {
    if (v == ZhuVector::h) {
      Zhu z1(s, 1);
      auto P2 = [&](SurfacePoint a, SurfacePoint b) { return z1.P(0, 1, a, b); };
      // no other insertions: both sides vanish
      rep.add("h@x1 | -", std::abs(Z(detail::hs({x1}), {})), std::abs(Z0));
      // h@x1 | h@y1
      cplx lhs = Z(detail::hs({x1}), detail::hs({y1}));
      cplx rhs = P2({1, x1}, {2, y1}) * Z0;
      rep.add("h@x1 | h@y1", std::abs(lhs - rhs), std::abs(rhs));
      // h@x1, h@x2 | h@y1, h@y2
      lhs = Z(detail::hs({x1, x2}), detail::hs({y1, y2}));
      rhs = P2({1, x1}, {1, x2}) * Z({}, detail::hs({y1, y2})) + P2({1, x1}, {2, y1}) * Z(detail::hs({x2}), detail::hs({y2})) +
            P2({1, x1}, {2, y2}) * Z(detail::hs({x2}), detail::hs({y1}));
      rep.add("h@x1, h@x2 | h@y1, h@y2", std::abs(lhs - rhs), std::abs(rhs));
      // v on torus 2
      lhs = Z(detail::hs({x1}), detail::hs({y1}));
      rhs = P2({2, y1}, {1, x1}) * Z0;
      rep.add("h@y1 (torus 2) | h@x1", std::abs(lhs - rhs), std::abs(rhs));
    } else {
      Zhu z2(s, 2);
      ModuliStencil st(p, cfg.M, cfg.fd);
      auto grad = genus2_brute_gradient(p, bc);
      for (int a = 1; a <= 2; ++a) {
        cplx x = a == 1 ? x1 : y1;
        Insertions w{x, {}};
        cplx lhs = a == 1 ? Z(w, {}) : Z({}, w);
        auto phi = z2.Phi({a, x});
        cplx rhs = dx_combine(phi, grad);
        rep.add("omega~@torus" + std::to_string(a) + " (Fock O_a)", std::abs(lhs - rhs), std::abs(lhs));
        // O_a read off the closed form by finite differences instead
        cplx rfd = dx_combine(phi, st.gradient([](const Sewing& w2) { return z2_partition(w2); }));
        rep.add("omega~@torus" + std::to_string(a) + " (FD O_a)", std::abs(lhs - rfd), std::abs(lhs));
      }
      // omega~@x1 with h@x2 on torus 1 and h@y1 on torus 2: Ward form, q d/dq by FD in tau at fixed insertions
      auto Zins = [&](const ModuliPoint& q, cplx a, cplx b) {
        return genus2_brute(detail::hs({a}), detail::hs({b}), q, bc);
      };
      cplx lhs = Z(Insertions{x1, {x2}}, detail::hs({y1}));
      std::array<cplx, 3> g{};
      for (int d = 0; d < 2; ++d) {
        auto f = [&](const ModuliPoint& q) { return Zins(q, x2, y1); };
        g[d] = moduli_derivative(f, d == 0 ? Direction::tau1 : Direction::tau2, p, cfg.fd);
      }
      auto lv = genus2_levels(detail::hs({x2}), detail::hs({y1}), p, bc);
      for (std::size_t n = 0; n < lv.size(); ++n) g[2] += static_cast<double>(n) * lv[n];
      auto phi = z2.Phi({1, x1});
      cplx Zb = Zins(p, x2, y1);
      cplx dx2 = detail::coord_derivative([&](cplx z) { return Zins(p, z, y1); }, x2);
      cplx dy1 = detail::coord_derivative([&](cplx z) { return Zins(p, x2, z); }, y1);
      cplx rhs = dx_combine(phi, g) + z2.P(0, 0, {1, x1}, {1, x2}) * dx2 + z2.P(0, 1, {1, x1}, {1, x2}) * Zb +
                 z2.P(0, 0, {1, x1}, {2, y1}) * dy1 + z2.P(0, 1, {1, x1}, {2, y1}) * Zb;
      rep.add("omega~@x1, h@x2 | h@y1 (Ward)", std::abs(lhs - rhs), std::abs(lhs));
    }
  } catch (const std::exception& e) {
    rep.errors.push_back(e.what());
  }
  rep.tolerance = detail::cap_tolerance(rep.tolerance, cfg.level_cap, tail);
  return rep;
}

struct CoefficientTable {
  std::vector<cplx> brute, closed;
};

// eps-coefficients of the truncated no-insertion sum against (eta1 eta2)^{-1} det(1 - A1 A2)^{-1/2}
inline ResidualReport check_partition_coefficients(const OracleConfig& cfg, CoefficientTable* table = nullptr) {
  ResidualReport rep;
  rep.name = "partition_coefficients";
  rep.tolerance = 1e-9;
  ModuliPoint base(cfg.tau1, cfg.tau2, 0.0);
  int deg = std::min(cfg.level_cap, 4);
  BruteConfig bc;
  bc.level_cap = deg;
  auto closed = eps_coefficients(
      [&](cplx e) {
        ModuliPoint q = base.with_eps(e);
        return z2_partition(Sewing(q, choose_truncation(q)));
      },
      deg, cfg.coeff_radius);
  auto brute = eps_coefficients([&](cplx e) { return genus2_brute({}, {}, base.with_eps(e), bc); }, deg, cfg.coeff_radius);
  double c0 = std::abs(brute[0]);
  for (int n = 0; n <= deg; ++n)
    rep.add("eps^" + std::to_string(n), std::abs(brute[n] - closed[n]), (n % 2) ? c0 : std::abs(closed[n]));
  if (table) *table = {brute, closed};
  return rep;
}

// (h|h) and (h h|) two-point functions against omega(x,y) Z
inline ResidualReport check_two_point(const OracleConfig& cfg) {
  ResidualReport rep;
  rep.name = "two_point";
  rep.tolerance = 1e-6;
  ModuliPoint p(cfg.tau1, cfg.tau2, cfg.eps);
  Sewing s(p, cfg.M);
  BruteConfig bc;
  bc.level_cap = cfg.level_cap;
  cplx Z = z2_partition(s);
  cplx x1 = detail::pt(1.8, 0.4), x2 = detail::pt(2.0, 2.3), y1 = detail::pt(1.9, 1.2);
  auto lv = genus2_levels(detail::hs({x1}), detail::hs({y1}), p, bc);
  double tail = detail::tail_estimate(lv);
  cplx l = 0.0, r = s.omega({1, x1}, {2, y1}) * Z;
  for (cplx c : lv) l += c;
  rep.add("h@x1 | h@y1", std::abs(l - r), std::abs(r));
  lv = genus2_levels(detail::hs({x1, x2}), {}, p, bc);
  tail = std::max(tail, detail::tail_estimate(lv));
  l = 0.0;
  for (cplx c : lv) l += c;
  r = s.omega({1, x1}, {1, x2}) * Z;
  rep.add("h@x1, h@x2 | -", std::abs(l - r), std::abs(r));
  rep.tolerance = detail::cap_tolerance(rep.tolerance, cfg.level_cap, tail);
  return rep;
}

// Gram inverse, resolution of the identity, basis independence and the eps-grading of level contributions.
inline ResidualReport check_fock_invariants(const OracleConfig& cfg, unsigned seed = 7) {
  ResidualReport rep;
  rep.name = "fock_invariants";
  rep.tolerance = 1e-10;
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  auto rnd = [&] { return cplx(nd(rng), nd(rng)); };
  int L = cfg.level_cap;
  for (int n = 0; n <= L; ++n) {
    GramBlock g = gram_block(n, cfg.eps, L);
    int dim = static_cast<int>(g.basis.size());
    double gs = g.matrix.cwiseAbs().maxCoeff() * g.dual.cwiseAbs().maxCoeff();
    rep.add("level " + std::to_string(n) + " Gram * dual = 1", (g.matrix * g.dual - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff(),
            std::max(1.0, gs) * 1e-2);  // 1e-12 up to conditioning
    FockState v;
    v.cap = L;
    for (const auto& b : g.basis) v += b * rnd();
    FockState back;
    back.cap = L;
    for (int i = 0; i < dim; ++i) {
      FockState ubar;
      ubar.cap = L;
      for (int j = 0; j < dim; ++j) ubar += g.basis[j] * g.dual(j, i);
      back += g.basis[i] * pairing(v, ubar, cfg.eps);
    }
    double err = 0, scale = 0;
    for (const auto& [p, c] : v.terms) {
      auto it = back.terms.find(p);
      err = std::max(err, std::abs(c - (it == back.terms.end() ? cplx(0.0) : it->second)));
      scale = std::max(scale, std::abs(c));
    }
    rep.add("level " + std::to_string(n) + " sum_u <v, u-bar> u = v", err, scale);
    if (n + 1 <= L) {
      GramBlock c = gram_block(n + 1, cfg.eps, L);
      double cross = 0;
      for (const auto& a : g.basis)
        for (const auto& b : c.basis) cross = std::max(cross, std::abs(pairing(a, b, cfg.eps)));
      rep.add("levels " + std::to_string(n) + "," + std::to_string(n + 1) + " orthogonal", cross, 1.0);
    }
  }
  ModuliPoint p(cfg.tau1, cfg.tau2, cfg.eps);
  BruteConfig bc;
  bc.level_cap = L;
  Insertions l = detail::hs({detail::pt(1.8, 0.4)}), r = detail::hs({detail::pt(1.9, 1.2)});
  cplx ref = genus2_brute(l, r, p, bc);
  BruteConfig rc = bc;
  for (int n = 1; n <= L; ++n) {
    int dim = static_cast<int>(partitions(n).size());
    Mat B(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) B(i, j) = rnd() + (i == j ? cplx(3.0) : cplx(0.0));
    rc.basis_change[n] = B;
  }
  rep.add("random basis change", std::abs(genus2_brute(l, r, p, rc) - ref), std::abs(ref));
  auto a = genus2_levels(l, r, p, bc), b = genus2_levels(l, r, p.with_eps(2.0 * cfg.eps), bc);
  for (int n = 0; n <= L; ++n) {
    if (std::abs(a[n]) == 0) continue;
    rep.add("level " + std::to_string(n) + " ratio Z(2 eps)/Z(eps) = 2^n", std::abs(b[n] / a[n] - std::pow(2.0, n)),
            std::pow(2.0, n));
  }
  return rep;
}

// Matchings vs recursion on every state of weight <= 6, the genus-one Ward identity and q d/dq (1/eta) = Z(omega~).
inline ResidualReport check_genus1(cplx tau, FDConfig fd = {}) {
  ResidualReport rep;
  rep.name = "genus1_oracle";
  rep.tolerance = 1e-8;
  Torus t(tau);
  double worst = 0, scale = 0;
  for (int n = 0; n <= 6; ++n)
    for (const auto& p : partitions(n)) {
      FockState s = FockState::monomial(p);
      cplx a = genus1_one_point(s, t), b = genus1_one_point_zhu(s, t);
      worst = std::max(worst, std::abs(a - b));
      scale = std::max(scale, std::abs(a));
    }
  rep.add("matchings vs Zhu recursion, weight <= 6", worst, std::max(scale, 1.0) * 1e-2);  // 1e-10 absolute
  FockState vac = FockState::vacuum();
  cplx x = detail::pt(0.9, 0.3), z1 = detail::pt(1.1, 2.2), z2 = detail::pt(0.7, 4.1);
  auto two = [&](const Torus& tt, cplx a, cplx b) { return genus1_npoint({a, b}, vac, tt); };
  cplx lhs = genus1_omega_npoint(x, {z1, z2}, vac, t);
  fd.validate();
  auto f = [&](double h) {
    Torus tp(tau + h), tm(tau - h);
    return (two(tp, z1, z2) - two(tm, z1, z2)) / (2 * h);
  };
  cplx qd = (4.0 * f(fd.step / 2) - f(fd.step)) / 3.0 / two_pi_i;
  cplx Zb = two(t, z1, z2);
  cplx d1 = detail::coord_derivative([&](cplx z) { return two(t, z, z2); }, z1);
  cplx d2 = detail::coord_derivative([&](cplx z) { return two(t, z1, z); }, z2);
  cplx rhs = qd + t.P(1, x - z1) * d1 + t.P(2, x - z1) * Zb + t.P(1, x - z2) * d2 + t.P(2, x - z2) * Zb;
  rep.add("genus-one Ward identity", std::abs(lhs - rhs), std::abs(lhs));
  FockState om = FockState::monomial({1, 1}) * 0.5;
  cplx z = genus1_one_point(om, t);
  cplx trace = truncated_L0_trace(t, 100);
  rep.add("Z(omega~) vs truncated Tr (L(0) - 1/24) q^(L(0) - 1/24)", std::abs(z - trace), std::abs(z));
  rep.add("Z(omega~) vs E_2/(2 eta)", std::abs(z - 0.5 * t.E(2) / t.eta()), std::abs(z));
  return rep;
}

}  // namespace g2zhu::fock
