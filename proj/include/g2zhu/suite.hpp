#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "grid.hpp"
#include "heisenberg.hpp"
#include "modular.hpp"
#include "oracle.hpp"
#include "zhu.hpp"

// Report producers over the standard grid, shared by the CLI and the acceptance binary.
namespace g2zhu::suite {

struct SuiteConfig {
  std::vector<ModuliPoint> grid = standard_grid();
  int M = 0;  // 0: choose_truncation per point
  QuadratureConfig quad{};
  FDConfig fd{};
  fock::OracleConfig oracle{};
};

inline int truncation(const SuiteConfig& c, const ModuliPoint& p) { return c.M > 0 ? c.M : choose_truncation(p); }

inline std::string point_label(const ModuliPoint& p) {
  std::ostringstream os;
  os.precision(6);
  os << "tau=(" << p.tau(1) << "," << p.tau(2) << ") eps=" << p.eps();
  return os.str();
}

namespace detail {

// run f on each grid point, turning exceptions into per-point errors
inline void each_point(const SuiteConfig& c, ResidualReport& rep,
                       const std::function<void(const ModuliPoint&, const Sewing&)>& f) {
  for (const auto& p : c.grid) {
    try {
      Sewing s(p, truncation(c, p));
      f(p, s);
    } catch (const std::exception& e) {
      rep.errors.push_back(point_label(p) + ": " + e.what());
    }
  }
}

inline Vec nu_pair(const Sewing& s, const SurfacePoint& x) {
  Vec v(2);
  v << s.nu(1, x), s.nu(2, x);
  return v;
}

}  // namespace detail

// (1/2 pi i) oint_{alpha_i} nu_j = delta_ij and oint_{alpha_i} omega(x, .) = 0
inline ResidualReport normalization(const SuiteConfig& c) {
  ResidualReport rep{"normalization", 1e-8, {}, {}};
  detail::each_point(c, rep, [&](const ModuliPoint& p, const Sewing& s) {
    std::string pl = point_label(p);
    for (int i = 1; i <= 2; ++i) {
      auto r = contour_integrate([&](const SurfacePoint& y) { return detail::nu_pair(s, y); }, Cycle::alpha, i, p, c.quad);
      for (int j = 1; j <= 2; ++j)
        rep.add(pl + " alpha" + std::to_string(i) + " nu" + std::to_string(j),
                std::abs(r.value(j - 1) / two_pi_i - (i == j ? 1.0 : 0.0)), 1.0);
      for (int a = 1; a <= 2; ++a)
        for (const auto& x : std::vector<SurfacePoint>{surface_points(p, a)[0], surface_points(p, a)[2]}) {
          cplx v = contour_integral([&](const SurfacePoint& y) { return s.omega(x, y); }, Cycle::alpha, i, p, c.quad);
          double scale = std::max(1.0, std::abs(s.omega(x, {i, cycle_base_point(Cycle::alpha, i, p, c.quad)})));
          std::ostringstream os;
          os << pl << " alpha" << i << " omega(" << x.torus << ":" << x.z << ", .)";
          rep.add(os.str(), std::abs(v), scale);
        }
    }
  });
  return rep;
}

// (1/2 pi i) oint_{beta_i} nu_j against Omega_ij from the Neumann formula
inline ResidualReport beta_periods(const SuiteConfig& c) {
  ResidualReport rep{"beta_periods", 1e-7, {}, {}};
  detail::each_point(c, rep, [&](const ModuliPoint& p, const Sewing& s) {
    Cplx2 om = s.period().matrix();
    for (int i = 1; i <= 2; ++i) {
      auto r = contour_integrate([&](const SurfacePoint& y) { return detail::nu_pair(s, y); }, Cycle::beta, i, p, c.quad);
      for (int j = 1; j <= 2; ++j)
        rep.add(point_label(p) + " beta" + std::to_string(i) + " nu" + std::to_string(j),
                std::abs(r.value(j - 1) / two_pi_i - om(i - 1, j - 1)), std::max(1.0, std::abs(om(i - 1, j - 1))));
    }
  });
  return rep;
}

inline ResidualReport omega_symmetry(const SuiteConfig& c) {
  ResidualReport rep{"omega_symmetry", 1e-9, {}, {}};
  detail::each_point(c, rep, [&](const ModuliPoint& p, const Sewing& s) {
    for (int a = 1; a <= 2; ++a)
      for (int b = 1; b <= 2; ++b) {
        auto xs = surface_points(p, a), ys = surface_points(p, b);
        for (int k = 0; k < 4; ++k) {
          const auto& x = xs[k];
          const auto& y = ys[(k + 1) % 4];
          cplx u = s.omega(x, y), v = s.omega(y, x);
          rep.add(point_label(p) + " torus" + std::to_string(a) + std::to_string(b), std::abs(u - v),
                  std::max(std::abs(u), 1e-300));
        }
      }
  });
  return rep;
}

// 1F_a = nu_a and 1P_2 = omega
inline ResidualReport weight_one(const SuiteConfig& c) {
  ResidualReport rep{"weight_one", 1e-10, {}, {}};
  detail::each_point(c, rep, [&](const ModuliPoint& p, const Sewing& s) {
    Zhu z1(s, 1);
    for (int a = 1; a <= 2; ++a) {
      auto xs = surface_points(p, a);
      for (const auto& x : xs)
        for (int b = 1; b <= 2; ++b) {
          cplx f = z1.F(b, x), n = s.nu(b, x);
          rep.add(point_label(p) + " 1F_" + std::to_string(b), std::abs(f - n), std::max(1.0, std::abs(n)));
        }
      for (int b = 1; b <= 2; ++b) {
        auto ys = surface_points(p, b);
        for (int k = 0; k < 4; ++k) {
          cplx u = z1.P(0, 1, xs[k], ys[(k + 1) % 4]), w = s.omega(xs[k], ys[(k + 1) % 4]);
          rep.add(point_label(p) + " 1P_2 torus" + std::to_string(a) + std::to_string(b), std::abs(u - w),
                  std::max(1.0, std::abs(w)));
        }
      }
    }
  });
  return rep;
}

// the samples used for the differential identities: 12 (x, y) pairs per point over all torus placements
inline std::vector<IdentitySample> identity_samples(const ModuliPoint& p) {
  std::vector<IdentitySample> out;
  auto x1 = surface_points(p, 1), x2 = surface_points(p, 2);
  std::vector<ModulePair> lams = {{0, 0}, {0.7, -0.4}, {1, 2}};
  int n = 0;
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b)
      for (int k = 0; k < 3; ++k) {
        const auto& X = a == 1 ? x1 : x2;
        const auto& Y = b == 1 ? x1 : x2;
        out.push_back({p, X[k], Y[(k + 1 + a) % 4], (a == b ? (b == 1 ? x2 : x1) : Y)[(k + 2 * a + 2) % 4], lams[n++ % 3]});
      }
  return out;
}

inline ResidualReport identity(const std::string& name, const SuiteConfig& c) {
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = identity_tolerance(name);
  for (const auto& p : c.grid) {
    auto r = verify_identity(name, identity_samples(p), truncation(c, p), c.quad, c.fd);
    rep.merge(r);
  }
  return rep;
}

// identities of the differential-calculus criterion (p21 has its own)
inline std::vector<std::string> differential_identities() {
  return {"heis_de", "dx_omega", "nu_de", "omega_de", "s_de", "virasoro_1pt", "ward_2pt", "jacobian"};
}

// Phi normalization, Xi Phi = Psi and invertibility of Xi
inline ResidualReport xi_checks(const SuiteConfig& c) {
  ResidualReport rep{"xi", 1e-7, {}, {}};
  detail::each_point(c, rep, [&](const ModuliPoint& p, const Sewing& s) {
    Zhu z2(s, 2);
    std::string pl = point_label(p);
    Xi3 X = xi_matrix(s, c.quad), N = phi_normalization(z2, c.quad);
    rep.add(pl + " Phi normalization", (N - Xi3::Identity()).cwiseAbs().maxCoeff(), 1.0);
    for (int a = 1; a <= 2; ++a)
      for (const auto& x : surface_points(p, a)) {
        auto ph = z2.Phi(x);
        Eigen::Vector3cd v(ph[0], ph[1], ph[2]);
        Vec ps = psi_vector(s, x);
        // pointwise tolerance 1e-8, stricter than the report's
        rep.add(pl + " Xi Phi = Psi", 10 * (X * v - ps).cwiseAbs().maxCoeff(), std::max(1.0, ps.cwiseAbs().maxCoeff()));
      }
    if (std::abs(p.eps()) >= 0.05) {
      double d = std::abs(X.determinant());
      rep.add(pl + " |det Xi| > 1e-8", d > 1e-8 ? 0.0 : 1.0, 1.0);
    }
  });
  return rep;
}

// Omega, Z under tau_a -> tau_a + 1 and the handle swap
inline ResidualReport equivariance(const SuiteConfig& c) {
  ResidualReport rep{"equivariance", 1e-9, {}, {}};
  detail::each_point(c, rep, [&](const ModuliPoint& p, const Sewing& s) {
    std::string pl = point_label(p);
    int M = truncation(c, p);
    PeriodMatrix om = s.period();
    auto cmp = [&](const std::string& what, const PeriodMatrix& a, const PeriodMatrix& b) {
      rep.add(pl + " " + what, (a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), std::max(1.0, b.matrix().cwiseAbs().maxCoeff()));
    };
    for (int a = 1; a <= 2; ++a) {
      Int2 E = Int2::Zero();
      E(a - 1, a - 1) = 1;
      ModuliPoint q = p.with_tau(a, p.tau(a) + 1.0);
      cmp("tau" + std::to_string(a) + "+1", Sewing(q, M).period(), transform_period(Sp4Element::translation(E), om));
    }
    Sewing sw(p.swapped(), M);
    cmp("swap Omega", sw.period(), transform_period(Sp4Element::swap(), om));
    for (ModulePair lam : {ModulePair{0, 0}, ModulePair{0.7, -0.4}, ModulePair{1, 2}}) {
      cplx z = z2_partition(s, lam), zs = z2_partition(sw, {lam.l2, lam.l1});
      rep.add(pl + " swap Z", std::abs(z - zs), std::abs(z));
    }
  });
  return rep;
}

// Sp(4, Z) action without a sewing-side counterpart: group law, Im > 0 on random words, the form
// transformation rules and nabla invariance.
inline ResidualReport modular_consistency(const SuiteConfig& c, unsigned seed = 11) {
  ResidualReport rep{"modular_consistency", 1e-9, {}, {}};
  std::mt19937 rng(seed);
  Int2 E11, E22, E12, U;
  E11 << 1, 0, 0, 0;
  E22 << 0, 0, 0, 1;
  E12 << 0, 1, 1, 0;
  U << 1, 1, 0, 1;
  std::vector<Sp4Element> gens = {Sp4Element::translation(E11), Sp4Element::translation(-E22), Sp4Element::translation(E12),
                                  Sp4Element::inversion(),        Sp4Element::rotation(U),        Sp4Element::swap()};
  std::uniform_int_distribution<std::size_t> pick(0, gens.size() - 1);
  std::uniform_int_distribution<int> len(1, 5);
  std::array<cplx, 2> nx{cplx(0.7, 0.2), cplx(-0.3, 0.5)}, ny{cplx(0.1, -0.4), cplx(0.9, 0.3)};
  detail::each_point(c, rep, [&](const ModuliPoint& p, const Sewing& s) {
    std::string pl = point_label(p);
    PeriodMatrix om = s.period();
    for (int w = 0; w < 4; ++w) {
      Sp4Element g = Sp4Element::identity(), h = Sp4Element::identity();
      int n = len(rng), k = n / 2;
      for (int i = 0; i < n; ++i) (i < k ? g : h) = (i < k ? g : h) * gens[pick(rng)];
      Cplx2 t = transform_period(g * h, om).matrix();
      Cplx2 u = transform_period(g, transform_period(h, om)).matrix();
      double sc = std::max(1.0, t.cwiseAbs().maxCoeff());
      rep.add(pl + " action law", (t - u).cwiseAbs().maxCoeff(), sc);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(t.imag());
      rep.add(pl + " Im Omega~ > 0", es.eigenvalues().minCoeff() > 0 ? 0.0 : 1.0, 1.0);
      FormValues a{nx, ny, cplx(0.4, 0.1), cplx(-0.2, 0.6)}, b{ny, nx, a.omega_xy, a.s_x};
      auto ta = transform_forms(g * h, om, a), tb = transform_forms(g * h, om, b);
      rep.add(pl + " omega~ symmetric", std::abs(ta.omega_xy - tb.omega_xy), std::max(1.0, std::abs(ta.omega_xy)));
      FormValues d{nx, nx, a.omega_xy, a.s_x};
      auto td = transform_forms(g * h, om, d);
      rep.add(pl + " s~ - s = 6 (omega~ - omega) on the diagonal",
              std::abs((td.s_x - d.s_x) - 6.0 * (td.omega_xy - d.omega_xy)), std::max(1.0, std::abs(td.s_x)));
    }
    FormValues v{nx, ny, cplx(0.4, 0.1), cplx(-0.2, 0.6)};
    auto tr = transform_forms(Sp4Element::translation(E12), om, v);
    rep.add(pl + " translation leaves omega, s", std::abs(tr.omega_xy - v.omega_xy) + std::abs(tr.s_x - v.s_x), 1.0);
  });
  PeriodMatrix J{cplx(0, 1), cplx(0, 1.3), 0.0};
  for (const auto& g : {Sp4Element::inversion(), Sp4Element::translation(E11), gens[4] * gens[3]}) {
    auto r = check_nabla_invariance(g, J, nx, c.fd.step);
    for (auto smp : r.samples) {
      smp.scale *= r.tolerance / rep.tolerance;  // FD tolerance 1e-7
      rep.samples.push_back(smp);
    }
  }
  return rep;
}

// observables under sqrt_eps -> -sqrt_eps
inline ResidualReport branch(const SuiteConfig& c) {
  ResidualReport rep{"branch", 1e-10, {}, {}};
  detail::each_point(c, rep, [&](const ModuliPoint& p, const Sewing& s) {
    if (p.eps() == 0.0) return;
    std::string pl = point_label(p);
    Sewing f(p.flipped(), s.order());
    auto add = [&](const std::string& what, cplx u, cplx v) { rep.add(pl + " " + what, std::abs(u - v), std::max(1.0, std::abs(u))); };
    PeriodMatrix a = s.period(), b = f.period();
    add("Omega11", a.om11, b.om11);
    add("Omega22", a.om22, b.om22);
    add("Omega12", a.om12, b.om12);
    add("Z", z2_partition(s, {0.7, -0.4}), z2_partition(f, {0.7, -0.4}));
    Zhu za(s, 2), zb(f, 2);
    for (int t = 1; t <= 2; ++t) {
      auto xs = surface_points(p, t), ys = surface_points(p, other(t));
      for (int k = 0; k < 2; ++k) {
        const auto& x = xs[k];
        add("nu1", s.nu(1, x), f.nu(1, x));
        add("nu2", s.nu(2, x), f.nu(2, x));
        add("omega", s.omega(x, ys[k]), f.omega(x, ys[k]));
        add("omega same torus", s.omega(x, xs[k + 2]), f.omega(x, xs[k + 2]));
        add("s", s.projective(x), f.projective(x));
        add("2P_1", za.P(0, 0, x, ys[k]), zb.P(0, 0, x, ys[k]));
        auto pa = za.Phi(x), pb = zb.Phi(x);
        for (int r = 0; r < 3; ++r) add("Phi" + std::to_string(r + 1), pa[r], pb[r]);
      }
    }
  });
  return rep;
}

inline ResidualReport genus2_zhu(const SuiteConfig& c) {
  ResidualReport rep = fock::verify_genus2_zhu(fock::ZhuVector::h, c.oracle);
  ResidualReport w = fock::verify_genus2_zhu(fock::ZhuVector::omega, c.oracle);
  rep.merge(w);
  rep.tolerance = std::max(rep.tolerance, w.tolerance);
  rep.name = "genus2_zhu";
  return rep;
}

inline ResidualReport genus1(const SuiteConfig& c) {
  ResidualReport rep{"genus1_oracle", 1e-8, {}, {}};
  for (cplx t : {cplx(0, 1), cplx(0, 1.2), cplx(0.3, 1)}) rep.merge(fock::check_genus1(t, c.fd));
  return rep;
}

struct Criterion {
  int id;
  std::string title;
  std::vector<ResidualReport> reports;
  bool pass() const {
    return !reports.empty() && std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass(); });
  }
};

inline Criterion criterion(int id, const SuiteConfig& c, fock::CoefficientTable* table = nullptr) {
  switch (id) {
    case 1: return {1, "alpha normalizations of nu and omega", {normalization(c)}};
    case 2: return {2, "beta periods vs Omega", {beta_periods(c)}};
    case 3: return {3, "omega symmetry", {omega_symmetry(c)}};
    case 4: return {4, "1F_a = nu_a, 1P_2 = omega", {weight_one(c)}};
    case 5: return {5, "2P_1 series vs closed form", {identity("p21", c)}};
    case 6: return {6, "Phi normalization, Xi Phi = Psi, det Xi", {xi_checks(c)}};
    case 7: {
      Criterion k{7, "differential identities", {}};
      for (const auto& n : differential_identities()) k.reports.push_back(identity(n, c));
      return k;
    }
    case 8:
      return {8, "Fock oracle: eps-coefficients and two-point function",
              {fock::check_partition_coefficients(c.oracle, table), fock::check_two_point(c.oracle)}};
    case 9: return {9, "genus-two Zhu recursion vs brute force", {genus2_zhu(c)}};
    case 10: return {10, "equivariance under tau_a + 1 and swap", {equivariance(c)}};
    case 11: return {11, "branch robustness", {branch(c)}};
    case 12: return {12, "genus-one oracle consistency", {genus1(c)}};
    default: throw DomainViolation("criterion: id must lie in 1..12");
  }
}

}  // namespace g2zhu::suite
