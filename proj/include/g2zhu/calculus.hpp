#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "heisenberg.hpp"
#include "report.hpp"
#include "zhu.hpp"

namespace g2zhu {

enum class Direction { tau1, tau2, eps };

struct FDConfig {
  double step = 1e-4;
  int richardson_levels = 1;

  void validate() const {
    if (!(step > 0 && step <= 1e-3)) throw DomainViolation("FDConfig: step must lie in (0, 1e-3]");
    if (richardson_levels < 1) throw DomainViolation("FDConfig: richardson_levels >= 1");
  }
};

enum class Cycle { alpha, beta, circle };

struct QuadratureConfig {
  int alpha_nodes = 32;
  int beta_panels = 2;
  int beta_order = 16;
  int circle_nodes = 32;
  // start of alpha/beta paths; unset means offset perpendicular to the path at the mid-annulus radius
  std::optional<cplx> base_point;
  double tol = 1e-13;  // relative change under node doubling
  int max_doublings = 7;

  void validate() const {
    if (alpha_nodes < 8 || beta_panels < 1 || beta_order < 8 || circle_nodes < 8)
      throw DomainViolation("QuadratureConfig: node counts must be >= 8");
  }
};

namespace detail {

inline ModuliPoint displaced(const ModuliPoint& p, Direction d, double h) {
  switch (d) {
    case Direction::tau1: return p.with_tau(1, p.tau(1) + h);
    case Direction::tau2: return p.with_tau(2, p.tau(2) + h);
    default: return p.with_eps(p.eps() + h * p.eps() / std::abs(p.eps()));
  }
}

// converts d/dh along the stencil into q d/dq or eps d/deps
inline cplx normalize(const ModuliPoint& p, Direction d, cplx dh) {
  if (d == Direction::eps) return std::abs(p.eps()) * dh;
  return dh / two_pi_i;
}

// Neville table over central differences at h, h/2, h/4, ...
inline cplx richardson(const std::vector<cplx>& D) {
  std::vector<cplx> T = D;
  for (std::size_t j = 1; j < T.size(); ++j) {
    double f = std::pow(4.0, static_cast<double>(j)) - 1.0;
    for (std::size_t l = T.size() - 1; l >= j; --l) T[l] = T[l] + (T[l] - T[l - 1]) / f;
  }
  return T.back();
}

inline std::vector<double> gauss_legendre_nodes(int n, std::vector<double>& w) {
  std::vector<double> x(n);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * dp * dp);
  }
  return x;
}

}  // namespace detail

// q_a d/dq_a = (1/2 pi i) d/dtau_a, or eps d/deps, by central differences with Richardson extrapolation.
inline cplx moduli_derivative(const std::function<cplx(const ModuliPoint&)>& f, Direction dir, const ModuliPoint& p,
                              FDConfig fd = {}) {
  fd.validate();
  if (dir == Direction::eps && p.eps() == 0.0) return 0.0;
  std::vector<cplx> D;
  for (int l = 0; l <= fd.richardson_levels; ++l) {
    double h = fd.step / std::pow(2.0, l);
    D.push_back((f(detail::displaced(p, dir, h)) - f(detail::displaced(p, dir, -h))) / (2 * h));
  }
  return detail::normalize(p, dir, detail::richardson(D));
}

// Sewing data at the base point and at every FD stencil point, shared by all functionals of one moduli point.
class ModuliStencil {
 public:
  ModuliStencil(const ModuliPoint& p, int M, FDConfig fd = {}) : p_(p), M_(M), fd_(fd) {
    fd_.validate();
    base_ = std::make_unique<Sewing>(p, M);
    for (int d = 0; d < 3; ++d) {
      auto dir = static_cast<Direction>(d);
      if (dir == Direction::eps && p.eps() == 0.0) continue;
      for (int l = 0; l <= fd_.richardson_levels; ++l) {
        double h = fd_.step / std::pow(2.0, l);
        pts_[d].emplace_back(detail::displaced(p, dir, h), M);
        pts_[d].emplace_back(detail::displaced(p, dir, -h), M);
      }
    }
  }
  ModuliStencil(const ModuliStencil&) = delete;
  ModuliStencil& operator=(const ModuliStencil&) = delete;

  const ModuliPoint& point() const { return p_; }
  const Sewing& base() const { return *base_; }
  int order() const { return M_; }

  template <class G>
  cplx derivative(Direction dir, G&& g) const {
    int d = static_cast<int>(dir);
    if (pts_[d].empty()) return 0.0;
    std::vector<cplx> D;
    for (int l = 0; l <= fd_.richardson_levels; ++l) {
      double h = fd_.step / std::pow(2.0, l);
      D.push_back((g(pts_[d][2 * l]) - g(pts_[d][2 * l + 1])) / (2 * h));
    }
    return detail::normalize(p_, dir, detail::richardson(D));
  }

  // (q1 d/dq1, q2 d/dq2, eps d/deps) g
  template <class G>
  std::array<cplx, 3> gradient(G&& g) const {
    return {derivative(Direction::tau1, g), derivative(Direction::tau2, g), derivative(Direction::eps, g)};
  }

 private:
  ModuliPoint p_;
  int M_;
  FDConfig fd_;
  std::unique_ptr<Sewing> base_;
  std::vector<Sewing> pts_[3];
};

inline cplx dx_combine(const std::array<cplx, 3>& phi, const std::array<cplx, 3>& grad) {
  return phi[0] * grad[0] + phi[1] * grad[1] + phi[2] * grad[2];
}

// D_x f = Phi_1 q1 d/dq1 f + Phi_2 q2 d/dq2 f + Phi_3 eps d/deps f (dx^2 implicit)
inline cplx apply_Dx(const std::function<cplx(const Sewing&)>& f, const SurfacePoint& x, const ModuliPoint& p, int M,
                     FDConfig fd = {}) {
  ModuliStencil st(p, M, fd);
  Zhu z(st.base(), 2);
  return dx_combine(z.Phi(x), st.gradient(f));
}

// G_k(x) = D_x F + (k/6) s(x) F
inline cplx serre_derivative(const std::function<cplx(const Sewing&)>& F, int k, const SurfacePoint& x,
                             const ModuliPoint& p, int M, FDConfig fd = {}) {
  ModuliStencil st(p, M, fd);
  Zhu z(st.base(), 2);
  return dx_combine(z.Phi(x), st.gradient(F)) + (k / 6.0) * st.base().projective(x) * F(st.base());
}

// ---- contours -------------------------------------------------------------

// Geometric mean of the annulus bounds on torus a, or r_a/2 at eps = 0.
inline double contour_radius(const ModuliPoint& p, int a) {
  double inner = std::abs(p.eps()) / p.radius(other(a));
  return inner == 0 ? 0.5 * p.radius(a) : std::sqrt(inner * p.radius(a));
}

inline cplx cycle_base_point(Cycle c, int a, const ModuliPoint& p, const QuadratureConfig& q) {
  if (q.base_point) return *q.base_point;
  cplx dir = (c == Cycle::beta) ? I * p.tau(a) : I;
  return contour_radius(p, a) * (-I) * dir / std::abs(dir);
}

struct ContourResult {
  Vec value;
  double change = 0;  // last doubling difference
  int nodes = 0;
};

namespace detail {

inline void check_contour_point(const ModuliPoint& p, int a, cplx z) {
  double r = std::abs(p.torus(a).reduce(z).z);
  double inner = std::abs(p.eps()) / p.radius(other(a));
  if (!(r > inner) || r == 0)
    throw DomainViolation("contour_integral: contour exits annulus (|z| = " + std::to_string(r) +
                          " <= " + std::to_string(inner) + ")");
}

inline double sup(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace detail

// Integral of f(z) dz along alpha_a, beta_a or the circle C_a, refined by node doubling.
inline ContourResult contour_integrate(const std::function<Vec(const SurfacePoint&)>& f, Cycle c, int a,
                                       const ModuliPoint& p, const QuadratureConfig& q = {}) {
  q.validate();
  auto eval = [&](cplx z) {
    detail::check_contour_point(p, a, z);
    return f(SurfacePoint{a, z});
  };
  ContourResult res;
  auto converged = [&](const Vec& prev, const Vec& cur) {
    res.change = detail::sup(cur - prev);
    return res.change <= q.tol * std::max(1.0, detail::sup(cur));
  };

  if (c == Cycle::beta) {
    cplx z0 = cycle_base_point(c, a, p, q), delta = two_pi_i * p.tau(a);
    std::vector<double> w;
    auto x = detail::gauss_legendre_nodes(q.beta_order, w);
    auto rule = [&](int panels) {
      Vec s;
      for (int j = 0; j < panels; ++j)
        for (int k = 0; k < q.beta_order; ++k) {
          double t = (j + 0.5 * (x[k] + 1)) / panels;
          Vec v = eval(z0 + delta * t) * (0.5 * w[k] / panels);
          s = s.size() ? Vec(s + v) : v;
        }
      return Vec(s * delta);
    };
    int panels = q.beta_panels;
    Vec prev = rule(panels);
    for (int d = 0; d < q.max_doublings; ++d) {
      panels *= 2;
      Vec cur = rule(panels);
      if (converged(prev, cur)) {
        res.value = cur;
        res.nodes = panels * q.beta_order;
        return res;
      }
      prev = cur;
    }
    throw NonConvergence("contour_integral: beta quadrature did not converge");
  }

  // periodic trapezoid; doubling reuses the previous nodes
  std::function<cplx(double)> path;
  std::function<cplx(double)> jac;
  if (c == Cycle::alpha) {
    cplx z0 = cycle_base_point(c, a, p, q);
    path = [z0](double t) { return z0 + two_pi_i * t; };
    jac = [](double) { return two_pi_i; };
  } else {
    double rho = contour_radius(p, a);
    path = [rho](double t) { return rho * std::exp(two_pi_i * t); };
    jac = [rho](double t) { return two_pi_i * rho * std::exp(two_pi_i * t); };
  }
  int n = (c == Cycle::alpha) ? q.alpha_nodes : q.circle_nodes;
  Vec sum;
  for (int k = 0; k < n; ++k) {
    double t = static_cast<double>(k) / n;
    Vec v = eval(path(t)) * jac(t);
    sum = sum.size() ? Vec(sum + v) : v;
  }
  Vec prev = sum / static_cast<double>(n);
  for (int d = 0; d < q.max_doublings; ++d) {
    for (int k = 0; k < n; ++k) {
      double t = (k + 0.5) / n;
      sum += eval(path(t)) * jac(t);
    }
    n *= 2;
    Vec cur = sum / static_cast<double>(n);
    if (converged(prev, cur)) {
      res.value = cur;
      res.nodes = n;
      return res;
    }
    prev = cur;
  }
  throw NonConvergence("contour_integral: trapezoid did not converge");
}

inline cplx contour_integral(const std::function<cplx(const SurfacePoint&)>& f, Cycle c, int a, const ModuliPoint& p,
                             const QuadratureConfig& q = {}) {
  auto g = [&](const SurfacePoint& x) {
    Vec v(1);
    v(0) = f(x);
    return v;
  };
  return contour_integrate(g, c, a, p, q).value(0);
}

// ---- 2-differential period matrix ------------------------------------------

using Xi3 = Eigen::Matrix3cd;

inline Vec psi_vector(const Sewing& s, const SurfacePoint& x) {
  cplx n1 = s.nu(1, x), n2 = s.nu(2, x);
  Vec v(3);
  v << n1 * n1, n2 * n2, n1 * n2;
  return v;
}

// Columns i = 1,2: (1/2 pi i) over alpha_i; column 3: (1/2 pi i) over C_1 of z f(z).
inline Xi3 period_matrix_2forms(const std::function<Vec(const SurfacePoint&)>& f, const ModuliPoint& p,
                                const QuadratureConfig& q) {
  Xi3 X;
  for (int i = 1; i <= 2; ++i) X.col(i - 1) = contour_integrate(f, Cycle::alpha, i, p, q).value / two_pi_i;
  auto zf = [&](const SurfacePoint& x) { return Vec(x.z * f(x)); };
  X.col(2) = contour_integrate(zf, Cycle::circle, 1, p, q).value / two_pi_i;
  return X;
}

inline Xi3 xi_matrix(const Sewing& s, const QuadratureConfig& q = {}) {
  return period_matrix_2forms([&](const SurfacePoint& x) { return psi_vector(s, x); }, s.point(), q);
}

inline Xi3 xi_matrix(const ModuliPoint& p, int M, const QuadratureConfig& q = {}) { return xi_matrix(Sewing(p, M), q); }

// Same periods of the Phi basis; the identity matrix by construction.
inline Xi3 phi_normalization(const Zhu& z, const QuadratureConfig& q = {}) {
  return period_matrix_2forms(
      [&](const SurfacePoint& x) {
        auto ph = z.Phi(x);
        Vec v(3);
        v << ph[0], ph[1], ph[2];
        return v;
      },
      z.sewing().point(), q);
}

inline cplx omega_entry(const PeriodMatrix& om, int r) { return r == 1 ? om.om11 : r == 2 ? om.om22 : om.om12; }

// d(Omega_11, Omega_22, Omega_12)/d(tau1, tau2, tau3), eps = e^{2 pi i tau3}
inline Xi3 period_jacobian(const ModuliStencil& st) {
  Xi3 J;
  for (int r = 1; r <= 3; ++r) {
    auto g = st.gradient([r](const Sewing& s) { return omega_entry(s.period(), r); });
    for (int c = 0; c < 3; ++c) J(r - 1, c) = two_pi_i * g[c];
  }
  return J;
}

// 2P_1(x,y) from the determinant-ratio formula, with nabla_x nu_i(y) by D_x.
inline cplx p21_closed(const ModuliStencil& st, const Zhu& z2, const SurfacePoint& x, const SurfacePoint& y) {
  const Sewing& s = st.base();
  auto phi = z2.Phi(x);
  std::array<cplx, 2> nx, ny, dny, nab;
  for (int i = 1; i <= 2; ++i) {
    nx[i - 1] = s.nu(i, x);
    ny[i - 1] = s.nu(i, y);
    dny[i - 1] = s.nu(i, y, 1);
    nab[i - 1] = dx_combine(phi, st.gradient([&](const Sewing& t) { return t.nu(i, y); }));
  }
  return p21_closed_form(s.omega(x, y), nx, ny, dny, nab);
}

// ---- identity residuals ----------------------------------------------------

struct IdentitySample {
  ModuliPoint p;
  SurfacePoint x;
  std::optional<SurfacePoint> y, y2;
  ModulePair lambda{};
};

inline const std::vector<std::string>& identity_names() {
  static const std::vector<std::string> names = {"heis_de", "dx_omega",      "nu_de",    "omega_de", "s_de",
                                                 "virasoro_1pt", "ward_2pt", "jacobian", "p21"};
  return names;
}

// Everything derived from one moduli point.
struct PointContext {
  ModuliStencil st;
  Zhu z2;
  PointContext(const ModuliPoint& p, int M, FDConfig fd) : st(p, M, fd), z2(st.base(), 2) {}
};

namespace detail {

inline std::string label(const IdentitySample& s) {
  std::ostringstream os;
  os.precision(6);
  os << "tau=(" << s.p.tau(1) << "," << s.p.tau(2) << ") eps=" << s.p.eps() << " x=" << s.x.torus << ":" << s.x.z;
  if (s.y) os << " y=" << s.y->torus << ":" << s.y->z;
  if (s.y2) os << " y2=" << s.y2->torus << ":" << s.y2->z;
  return os.str();
}

inline void need_y(const IdentitySample& s, bool two = false) {
  if (!s.y || (two && !s.y2)) throw DomainViolation("verify_identity: sample lacks y points");
}

inline double norm3(const std::array<cplx, 3>& phi, const std::array<cplx, 3>& g) {
  return std::abs(phi[0] * g[0]) + std::abs(phi[1] * g[1]) + std::abs(phi[2] * g[2]);
}

inline void record(ResidualReport& rep, const std::string& lbl, cplx lhs, cplx rhs, double terms) {
  rep.add(lbl, std::abs(lhs - rhs), std::max({std::abs(rhs), std::abs(lhs), terms, 1e-300}));
}

inline void identity_at(const std::string& name, PointContext& c, const IdentitySample& smp, ResidualReport& rep,
                        const QuadratureConfig& quad) {
  const Sewing& s = c.st.base();
  const SurfacePoint& x = smp.x;
  std::string lbl = label(smp);
  auto phi = c.z2.Phi(x);
  auto Dx = [&](auto&& g, double* terms = nullptr) {
    auto gr = c.st.gradient(g);
    if (terms) *terms = norm3(phi, gr);
    return dx_combine(phi, gr);
  };
  double t = 0;

  if (name == "heis_de") {
    cplx Z = z2_partition(s);
    cplx lhs = Dx([](const Sewing& w) { return z2_partition(w); }, &t);
    record(rep, lbl, lhs, s.projective(x) * Z / 12.0, t);
  } else if (name == "dx_omega") {
    for (int r = 1; r <= 3; ++r) {
      cplx lhs = two_pi_i * Dx([r](const Sewing& w) { return omega_entry(w.period(), r); }, &t);
      int i = r == 2 ? 2 : 1, j = r == 1 ? 1 : 2;
      record(rep, lbl + " r=" + std::to_string(r), lhs, s.nu(i, x) * s.nu(j, x), 2 * pi * t);
    }
  } else if (name == "nu_de") {
    need_y(smp);
    const SurfacePoint& y = *smp.y;
    cplx p1 = c.z2.P(0, 0, x, y), p2 = c.z2.P(0, 1, x, y), om = s.omega(x, y);
    for (int i = 1; i <= 2; ++i) {
      cplx nab = Dx([&](const Sewing& w) { return w.nu(i, y); }, &t);
      cplx a = p2 * s.nu(i, y), b = p1 * s.nu(i, y, 1);
      record(rep, lbl + " i=" + std::to_string(i), nab + a + b, om * s.nu(i, x),
             t + std::abs(a) + std::abs(b));
    }
  } else if (name == "omega_de") {
    need_y(smp, true);
    const SurfacePoint &y1 = *smp.y, &y2 = *smp.y2;
    cplx lhs = Dx([&](const Sewing& w) { return w.omega(y1, y2); }, &t);
    cplx w12 = s.omega(y1, y2);
    cplx add = c.z2.P(0, 0, x, y1) * s.omega(y1, y2, 1, 0) + c.z2.P(0, 1, x, y1) * w12 +
               c.z2.P(0, 0, x, y2) * s.omega(y1, y2, 0, 1) + c.z2.P(0, 1, x, y2) * w12;
    record(rep, lbl, lhs + add, s.omega(x, y1) * s.omega(x, y2), t + std::abs(add));
  } else if (name == "s_de") {
    need_y(smp);
    const SurfacePoint& y = *smp.y;
    cplx lhs = Dx([&](const Sewing& w) { return w.projective(y); }, &t) / 6.0;
    cplx add = (c.z2.P(0, 0, x, y) * s.projective(y, 1) + 2.0 * c.z2.P(0, 1, x, y) * s.projective(y)) / 6.0 +
               c.z2.P(0, 3, x, y);
    cplx om = s.omega(x, y);
    record(rep, lbl, lhs + add, om * om, t / 6 + std::abs(add));
  } else if (name == "virasoro_1pt") {
    ModulePair lam = smp.lambda;
    cplx lhs = Dx([&](const Sewing& w) { return z2_partition(w, lam); }, &t);
    record(rep, lbl, lhs, virasoro_one_point(s, lam, x), t);
  } else if (name == "ward_2pt") {
    need_y(smp, true);
    const SurfacePoint &y1 = *smp.y, &y2 = *smp.y2;
    cplx Z = z2_partition(s), w12 = s.omega(y1, y2);
    // left side by the (h,h) coincidence limit in closed form
    cplx lhs = (s.projective(x) / 12.0 * w12 + s.omega(x, y1) * s.omega(x, y2)) * Z;
    cplx dz = Dx([&](const Sewing& w) { return w.omega(y1, y2) * z2_partition(w); }, &t);
    cplx add = (c.z2.P(0, 0, x, y1) * s.omega(y1, y2, 1, 0) + c.z2.P(0, 1, x, y1) * w12 +
                c.z2.P(0, 0, x, y2) * s.omega(y1, y2, 0, 1) + c.z2.P(0, 1, x, y2) * w12) *
               Z;
    record(rep, lbl, dz + add, lhs, t + std::abs(add));
    // the same left side as a symmetric limit of the h 4-point function, Richardson in delta
    auto lim = [&](double d) {
      cplx acc = 0;
      for (double sg : {1.0, -1.0}) {
        SurfacePoint xd{x.torus, x.z + sg * d};
        acc += 0.5 * (h_npoint(s, {}, {xd, x, y1, y2}) - w12 * Z / (d * d));
      }
      return 0.5 * acc;
    };
    cplx a = lim(2e-2), b = lim(1e-2);
    record(rep, lbl + " h4-limit", (4.0 * b - a) / 3.0, lhs, std::abs(lhs));
  } else if (name == "p21") {
    need_y(smp);
    // the Wronskian of nu_1, nu_2 vanishes identically at eps = 0
    if (s.sigma() == 0.0) return;
    record(rep, lbl, c.z2.P(0, 0, x, *smp.y), p21_closed(c.st, c.z2, x, *smp.y), 0);
  } else if (name == "jacobian") {
    Xi3 X = xi_matrix(s, quad), J = period_jacobian(c.st);
    double sc = std::max(1.0, X.cwiseAbs().maxCoeff());
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k)
        rep.add(lbl + " (" + std::to_string(r + 1) + "," + std::to_string(k + 1) + ")", std::abs(J(r, k) - X(r, k)), sc);
  } else {
    throw DomainViolation("verify_identity: unknown identity " + name);
  }
}

}  // namespace detail

inline double identity_tolerance(const std::string&) { return 1e-6; }

// LHS - RHS of the named identity over the samples; consecutive samples at one moduli point share FD data.
inline ResidualReport verify_identity(const std::string& name, const std::vector<IdentitySample>& samples, int M = 0,
                                      const QuadratureConfig& quad = {}, FDConfig fd = {}) {
  const auto& names = identity_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw DomainViolation("verify_identity: unknown identity " + name);
  ResidualReport rep;
  rep.name = name;
  rep.tolerance = identity_tolerance(name);
  std::unique_ptr<PointContext> ctx;
  const ModuliPoint* last = nullptr;
  auto same = [](const ModuliPoint& a, const ModuliPoint& b) {
    return a.tau(1) == b.tau(1) && a.tau(2) == b.tau(2) && a.eps() == b.eps() && a.sigma() == b.sigma();
  };
  for (const auto& smp : samples) {
    try {
      if (!last || !same(*last, smp.p)) {
        ctx.reset();
        ctx = std::make_unique<PointContext>(smp.p, M > 0 ? M : choose_truncation(smp.p), fd);
        last = &smp.p;
      }
      detail::identity_at(name, *ctx, smp, rep, quad);
    } catch (const std::exception& e) {
      rep.errors.push_back(detail::label(smp) + ": " + e.what());
    }
  }
  return rep;
}

}  // namespace g2zhu
