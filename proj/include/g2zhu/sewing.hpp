#pragma once

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "elliptic.hpp"

namespace g2zhu {

struct SurfacePoint {
  int torus;  // 1 or 2
  cplx z;     // local coordinate on that torus
};

inline int other(int a) { return 3 - a; }

// (tau1, tau2, eps) inside |eps| < D(q1) D(q2) / 4, with a fixed square root of eps.
class ModuliPoint {
 public:
  ModuliPoint(cplx tau1, cplx tau2, cplx eps, SeriesConfig cfg = {}, double margin = 0.05)
      : ModuliPoint(std::make_shared<const Torus>(tau1, cfg), std::make_shared<const Torus>(tau2, cfg), eps,
                    std::sqrt(eps), margin) {}

  ModuliPoint(std::shared_ptr<const Torus> t1, std::shared_ptr<const Torus> t2, cplx eps, cplx sigma,
              double margin = 0.05)
      : t1_(std::move(t1)), t2_(std::move(t2)), eps_(eps), sigma_(sigma), margin_(margin) {
    if (!(margin >= 0 && margin < 1)) throw DomainViolation("ModuliPoint: margin must lie in [0,1)");
    if (eps == 0.0) sigma_ = 0.0;
    if (std::abs(sigma_ * sigma_ - eps) > 1e-12 * std::max(1.0, std::abs(eps)))
      throw DomainViolation("ModuliPoint: sqrt_eps^2 != eps");
    double bound = 0.25 * t1_->D() * t2_->D();
    if (!(std::abs(eps) < bound)) {
      std::ostringstream os;
      os.precision(17);
      os << "DomainViolation: |eps| = " << std::abs(eps) << " must be < D(q1)D(q2)/4 = " << bound;
      throw DomainViolation(os.str());
    }
  }

  const Torus& torus(int a) const { return a == 1 ? *t1_ : *t2_; }
  std::shared_ptr<const Torus> torus_ptr(int a) const { return a == 1 ? t1_ : t2_; }
  cplx tau(int a) const { return torus(a).tau(); }
  double D(int a) const { return torus(a).D(); }
  cplx eps() const { return eps_; }
  cplx sigma() const { return sigma_; }
  double margin() const { return margin_; }
  const SeriesConfig& config() const { return t1_->config(); }

  // r_a = (1 - margin) D(q_a)/2 keeps same-torus differences inside the Laurent disc.
  double radius(int a) const { return (1 - margin_) * 0.5 * D(a); }

  bool in_annulus(const SurfacePoint& x) const {
    if (x.torus != 1 && x.torus != 2) return false;
    double r = std::abs(x.z);
    return r <= radius(x.torus) && r >= std::abs(eps_) / radius(other(x.torus)) && r > 0;
  }

  void check(const SurfacePoint& x) const {
    if (!in_annulus(x)) {
      std::ostringstream os;
      os << "DomainViolation: point " << x.z << " on torus " << x.torus << " outside annulus ["
         << std::abs(eps_) / radius(other(x.torus)) << ", " << radius(x.torus) << "]";
      throw DomainViolation(os.str());
    }
  }

  ModuliPoint with_tau(int a, cplx tau) const {
    auto t = std::make_shared<const Torus>(tau, config());
    return a == 1 ? ModuliPoint(t, t2_, eps_, sigma_, margin_) : ModuliPoint(t1_, t, eps_, sigma_, margin_);
  }

  // sigma follows eps continuously from the current branch
  ModuliPoint with_eps(cplx eps) const {
    cplx s = (eps_ == 0.0) ? std::sqrt(eps) : sigma_ * std::sqrt(eps / eps_);
    return ModuliPoint(t1_, t2_, eps, s, margin_);
  }

  ModuliPoint flipped() const { return ModuliPoint(t1_, t2_, eps_, -sigma_, margin_); }
  ModuliPoint swapped() const { return ModuliPoint(t2_, t1_, eps_, sigma_, margin_); }

 private:
  std::shared_ptr<const Torus> t1_, t2_;
  cplx eps_, sigma_;
  double margin_;
};

inline ModuliPoint validate_moduli(cplx tau1, cplx tau2, cplx eps, SeriesConfig cfg = {}) {
  return ModuliPoint(tau1, tau2, eps, cfg);
}

struct PeriodMatrix {
  cplx om11, om22, om12;
  Eigen::Matrix2cd matrix() const {
    Eigen::Matrix2cd m;
    m << om11, om12, om12, om22;
    return m;
  }
  bool im_positive() const {
    double a = om11.imag(), b = om12.imag(), d = om22.imag();
    return a > 0 && a * d - b * b > 0;
  }
};

namespace detail {

// sigma^n E_n(tau) (times sigma^-shift) through the scaled Eisenstein values
struct SigmaPowers {
  double lsd;  // log|sigma| - log D
  double arg;
  const Torus* t;
  bool zero;
  SigmaPowers(cplx sigma, const Torus& tor) : t(&tor), zero(sigma == 0.0) {
    lsd = zero ? 0 : std::log(std::abs(sigma)) - std::log(tor.D());
    arg = std::arg(sigma);
  }
  // exp(logc) * sigma^(n - shift) E_n
  cplx term(int n, long double logc, int shift = 0) const {
    if (zero) return 0.0;
    cplx e = t->e_scaled(n);
    if (e == 0.0) return 0.0;
    double l = static_cast<double>(logc) + (n - shift) * lsd - shift * std::log(t->D());
    return e * std::polar(std::exp(l), arg * (n - shift));
  }
};

inline double rising(int a, int d) {
  double r = 1;
  for (int i = 0; i < d; ++i) r *= a + i;
  return r;
}

}  // namespace detail

// A_a(k,l) = (-1)^{k+1} eps^{(k+l)/2}/sqrt(kl) (k+l-1)!/((k-1)!(l-1)!) E_{k+l}(tau_a), 1 <= k,l <= M.
inline Mat build_A(int a, const ModuliPoint& p, int M) {
  if (M < 1) throw DomainViolation("build_A: M >= 1 required");
  detail::SigmaPowers sp(p.sigma(), p.torus(a));
  Mat A = Mat::Zero(M, M);
  for (int k = 1; k <= M; ++k)
    for (int l = 1; l <= M; ++l) {
      if ((k + l) % 2) continue;
      long double lc = detail::log_factorial(k + l - 1) - detail::log_factorial(k - 1) - detail::log_factorial(l - 1) -
                       0.5L * std::log(static_cast<long double>(k) * l);
      A(k - 1, l - 1) = ((k % 2) ? 1.0 : -1.0) * sp.term(k + l, lc);
    }
  return A;
}

namespace detail {

inline cplx logdet_series(const Mat& X, int max_terms, double stop, bool& converged) {
  Mat P = X;
  cplx s = 0.0;
  converged = false;
  for (int n = 1; n <= max_terms; ++n) {
    cplx t = P.trace() / static_cast<double>(n);
    s -= t;
    if (std::abs(t) < stop) {
      converged = true;
      break;
    }
    P = P * X;
  }
  return s;
}

}  // namespace detail

// Truncated sewing data at one moduli point: A-matrices, Neumann inverses and log det(1 - A1 A2).
class Sewing {
 public:
  Sewing(const ModuliPoint& p, int M) : p_(p), M_(M) {
    A_[0] = build_A(1, p, M);
    A_[1] = build_A(2, p, M);
    Mat Id = Mat::Identity(M, M);
    Eigen::PartialPivLU<Mat> lu1(Id - A_[0] * A_[1]);
    Ninv_[0] = lu1.inverse();
    Ninv_[1] = Eigen::PartialPivLU<Mat>(Id - A_[1] * A_[0]).inverse();
    B_[0] = A_[1] * Ninv_[0];
    B_[1] = A_[0] * Ninv_[1];
    if (!Ninv_[0].allFinite() || !Ninv_[1].allFinite()) throw NonConvergence("Sewing: 1 - A1 A2 is singular");

    // log det from LU, moved onto the branch continuous from 0 at eps = 0
    const Mat& LU = lu1.matrixLU();
    cplx l = 0.0;
    for (int i = 0; i < M; ++i) l += std::log(LU(i, i));
    if (lu1.permutationP().determinant() < 0) l += cplx(0, pi);
    bool ok;
    cplx est = detail::logdet_series(A_[0] * A_[1], 400, 1e-3, ok);
    double turns = std::round((est.imag() - l.imag()) / (2 * pi));
    logdet_ = l + cplx(0, 2 * pi * turns);
  }

  const ModuliPoint& point() const { return p_; }
  int order() const { return M_; }
  cplx sigma() const { return p_.sigma(); }
  const Mat& A(int a) const { return A_[a - 1]; }
  // (1 - A_a A_abar)^{-1}
  const Mat& neumann_inv(int a) const { return Ninv_[a - 1]; }
  // A_abar (1 - A_a A_abar)^{-1}
  const Mat& bsame(int a) const { return B_[a - 1]; }
  cplx logdet() const { return logdet_; }

  PeriodMatrix period() const {
    cplx e = p_.eps();
    return {p_.tau(1) + e * B_[0](0, 0) / two_pi_i, p_.tau(2) + e * B_[1](0, 0) / two_pi_i,
            -e * Ninv_[0](0, 0) / two_pi_i};
  }

  // d-th x-derivative of a(x;k) = sqrt(k) eps^{k/2} P_{k+1}(x, tau_a), k = 1..M.
  Row avec(const SurfacePoint& x, int d = 0) const { return avec(x, d, M_); }

  Row avec(const SurfacePoint& x, int d, int len) const {
    Row r = Row::Zero(len);
    cplx s = p_.sigma();
    if (s == 0.0) return r;
    auto v = p_.torus(x.torus).p_scaled(len + 1 + d, x.z, s);
    cplx inv = std::pow(s, -(1 + d));
    double sgn = (d % 2) ? -1.0 : 1.0;
    for (int k = 1; k <= len; ++k) r(k - 1) = std::sqrt(static_cast<double>(k)) * sgn * detail::rising(k + 1, d) * v[k + d] * inv;
    return r;
  }

  // dx-coefficient of the d-th derivative of nu_i(x)
  cplx nu(int i, const SurfacePoint& x, int d = 0) const {
    Row a = avec(x, d);
    cplx s = p_.sigma();
    if (x.torus == i) return (d == 0 ? 1.0 : 0.0) + s * (a * B_[i - 1].col(0))(0);
    return -s * (a * Ninv_[i - 1].col(0))(0);
  }

  // dxdy-coefficient of d^dx/dx d^dy/dy omega(x,y)
  cplx omega(const SurfacePoint& x, const SurfacePoint& y, int dx = 0, int dy = 0) const {
    Row ax = avec(x, dx), ay = avec(y, dy);
    if (x.torus == y.torus) {
      if (x.z == y.z) throw DomainViolation("omega: coincident points");
      int n = dx + dy;
      double c = ((dy + n) % 2 ? -1.0 : 1.0) * detail::rising(2, n);
      cplx sing = c * p_.torus(x.torus).P(2 + n, x.z - y.z);
      return sing + (ax * B_[x.torus - 1] * ay.transpose())(0);
    }
    return -(ax * Ninv_[y.torus - 1] * ay.transpose())(0);
  }

  // dx^2-coefficient of s(x) (d = 0) or its x-derivative (d = 1)
  cplx projective(const SurfacePoint& x, int d = 0) const {
    const Mat& B = B_[x.torus - 1];
    Row a = avec(x, 0);
    if (d == 0) return 6.0 * p_.torus(x.torus).E(2) + 6.0 * (a * B * a.transpose())(0);
    if (d != 1) throw DomainViolation("projective: derivative order 0 or 1");
    Row a1 = avec(x, 1);
    return 6.0 * ((a1 * B * a.transpose())(0) + (a * B * a1.transpose())(0));
  }

 private:
  ModuliPoint p_;
  int M_;
  Mat A_[2], Ninv_[2], B_[2];
  cplx logdet_;
};

struct NeumannResult {
  Mat inv;             // (1 - A1 A2)^{-1}
  cplx logdet;         // LU path
  cplx logdet_series;  // -sum Tr((A1 A2)^n)/n
  double spectral_radius;
};

inline NeumannResult neumann(const ModuliPoint& p, int M) {
  Sewing s(p, M);
  Mat X = s.A(1) * s.A(2);
  double rho = 0;
  if (M > 0 && X.norm() > 0) {
    Eigen::ComplexEigenSolver<Mat> es(X, false);
    for (int i = 0; i < M; ++i) rho = std::max(rho, std::abs(es.eigenvalues()(i)));
  }
  if (rho >= 1) throw NonConvergence("neumann: spectral radius of A1 A2 >= 1");
  bool ok;
  cplx ser = detail::logdet_series(X, 100000, 1e-18, ok);
  if (!ok) throw NonConvergence("neumann: log det series did not converge");
  return {s.neumann_inv(1), s.logdet(), ser, rho};
}

inline PeriodMatrix period_matrix(const ModuliPoint& p, int M) { return Sewing(p, M).period(); }

inline cplx annular_form(const SurfacePoint& x, int k, const ModuliPoint& p) {
  p.check(x);
  if (k < 1) throw DomainViolation("annular_form: k >= 1");
  if (p.sigma() == 0.0) return 0.0;
  return std::sqrt(static_cast<double>(k)) * p.torus(x.torus).p_scaled(k + 1, x.z, p.sigma())[k] / p.sigma();
}

inline cplx one_form_nu(int i, const SurfacePoint& x, const ModuliPoint& p, int M) {
  p.check(x);
  return Sewing(p, M).nu(i, x);
}

inline cplx bidifferential_omega(const SurfacePoint& x, const SurfacePoint& y, const ModuliPoint& p, int M) {
  p.check(x);
  p.check(y);
  return Sewing(p, M).omega(x, y);
}

inline cplx projective_connection(const SurfacePoint& x, const ModuliPoint& p, int M) {
  p.check(x);
  return Sewing(p, M).projective(x);
}

// Smallest doubling of M (from Mmin) at which Omega, log det and nu at the
// mid-annulus probes stop moving by more than tol.
inline int choose_truncation(const ModuliPoint& p, double tol = 1e-13, int Mmin = 16, int Mmax = 256) {
  if (p.eps() == 0.0) return Mmin;
  double rho = std::sqrt(std::abs(p.eps()));
  std::vector<SurfacePoint> probes;
  for (int a = 1; a <= 2; ++a) {
    SurfacePoint x{a, std::polar(std::max(rho, std::abs(p.eps()) / p.radius(other(a))), pi / 4)};
    if (p.in_annulus(x)) probes.push_back(x);
  }
  auto sample = [&](int M) {
    Sewing s(p, M);
    auto om = s.period();
    std::vector<cplx> v{om.om11, om.om22, om.om12, s.logdet()};
    for (auto& x : probes) {
      v.push_back(s.nu(1, x));
      v.push_back(s.nu(2, x));
    }
    return v;
  };
  auto prev = sample(Mmin);
  for (int M = 2 * Mmin; M <= Mmax; M *= 2) {
    auto cur = sample(M);
    double diff = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) diff = std::max(diff, std::abs(cur[i] - prev[i]) / std::max(1.0, std::abs(cur[i])));
    if (diff < tol) return M;
    prev = cur;
  }
  throw NonConvergence("choose_truncation: no stable M up to Mmax");
}

}  // namespace g2zhu
