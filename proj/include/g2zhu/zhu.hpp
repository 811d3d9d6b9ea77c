#pragma once

#include <array>
#include <cmath>

#include "sewing.hpp"

namespace g2zhu {

struct ShiftMatrices {
  int N, K;
  Mat gamma, delta, pi;
};

// Truncations of Gamma(m,n) = delta_{m,K-n}, Delta(m,n) = delta_{m,n+K}, Pi = Gamma^2.
// Delta^T Delta = 1 holds on the leading M-K block only.
inline ShiftMatrices shift_matrices(int N, int M) {
  if (N < 1) throw DomainViolation("shift_matrices: N >= 1");
  int K = 2 * N - 2;
  if (M <= K) throw DomainViolation("shift_matrices: M > K = 2N-2 required");
  ShiftMatrices s{N, K, Mat::Zero(M, M), Mat::Zero(M, M), Mat::Zero(M, M)};
  for (int m = 1; m <= M; ++m)
    for (int n = 1; n <= M; ++n) {
      if (m + n == K) s.gamma(m - 1, n - 1) = 1.0;
      if (m == n + K) s.delta(m - 1, n - 1) = 1.0;
    }
  s.pi = s.gamma * s.gamma;
  return s;
}

// Weight-N genus-two Zhu recursion coefficients over a Sewing context.
class Zhu {
 public:
  Zhu(const Sewing& s, int N) : s_(s), N_(N), K_(2 * N - 2), M_(s.order()) {
    if (N < 1) throw DomainViolation("Zhu: N >= 1");
    if (M_ <= K_ + 4) throw DomainViolation("Zhu: M must exceed K + 4 guard rows");
    for (int a = 1; a <= 2; ++a) {
      detail::SigmaPowers sp(s.sigma(), s.point().torus(a));
      Mat& L = lam_[a - 1];
      L = Mat::Zero(M_, M_ + K_);
      for (int m = 1; m <= M_; ++m)
        for (int n = 1; n <= M_ + K_; ++n) {
          if ((m + n) % 2) continue;
          L(m - 1, n - 1) = ((n % 2) ? 1.0 : -1.0) * sp.term(m + n, detail::log_binomial(m + n - 1, n));
        }
      lamt_[a - 1] = L.rightCols(M_);
      // Lambda_a(p,1)/sigma and Lambda_a(n,K-1)/sigma with the sigma power reduced exactly
      red1_[a - 1] = Vec::Zero(M_);
      redK_[a - 1] = Vec::Zero(M_);
      for (int p = 1; p <= M_; ++p) {
        if ((p + 1) % 2 == 0) red1_[a - 1](p - 1) = sp.term(p + 1, detail::log_binomial(p, 1), 1);
        if (K_ >= 2 && (p + K_ - 1) % 2 == 0)
          redK_[a - 1](p - 1) = (((K_ - 1) % 2) ? 1.0 : -1.0) * sp.term(p + K_ - 1, detail::log_binomial(p + K_ - 2, K_ - 1), 1);
      }
    }
    Mat Id = Mat::Identity(M_, M_);
    for (int a = 1; a <= 2; ++a) inv_[a - 1] = Eigen::PartialPivLU<Mat>(Id - lamt_[other(a) - 1] * lamt_[a - 1]).inverse();
  }

  int N() const { return N_; }
  int K() const { return K_; }
  int order() const { return M_; }
  const Sewing& sewing() const { return s_; }
  cplx sigma() const { return s_.sigma(); }
  // Lambda_a with columns 1..M+K
  const Mat& lambda(int a) const { return lam_[a - 1]; }
  // Lambda_a Delta
  const Mat& lambda_tilde(int a) const { return lamt_[a - 1]; }
  // (1 - Lambda~_abar Lambda~_a)^{-1}, used for x on torus a
  const Mat& inverse(int a) const { return inv_[a - 1]; }

  // d-th derivative of R(x;m) = eps^{m/2} P_{m+1}(x), m = 1..len
  Row R(const SurfacePoint& x, int d = 0, int len = -1) const {
    if (len < 0) len = M_ + K_;
    Row r = Row::Zero(len);
    cplx s = sigma();
    if (s == 0.0) return r;
    auto v = s_.point().torus(x.torus).p_scaled(len + 1 + d, x.z, s);
    cplx inv = std::pow(s, -(1 + d));
    double sgn = (d % 2) ? -1.0 : 1.0;
    for (int m = 1; m <= len; ++m) r(m - 1) = sgn * detail::rising(m + 1, d) * v[m + d] * inv;
    return r;
  }

  // d-th derivative of Q(x) = R(x) Delta (1 - Lambda~_abar Lambda~_a)^{-1}
  Row Q(const SurfacePoint& x, int d = 0) const {
    Row r = R(x, d);
    return r.segment(K_, M_) * inv_[x.torus - 1];
  }

  // N F_b(x), b = 1, 2
  cplx F(int b, const SurfacePoint& x) const {
    Row q = Q(x);
    int a = x.torus;
    if (b == a) return 1.0 + sigma() * (q * lamt_[other(a) - 1].col(0))(0);
    return ((N_ % 2) ? -1.0 : 1.0) * sigma() * q(0);
  }

  // N F^Pi(x;m), m = 1..K-1 (length M row; zero from index K on)
  Row FPi(const SurfacePoint& x) const {
    Row out = Row::Zero(M_);
    if (K_ < 2) return out;
    int a = x.torus, ab = other(a);
    Row r = R(x);
    Row q = r.segment(K_, M_) * inv_[a - 1];
    const Mat& La = lam_[a - 1];
    const Mat& Lb = lam_[ab - 1];
    for (int m = 1; m <= K_ - 1; ++m) {
      Vec w = lamt_[ab - 1] * La.col(m - 1) + Lb.col(K_ - m - 1);
      out(m - 1) = r(m - 1) + (q * w)(0);
    }
    return out;
  }

  // Phi_1, Phi_2, Phi_3 = eps^{-1/2} 2F^Pi(x;1); needs N = 2
  std::array<cplx, 3> Phi(const SurfacePoint& x) const {
    if (N_ != 2) throw DomainViolation("Phi: defined for N = 2");
    int a = x.torus, ab = other(a);
    Row q = Q(x);
    Vec w = lamt_[ab - 1] * red1_[a - 1] + redK_[ab - 1];
    cplx phi3 = s_.point().torus(a).P(2, x.z) + (q * w)(0);
    return {F(1, x), F(2, x), phi3};
  }

  // column P_{1+j}(y;m) = eps^{m/2} C(m+j-1,j) (P_{m+j}(y) - delta_{j0} E_m)
  Vec Pcol(int j, const SurfacePoint& y) const {
    Vec c = Vec::Zero(M_);
    cplx s = sigma();
    if (s == 0.0) return c;
    const Torus& t = s_.point().torus(y.torus);
    auto v = t.p_scaled(M_ + j, y.z, s);
    cplx inv = std::pow(s, -j);
    detail::SigmaPowers sp(s, t);
    for (int m = 1; m <= M_; ++m) {
      cplx val = v[m + j - 1] * inv;
      if (j == 0) val -= sp.term(m, 0.0L);
      c(m - 1) = std::exp(static_cast<double>(detail::log_binomial(m + j - 1, j))) * val;
    }
    return c;
  }

  // N P_{i,1+j}(x,y); (i,j) = (0,0) is N P_1
  cplx P(int i, int j, const SurfacePoint& x, const SurfacePoint& y) const {
    if (i < 0 || j < 0) throw DomainViolation("gen_weierstrass: i, j >= 0");
    if (i > 0 && j == 0) throw DomainViolation("gen_weierstrass: i > 0 needs j > 0");
    int a = x.torus, ab = other(a);
    bool same = (y.torus == a);
    if (same && x.z == y.z) throw DomainViolation("gen_weierstrass: coincident points");
    const Torus& ta = s_.point().torus(a);
    const double piN = (N_ == 1) ? 0.0 : 1.0;
    Row q = Q(x, i);
    Vec col = Pcol(j, y);
    if (j == 0) {
      if (same) {
        cplx v = ta.P(1, x.z - y.z) - ta.P(1, x.z) - (q * lamt_[ab - 1] * col)(0);
        if (piN != 0.0) v -= (q * lam_[ab - 1].col(K_ - 1))(0);
        return v;
      }
      cplx v = (q * col)(0);
      if (piN != 0.0) {
        v += R(x, 0, K_)(K_ - 1);
        v += (q * lamt_[ab - 1] * lam_[a - 1].col(K_ - 1))(0);
      }
      return (((N_ + 1) % 2) ? -1.0 : 1.0) * v;
    }
    double c = std::exp(static_cast<double>(detail::log_factorial(j) - detail::log_factorial(i + j)));
    if (same) {
      double sg = ((1 + i + j) % 2) ? -1.0 : 1.0;
      return ta.P(1 + i + j, x.z - y.z) + sg * c * (q * lamt_[ab - 1] * col)(0);
    }
    double sg = ((N_ + i + j + 1) % 2) ? -1.0 : 1.0;
    return sg * c * (q * col)(0);
  }

 private:
  const Sewing& s_;
  int N_, K_, M_;
  Mat lam_[2], lamt_[2], inv_[2];
  Vec red1_[2], redK_[2];
};

// Determinant-ratio form of 2P_1(x,y) from nu, its y-derivative, omega and nabla_x nu(y).
inline cplx p21_closed_form(cplx omega_xy, const std::array<cplx, 2>& nu_x, const std::array<cplx, 2>& nu_y,
                            const std::array<cplx, 2>& dnu_y, const std::array<cplx, 2>& nabla_nu_y) {
  cplx wr = nu_y[0] * dnu_y[1] - dnu_y[0] * nu_y[1];
  if (std::abs(wr) < 1e-14 * (std::abs(nu_y[0] * dnu_y[1]) + std::abs(dnu_y[0] * nu_y[1]) + 1e-300))
    throw DomainViolation("p21_closed_form: Wronskian vanishes at y");
  cplx num = omega_xy * (nu_x[0] * nu_y[1] - nu_y[0] * nu_x[1]) + (nu_y[0] * nabla_nu_y[1] - nabla_nu_y[0] * nu_y[1]);
  return -num / wr;
}

}  // namespace g2zhu
