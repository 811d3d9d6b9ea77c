#pragma once

#include <array>
#include <string>

#include "report.hpp"
#include "sewing.hpp"

namespace g2zhu {

using Int2 = Eigen::Matrix2i;
using Cplx2 = Eigen::Matrix2cd;

// [[A, B], [C, D]] in Sp(4, Z), acting on (beta, alpha) cycles.
class Sp4Element {
 public:
  Sp4Element(Int2 A, Int2 B, Int2 C, Int2 D) : A_(A), B_(B), C_(C), D_(D) {
    Int2 I2 = Int2::Identity();
    if (A.transpose() * C != C.transpose() * A || B.transpose() * D != D.transpose() * B ||
        A.transpose() * D - C.transpose() * B != I2)
      throw DomainViolation("Sp4Element: matrix is not symplectic");
  }

  static Sp4Element identity() { return {Int2::Identity(), Int2::Zero(), Int2::Zero(), Int2::Identity()}; }
  // Omega -> Omega + B for symmetric B
  static Sp4Element translation(Int2 B) { return {Int2::Identity(), B, Int2::Zero(), Int2::Identity()}; }
  // Omega -> -Omega^{-1}
  static Sp4Element inversion() { return {Int2::Zero(), Int2::Identity(), -Int2::Identity(), Int2::Zero()}; }
  // Omega -> U Omega U^T for U in GL(2, Z)
  static Sp4Element rotation(Int2 U) {
    int det = U.determinant();
    if (det != 1 && det != -1) throw DomainViolation("Sp4Element: U must be unimodular");
    Int2 Uinv;
    Uinv << U(1, 1) * det, -U(0, 1) * det, -U(1, 0) * det, U(0, 0) * det;
    return {U, Int2::Zero(), Int2::Zero(), Uinv.transpose()};
  }
  // exchange of the two handles
  static Sp4Element swap() {
    Int2 P;
    P << 0, 1, 1, 0;
    return rotation(P);
  }

  const Int2& A() const { return A_; }
  const Int2& B() const { return B_; }
  const Int2& C() const { return C_; }
  const Int2& D() const { return D_; }

  Sp4Element operator*(const Sp4Element& o) const {
    return {A_ * o.A_ + B_ * o.C_, A_ * o.B_ + B_ * o.D_, C_ * o.A_ + D_ * o.C_, C_ * o.B_ + D_ * o.D_};
  }

 private:
  Int2 A_, B_, C_, D_;
};

inline PeriodMatrix from_matrix(const Cplx2& m) { return {m(0, 0), m(1, 1), 0.5 * (m(0, 1) + m(1, 0))}; }

// M = C Omega + D
inline Cplx2 automorphy_factor(const Sp4Element& g, const PeriodMatrix& om) {
  Cplx2 M = g.C().cast<cplx>() * om.matrix() + g.D().cast<cplx>();
  if (std::abs(M.determinant()) < 1e-14 * std::max(1.0, M.cwiseAbs().maxCoeff()))
    throw DomainViolation("transform_period: C Omega + D is singular");
  return M;
}

inline PeriodMatrix transform_period(const Sp4Element& g, const PeriodMatrix& om) {
  Cplx2 M = automorphy_factor(g, om);
  return from_matrix((g.A().cast<cplx>() * om.matrix() + g.B().cast<cplx>()) * M.inverse());
}

// d log det M / d Omega_ij (i <= j) along the symmetrized elementary directions, as a symmetric matrix:
// tr(M^{-1} C E) with E = E_ii or E_ij + E_ji.
inline Cplx2 dlogdet_automorphy(const Sp4Element& g, const PeriodMatrix& om) {
  Cplx2 X = automorphy_factor(g, om).inverse() * g.C().cast<cplx>();
  Cplx2 out;
  out(0, 0) = X(0, 0);
  out(1, 1) = X(1, 1);
  out(0, 1) = out(1, 0) = X(0, 1) + X(1, 0);
  return out;
}

struct FormValues {
  std::array<cplx, 2> nu_x{}, nu_y{};
  cplx omega_xy = 0;
  cplx s_x = 0;
};

// nu -> nu M^{-1}; omega and s corrected by d log det M
inline FormValues transform_forms(const Sp4Element& g, const PeriodMatrix& om, const FormValues& v) {
  Cplx2 N = automorphy_factor(g, om).inverse();
  Cplx2 dl = dlogdet_automorphy(g, om);
  FormValues out;
  for (int b = 0; b < 2; ++b) {
    out.nu_x[b] = v.nu_x[0] * N(0, b) + v.nu_x[1] * N(1, b);
    out.nu_y[b] = v.nu_y[0] * N(0, b) + v.nu_y[1] * N(1, b);
  }
  cplx corr_om = 0, corr_s = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      corr_om += 0.5 * (v.nu_x[i] * v.nu_y[j] + v.nu_x[j] * v.nu_y[i]) * dl(i, j);
      corr_s += v.nu_x[i] * v.nu_x[j] * dl(i, j);
    }
  out.omega_xy = v.omega_xy - corr_om;
  out.s_x = v.s_x - 6.0 * corr_s;
  return out;
}

namespace detail {

// d Omega~ / d Omega_ij by central differences with one Richardson step
inline Cplx2 fd_dOmega(const Sp4Element& g, const PeriodMatrix& om, int i, int j, double h) {
  auto at = [&](double t) {
    PeriodMatrix p = om;
    if (i == j)
      (i == 0 ? p.om11 : p.om22) += t;
    else
      p.om12 += t;
    return transform_period(g, p).matrix();
  };
  Cplx2 d1 = (at(h) - at(-h)) / (2 * h), d2 = (at(h / 2) - at(-h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace detail

// dOmega~_ab/dOmega_ij against N_ia N_jb + N_ib N_ja, then nabla_x Omega~_ab = nu~_a nu~_b with
// nabla_x = sum_{i<=j} nu_i nu_j d/dOmega_ij.
inline ResidualReport check_nabla_invariance(const Sp4Element& g, const PeriodMatrix& om, const std::array<cplx, 2>& nu_x,
                                             double step = 1e-4, double tol = 1e-7) {
  ResidualReport rep;
  rep.name = "nabla_invariance";
  rep.tolerance = tol;
  Cplx2 N = automorphy_factor(g, om).inverse();
  Cplx2 nabla = Cplx2::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      Cplx2 fd = detail::fd_dOmega(g, om, i, j, step);
      nabla += nu_x[i] * nu_x[j] * fd;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          cplx exact = (i == j) ? N(i, a) * N(i, b) : N(i, a) * N(j, b) + N(i, b) * N(j, a);
          rep.add("dOmega~" + std::to_string(a + 1) + std::to_string(b + 1) + "/dOmega" + std::to_string(i + 1) +
                      std::to_string(j + 1),
                  std::abs(fd(a, b) - exact), std::max(1.0, std::abs(exact)));
        }
    }
  std::array<cplx, 2> nt{nu_x[0] * N(0, 0) + nu_x[1] * N(1, 0), nu_x[0] * N(0, 1) + nu_x[1] * N(1, 1)};
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b)
      rep.add("nabla Omega~" + std::to_string(a + 1) + std::to_string(b + 1), std::abs(nabla(a, b) - nt[a] * nt[b]),
              std::max(1.0, std::abs(nt[a] * nt[b])));
  return rep;
}

}  // namespace g2zhu
