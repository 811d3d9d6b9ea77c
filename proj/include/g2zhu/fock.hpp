#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elliptic.hpp"
#include "report.hpp"
#include "sewing.hpp"

// Brute-force rank-one Heisenberg Fock model in square-bracket modes h[n], [h[m], h[n]] = m delta_{m,-n}.
namespace g2zhu::fock {

// parts k_1 >= k_2 >= ... > 0 of h[-k_1]...h[-k_n] 1
using Partition = std::vector<int>;

inline int weight(const Partition& p) {
  int w = 0;
  for (int k : p) w += k;
  return w;
}

inline Partition canonical(Partition p) {
  std::sort(p.begin(), p.end(), std::greater<int>());
  return p;
}

// all partitions of n, parts descending, in reverse lexicographic order
inline std::vector<Partition> partitions(int n) {
  std::vector<Partition> out;
  Partition cur;
  std::function<void(int, int)> rec = [&](int rest, int maxpart) {
    if (rest == 0) {
      out.push_back(cur);
      return;
    }
    for (int k = std::min(rest, maxpart); k >= 1; --k) {
      cur.push_back(k);
      rec(rest - k, k);
      cur.pop_back();
    }
  };
  rec(n, n);
  return out;
}

struct FockState {
  std::map<Partition, cplx> terms;
  int cap = 8;

  static FockState vacuum(int cap = 8) {
    FockState s;
    s.cap = cap;
    s.terms[{}] = 1.0;
    return s;
  }
  static FockState monomial(const Partition& p, int cap = 8) {
    if (weight(p) > cap) throw DomainViolation("FockState: level cap exceeded");
    FockState s;
    s.cap = cap;
    s.terms[canonical(p)] = 1.0;
    return s;
  }

  void add(const Partition& p, cplx c) {
    if (c == 0.0) return;
    auto it = terms.find(p);
    if (it == terms.end()) {
      terms.emplace(p, c);
    } else {
      it->second += c;
      if (it->second == 0.0) terms.erase(it);
    }
  }
  FockState& operator+=(const FockState& o) {
    for (const auto& [p, c] : o.terms) add(p, c);
    return *this;
  }
  FockState operator*(cplx a) const {
    FockState r;
    r.cap = cap;
    if (a != 0.0)
      for (const auto& [p, c] : terms) r.terms.emplace(p, a * c);
    return r;
  }
  bool empty() const { return terms.empty(); }
};

// h[m] on a state: m < 0 adds a part, m > 0 contracts each part equal to m with factor m, m = 0 is zero (vacuum module).
inline FockState apply_mode(int m, const FockState& s) {
  FockState out;
  out.cap = s.cap;
  if (m == 0) return out;
  for (const auto& [p, c] : s.terms) {
    if (m < 0) {
      if (weight(p) - m > s.cap) throw DomainViolation("apply_mode: level cap overflow");
      Partition q = p;
      q.push_back(-m);
      out.add(canonical(q), c);
    } else {
      int mult = static_cast<int>(std::count(p.begin(), p.end(), m));
      if (mult == 0) continue;
      Partition q = p;
      q.erase(std::find(q.begin(), q.end(), m));
      out.add(q, c * static_cast<double>(m * mult));
    }
  }
  return out;
}

// Li-Z form with A = eps: h[-k] moves across as -eps^{-k} h[k]; <1,1> = 1.
inline cplx pairing(const FockState& a, const FockState& b, cplx eps) {
  cplx total = 0.0;
  for (const auto& [p, c] : a.terms) {
    if (p.empty()) {
      auto it = b.terms.find({});
      if (it != b.terms.end()) total += c * it->second;
      continue;
    }
    int k = p.front();
    FockState rest = FockState::monomial(Partition(p.begin() + 1, p.end()), a.cap);
    total += c * (-std::pow(eps, -k)) * pairing(rest, apply_mode(k, b), eps);
  }
  return total;
}

struct GramBlock {
  int level;
  std::vector<FockState> basis;
  Mat matrix, dual;
};

// Gram matrix of a level basis (monomials by default) and its inverse.
inline GramBlock gram_block(int level, cplx eps, int cap = 8, const Mat* change = nullptr) {
  if (level > cap) throw DomainViolation("gram_block: level above cap");
  GramBlock g;
  g.level = level;
  auto parts = partitions(level);
  int n = static_cast<int>(parts.size());
  std::vector<FockState> mono;
  for (const auto& p : parts) mono.push_back(FockState::monomial(p, cap));
  if (change) {
    if (change->rows() != n || change->cols() != n) throw DomainViolation("gram_block: basis change has wrong size");
    for (int i = 0; i < n; ++i) {
      FockState s;
      s.cap = cap;
      for (int j = 0; j < n; ++j) s += mono[j] * (*change)(i, j);
      g.basis.push_back(s);
    }
  } else {
    g.basis = mono;
  }
  g.matrix = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.matrix(i, j) = pairing(g.basis[i], g.basis[j], eps);
  Eigen::PartialPivLU<Mat> lu(g.matrix);
  if (!(std::abs(lu.determinant()) > 0)) throw NonConvergence("gram_block: singular Gram matrix");
  g.dual = lu.inverse();
  return g;
}

// value and q d/dq derivative
struct Dual {
  cplx v = 0.0, d = 0.0;
  Dual() = default;
  Dual(cplx v_, cplx d_ = 0.0) : v(v_), d(d_) {}
};
inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
inline Dual operator*(cplx s, Dual a) { return {s * a.v, s * a.d}; }

inline double binom(int n, int k) { return std::exp(static_cast<double>(g2zhu::detail::log_binomial(n, k))); }

// C(k, l) = (-1)^{k+1} (k+l-1)!/((k-1)!(l-1)!) E_{k+l}
template <class T>
T pair_constant(int k, int l, const std::function<T(int)>& E) {
  if ((k + l) % 2) return T(0.0);
  double c = std::exp(static_cast<double>(g2zhu::detail::log_factorial(k + l - 1) - g2zhu::detail::log_factorial(k - 1) -
                                          g2zhu::detail::log_factorial(l - 1)));
  return ((k % 2) ? 1.0 : -1.0) * c * E(k + l);
}

template <class T>
T matching_one_point(const Partition& p, const std::function<T(int)>& E, T inv_eta) {
  if (p.size() % 2) return T(0.0);
  std::function<T(std::vector<int>)> rec = [&](std::vector<int> rest) -> T {
    if (rest.empty()) return T(1.0);
    T total(0.0);
    for (std::size_t j = 1; j < rest.size(); ++j) {
      std::vector<int> r2;
      for (std::size_t i = 1; i < rest.size(); ++i)
        if (i != j) r2.push_back(rest[i]);
      total = total + pair_constant<T>(rest[0], rest[j], E) * rec(r2);
    }
    return total;
  };
  return inv_eta * rec(p);
}

// genus-one 1-point function Tr o(u) q^{L(0)-1/24} via pair matchings
inline cplx genus1_one_point(const FockState& s, const Torus& t) {
  std::function<cplx(int)> E = [&](int n) { return t.E(n); };
  cplx ie = 1.0 / t.eta(), total = 0.0;
  for (const auto& [p, c] : s.terms) total += c * matching_one_point<cplx>(p, E, ie);
  return total;
}

// same with its q d/dq derivative, q d/dq (1/eta) = E_2/(2 eta)
inline Dual genus1_one_point_dual(const FockState& s, const Torus& t) {
  std::function<Dual(int)> E = [&](int n) { return Dual(t.E(n), t.E_qderiv(n)); };
  cplx ie = 1.0 / t.eta();
  Dual inv_eta(ie, 0.5 * t.E(2) * ie);
  Dual total;
  for (const auto& [p, c] : s.terms) total = total + c * matching_one_point<Dual>(p, E, inv_eta);
  return total;
}

// Zhu recursion path: Z(h[-k] w) = sum_{m>=1} (-1)^{m+1} C(k+m-1, m) E_{k+m} Z(h[m] w), Z(1) = 1/eta
inline cplx genus1_one_point_zhu(const FockState& s, const Torus& t) {
  cplx total = 0.0;
  for (const auto& [p, c] : s.terms) {
    if (p.empty()) {
      total += c / t.eta();
      continue;
    }
    int k = p.back();
    FockState w = FockState::monomial(Partition(p.begin(), p.end() - 1), s.cap);
    cplx sub = 0.0;
    for (int m = 1; m <= weight(w.terms.begin()->first); ++m) {
      if ((k + m) % 2) continue;
      FockState hw = apply_mode(m, w);
      if (hw.empty()) continue;
      sub += ((m % 2) ? 1.0 : -1.0) * binom(k + m - 1, m) * t.E(k + m) * genus1_one_point_zhu(hw, t);
    }
    total += c * sub;
  }
  return total;
}

// Z(h@z_1, ..., h@z_n; u) by genus-one Zhu recursion on the leftmost insertion:
// sum_k P_2(z_1 - z_k) Z(rest; u) + sum_{m>=1} P_{1+m}(z_1) Z(z_2..; h[m] u); o(h) = 0 on the vacuum module.
inline cplx genus1_npoint(const std::vector<cplx>& zs, const FockState& u, const Torus& t) {
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = i + 1; j < zs.size(); ++j)
      if (zs[i] == zs[j]) throw DomainViolation("genus1_npoint: coincident coordinates");
  if (u.empty()) return 0.0;
  if (zs.empty()) return genus1_one_point(u, t);
  cplx z1 = zs.front();
  std::vector<cplx> rest(zs.begin() + 1, zs.end());
  cplx total = 0.0;
  for (std::size_t k = 0; k < rest.size(); ++k) {
    std::vector<cplx> r2;
    for (std::size_t j = 0; j < rest.size(); ++j)
      if (j != k) r2.push_back(rest[j]);
    total += t.P(2, z1 - rest[k]) * genus1_npoint(r2, u, t);
  }
  int top = 0;
  for (const auto& [p, c] : u.terms) top = std::max(top, p.empty() ? 0 : p.front());
  for (int m = 1; m <= top; ++m) {
    FockState hu = apply_mode(m, u);
    if (!hu.empty()) total += t.P(1 + m, z1) * genus1_npoint(rest, hu, t);
  }
  return total;
}

// omega~ = h[-1]^2 1/2 at x followed by h insertions, by the (h,h) coincidence limit of one Zhu step
inline cplx genus1_omega_npoint(cplx x, const std::vector<cplx>& zs, const FockState& u, const Torus& t) {
  cplx total = t.E(2) * genus1_npoint(zs, u, t);
  for (std::size_t l = 0; l < zs.size(); ++l) {
    std::vector<cplx> r{x};
    for (std::size_t j = 0; j < zs.size(); ++j)
      if (j != l) r.push_back(zs[j]);
    total += t.P(2, x - zs[l]) * genus1_npoint(r, u, t);
  }
  int top = 0;
  for (const auto& [p, c] : u.terms) top = std::max(top, p.empty() ? 0 : p.front());
  std::vector<cplx> withx{x};
  withx.insert(withx.end(), zs.begin(), zs.end());
  for (int m = 1; m <= top; ++m) {
    FockState hu = apply_mode(m, u);
    if (!hu.empty()) total += t.P(1 + m, x) * genus1_npoint(withx, hu, t);
  }
  return 0.5 * total;
}

// insertions on one torus: optional omega~ (leftmost) and Heisenberg h's
struct Insertions {
  std::optional<cplx> omega;
  std::vector<cplx> h;
  std::size_t size() const { return h.size() + (omega ? 1 : 0); }
};

inline cplx genus1_insert(const Insertions& ins, const FockState& u, const Torus& t) {
  if (ins.omega) return genus1_omega_npoint(*ins.omega, ins.h, u, t);
  return genus1_npoint(ins.h, u, t);
}

struct BruteConfig {
  int level_cap = 6;
  // optional basis change per level (index = level), for basis-independence checks
  std::map<int, Mat> basis_change;
};

// level-n contributions sum_{u in V[n]} Z1(left; u; tau1) Z1(right; u-bar; tau2), n = 0..L
inline std::vector<cplx> genus2_levels(const Insertions& left, const Insertions& right, const ModuliPoint& p,
                                       const BruteConfig& cfg = {}) {
  if (cfg.level_cap < 0 || cfg.level_cap > 8) throw DomainViolation("genus2_brute: level cap must lie in [0, 8]");
  std::vector<cplx> out;
  cplx eps = p.eps() == 0.0 ? cplx(1.0) : p.eps();
  for (int n = 0; n <= cfg.level_cap; ++n) {
    if (p.eps() == 0.0 && n > 0) {
      out.push_back(0.0);
      continue;
    }
    auto it = cfg.basis_change.find(n);
    GramBlock g = gram_block(n, eps, cfg.level_cap, it == cfg.basis_change.end() ? nullptr : &it->second);
    int dim = static_cast<int>(g.basis.size());
    Vec z1(dim), z2(dim);
    for (int i = 0; i < dim; ++i) {
      z1(i) = genus1_insert(left, g.basis[i], p.torus(1));
      z2(i) = genus1_insert(right, g.basis[i], p.torus(2));
    }
    // u-bar_i = sum_j dual(j, i) u_j
    out.push_back((z1.transpose() * g.dual.transpose() * z2)(0));
  }
  return out;
}

inline cplx genus2_brute(const Insertions& left, const Insertions& right, const ModuliPoint& p,
                         const BruteConfig& cfg = {}) {
  cplx s = 0.0;
  for (cplx c : genus2_levels(left, right, p, cfg)) s += c;
  return s;
}

// (q1 d/dq1, q2 d/dq2, eps d/deps) of the truncated partition function, exactly in the Fock model
inline std::array<cplx, 3> genus2_brute_gradient(const ModuliPoint& p, const BruteConfig& cfg = {}) {
  std::array<cplx, 3> g{0.0, 0.0, 0.0};
  if (p.eps() == 0.0) {
    FockState v = FockState::vacuum(cfg.level_cap);
    Dual a = genus1_one_point_dual(v, p.torus(1)), b = genus1_one_point_dual(v, p.torus(2));
    return {a.d * b.v, a.v * b.d, 0.0};
  }
  for (int n = 0; n <= cfg.level_cap; ++n) {
    GramBlock gb = gram_block(n, p.eps(), cfg.level_cap);
    int dim = static_cast<int>(gb.basis.size());
    Vec v1(dim), d1(dim), v2(dim), d2(dim);
    for (int i = 0; i < dim; ++i) {
      Dual a = genus1_one_point_dual(gb.basis[i], p.torus(1)), b = genus1_one_point_dual(gb.basis[i], p.torus(2));
      v1(i) = a.v;
      d1(i) = a.d;
      v2(i) = b.v;
      d2(i) = b.d;
    }
    Mat Dt = gb.dual.transpose();
    g[0] += (d1.transpose() * Dt * v2)(0);
    g[1] += (v1.transpose() * Dt * d2)(0);
    g[2] += static_cast<double>(n) * (v1.transpose() * Dt * v2)(0);
  }
  return g;
}

// Coefficients c_0..c_deg of f(eps) = sum c_n eps^n by a discrete Fourier transform over K >= deg+1 samples
// rho e^{2 pi i k/K}; c_n is aliased only by c_{n+K} rho^K.
inline std::vector<cplx> eps_coefficients(const std::function<cplx(cplx)>& f, int deg, double rho, int K = 16) {
  K = std::max(K, deg + 1);
  std::vector<cplx> y(K), c(deg + 1, 0.0);
  for (int k = 0; k < K; ++k) y[k] = f(std::polar(rho, 2 * pi * k / K));
  for (int n = 0; n <= deg; ++n) {
    for (int k = 0; k < K; ++k) c[n] += y[k] * std::polar(1.0, -2 * pi * k * n / K);
    c[n] /= K * std::pow(rho, n);
  }
  return c;
}

// Truncated trace sum_{n<=nmax} p(n) (n - 1/24) q^{n - 1/24} = Tr (L(0) - c/24) q^{L(0) - c/24}, c = 1
inline cplx truncated_L0_trace(const Torus& t, int nmax) {
  std::vector<double> pn(nmax + 1, 0.0);
  pn[0] = 1;
  for (int k = 1; k <= nmax; ++k)
    for (int n = k; n <= nmax; ++n) pn[n] += pn[n - k];
  cplx total = 0.0;
  cplx base = std::exp(two_pi_i * t.tau() * (-1.0 / 24.0));
  for (int n = 0; n <= nmax; ++n) total += pn[n] * (n - 1.0 / 24.0) * std::pow(t.q(), n) * base;
  return total;
}

}  // namespace g2zhu::fock
