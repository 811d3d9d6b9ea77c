#pragma once

#include <functional>
#include <vector>

#include "sewing.hpp"

namespace g2zhu {

// Heisenberg module labels; (0,0) is the vacuum VOA.
struct ModulePair {
  cplx l1 = 0.0, l2 = 0.0;
};

// Z_M = (eta(tau1) eta(tau2))^{-1} det(1 - A1 A2)^{-1/2}, times e^{i pi lambda.Omega.lambda}
inline cplx z2_partition(const Sewing& s, ModulePair lam = {}) {
  const ModuliPoint& p = s.point();
  cplx z = std::exp(-0.5 * s.logdet()) / (p.torus(1).eta() * p.torus(2).eta());
  if (lam.l1 == 0.0 && lam.l2 == 0.0) return z;
  auto om = s.period();
  cplx q = lam.l1 * lam.l1 * om.om11 + 2.0 * lam.l1 * lam.l2 * om.om12 + lam.l2 * lam.l2 * om.om22;
  return std::exp(I * pi * q) * z;
}

inline cplx nu_lambda(const Sewing& s, ModulePair lam, const SurfacePoint& x, int d = 0) {
  cplx v = 0.0;
  if (lam.l1 != 0.0) v += lam.l1 * s.nu(1, x, d);
  if (lam.l2 != 0.0) v += lam.l2 * s.nu(2, x, d);
  return v;
}

// Sum over partial matchings: pairs give omega(u,v), singletons nu_lambda(u).
inline cplx matching_sum(int n, const std::function<cplx(int, int)>& pair, const std::function<cplx(int)>& single) {
  std::vector<int> free(n);
  for (int i = 0; i < n; ++i) free[i] = i;
  std::function<cplx(std::vector<int>)> rec = [&](std::vector<int> rest) -> cplx {
    if (rest.empty()) return 1.0;
    int f = rest.front();
    std::vector<int> tail(rest.begin() + 1, rest.end());
    cplx total = 0.0;
    cplx sv = single(f);
    if (sv != 0.0) total += sv * rec(tail);
    for (std::size_t k = 0; k < tail.size(); ++k) {
      std::vector<int> r2;
      for (std::size_t j = 0; j < tail.size(); ++j)
        if (j != k) r2.push_back(tail[j]);
      total += pair(f, tail[k]) * rec(r2);
    }
    return total;
  };
  return rec(free);
}

// Genus-two n-point function of Heisenberg generators h at the given points (dx factors implicit).
inline cplx h_npoint(const Sewing& s, ModulePair lam, const std::vector<SurfacePoint>& pts) {
  int n = static_cast<int>(pts.size());
  if (n > 8) throw DomainViolation("h_npoint: at most 8 insertions");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (pts[i].torus == pts[j].torus && pts[i].z == pts[j].z) throw DomainViolation("h_npoint: coincident insertions");
  std::vector<cplx> nus(n);
  for (int i = 0; i < n; ++i) nus[i] = nu_lambda(s, lam, pts[i]);
  cplx sum = matching_sum(
      n, [&](int i, int j) { return s.omega(pts[i], pts[j]); }, [&](int i) { return nus[i]; });
  return sum * z2_partition(s, lam);
}

// (nu_lambda(x)^2/2 + s(x)/12) Z_lambda
inline cplx virasoro_one_point(const Sewing& s, ModulePair lam, const SurfacePoint& x) {
  cplx nl = nu_lambda(s, lam, x);
  return (0.5 * nl * nl + s.projective(x) / 12.0) * z2_partition(s, lam);
}

}  // namespace g2zhu
