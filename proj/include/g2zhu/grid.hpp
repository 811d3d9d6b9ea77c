#pragma once

#include <vector>

#include "sewing.hpp"

namespace g2zhu {

// (tau1, tau2) pairs of the standard verification grid.
inline std::vector<std::pair<cplx, cplx>> standard_tau_pairs() {
  return {{cplx(0, 1), cplx(0, 1)}, {cplx(0, 1), cplx(0, 1.2)}, {cplx(0.3, 1), cplx(0, 1.1)}};
}

// eps = f D(q1) D(q2), f in {0, 0.05, 0.15}: the fractions of the domain bound scaled by 1/0.25.
inline std::vector<double> standard_eps_fractions() { return {0.0, 0.05, 0.15}; }

inline std::vector<ModuliPoint> standard_grid(SeriesConfig cfg = {}) {
  std::vector<ModuliPoint> out;
  for (auto [t1, t2] : standard_tau_pairs()) {
    ModuliPoint base(t1, t2, 0.0, cfg);
    for (double f : standard_eps_fractions()) out.push_back(base.with_eps(f * base.D(1) * base.D(2)));
  }
  return out;
}

// Four annulus points per torus, log-spaced in the outer part of the annulus so that cross-torus
// pairs satisfy |x||y| > |eps|, where the series for 2P_1 converges.
inline std::vector<SurfacePoint> surface_points(const ModuliPoint& p, int a) {
  static const double frac[4] = {0.75, 0.8, 0.85, 0.9};
  static const double angle[4] = {0.4, 2.0, 3.5, 5.1};
  double outer = p.radius(a), inner = std::abs(p.eps()) / p.radius(other(a));
  std::vector<SurfacePoint> pts;
  for (int k = 0; k < 4; ++k) {
    double r = inner > 0 ? std::pow(inner, 1 - frac[k]) * std::pow(outer, frac[k]) : outer * (frac[k] - 0.4);
    pts.push_back({a, std::polar(r, angle[k])});
  }
  return pts;
}

}  // namespace g2zhu
