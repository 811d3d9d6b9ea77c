#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

#include "bernoulli.hpp"
#include "types.hpp"

namespace g2zhu {

namespace detail {

inline double log_int(long n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(1 << 16);
    t[0] = -INFINITY;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = std::log(static_cast<double>(i));
    return t;
  }();
  return n < static_cast<long>(table.size()) ? table[n] : std::log(static_cast<double>(n));
}

// log of n! in extended precision
inline long double log_factorial(long n) { return std::lgamma(static_cast<long double>(n) + 1.0L); }

inline long double log_binomial(long n, long k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

// Divisors of m, memoized by trial division.
inline const std::vector<int>& divisors(int m) {
  static std::mutex mu;
  static std::vector<std::vector<int>> table(1);
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<int>(table.size()) <= m) {
    int n = static_cast<int>(table.size());
    std::vector<int> d;
    for (int i = 1; i * i <= n; ++i)
      if (n % i == 0) {
        d.push_back(i);
        if (i != n / i) d.push_back(n / i);
      }
    std::sort(d.begin(), d.end());
    table.push_back(std::move(d));
  }
  return table[m];
}

}  // namespace detail

// D(q) = min |lambda| over Lambda = 2 pi i (Z tau + Z), by exact enumeration.
inline double min_lattice_distance(cplx tau) {
  if (!(tau.imag() > 0)) throw DomainViolation("min_lattice_distance: Im tau must be positive");
  // |m tau + n| >= |m| Im tau, and the candidate min(|1|, |tau|) bounds the minimum.
  double bound = std::min(1.0, std::abs(tau));
  int mmax = static_cast<int>(std::floor(bound / tau.imag()));
  double best = bound;
  for (int m = -mmax; m <= mmax; ++m) {
    double c = -m * tau.real();
    for (long n = static_cast<long>(std::floor(c - bound)); n <= static_cast<long>(std::ceil(c + bound)); ++n) {
      if (m == 0 && n == 0) continue;
      best = std::min(best, std::abs(static_cast<double>(m) * tau + static_cast<double>(n)));
    }
  }
  return 2 * pi * best;
}

class Torus {
 public:
  static constexpr int qseries_max = bernoulli_max;  // E_n for larger n comes from lattice sums
  static constexpr double laurent_radius = 0.95;

  explicit Torus(cplx tau, SeriesConfig cfg = {}) : tau_(tau), cfg_(cfg) {
    if (!(tau.imag() > 0)) throw DomainViolation("TorusModulus: Im tau must be positive");
    if (cfg.q_terms < 1 || !(cfg.tail_tol > 0)) throw DomainViolation("SeriesConfig: q_terms >= 1 and tail_tol > 0 required");
    q_ = std::exp(two_pi_i * tau);
    D_ = min_lattice_distance(tau);
    build_lattice();
    e_ = std::make_shared<std::vector<cplx>>();
    tail_ = std::make_shared<std::vector<double>>();
    ensure(qseries_max + 2);
  }
  Torus(const Torus&) = delete;
  Torus& operator=(const Torus&) = delete;

  cplx tau() const { return tau_; }
  cplx q() const { return q_; }
  double D() const { return D_; }
  const SeriesConfig& config() const { return cfg_; }

  // E_n D^n; O(1) in size for every n.
  cplx e_scaled(int n) const {
    if (n < 0) throw DomainViolation("eisenstein: negative index");
    return snapshot(n)->at(n);
  }

  // E_n(tau); underflows to 0 for very large n.
  cplx E(int n) const {
    if (n < 2) throw DomainViolation("eisenstein: k >= 2 required");
    if (n % 2) return 0.0;
    return e_scaled(n) * std::exp(-n * std::log(D_));
  }

  // Estimated q-series truncation tail of E_n (0 for lattice-sum indices).
  double E_tail(int n) const {
    if (n < 0) throw DomainViolation("eisenstein: negative index");
    ensure(n);
    std::lock_guard<std::mutex> lock(mu_);
    return (*tail_)[n];
  }

  // q d/dq E_n(tau) = (2/(n-1)!) sum m sigma_{n-1}(m) q^m.
  cplx E_qderiv(int n) const {
    if (n < 2) throw DomainViolation("eisenstein_qderiv: k >= 2 required");
    if (n % 2) return 0.0;
    if (n > qseries_max) throw DomainViolation("eisenstein_qderiv: k <= 64 supported");
    double tail;
    return qseries(n, true, tail);
  }

  cplx eta() const {
    cplx prod = 1.0, qn = 1.0;
    for (int n = 1;; ++n) {
      qn *= q_;
      prod *= 1.0 - qn;
      if (n >= cfg_.q_terms && std::abs(qn) / (1 - std::abs(q_)) < cfg_.tail_tol) break;
      if (n > 1000000) throw NonConvergence("dedekind_eta: product did not settle");
    }
    return std::exp(two_pi_i * tau_ / 24.0) * prod;
  }

  struct Reduced {
    cplx z;  // representative nearest the origin
    long m;  // z = z_r + 2 pi i (m tau + n)
    long n;
  };

  Reduced reduce(cplx z) const {
    cplx u = z / two_pi_i;
    double b = u.imag() / tau_.imag();
    auto at = [&](long m) {
      long n = std::lround(u.real() - m * tau_.real());
      return Reduced{z - two_pi_i * (static_cast<double>(m) * tau_ + static_cast<double>(n)), m, n};
    };
    Reduced best = at(std::lround(b));
    double reach = std::abs(best.z) / (2 * pi * tau_.imag());
    for (long m = static_cast<long>(std::floor(b - reach)) - 1; m <= static_cast<long>(std::ceil(b + reach)) + 1; ++m) {
      Reduced c = at(m);
      if (std::abs(c.z) < std::abs(best.z)) best = c;
    }
    return best;
  }

  // out[k-1] = s^k P_k(z) for k = 1..kmax, from the Laurent series about the
  // lattice point nearest z. The scale s keeps high-k values representable.
  std::vector<cplx> p_scaled(int kmax, cplx z, cplx s, bool use_reduction = true) const {
    if (kmax < 1) throw DomainViolation("weierstrass_p: k >= 1 required");
    Reduced r = use_reduction ? reduce(z) : Reduced{z, 0, 0};
    double aw = std::abs(r.z) / D_;
    if (aw == 0.0) throw DomainViolation("weierstrass_p: z is a lattice point");
    if (aw >= laurent_radius) throw DomainViolation("weierstrass_p: |z| outside the 0.95 D(q) convergence disc");
    std::vector<cplx> out(kmax, 0.0);
    if (s == 0.0) return out;

    const double law = std::log(aw), l1w = std::log1p(-aw);
    const double cut = -44.0;
    auto stop_index = [&](int k) {
      double lc = k * l1w;
      long mode = static_cast<long>(std::ceil((k - 1) / (1 - aw))) + 1;
      long n = k;
      while (n <= mode || lc > cut) {
        lc += detail::log_int(n) - detail::log_int(n - k + 1) + law;
        ++n;
      }
      return n;
    };
    long nmax = std::max(stop_index(1), stop_index(kmax)) + 2;
    auto e = snapshot(nmax);
    cplx u = r.z / std::abs(r.z);
    std::vector<cplx> upow(nmax + 1);
    upow[0] = 1.0;
    for (long j = 1; j <= nmax; ++j) upow[j] = upow[j - 1] * u;

    cplx pole = 1.0, scale = 1.0;
    const cplx pole_ratio = s / r.z, scale_ratio = s / (D_ * (1 - aw));
    for (int k = 1; k <= kmax; ++k) {
      pole *= pole_ratio;
      scale *= scale_ratio;
      cplx sum = 0.0;
      double lc = k * l1w;
      long mode = static_cast<long>(std::ceil((k - 1) / (1 - aw))) + 1;
      for (long n = k; n <= nmax; ++n) {
        if (lc > cut && n % 2 == 0 && n >= 2) sum += (*e)[n] * std::exp(lc) * upow[n - k];
        if (n > mode && lc < cut) break;
        lc += detail::log_int(n) - detail::log_int(n - k + 1) + law;
      }
      out[k - 1] = pole + ((k % 2) ? -1.0 : 1.0) * scale * sum;
    }
    out[0] -= static_cast<double>(r.m) * s;  // P_1(z + 2 pi i tau) = P_1(z) - 1
    return out;
  }

  cplx P(int k, cplx z, bool use_reduction = true) const { return p_scaled(k, z, 1.0, use_reduction)[k - 1]; }

 private:
  void build_lattice() {
    // lattice points with |lambda| <= 2.5 D; the sum of |D/lambda|^n beyond is < 1e-20 for n > 64
    const double R = 2.5 * D_ / (2 * pi);
    long mmax = static_cast<long>(std::ceil(R / tau_.imag()));
    for (long m = -mmax; m <= mmax; ++m) {
      double c = -m * tau_.real();
      for (long n = static_cast<long>(std::floor(c - R)) - 1; n <= static_cast<long>(std::ceil(c + R)) + 1; ++n) {
        if (m == 0 && n == 0) continue;
        cplx lam = two_pi_i * (static_cast<double>(m) * tau_ + static_cast<double>(n));
        if (std::abs(lam) <= 2.5 * D_) lattice_.push_back(D_ / lam);
      }
    }
  }

  // E_n (or q dE_n/dq) from the q-expansion, terms in log space, extended until the tail bound is small.
  cplx qseries(int n, bool qderiv, double& tail) const {
    const double aq = std::abs(q_), lq = std::log(aq), arg = 2 * pi * tau_.real();
    const double lpref = std::log(2.0) - static_cast<double>(detail::log_factorial(n - 1));
    const double c0 = qderiv ? 0.0 : eisenstein_constant(n);
    cplx sum = 0.0;
    tail = INFINITY;
    for (int m = 1;; ++m) {
      const auto& ds = detail::divisors(m);
      double ds_sum = 0.0;  // sigma_{n-1}(m) / m^{n-1}
      for (int d : ds) ds_sum += std::exp(-(n - 1) * detail::log_int(d));
      double p = (qderiv ? n : n - 1) * detail::log_int(m);
      double mag = std::exp(lpref + p + m * lq) * ds_sum;
      sum += mag * std::polar(1.0, arg * m);
      if (m >= cfg_.q_terms) {
        // beyond the peak the terms shrink by at least r per step
        double r = std::exp((qderiv ? n : n) * std::log1p(1.0 / m) + lq);
        if (r < 1) {
          tail = 2.0 * mag * r / (1 - r);
          double ref = std::max(std::abs(c0 + sum), std::abs(c0));
          if (tail < cfg_.tail_tol * std::max(ref, 1e-300)) break;
        }
      }
      if (m > 2000000) throw NonConvergence("eisenstein: q-series did not reach tail_tol");
    }
    return c0 + sum;
  }

  void ensure(long nmax) const { snapshot(nmax); }

  std::shared_ptr<const std::vector<cplx>> snapshot(long nmax) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (static_cast<long>(e_->size()) <= nmax) {
      auto e = std::make_shared<std::vector<cplx>>(*e_);
      auto t = std::make_shared<std::vector<double>>(*tail_);
      long start = static_cast<long>(e->size());
      long target = std::max(nmax + 1, 2 * start);
      e->resize(target, 0.0);
      t->resize(target, 0.0);
      const double lD = std::log(D_);
      for (long n = start; n < target; ++n) {
        if (n < 2 || n % 2) continue;
        if (n <= qseries_max) {
          double tl;
          (*e)[n] = qseries(static_cast<int>(n), false, tl) * std::exp(n * lD);
          (*t)[n] = tl;
        }
      }
      if (target - 1 > qseries_max) {
        // e_n = sum (D/lambda)^n for n > 64
        long first = std::max(start, static_cast<long>(qseries_max + 1));
        for (cplx w : lattice_) {
          cplx pw = std::pow(w, static_cast<double>(first));
          for (long n = first; n < target; ++n) {
            if (n % 2 == 0) (*e)[n] += pw;
            pw *= w;
          }
        }
      }
      e_ = e;
      tail_ = t;
    }
    return e_;
  }

  cplx tau_, q_;
  SeriesConfig cfg_;
  double D_;
  std::vector<cplx> lattice_;  // D/lambda
  mutable std::mutex mu_;
  mutable std::shared_ptr<std::vector<cplx>> e_;
  mutable std::shared_ptr<std::vector<double>> tail_;
};

// Free-function surface over Torus.

inline cplx eisenstein(int k, const Torus& t) { return t.E(k); }

inline cplx eisenstein(int k, cplx tau, SeriesConfig cfg = {}) {
  if (k < 2) throw DomainViolation("eisenstein: k >= 2 required");
  if (k % 2) return 0.0;
  return Torus(tau, cfg).E(k);
}

inline cplx dedekind_eta(cplx tau, SeriesConfig cfg = {}) { return Torus(tau, cfg).eta(); }

inline cplx weierstrass_p(int k, cplx z, const Torus& t) { return t.P(k, z); }

// Plain Laurent series about the origin, no lattice reduction.
inline cplx weierstrass_p_laurent(int k, cplx z, const Torus& t) { return t.P(k, z, false); }

}  // namespace g2zhu
