#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "types.hpp"

namespace g2zhu {

using rational = boost::multiprecision::cpp_rational;

namespace detail {

struct RatLit {
  const char* num;
  std::int64_t den;
};

// B_0, B_2, ..., B_30.
inline constexpr std::array<RatLit, 16> bernoulli_even_table{{
    {"1", 1},
    {"1", 6},
    {"-1", 30},
    {"1", 42},
    {"-1", 30},
    {"5", 66},
    {"-691", 2730},
    {"7", 6},
    {"-3617", 510},
    {"43867", 798},
    {"-174611", 330},
    {"854513", 138},
    {"-236364091", 2730},
    {"8553103", 6},
    {"-23749461029", 870},
    {"8615841276005", 14322},
}};

}  // namespace detail

inline constexpr int bernoulli_table_max = 30;
inline constexpr int bernoulli_max = 64;

inline rational bernoulli_hardcoded(int n) {
  if (n < 0 || n > bernoulli_table_max) throw DomainViolation("bernoulli_hardcoded: index out of table");
  if (n == 1) return rational(-1, 2);
  if (n % 2) return rational(0);
  const auto& e = detail::bernoulli_even_table[n / 2];
  return rational(boost::multiprecision::cpp_int(e.num), e.den);
}

// Akiyama-Tanigawa; yields B_1 = +1/2, which we flip to the -1/2 convention.
inline std::vector<rational> bernoulli_akiyama_tanigawa(int nmax) {
  std::vector<rational> out(nmax + 1), a(nmax + 1);
  for (int m = 0; m <= nmax; ++m) {
    a[m] = rational(1, m + 1);
    for (int j = m; j >= 1; --j) a[j - 1] = j * (a[j - 1] - a[j]);
    out[m] = a[0];
  }
  if (nmax >= 1) out[1] = -out[1];
  return out;
}

// Exact B_n for n <= 64: hard-coded through B_30, recurrence beyond, checked on the overlap.
inline const rational& bernoulli(int n) {
  static const std::vector<rational> table = [] {
    auto t = bernoulli_akiyama_tanigawa(bernoulli_max);
    for (int n = 0; n <= bernoulli_table_max; ++n)
      if (t[n] != bernoulli_hardcoded(n)) throw std::logic_error("bernoulli: recurrence disagrees with table");
    return t;
  }();
  if (n < 0 || n > bernoulli_max) throw DomainViolation("bernoulli: index outside 0..64");
  return table[n];
}

// -B_n/n! as a double, n <= 64.
inline double eisenstein_constant(int n) {
  rational f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return static_cast<double>(rational(-bernoulli(n) / f));
}

}  // namespace g2zhu
