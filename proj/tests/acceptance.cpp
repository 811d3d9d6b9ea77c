// Acceptance suite: one PASS/FAIL line per criterion on the standard grid.
#include <chrono>
#include <cstdio>

#include "g2zhu/suite.hpp"

int main() {
  using namespace g2zhu;
  auto t0 = std::chrono::steady_clock::now();
  suite::SuiteConfig cfg;
  int failed = 0;
  for (int id = 1; id <= 12; ++id) {
    auto t = std::chrono::steady_clock::now();
    auto k = suite::criterion(id, cfg);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
    std::printf("%s criterion %2d: %s (%.1fs)\n", k.pass() ? "PASS" : "FAIL", id, k.title.c_str(), secs);
    for (const auto& r : k.reports) {
      std::printf("       %-24s worst %.3e  tol %.1e  samples %zu  errors %zu\n", r.name.c_str(), r.worst(), r.tolerance,
                  r.samples.size(), r.errors.size());
      for (std::size_t e = 0; e < r.errors.size() && e < 3; ++e) std::printf("         error: %s\n", r.errors[e].c_str());
    }
    failed += !k.pass();
  }
  double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/12 criteria passed in %.1fs\n", 12 - failed, total);
  return failed == 0 ? 0 : 1;
}
