#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace g2zhu {

struct ResidualSample {
  std::string label;
  double residual = 0;  // |lhs - rhs|
  double scale = 1;     // normalization of the residual
  double relative() const { return scale > 0 ? residual / scale : residual; }
};

struct ResidualReport {
  std::string name;
  double tolerance = 0;
  std::vector<ResidualSample> samples;
  std::vector<std::string> errors;  // per-sample evaluation failures

  void add(std::string label, double residual, double scale) {
    samples.push_back({std::move(label), residual, scale});
  }
  double worst() const {
    double w = 0;
    for (const auto& s : samples) w = std::max(w, s.relative());
    return w;
  }
  bool pass() const { return errors.empty() && !samples.empty() && worst() <= tolerance; }

  void merge(const ResidualReport& o) {
    samples.insert(samples.end(), o.samples.begin(), o.samples.end());
    errors.insert(errors.end(), o.errors.begin(), o.errors.end());
  }
};

}  // namespace g2zhu
