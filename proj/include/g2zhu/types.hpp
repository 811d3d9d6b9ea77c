#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace g2zhu {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Row = Eigen::RowVectorXcd;

inline constexpr double pi = 3.14159265358979323846;
inline const cplx I{0.0, 1.0};
inline const cplx two_pi_i{0.0, 2.0 * pi};

// Thrown when an argument leaves the region where a formula is defined.
struct DomainViolation : std::domain_error {
  using std::domain_error::domain_error;
};

// Thrown when a truncated series or inverse fails to settle.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SeriesConfig {
  int q_terms = 128;        // floor on retained q-powers; extended while the tail bound is too large
  double tail_tol = 1e-17;  // relative to the constant term
};

// Truncated matrices and vectors are stored 0-based: entry (k,l) of the
// 1-based infinite matrix lives at (k-1,l-1).

}  // namespace g2zhu
