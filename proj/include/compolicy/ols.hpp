#pragma once

#include <vector>

#include "compolicy/matrix.hpp"

namespace compolicy {

// Ordinary least squares fit.  gram_inverse holds the inverse of the
// *average* gram matrix (E_n[d d^T])^-1, which is the scaling needed by the
// influence expansion coef_hat - coef ~ mean_i gram_inverse * d_i * resid_i.
struct LinearFit {
  std::vector<double> coefficients;
  std::vector<double> residuals;
  std::vector<double> gram_inverse;  // row-major k x k
  int n = 0;
  int k = 0;
};

// Least squares via Householder QR.  Throws NumericalError naming the first
// dependent column if the design is rank deficient (pivot below 1e-10).
LinearFit fit_ols(const Matrix& design, const std::vector<double>& y);

}  // namespace compolicy
