#include "compolicy/ols.hpp"

#include "compolicy/numeric.hpp"

namespace compolicy {

LinearFit fit_ols(const Matrix& design, const std::vector<double>& y) {
  const int n = design.rows();
  const int k = design.cols();
  if (static_cast<int>(y.size()) != n)
    throw InputError("response length does not match design rows");
  LinearFit fit;
  fit.n = n;
  fit.k = k;
  fit.coefficients = qr_solve(design, y);
  fit.residuals.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double* row = design.row_ptr(i);
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += row[j] * fit.coefficients[static_cast<std::size_t>(j)];
    fit.residuals[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] - s;
  }
  // Average gram matrix E_n[d d^T], then invert.
  std::vector<double> gram(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* row = design.row_ptr(i);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        gram[static_cast<std::size_t>(a) * k + b] += row[a] * row[b];
  }
  for (double& g : gram) g /= n;
  fit.gram_inverse = spd_inverse(gram, k);
  return fit;
}

}  // namespace compolicy
