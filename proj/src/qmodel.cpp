#include "compolicy/qmodel.hpp"

#include "compolicy/numeric.hpp"

namespace compolicy {

QModelSet::QModelSet(std::vector<LinearFit> fits, std::vector<int> x_cols)
    : fits_(std::move(fits)), x_cols_(std::move(x_cols)) {}

QModelSet QModelSet::from_coefficients(const std::vector<std::vector<double>>& coefs,
                                       std::vector<int> x_cols) {
  std::vector<LinearFit> fits;
  fits.reserve(coefs.size());
  for (const auto& c : coefs) {
    if (static_cast<int>(c.size()) != 2 * (static_cast<int>(x_cols.size()) + 1))
      throw InputError("coefficient length does not match the model design");
    LinearFit f;
    f.coefficients = c;
    f.k = static_cast<int>(c.size());
    fits.push_back(std::move(f));
  }
  return QModelSet(std::move(fits), std::move(x_cols));
}

std::vector<double> QModelSet::design_row(const double* x, int a) const {
  const int s = static_cast<int>(x_cols_.size());
  std::vector<double> d(static_cast<std::size_t>(2 * (s + 1)), 0.0);
  d[0] = 1.0;
  for (int j = 0; j < s; ++j) d[static_cast<std::size_t>(1 + j)] = x[x_cols_[static_cast<std::size_t>(j)]];
  d[static_cast<std::size_t>(1 + s)] = a;
  for (int j = 0; j < s; ++j)
    d[static_cast<std::size_t>(2 + s + j)] = a * x[x_cols_[static_cast<std::size_t>(j)]];
  return d;
}

std::vector<double> QModelSet::contrast_row(const double* x) const {
  const int s = static_cast<int>(x_cols_.size());
  std::vector<double> c(static_cast<std::size_t>(2 * (s + 1)), 0.0);
  c[static_cast<std::size_t>(1 + s)] = 2.0;
  for (int j = 0; j < s; ++j)
    c[static_cast<std::size_t>(2 + s + j)] = 2.0 * x[x_cols_[static_cast<std::size_t>(j)]];
  return c;
}

double QModelSet::q_value(const double* x, int a, int k) const {
  const std::vector<double> d = design_row(x, a);
  const std::vector<double>& coef = fits_[static_cast<std::size_t>(k)].coefficients;
  double s = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) s += d[j] * coef[j];
  return s;
}

double QModelSet::contrast(const double* x, int k) const {
  const int s = static_cast<int>(x_cols_.size());
  const std::vector<double>& coef = fits_[static_cast<std::size_t>(k)].coefficients;
  double r = 2.0 * coef[static_cast<std::size_t>(1 + s)];
  for (int j = 0; j < s; ++j)
    r += 2.0 * coef[static_cast<std::size_t>(2 + s + j)] * x[x_cols_[static_cast<std::size_t>(j)]];
  return r;
}

QModelSet fit_q_models(const ObsDataset& data, std::vector<int> x_cols) {
  data.validate();
  if (x_cols.empty())
    for (int j = 0; j < data.p(); ++j) x_cols.push_back(j);
  for (int c : x_cols)
    if (c < 0 || c >= data.p())
      throw InputError("model column index out of range: " + std::to_string(c));
  const int n = data.n();
  const int s = static_cast<int>(x_cols.size());
  Matrix design(n, 2 * (s + 1));
  for (int i = 0; i < n; ++i) {
    const double* xr = data.x.row_ptr(i);
    const int a = data.actions[static_cast<std::size_t>(i)];
    design(i, 0) = 1.0;
    for (int j = 0; j < s; ++j) design(i, 1 + j) = xr[x_cols[static_cast<std::size_t>(j)]];
    design(i, 1 + s) = a;
    for (int j = 0; j < s; ++j) design(i, 2 + s + j) = a * xr[x_cols[static_cast<std::size_t>(j)]];
  }
  std::vector<LinearFit> fits;
  fits.reserve(static_cast<std::size_t>(data.k()));
  std::vector<double> col(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < data.k(); ++k) {
    for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = data.y(i, k);
    fits.push_back(fit_ols(design, col));
  }
  return QModelSet(std::move(fits), std::move(x_cols));
}

Matrix contrast_table(const ObsDataset& data, const QModelSet& q) {
  Matrix r(data.n(), q.n_outcomes());
  for (int i = 0; i < data.n(); ++i) {
    const double* xr = data.x.row_ptr(i);
    for (int k = 0; k < q.n_outcomes(); ++k) r(i, k) = q.contrast(xr, k);
  }
  return r;
}

}  // namespace compolicy
