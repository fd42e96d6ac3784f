#pragma once

#include <vector>

#include "compolicy/dataset.hpp"
#include "compolicy/ols.hpp"

namespace compolicy {

// Per-outcome linear regression models on the design
//   d(x, a) = (1, x_S, a, a * x_S)
// where S is a configurable covariate subset (all columns by default; a
// subset supports model-misspecification studies).  The treatment effect
// contrast is R_k(x) = Q_k(x, +1) - Q_k(x, -1) = c(x)^T coef with
// c(x) = (0, 0_S, 2, 2 x_S).
class QModelSet {
 public:
  QModelSet() = default;
  QModelSet(std::vector<LinearFit> fits, std::vector<int> x_cols);

  // Build directly from known coefficient vectors (one per outcome, each of
  // length 2 * (|S| + 1)); used by tests and closed-form checks.
  static QModelSet from_coefficients(const std::vector<std::vector<double>>& coefs,
                                     std::vector<int> x_cols);

  int n_outcomes() const { return static_cast<int>(fits_.size()); }
  const std::vector<int>& x_cols() const { return x_cols_; }
  const LinearFit& fit(int k) const { return fits_[static_cast<std::size_t>(k)]; }
  int design_dim() const { return 2 * (static_cast<int>(x_cols_.size()) + 1); }

  // Model design row for a covariate vector and action.
  std::vector<double> design_row(const double* x, int a) const;
  // Contrast vector c(x) = d(x, +1) - d(x, -1).
  std::vector<double> contrast_row(const double* x) const;

  double q_value(const double* x, int a, int k) const;
  // R_k(x); equals q_value(x, +1, k) - q_value(x, -1, k) exactly.
  double contrast(const double* x, int k) const;

 private:
  std::vector<LinearFit> fits_;
  std::vector<int> x_cols_;
};

// Fit one linear model per outcome column.  x_cols empty means all columns.
QModelSet fit_q_models(const ObsDataset& data, std::vector<int> x_cols = {});

// Cached contrasts R_k(x_i) for every row of a dataset, used by the
// estimation loops so decision relabeling is a dot product per row.
Matrix contrast_table(const ObsDataset& data, const QModelSet& q);

}  // namespace compolicy
