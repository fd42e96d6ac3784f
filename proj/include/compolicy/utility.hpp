#pragma once

#include <vector>

#include "compolicy/dataset.hpp"
#include "compolicy/qmodel.hpp"

namespace compolicy {

// Covariate features entering the patient-specific weight model:
// (1, x[cols], x[squared]^2).  Squared terms let studies add curvature
// without touching the dataset.
struct UtilityDesign {
  std::vector<int> cols;
  std::vector<int> squared;

  int dim() const { return 1 + static_cast<int>(cols.size()) + static_cast<int>(squared.size()); }
  std::vector<double> row(const double* x) const;
  static UtilityDesign all_columns(int p);
};

// Composite-outcome utility u(x, y) = sum_k w_k(x) y_k with simplex weights.
// Two forms: fixed weights shared by everyone, or patient-specific weights
// w_k(x) = expit(features(x)^T theta_k) for k < K with the last weight the
// remainder 1 - sum of the others.  The remainder can go negative for K >= 3;
// it is evaluated as written and negative_weight_fraction reports how often.
class UtilityModel {
 public:
  UtilityModel() = default;

  static UtilityModel fixed(std::vector<double> weights);
  static UtilityModel patient_specific(std::vector<std::vector<double>> theta,
                                       UtilityDesign design, int n_outcomes);

  bool is_fixed() const { return fixed_; }
  int n_outcomes() const { return k_; }
  const std::vector<double>& fixed_weights() const { return weights_; }
  const std::vector<std::vector<double>>& theta() const { return theta_; }
  const UtilityDesign& design() const { return design_; }

  // All K weights at a covariate vector (the last one implied).
  std::vector<double> weights(const double* x) const;
  double utility_value(const double* x, const double* y_row) const;
  // Weighted contrast sum_k w_k(x) r_k, the decision score.
  double score(const double* x, const double* contrast_row) const;

  double negative_weight_fraction(const ObsDataset& data) const;

 private:
  bool fixed_ = true;
  int k_ = 2;
  std::vector<double> weights_;              // fixed form
  std::vector<std::vector<double>> theta_;   // K-1 coefficient vectors
  UtilityDesign design_;
};

// Treatment model Pr{A = recommended | x} = expit(beta^T (1, x)), or
// expit(beta0) when intercept_only.
struct BehaviorModel {
  std::vector<double> beta;
  bool intercept_only = false;

  double linear(const double* x) const;
  double prob_optimal(const double* x) const;
};

// Recommended action at x: sign of the weighted contrast, ties to +1.
int decision(const QModelSet& q, const UtilityModel& u, const double* x);

// Recommended actions for every dataset row, using cached contrasts.
std::vector<int> decisions_for(const ObsDataset& data, const Matrix& contrasts,
                               const UtilityModel& u);

}  // namespace compolicy
