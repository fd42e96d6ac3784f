#include "compolicy/utility.hpp"

#include <cmath>
#include <string>

#include "compolicy/numeric.hpp"

namespace compolicy {

std::vector<double> UtilityDesign::row(const double* x) const {
  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(dim()));
  r.push_back(1.0);
  for (int c : cols) r.push_back(x[c]);
  for (int c : squared) r.push_back(x[c] * x[c]);
  return r;
}

UtilityDesign UtilityDesign::all_columns(int p) {
  UtilityDesign d;
  for (int j = 0; j < p; ++j) d.cols.push_back(j);
  return d;
}

UtilityModel UtilityModel::fixed(std::vector<double> weights) {
  if (weights.size() < 2) throw InputError("fixed utility needs at least two weights");
  double sum = 0.0;
  for (double& w : weights) {
    // Snap away rounding dust so implied weights like 1 - a - b validate.
    if (w < 0.0 && w > -1e-12) w = 0.0;
    if (w > 1.0 && w < 1.0 + 1e-12) w = 1.0;
    if (!(w >= 0.0 && w <= 1.0))
      throw InputError("fixed utility weights must lie in [0, 1]");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-8)
    throw InputError("fixed utility weights must sum to 1, got " + std::to_string(sum));
  UtilityModel m;
  m.fixed_ = true;
  m.k_ = static_cast<int>(weights.size());
  m.weights_ = std::move(weights);
  return m;
}

UtilityModel UtilityModel::patient_specific(std::vector<std::vector<double>> theta,
                                            UtilityDesign design, int n_outcomes) {
  if (n_outcomes < 2) throw InputError("utility needs at least two outcomes");
  if (static_cast<int>(theta.size()) != n_outcomes - 1)
    throw InputError("patient-specific utility needs K-1 coefficient vectors");
  for (const auto& t : theta)
    if (static_cast<int>(t.size()) != design.dim())
      throw InputError("utility coefficient length does not match its feature design");
  UtilityModel m;
  m.fixed_ = false;
  m.k_ = n_outcomes;
  m.theta_ = std::move(theta);
  m.design_ = std::move(design);
  return m;
}

std::vector<double> UtilityModel::weights(const double* x) const {
  if (fixed_) return weights_;
  std::vector<double> w(static_cast<std::size_t>(k_), 0.0);
  const std::vector<double> feat = design_.row(x);
  double sum = 0.0;
  for (int k = 0; k < k_ - 1; ++k) {
    double eta = 0.0;
    for (std::size_t j = 0; j < feat.size(); ++j)
      eta += feat[j] * theta_[static_cast<std::size_t>(k)][j];
    w[static_cast<std::size_t>(k)] = expit(eta);
    sum += w[static_cast<std::size_t>(k)];
  }
  w[static_cast<std::size_t>(k_ - 1)] = 1.0 - sum;
  return w;
}

double UtilityModel::utility_value(const double* x, const double* y_row) const {
  const std::vector<double> w = weights(x);
  double u = 0.0;
  for (int k = 0; k < k_; ++k) u += w[static_cast<std::size_t>(k)] * y_row[k];
  return u;
}

double UtilityModel::score(const double* x, const double* contrast_row) const {
  const std::vector<double> w = weights(x);
  double s = 0.0;
  for (int k = 0; k < k_; ++k) s += w[static_cast<std::size_t>(k)] * contrast_row[k];
  return s;
}

double UtilityModel::negative_weight_fraction(const ObsDataset& data) const {
  int neg = 0;
  for (int i = 0; i < data.n(); ++i) {
    const std::vector<double> w = weights(data.x.row_ptr(i));
    for (double v : w)
      if (v < 0.0) { ++neg; break; }
  }
  return data.n() ? static_cast<double>(neg) / data.n() : 0.0;
}

double BehaviorModel::linear(const double* x) const {
  double eta = beta.empty() ? 0.0 : beta[0];
  if (!intercept_only)
    for (std::size_t j = 1; j < beta.size(); ++j) eta += beta[j] * x[j - 1];
  return eta;
}

double BehaviorModel::prob_optimal(const double* x) const { return expit(linear(x)); }

int decision(const QModelSet& q, const UtilityModel& u, const double* x) {
  std::vector<double> r(static_cast<std::size_t>(q.n_outcomes()), 0.0);
  for (int k = 0; k < q.n_outcomes(); ++k) r[static_cast<std::size_t>(k)] = q.contrast(x, k);
  return sign_tie_positive(u.score(x, r.data()));
}

std::vector<int> decisions_for(const ObsDataset& data, const Matrix& contrasts,
                               const UtilityModel& u) {
  std::vector<int> d(static_cast<std::size_t>(data.n()), 1);
  for (int i = 0; i < data.n(); ++i) {
    d[static_cast<std::size_t>(i)] =
        sign_tie_positive(u.score(data.x.row_ptr(i), contrasts.row_ptr(i)));
  }
  return d;
}

}  // namespace compolicy
