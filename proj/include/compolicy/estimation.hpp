#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "compolicy/dataset.hpp"
#include "compolicy/logistic.hpp"
#include "compolicy/qmodel.hpp"
#include "compolicy/utility.hpp"

namespace compolicy {

// Logistic regression of the agreement indicator C_i = 1{A_i = d_i} on
// (1, x) -- or on the intercept alone.  Its log likelihood equals the pseudo
// log likelihood of the decision rule, so maximizing it profiles beta out.
LogisticFit profile_beta(const ObsDataset& data, const std::vector<int>& decisions,
                         bool intercept_only = false);

// Result of a utility/treatment-model fit together with its diagnostics.
struct FitReport {
  UtilityModel utility;
  BehaviorModel behavior;
  int n = 0;  // training rows, kept for downstream scaling
  double pseudo_loglik_at_max = 0.0;
  double rho_hat = 0.0;  // mean fitted agreement probability
  std::string method;
  bool separation_retry = false;
  // Weight-grid diagnostics (grid method).
  std::vector<double> grid_omega;
  std::vector<double> grid_loglik;
  int grid_choice = -1;
  // Chain diagnostics (Metropolis method).
  std::vector<double> chain_loglik;
  std::vector<std::uint8_t> chain_accepted;
  double acceptance_rate = 0.0;
  double proposal_sd_final = 0.0;
  int chain_argmax = -1;
  // Fraction of training rows whose implied last weight is negative
  // (patient-specific fits with three or more outcomes).
  double negative_weight_fraction = 0.0;
};

// Fixed-weight search for two outcomes over the grid omega_m = m/grid_size,
// profiling the treatment model at each point.  Ties break toward the
// smallest omega.  Grid points are independent, so they can be fitted in
// parallel; jobs <= 0 picks the configured default.
FitReport fit_fixed_grid(const ObsDataset& data, const QModelSet& q,
                         int grid_size = 100, bool intercept_only = false,
                         int jobs = 1);

enum class ChainMode {
  patient_specific,  // weights expit(features(x)^T theta_k)
  fixed_simplex,     // constant weights through softmax logits (K >= 3)
};

struct MetropolisConfig {
  int chain_length = 10000;
  int burn_in = -1;          // negative: chain_length / 10
  double proposal_sd = 0.0;  // <= 0: auto-tune during burn-in
  std::uint64_t seed = 0;
  ChainMode mode = ChainMode::patient_specific;
  // Weight feature design for the patient-specific mode; unset means all
  // covariate columns.
  std::optional<UtilityDesign> design;
  bool intercept_only_behavior = false;
};

// Random-walk Metropolis over the utility parameters with the treatment
// model profiled out at every state.  The reported estimate is the chain
// state with the largest profile likelihood; burn-in only affects proposal
// scale tuning.
FitReport fit_metropolis(const ObsDataset& data, const QModelSet& q,
                         const MetropolisConfig& cfg);

// Fraction of test points where the fitted rule disagrees with the oracle
// decision function.
double error_rate(const QModelSet& q, const UtilityModel& model,
                  const std::function<int(const double*)>& oracle,
                  const Matrix& test_x);

}  // namespace compolicy
