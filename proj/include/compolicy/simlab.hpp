#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "compolicy/dataset.hpp"
#include "compolicy/matrix.hpp"
#include "compolicy/qmodel.hpp"
#include "compolicy/rng.hpp"
#include "compolicy/scenario.hpp"
#include "compolicy/utility.hpp"

namespace compolicy {

// A deterministic decision rule x -> {-1, +1}.
using Policy = std::function<int(const double*)>;

// Mean true-weight utility over a fresh testing draw with every action forced
// to the policy.  Consumes p + K normals per row, so a fixed stream gives the
// same testing sample to every policy evaluated on it.
double value_mc(const Policy& policy, const Scenario& sc, int test_n, RngStream& rng);

// Mean true-weight utility over a fresh draw with actions assigned the way
// the generative model assigns them: the standard-of-care value.
double soc_mc(const Scenario& sc, int test_n, RngStream& rng);

// Observational value of a policy under an estimated utility: the mean
// estimated utility among records whose observed action equals the policy's
// recommendation (the conditional-mean reading of the policy value), plus the
// all-records mean as the standard-of-care reference.
struct ObsValue {
  double value = 0.0;
  double soc = 0.0;
  double percent_improvement = 0.0;
  std::vector<double> fold_value;      // per fold, among agreeing records
  std::vector<int> fold_agree;         // agreeing record count per fold
  std::vector<std::uint8_t> fold_used; // 0 = no agreeing records, skipped
  int folds = 1;
};

ObsValue value_observational(const ObsDataset& data, const Policy& policy,
                             const UtilityModel& utility);

// Cross-fitted variant: rows are split round-robin into folds; the utility
// (and its Q-models) is refitted on the other folds and the held-out fold is
// scored under that fit's own policy.  Folds with no agreeing records are
// flagged and excluded from the average.
struct FittedRule {
  QModelSet q;
  UtilityModel utility;
};
using RuleFitter = std::function<FittedRule(const ObsDataset&)>;

ObsValue value_observational_cv(const ObsDataset& data, const RuleFitter& fitter,
                                int folds);

// One summary cell: mean and standard deviation across replications.
struct McCell {
  double mean = 0.0;
  double sd = 0.0;
};

struct McSettings {
  int reps = 500;
  std::uint64_t seed = 1;
  int jobs = 1;              // <= 0: configured default
  int test_n = 500;          // testing-sample size for values and error rates
  int grid_size = 100;       // weight grid for two-outcome fixed fits
  int chain_length = 10000;  // Metropolis chain for patient-specific/simplex fits
  int n_boot = 1000;         // bootstrap draws per test (power study)
  double alpha = 0.05;
  std::vector<int> n_values; // override the row sample sizes; empty = defaults
};

// Replicated study results in the published row/column layout.
struct McSummary {
  std::string table_id;
  std::vector<std::string> row_labels;
  std::vector<std::string> columns;
  std::vector<std::vector<McCell>> cells;  // row-major: cells[row][col]
  std::vector<Matrix> per_rep;             // per row: reps x columns
  int reps = 0;
  std::uint64_t seed = 0;
};

// Known study ids.  T1-T10 follow the published simulation studies in order:
// fixed-weight estimation/value (T1, T2), covariate-dependent treatment
// quality (T3, T4), patient-specific weights (T5, T6), three outcomes
// (T7, T8), and the misspecified weight model (T9, T10).  T5b is the
// heterogeneity-test power study that accompanies T5.
std::vector<std::string> replicate_table_ids();

McSummary replicate_table(const std::string& table_id, const McSettings& settings);
McSummary replicate_table(const std::string& table_id, int reps, std::uint64_t seed,
                          int jobs = 1);

}  // namespace compolicy
