#pragma once

#include <string>
#include <vector>

#include "compolicy/matrix.hpp"

namespace compolicy {

// Observational study data: covariates, a binary treatment coded -1/+1, and
// K >= 2 outcome columns (larger outcome = better, after any sign flips done
// at load time).
struct ObsDataset {
  Matrix x;                 // n x p covariates
  std::vector<int> actions; // n entries, each -1 or +1
  Matrix y;                 // n x K outcomes
  std::vector<std::string> covariate_names;
  std::vector<std::string> outcome_names;

  int n() const { return x.rows(); }
  int p() const { return x.cols(); }
  int k() const { return y.cols(); }

  // Throws InputError unless sizes line up, all entries are finite, actions
  // are -1/+1 with both values present, and K >= 2.
  void validate() const;
};

}  // namespace compolicy
