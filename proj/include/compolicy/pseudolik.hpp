#pragma once

#include <vector>

#include "compolicy/dataset.hpp"
#include "compolicy/utility.hpp"

namespace compolicy {

// Pseudo log likelihood of the agreement model: with C_i = 1{A_i = d_i},
//   sum_i [ C_i * eta_i - log(1 + exp(eta_i)) ],  eta_i = behavior linear term.
// At beta = 0 this is -n log 2 regardless of the decisions.
double pseudo_loglik(const ObsDataset& data, const std::vector<int>& decisions,
                     const BehaviorModel& behavior);

}  // namespace compolicy
