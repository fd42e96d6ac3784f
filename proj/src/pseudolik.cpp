#include "compolicy/pseudolik.hpp"

#include "compolicy/numeric.hpp"

namespace compolicy {

double pseudo_loglik(const ObsDataset& data, const std::vector<int>& decisions,
                     const BehaviorModel& behavior) {
  if (static_cast<int>(decisions.size()) != data.n())
    throw InputError("decision count does not match dataset rows");
  double ll = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double eta = behavior.linear(data.x.row_ptr(i));
    if (data.actions[static_cast<std::size_t>(i)] == decisions[static_cast<std::size_t>(i)])
      ll += eta;
    ll -= log1pexp(eta);
  }
  return ll;
}

}  // namespace compolicy
