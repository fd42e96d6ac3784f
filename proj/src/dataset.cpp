#include "compolicy/dataset.hpp"

#include <cmath>
#include <string>

#include "compolicy/numeric.hpp"

namespace compolicy {

void ObsDataset::validate() const {
  const int rows = n();
  if (rows == 0) throw InputError("dataset is empty");
  if (static_cast<int>(actions.size()) != rows)
    throw InputError("action count does not match covariate rows");
  if (y.rows() != rows)
    throw InputError("outcome rows do not match covariate rows");
  if (k() < 2)
    throw InputError("need at least two outcome columns, got " + std::to_string(k()));
  bool saw_pos = false, saw_neg = false;
  for (int i = 0; i < rows; ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    if (a != 1 && a != -1)
      throw InputError("action at row " + std::to_string(i) + " is not -1 or +1");
    saw_pos = saw_pos || a == 1;
    saw_neg = saw_neg || a == -1;
    for (int j = 0; j < p(); ++j)
      if (!std::isfinite(x(i, j)))
        throw InputError("covariate at row " + std::to_string(i) + " is not finite");
    for (int j = 0; j < k(); ++j)
      if (!std::isfinite(y(i, j)))
        throw InputError("outcome at row " + std::to_string(i) + " is not finite");
  }
  if (!saw_pos || !saw_neg)
    throw InputError("both treatment arms must appear in the data");
}

}  // namespace compolicy
