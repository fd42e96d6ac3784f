#pragma once

#include <vector>

#include "compolicy/matrix.hpp"

namespace compolicy {

struct LogisticFit {
  std::vector<double> coefficients;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;  // Bernoulli log likelihood at coefficients
  // Set when the first pass ran into complete separation (coefficient norm
  // above 30) and the fit was redone with ridge 1e-4.
  bool separation_retry = false;
  double ridge = 0.0;
};

// Logistic regression by damped Newton iterations (IRLS with step halving so
// the penalized log likelihood never decreases).  labels are 0/1.  Separation
// triggers an automatic ridge retry; 100 iterations without the gradient norm
// reaching 1e-6 leaves converged = false.  start, when given, seeds the
// iteration (warm start); the concave likelihood makes the solution
// start-independent.
LogisticFit fit_logistic(const Matrix& design, const std::vector<double>& labels,
                         double ridge = 0.0, const std::vector<double>* start = nullptr);

// Bernoulli log likelihood sum_i [c_i eta_i - log(1+exp(eta_i))].
double bernoulli_loglik(const Matrix& design, const std::vector<double>& labels,
                        const std::vector<double>& beta);

}  // namespace compolicy
