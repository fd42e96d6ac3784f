#include "compolicy/logistic.hpp"

#include <cmath>

#include "compolicy/numeric.hpp"

namespace compolicy {

double bernoulli_loglik(const Matrix& design, const std::vector<double>& labels,
                        const std::vector<double>& beta) {
  const int n = design.rows();
  const int k = design.cols();
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = design.row_ptr(i);
    double eta = 0.0;
    for (int j = 0; j < k; ++j) eta += row[j] * beta[static_cast<std::size_t>(j)];
    ll += labels[static_cast<std::size_t>(i)] * eta - log1pexp(eta);
  }
  return ll;
}

namespace {

struct SeparationDetected {};

LogisticFit fit_logistic_once(const Matrix& design, const std::vector<double>& labels,
                              double ridge, const std::vector<double>* start) {
  const int n = design.rows();
  const int k = design.cols();
  LogisticFit fit;
  fit.ridge = ridge;
  std::vector<double> beta(static_cast<std::size_t>(k), 0.0);
  if (start && static_cast<int>(start->size()) == k) beta = *start;
  // The linear predictor is kept incrementally: a damped step only shifts it
  // along a precomputed direction, so halving trials cost one log1pexp pass.
  std::vector<double> eta(static_cast<std::size_t>(n), 0.0);
  auto recompute_eta = [&]() {
    for (int i = 0; i < n; ++i) {
      const double* row = design.row_ptr(i);
      double e = 0.0;
      for (int j = 0; j < k; ++j) e += row[j] * beta[static_cast<std::size_t>(j)];
      eta[static_cast<std::size_t>(i)] = e;
    }
  };
  auto objective_at_eta = [&](const std::vector<double>& et, const std::vector<double>& b) {
    double ll = 0.0;
    for (int i = 0; i < n; ++i)
      ll += labels[static_cast<std::size_t>(i)] * et[static_cast<std::size_t>(i)] -
            log1pexp(et[static_cast<std::size_t>(i)]);
    double pen = 0.0;
    for (double v : b) pen += v * v;
    return ll - 0.5 * ridge * pen;
  };
  recompute_eta();
  double obj = objective_at_eta(eta, beta);
  std::vector<double> grad(static_cast<std::size_t>(k), 0.0);
  std::vector<double> hess(static_cast<std::size_t>(k) * k, 0.0);
  std::vector<double> step(static_cast<std::size_t>(k), 0.0);
  std::vector<double> dir_eta(static_cast<std::size_t>(n), 0.0);
  std::vector<double> trial_eta(static_cast<std::size_t>(n), 0.0);
  std::vector<double> trial(static_cast<std::size_t>(k), 0.0);
  for (int it = 1; it <= 100; ++it) {
    fit.iterations = it;
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hess.begin(), hess.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const double* row = design.row_ptr(i);
      const double p = expit(eta[static_cast<std::size_t>(i)]);
      const double r = labels[static_cast<std::size_t>(i)] - p;
      const double w = p * (1.0 - p);
      for (int a = 0; a < k; ++a) {
        grad[static_cast<std::size_t>(a)] += row[a] * r;
        for (int b = a; b < k; ++b)
          hess[static_cast<std::size_t>(a) * k + b] += w * row[a] * row[b];
      }
    }
    for (int a = 0; a < k; ++a) {
      grad[static_cast<std::size_t>(a)] -= ridge * beta[static_cast<std::size_t>(a)];
      hess[static_cast<std::size_t>(a) * k + a] += ridge;
      for (int b = 0; b < a; ++b)
        hess[static_cast<std::size_t>(a) * k + b] = hess[static_cast<std::size_t>(b) * k + a];
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    if (gnorm <= 1e-6) {
      fit.converged = true;
      break;
    }
    const std::vector<double> hinv = spd_inverse(hess, k);
    for (int a = 0; a < k; ++a) {
      double s = 0.0;
      for (int b = 0; b < k; ++b)
        s += hinv[static_cast<std::size_t>(a) * k + b] * grad[static_cast<std::size_t>(b)];
      step[static_cast<std::size_t>(a)] = s;
    }
    for (int i = 0; i < n; ++i) {
      const double* row = design.row_ptr(i);
      double s = 0.0;
      for (int j = 0; j < k; ++j) s += row[j] * step[static_cast<std::size_t>(j)];
      dir_eta[static_cast<std::size_t>(i)] = s;
    }
    // Halve the Newton step until the objective stops decreasing (a hair of
    // roundoff slack); commit the last candidate regardless so plateaus
    // cannot spin.
    double t = 1.0;
    for (int h = 0; h < 20; ++h) {
      for (int i = 0; i < n; ++i)
        trial_eta[static_cast<std::size_t>(i)] =
            eta[static_cast<std::size_t>(i)] + t * dir_eta[static_cast<std::size_t>(i)];
      for (int a = 0; a < k; ++a)
        trial[static_cast<std::size_t>(a)] =
            beta[static_cast<std::size_t>(a)] + t * step[static_cast<std::size_t>(a)];
      const double cand = objective_at_eta(trial_eta, trial);
      if (cand >= obj - 1e-12 || h == 19) {
        beta = trial;
        eta = trial_eta;
        obj = cand;
        break;
      }
      t *= 0.5;
    }
    double bnorm = 0.0;
    for (double v : beta) bnorm += v * v;
    if (std::sqrt(bnorm) > 30.0 && ridge == 0.0) throw SeparationDetected{};
  }
  fit.coefficients = beta;
  fit.log_likelihood = bernoulli_loglik(design, labels, beta);
  return fit;
}

}  // namespace

LogisticFit fit_logistic(const Matrix& design, const std::vector<double>& labels,
                         double ridge, const std::vector<double>* start) {
  if (static_cast<int>(labels.size()) != design.rows())
    throw InputError("label length does not match design rows");
  for (double c : labels)
    if (c != 0.0 && c != 1.0) throw InputError("logistic labels must be 0 or 1");
  try {
    return fit_logistic_once(design, labels, ridge, start);
  } catch (const SeparationDetected&) {
    LogisticFit fit = fit_logistic_once(design, labels, 1e-4, nullptr);
    fit.separation_retry = true;
    return fit;
  }
}

}  // namespace compolicy
