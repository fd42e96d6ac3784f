#include "compolicy/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "compolicy/numeric.hpp"
#include "compolicy/parallel.hpp"
#include "compolicy/rng.hpp"

namespace compolicy {

namespace {

Matrix behavior_design(const ObsDataset& data, bool intercept_only) {
  const int n = data.n();
  Matrix d(n, intercept_only ? 1 : data.p() + 1);
  for (int i = 0; i < n; ++i) {
    d(i, 0) = 1.0;
    if (!intercept_only)
      for (int j = 0; j < data.p(); ++j) d(i, 1 + j) = data.x(i, j);
  }
  return d;
}

std::vector<double> agreement_labels(const ObsDataset& data, const std::vector<int>& decisions) {
  std::vector<double> c(static_cast<std::size_t>(data.n()), 0.0);
  for (int i = 0; i < data.n(); ++i)
    c[static_cast<std::size_t>(i)] =
        data.actions[static_cast<std::size_t>(i)] == decisions[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  return c;
}

double mean_fitted_prob(const Matrix& design, const LogisticFit& fit) {
  double s = 0.0;
  for (int i = 0; i < design.rows(); ++i) {
    const double* row = design.row_ptr(i);
    double eta = 0.0;
    for (int j = 0; j < design.cols(); ++j) eta += row[j] * fit.coefficients[static_cast<std::size_t>(j)];
    s += expit(eta);
  }
  return s / design.rows();
}

BehaviorModel to_behavior(const LogisticFit& fit, bool intercept_only) {
  BehaviorModel b;
  b.beta = fit.coefficients;
  b.intercept_only = intercept_only;
  return b;
}

}  // namespace

LogisticFit profile_beta(const ObsDataset& data, const std::vector<int>& decisions,
                         bool intercept_only) {
  const Matrix design = behavior_design(data, intercept_only);
  return fit_logistic(design, agreement_labels(data, decisions));
}

FitReport fit_fixed_grid(const ObsDataset& data, const QModelSet& q, int grid_size,
                         bool intercept_only, int jobs) {
  data.validate();
  if (data.k() != 2)
    throw InputError("the weight grid handles exactly two outcomes; use the chain "
                     "sampler with the simplex mode for more");
  if (grid_size < 1) throw InputError("grid size must be at least 1");
  const int n = data.n();
  const Matrix contrasts = contrast_table(data, q);
  const Matrix design = behavior_design(data, intercept_only);
  const int points = grid_size + 1;
  std::vector<LogisticFit> fits(static_cast<std::size_t>(points));
  std::vector<double> logliks(static_cast<std::size_t>(points), 0.0);
  for_each_index(points, jobs, [&](int m) {
    const double w = static_cast<double>(m) / grid_size;
    std::vector<double> labels(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      const double score = w * contrasts(i, 0) + (1.0 - w) * contrasts(i, 1);
      labels[static_cast<std::size_t>(i)] =
          data.actions[static_cast<std::size_t>(i)] == sign_tie_positive(score) ? 1.0 : 0.0;
    }
    fits[static_cast<std::size_t>(m)] = fit_logistic(design, labels);
    logliks[static_cast<std::size_t>(m)] = fits[static_cast<std::size_t>(m)].log_likelihood;
  });
  // Ascending scan with strict improvement keeps ties at the smallest omega.
  int choice = 0;
  for (int m = 1; m < points; ++m)
    if (logliks[static_cast<std::size_t>(m)] > logliks[static_cast<std::size_t>(choice)]) choice = m;

  FitReport report;
  report.method = "grid";
  report.n = n;
  const double w_star = static_cast<double>(choice) / grid_size;
  report.utility = UtilityModel::fixed({w_star, 1.0 - w_star});
  report.behavior = to_behavior(fits[static_cast<std::size_t>(choice)], intercept_only);
  report.pseudo_loglik_at_max = logliks[static_cast<std::size_t>(choice)];
  report.rho_hat = mean_fitted_prob(design, fits[static_cast<std::size_t>(choice)]);
  report.separation_retry = fits[static_cast<std::size_t>(choice)].separation_retry;
  report.grid_omega.resize(static_cast<std::size_t>(points));
  for (int m = 0; m < points; ++m)
    report.grid_omega[static_cast<std::size_t>(m)] = static_cast<double>(m) / grid_size;
  report.grid_loglik = logliks;
  report.grid_choice = choice;
  return report;
}

namespace {

// Shared state for evaluating the profile likelihood at a chain state.
struct ChainEvaluator {
  const ObsDataset& data;
  const Matrix contrasts;
  const Matrix design;
  Matrix features;  // patient-specific weight features per row
  ChainMode mode;
  UtilityDesign udesign;
  int n_outcomes;
  int fdim = 0;

  ChainEvaluator(const ObsDataset& d, const QModelSet& q, const MetropolisConfig& cfg)
      : data(d),
        contrasts(contrast_table(d, q)),
        design(behavior_design(d, cfg.intercept_only_behavior)),
        mode(cfg.mode),
        n_outcomes(d.k()) {
    udesign = cfg.design.value_or(UtilityDesign::all_columns(d.p()));
    if (mode == ChainMode::patient_specific) {
      fdim = udesign.dim();
      features = Matrix(d.n(), fdim);
      for (int i = 0; i < d.n(); ++i) {
        const std::vector<double> row = udesign.row(d.x.row_ptr(i));
        for (int j = 0; j < fdim; ++j) features(i, j) = row[static_cast<std::size_t>(j)];
      }
    }
  }

  int dim() const {
    return mode == ChainMode::patient_specific ? (n_outcomes - 1) * fdim : n_outcomes - 1;
  }

  UtilityModel utility_at(const std::vector<double>& state) const {
    if (mode == ChainMode::patient_specific) {
      std::vector<std::vector<double>> theta;
      for (int k = 0; k < n_outcomes - 1; ++k)
        theta.emplace_back(state.begin() + static_cast<std::ptrdiff_t>(k) * fdim,
                           state.begin() + static_cast<std::ptrdiff_t>(k + 1) * fdim);
      return UtilityModel::patient_specific(std::move(theta), udesign, n_outcomes);
    }
    // Softmax over K-1 logits, last weight the reference class.
    double m = 0.0;
    for (double v : state) m = std::max(m, v);
    double denom = std::exp(-m);
    std::vector<double> w(static_cast<std::size_t>(n_outcomes), 0.0);
    for (int k = 0; k < n_outcomes - 1; ++k) {
      w[static_cast<std::size_t>(k)] = std::exp(state[static_cast<std::size_t>(k)] - m);
      denom += w[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < n_outcomes - 1; ++k) w[static_cast<std::size_t>(k)] /= denom;
    double sum = 0.0;
    for (int k = 0; k < n_outcomes - 1; ++k) sum += w[static_cast<std::size_t>(k)];
    w[static_cast<std::size_t>(n_outcomes - 1)] = 1.0 - sum;
    return UtilityModel::fixed(std::move(w));
  }

  std::vector<int> decisions_at(const std::vector<double>& state) const {
    const int n = data.n();
    std::vector<int> dec(static_cast<std::size_t>(n), 1);
    if (mode == ChainMode::patient_specific) {
      for (int i = 0; i < n; ++i) {
        const double* feat = features.row_ptr(i);
        const double* r = contrasts.row_ptr(i);
        double score = r[n_outcomes - 1];  // start from the implied last weight = 1
        double wsum = 0.0;
        for (int k = 0; k < n_outcomes - 1; ++k) {
          double eta = 0.0;
          const double* th = state.data() + static_cast<std::ptrdiff_t>(k) * fdim;
          for (int j = 0; j < fdim; ++j) eta += feat[j] * th[j];
          const double w = expit(eta);
          wsum += w;
          score += w * r[k];
        }
        score -= wsum * r[n_outcomes - 1];
        dec[static_cast<std::size_t>(i)] = sign_tie_positive(score);
      }
    } else {
      const UtilityModel u = utility_at(state);
      const std::vector<double>& w = u.fixed_weights();
      for (int i = 0; i < n; ++i) {
        const double* r = contrasts.row_ptr(i);
        double score = 0.0;
        for (int k = 0; k < n_outcomes; ++k) score += w[static_cast<std::size_t>(k)] * r[k];
        dec[static_cast<std::size_t>(i)] = sign_tie_positive(score);
      }
    }
    return dec;
  }

  LogisticFit profile_at(const std::vector<double>& state,
                         const std::vector<double>* warm = nullptr) const {
    return fit_logistic(design, agreement_labels(data, decisions_at(state)), 0.0, warm);
  }
};

}  // namespace

FitReport fit_metropolis(const ObsDataset& data, const QModelSet& q,
                         const MetropolisConfig& cfg) {
  data.validate();
  if (cfg.chain_length < 100)
    throw InputError("chain length must be at least 100, got " +
                     std::to_string(cfg.chain_length));
  ChainEvaluator eval(data, q, cfg);
  const int dim = eval.dim();
  const int burn_in = std::min(cfg.burn_in < 0 ? cfg.chain_length / 10 : cfg.burn_in,
                               cfg.chain_length - 1);
  const bool autotune = cfg.proposal_sd <= 0.0;
  // Auto-tuning starts mid-range: profile surfaces are sharp at the sample
  // sizes used here, so the needed scale is usually below 1 and the burn-in
  // windows can move it either way.
  double sigma = autotune ? 0.25 : cfg.proposal_sd;

  RngStream rng(cfg.seed, 0);
  std::vector<double> theta(static_cast<std::size_t>(dim), 0.0);
  std::vector<int> theta_dec = eval.decisions_at(theta);
  LogisticFit state_fit = eval.profile_at(theta);
  double ll = state_fit.log_likelihood;
  std::vector<double> warm = state_fit.coefficients;
  std::vector<double> best_theta = theta;
  double best_ll = ll;
  double best_norm2 = 0.0;
  int best_index = 0;
  const auto norm2_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };
  // The profile surface is piecewise constant, so its maximum is a plateau of
  // exact ties; keep the smallest state on it (the same convention as the
  // weight grid, which keeps the smallest omega).  The tolerance absorbs
  // refit rounding between visits to one decision pattern.
  const auto record_state = [&](int t) {
    const double tol = 1e-7 * (1.0 + std::fabs(best_ll));
    if (ll > best_ll + tol) {
      best_ll = ll;
      best_theta = theta;
      best_norm2 = norm2_of(theta);
      best_index = t;
    } else if (ll >= best_ll - tol) {
      const double n2 = norm2_of(theta);
      if (n2 < best_norm2) {
        if (ll > best_ll) best_ll = ll;
        best_theta = theta;
        best_norm2 = n2;
        best_index = t;
      }
    }
  };

  FitReport report;
  report.method = "metropolis";
  report.n = data.n();
  report.chain_loglik.assign(static_cast<std::size_t>(cfg.chain_length), 0.0);
  report.chain_loglik[0] = ll;
  report.chain_accepted.assign(static_cast<std::size_t>(cfg.chain_length - 1), 0);

  int accepted_total = 0;
  int window_count = 0, window_accepts = 0;
  std::vector<double> proposal(static_cast<std::size_t>(dim), 0.0);
  for (int t = 1; t < cfg.chain_length; ++t) {
    for (int j = 0; j < dim; ++j)
      proposal[static_cast<std::size_t>(j)] =
          theta[static_cast<std::size_t>(j)] + sigma * rng.next_normal();
    // The profile likelihood depends on the state only through the decision
    // labels, so an unchanged label vector reuses the current fit, and a
    // changed one warm-starts from the current coefficients.
    std::vector<int> cand_dec = eval.decisions_at(proposal);
    double cand_ll = ll;
    bool refit = cand_dec != theta_dec;
    LogisticFit cand_fit;
    if (refit) {
      cand_fit = fit_logistic(eval.design, agreement_labels(data, cand_dec), 0.0, &warm);
      cand_ll = cand_fit.log_likelihood;
    }
    const bool accept = std::log(rng.next_double_open()) < cand_ll - ll;
    if (accept) {
      theta = proposal;
      theta_dec = std::move(cand_dec);
      ll = cand_ll;
      if (refit) warm = cand_fit.coefficients;
      ++accepted_total;
      record_state(t);
    }
    report.chain_loglik[static_cast<std::size_t>(t)] = ll;
    report.chain_accepted[static_cast<std::size_t>(t - 1)] = accept ? 1 : 0;
    if (autotune && t <= burn_in) {
      ++window_count;
      window_accepts += accept ? 1 : 0;
      if (window_count == 200) {
        const double rate = static_cast<double>(window_accepts) / window_count;
        if (rate > 0.5) sigma *= 2.0;
        else if (rate < 0.25) sigma *= 0.5;
        window_count = window_accepts = 0;
      }
    }
  }

  const LogisticFit final_fit = eval.profile_at(best_theta);
  report.utility = eval.utility_at(best_theta);
  report.behavior = to_behavior(final_fit, cfg.intercept_only_behavior);
  report.pseudo_loglik_at_max = best_ll;
  report.rho_hat = mean_fitted_prob(eval.design, final_fit);
  report.separation_retry = final_fit.separation_retry;
  report.acceptance_rate = static_cast<double>(accepted_total) / (cfg.chain_length - 1);
  report.proposal_sd_final = sigma;
  report.chain_argmax = best_index;
  if (cfg.mode == ChainMode::patient_specific && data.k() >= 3)
    report.negative_weight_fraction = report.utility.negative_weight_fraction(data);
  return report;
}

double error_rate(const QModelSet& q, const UtilityModel& model,
                  const std::function<int(const double*)>& oracle,
                  const Matrix& test_x) {
  if (test_x.rows() == 0) throw InputError("error rate needs at least one test point");
  int wrong = 0;
  for (int i = 0; i < test_x.rows(); ++i) {
    const double* x = test_x.row_ptr(i);
    if (decision(q, model, x) != oracle(x)) ++wrong;
  }
  return static_cast<double>(wrong) / test_x.rows();
}

}  // namespace compolicy
