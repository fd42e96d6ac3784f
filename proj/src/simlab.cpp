#include "compolicy/simlab.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "compolicy/estimation.hpp"
#include "compolicy/inference.hpp"
#include "compolicy/numeric.hpp"
#include "compolicy/parallel.hpp"

namespace compolicy {

double value_mc(const Policy& policy, const Scenario& sc, int test_n, RngStream& rng) {
  if (test_n < 1) throw InputError("testing sample size must be positive");
  const int p = sc.p, k = sc.n_outcomes();
  std::vector<double> x(static_cast<std::size_t>(p), 0.0);
  double total = 0.0;
  for (int i = 0; i < test_n; ++i) {
    for (int j = 0; j < p; ++j) x[static_cast<std::size_t>(j)] = sc.x_sd * rng.next_normal();
    const int a = policy(x.data());
    if (a != 1 && a != -1) throw InputError("policy returned an action other than -1/+1");
    const std::vector<double> w = sc.true_weights_at(x.data());
    double u = 0.0;
    for (int c = 0; c < k; ++c) {
      const OutcomeSpec& o = sc.outcomes[static_cast<std::size_t>(c)];
      const double eps = o.noise_sd * rng.next_normal();
      const double y = o.multiplicative_noise ? o.base(x.data(), p) + a * o.effect(x.data(), p) * eps
                                              : o.base(x.data(), p) + a * o.effect(x.data(), p) + eps;
      u += w[static_cast<std::size_t>(c)] * y;
    }
    total += u;
  }
  return total / test_n;
}

double soc_mc(const Scenario& sc, int test_n, RngStream& rng) {
  if (test_n < 1) throw InputError("testing sample size must be positive");
  const int p = sc.p, k = sc.n_outcomes();
  std::vector<double> x(static_cast<std::size_t>(p), 0.0);
  double total = 0.0;
  for (int i = 0; i < test_n; ++i) {
    for (int j = 0; j < p; ++j) x[static_cast<std::size_t>(j)] = sc.x_sd * rng.next_normal();
    const double u01 = rng.next_double();
    const int d = sc.optimal_action(x.data());
    const int a = u01 < sc.prob_follow(x.data()) ? d : -d;
    const std::vector<double> w = sc.true_weights_at(x.data());
    double u = 0.0;
    for (int c = 0; c < k; ++c) {
      const OutcomeSpec& o = sc.outcomes[static_cast<std::size_t>(c)];
      const double eps = o.noise_sd * rng.next_normal();
      const double y = o.multiplicative_noise ? o.base(x.data(), p) + a * o.effect(x.data(), p) * eps
                                              : o.base(x.data(), p) + a * o.effect(x.data(), p) + eps;
      u += w[static_cast<std::size_t>(c)] * y;
    }
    total += u;
  }
  return total / test_n;
}

ObsValue value_observational(const ObsDataset& data, const Policy& policy,
                             const UtilityModel& utility) {
  data.validate();
  const int n = data.n();
  ObsValue out;
  double agree_sum = 0.0, all_sum = 0.0;
  int agree = 0;
  for (int i = 0; i < n; ++i) {
    const double* x = data.x.row_ptr(i);
    const double u = utility.utility_value(x, data.y.row_ptr(i));
    all_sum += u;
    if (data.actions[static_cast<std::size_t>(i)] == policy(x)) {
      agree_sum += u;
      ++agree;
    }
  }
  out.folds = 1;
  out.fold_agree = {agree};
  out.fold_used = {static_cast<std::uint8_t>(agree > 0 ? 1 : 0)};
  out.value = agree > 0 ? agree_sum / agree : 0.0;
  out.fold_value = {out.value};
  out.soc = all_sum / n;
  out.percent_improvement =
      std::fabs(out.soc) > 1e-12 ? 100.0 * (out.value - out.soc) / std::fabs(out.soc) : 0.0;
  return out;
}

ObsValue value_observational_cv(const ObsDataset& data, const RuleFitter& fitter,
                                int folds) {
  data.validate();
  const int n = data.n();
  if (folds < 2) throw InputError("cross-validated value needs at least 2 folds");
  if (folds > n) throw InputError("more folds than records");
  ObsValue out;
  out.folds = folds;
  out.fold_value.assign(static_cast<std::size_t>(folds), 0.0);
  out.fold_agree.assign(static_cast<std::size_t>(folds), 0);
  out.fold_used.assign(static_cast<std::size_t>(folds), 0);
  std::vector<double> fold_soc(static_cast<std::size_t>(folds), 0.0);
  for (int f = 0; f < folds; ++f) {
    ObsDataset train;
    train.x = Matrix(0, data.p());
    train.y = Matrix(0, data.k());
    std::vector<int> held;
    for (int i = 0; i < n; ++i) {
      if (i % folds == f) {
        held.push_back(i);
      } else {
        train.x.append_row(data.x.row_ptr(i));
        train.y.append_row(data.y.row_ptr(i));
        train.actions.push_back(data.actions[static_cast<std::size_t>(i)]);
      }
    }
    train.covariate_names = data.covariate_names;
    train.outcome_names = data.outcome_names;
    const FittedRule rule = fitter(train);
    double agree_sum = 0.0, all_sum = 0.0;
    int agree = 0;
    for (int i : held) {
      const double* x = data.x.row_ptr(i);
      const double u = rule.utility.utility_value(x, data.y.row_ptr(i));
      all_sum += u;
      if (data.actions[static_cast<std::size_t>(i)] == decision(rule.q, rule.utility, x)) {
        agree_sum += u;
        ++agree;
      }
    }
    fold_soc[static_cast<std::size_t>(f)] = all_sum / static_cast<double>(held.size());
    out.fold_agree[static_cast<std::size_t>(f)] = agree;
    if (agree > 0) {
      out.fold_used[static_cast<std::size_t>(f)] = 1;
      out.fold_value[static_cast<std::size_t>(f)] = agree_sum / agree;
    } else {
      std::fprintf(stderr, "fold %d has no records matching the policy; excluded\n", f + 1);
    }
  }
  double vsum = 0.0;
  int used = 0;
  for (int f = 0; f < folds; ++f)
    if (out.fold_used[static_cast<std::size_t>(f)]) {
      vsum += out.fold_value[static_cast<std::size_t>(f)];
      ++used;
    }
  if (used == 0) throw NumericalError("no fold had records matching the policy");
  out.value = vsum / used;
  out.soc = std::accumulate(fold_soc.begin(), fold_soc.end(), 0.0) / folds;
  out.percent_improvement =
      std::fabs(out.soc) > 1e-12 ? 100.0 * (out.value - out.soc) / std::fabs(out.soc) : 0.0;
  return out;
}

namespace {

enum class RowKind {
  grid_est,      // omega_hat, rho_hat or beta_rmse, error_rate
  grid_val,      // optimal, estimated, y_only, z_only, soc
  chain_est,     // theta_rmse, beta_rmse, error_rate
  chain_val,
  simplex_est,   // omega1_hat, omega2_hat, rho_hat, error_rate
  simplex_val,
  misspec_val,   // optimal, correct, misspecified, soc
  power,         // type1, power_h1, power_h2
};

struct RowSpec {
  Scenario sc;
  std::string label;
  RowKind kind = RowKind::grid_est;
};

std::string fmt(const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%.2f", key, v);
  return buf;
}

std::vector<int> row_ns(const McSettings& st) {
  if (!st.n_values.empty()) return st.n_values;
  return {100, 200, 300, 500};
}

std::vector<RowSpec> table_rows(const std::string& id, const McSettings& st) {
  std::vector<RowSpec> rows;
  const std::vector<int> ns = row_ns(st);
  const auto label_n = [](int n) { return "n=" + std::to_string(n); };
  if (id == "T1" || id == "T2") {
    for (int n : ns)
      for (double w : {0.25, 0.75})
        for (double rho : {0.6, 0.8}) {
          RowSpec r;
          r.sc = make_scenario(ScenarioId::s1_fixed_fixed);
          r.sc.n = n;
          r.sc.true_weights = {w, 1.0 - w};
          r.sc.rho = rho;
          r.label = label_n(n) + " " + fmt("omega", w) + " " + fmt("rho", rho);
          r.kind = id == "T1" ? RowKind::grid_est : RowKind::grid_val;
          rows.push_back(std::move(r));
        }
  } else if (id == "T3" || id == "T4") {
    for (int n : ns)
      for (double w : {0.25, 0.75}) {
        RowSpec r;
        r.sc = make_scenario(ScenarioId::s2_fixed_varrho);
        r.sc.n = n;
        r.sc.true_weights = {w, 1.0 - w};
        r.label = label_n(n) + " " + fmt("omega", w);
        r.kind = id == "T3" ? RowKind::grid_est : RowKind::grid_val;
        rows.push_back(std::move(r));
      }
  } else if (id == "T5" || id == "T6") {
    for (int n : ns) {
      RowSpec r;
      r.sc = make_scenario(ScenarioId::s3_var_var);
      r.sc.n = n;
      r.label = label_n(n);
      r.kind = id == "T5" ? RowKind::chain_est : RowKind::chain_val;
      rows.push_back(std::move(r));
    }
  } else if (id == "T5b") {
    for (int n : ns) {
      RowSpec r;
      r.sc = make_scenario(ScenarioId::s4_boot_power);
      r.sc.n = n;
      r.label = label_n(n);
      r.kind = RowKind::power;
      rows.push_back(std::move(r));
    }
  } else if (id == "T7" || id == "T8") {
    for (int n : ns)
      for (double rho : {0.6, 0.8}) {
        RowSpec r;
        r.sc = make_scenario(ScenarioId::s5_three_outcomes);
        r.sc.n = n;
        r.sc.rho = rho;
        r.label = label_n(n) + " " + fmt("rho", rho);
        r.kind = id == "T7" ? RowKind::simplex_est : RowKind::simplex_val;
        rows.push_back(std::move(r));
      }
  } else if (id == "T9" || id == "T10") {
    for (int n : ns) {
      RowSpec r;
      r.sc = make_scenario(id == "T9" ? ScenarioId::s6_misspec_a : ScenarioId::s6_misspec_b);
      r.sc.n = n;
      r.label = label_n(n);
      r.kind = RowKind::misspec_val;
      rows.push_back(std::move(r));
    }
  } else {
    throw InputError("unknown study id: " + id);
  }
  return rows;
}

std::vector<std::string> kind_columns(RowKind kind, bool behavior_constant) {
  switch (kind) {
    case RowKind::grid_est:
      return behavior_constant ? std::vector<std::string>{"omega_hat", "rho_hat", "error_rate"}
                               : std::vector<std::string>{"omega_hat", "beta_rmse", "error_rate"};
    case RowKind::grid_val:
    case RowKind::chain_val:
      return {"optimal", "estimated", "y_only", "z_only", "soc"};
    case RowKind::chain_est:
      return {"theta_rmse", "beta_rmse", "error_rate"};
    case RowKind::simplex_est:
      return {"omega1_hat", "omega2_hat", "rho_hat", "error_rate"};
    case RowKind::simplex_val:
      return {"optimal", "estimated", "y1_only", "y2_only", "y3_only", "soc"};
    case RowKind::misspec_val:
      return {"optimal", "correct", "misspecified", "soc"};
    case RowKind::power:
      return {"type1", "power_h1", "power_h2"};
  }
  return {};
}

double rmse(const std::vector<double>& est, const std::vector<double>& truth) {
  if (est.size() != truth.size())
    throw InputError("estimate and truth dimension mismatch in rmse");
  double s = 0.0;
  for (std::size_t j = 0; j < est.size(); ++j) {
    const double d = est[j] - truth[j];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(est.size()));
}

// Stream layout: every (row, rep) owns a block of 16 sub-streams of the run
// seed, so replications are independent and rerunnable in any order.
std::uint64_t stream_of(int row, int rep, int sub) {
  return (static_cast<std::uint64_t>(row) << 32 | static_cast<std::uint64_t>(rep)) * 16 +
         static_cast<std::uint64_t>(sub);
}

std::uint64_t derived_seed(std::uint64_t seed, int row, int rep, int sub) {
  RngStream s(seed, stream_of(row, rep, sub));
  return s.next_u64();
}

std::vector<double> run_rep(const RowSpec& row, int row_idx, int rep,
                            const McSettings& st) {
  const Scenario& sc = row.sc;
  const std::uint64_t seed = st.seed;
  const auto oracle = [&sc](const double* x) { return sc.optimal_action(x); };

  if (row.kind == RowKind::power) {
    std::vector<double> out;
    int h = 0;
    for (const std::vector<double> theta :
         {std::vector<double>{1.0, 0.0, 0.0}, std::vector<double>{1.0, 4.0, 3.0},
          std::vector<double>{1.0, 6.0, 6.0}}) {
      Scenario hsc = sc;
      hsc.true_theta = {theta};
      const SimDraw draw = generate(hsc, seed, stream_of(row_idx, rep, h * 4));
      const QModelSet q = fit_q_models(draw.data);
      MetropolisConfig cfg;
      cfg.chain_length = st.chain_length;
      cfg.seed = derived_seed(seed, row_idx, rep, h * 4 + 1);
      const FitReport fit = fit_metropolis(draw.data, q, cfg);
      const InfluenceSet infl = influence_set(draw.data, q, fit);
      const std::vector<BootstrapDraw> draws =
          bootstrap_draws(infl, draw.data, q, fit, st.n_boot,
                          derived_seed(seed, row_idx, rep, h * 4 + 2), 1);
      const HeterogeneityTest t = heterogeneity_test(fit, draws, st.alpha);
      out.push_back(t.reject ? 1.0 : 0.0);
      ++h;
    }
    return out;
  }

  const SimDraw draw = generate(sc, seed, stream_of(row_idx, rep, 0));
  const QModelSet q = fit_q_models(draw.data);

  FitReport fit;
  FitReport fit_misspec;  // misspec tables fit twice
  switch (row.kind) {
    case RowKind::grid_est:
    case RowKind::grid_val:
      fit = fit_fixed_grid(draw.data, q, st.grid_size, sc.behavior_constant, 1);
      break;
    case RowKind::chain_est:
    case RowKind::chain_val: {
      MetropolisConfig cfg;
      cfg.chain_length = st.chain_length;
      cfg.seed = derived_seed(seed, row_idx, rep, 8);
      fit = fit_metropolis(draw.data, q, cfg);
      break;
    }
    case RowKind::simplex_est:
    case RowKind::simplex_val: {
      MetropolisConfig cfg;
      cfg.chain_length = st.chain_length;
      cfg.seed = derived_seed(seed, row_idx, rep, 8);
      cfg.mode = ChainMode::fixed_simplex;
      cfg.intercept_only_behavior = true;
      fit = fit_metropolis(draw.data, q, cfg);
      break;
    }
    case RowKind::misspec_val: {
      MetropolisConfig cfg;
      cfg.chain_length = st.chain_length;
      cfg.seed = derived_seed(seed, row_idx, rep, 8);
      UtilityDesign correct = UtilityDesign::all_columns(sc.p);
      correct.squared = {0};
      cfg.design = correct;
      fit = fit_metropolis(draw.data, q, cfg);
      cfg.seed = derived_seed(seed, row_idx, rep, 9);
      UtilityDesign dropped;
      dropped.cols = {0, 1, 2, 3};
      cfg.design = dropped;
      fit_misspec = fit_metropolis(draw.data, q, cfg);
      break;
    }
    case RowKind::power:
      break;
  }

  const auto fitted_policy = [&](const UtilityModel& u) {
    return Policy([&q, &u](const double* x) { return decision(q, u, x); });
  };

  switch (row.kind) {
    case RowKind::grid_est: {
      RngStream trng(seed, stream_of(row_idx, rep, 1));
      const Matrix test_x = draw_covariates(sc, st.test_n, trng);
      const double err = error_rate(q, fit.utility, oracle, test_x);
      const double w_hat = fit.utility.fixed_weights()[0];
      if (sc.behavior_constant) return {w_hat, fit.rho_hat, err};
      return {w_hat, rmse(fit.behavior.beta, sc.true_beta), err};
    }
    case RowKind::chain_est: {
      RngStream trng(seed, stream_of(row_idx, rep, 1));
      const Matrix test_x = draw_covariates(sc, st.test_n, trng);
      const double err = error_rate(q, fit.utility, oracle, test_x);
      return {rmse(fit.utility.theta()[0], sc.true_theta[0]),
              rmse(fit.behavior.beta, sc.true_beta), err};
    }
    case RowKind::simplex_est: {
      RngStream trng(seed, stream_of(row_idx, rep, 1));
      const Matrix test_x = draw_covariates(sc, st.test_n, trng);
      const double err = error_rate(q, fit.utility, oracle, test_x);
      const std::vector<double>& w = fit.utility.fixed_weights();
      return {w[0], w[1], fit.rho_hat, err};
    }
    case RowKind::grid_val:
    case RowKind::chain_val: {
      std::vector<double> out;
      RngStream r2(seed, stream_of(row_idx, rep, 2));
      out.push_back(value_mc(oracle, sc, st.test_n, r2));
      RngStream r3(seed, stream_of(row_idx, rep, 3));
      out.push_back(value_mc(fitted_policy(fit.utility), sc, st.test_n, r3));
      RngStream r4(seed, stream_of(row_idx, rep, 4));
      out.push_back(value_mc(fitted_policy(UtilityModel::fixed({1.0, 0.0})), sc, st.test_n, r4));
      RngStream r5(seed, stream_of(row_idx, rep, 5));
      out.push_back(value_mc(fitted_policy(UtilityModel::fixed({0.0, 1.0})), sc, st.test_n, r5));
      RngStream r7(seed, stream_of(row_idx, rep, 7));
      out.push_back(soc_mc(sc, st.test_n, r7));
      return out;
    }
    case RowKind::simplex_val: {
      std::vector<double> out;
      RngStream r2(seed, stream_of(row_idx, rep, 2));
      out.push_back(value_mc(oracle, sc, st.test_n, r2));
      RngStream r3(seed, stream_of(row_idx, rep, 3));
      out.push_back(value_mc(fitted_policy(fit.utility), sc, st.test_n, r3));
      RngStream r4(seed, stream_of(row_idx, rep, 4));
      out.push_back(value_mc(fitted_policy(UtilityModel::fixed({1.0, 0.0, 0.0})), sc, st.test_n, r4));
      RngStream r5(seed, stream_of(row_idx, rep, 5));
      out.push_back(value_mc(fitted_policy(UtilityModel::fixed({0.0, 1.0, 0.0})), sc, st.test_n, r5));
      RngStream r6(seed, stream_of(row_idx, rep, 6));
      out.push_back(value_mc(fitted_policy(UtilityModel::fixed({0.0, 0.0, 1.0})), sc, st.test_n, r6));
      RngStream r7(seed, stream_of(row_idx, rep, 7));
      out.push_back(soc_mc(sc, st.test_n, r7));
      return out;
    }
    case RowKind::misspec_val: {
      std::vector<double> out;
      RngStream r2(seed, stream_of(row_idx, rep, 2));
      out.push_back(value_mc(oracle, sc, st.test_n, r2));
      RngStream r3(seed, stream_of(row_idx, rep, 3));
      out.push_back(value_mc(fitted_policy(fit.utility), sc, st.test_n, r3));
      RngStream r4(seed, stream_of(row_idx, rep, 4));
      out.push_back(value_mc(fitted_policy(fit_misspec.utility), sc, st.test_n, r4));
      RngStream r7(seed, stream_of(row_idx, rep, 7));
      out.push_back(soc_mc(sc, st.test_n, r7));
      return out;
    }
    case RowKind::power:
      break;
  }
  throw NumericalError("unreachable study row kind");
}

}  // namespace

std::vector<std::string> replicate_table_ids() {
  return {"T1", "T2", "T3", "T4", "T5", "T5b", "T6", "T7", "T8", "T9", "T10"};
}

McSummary replicate_table(const std::string& table_id, const McSettings& st) {
  if (st.reps < 1) throw InputError("replication count must be positive");
  const std::vector<RowSpec> rows = table_rows(table_id, st);
  McSummary out;
  out.table_id = table_id;
  out.reps = st.reps;
  out.seed = st.seed;
  out.columns = kind_columns(rows.front().kind, rows.front().sc.behavior_constant);
  const int ncol = static_cast<int>(out.columns.size());
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
    const RowSpec& row = rows[static_cast<std::size_t>(r)];
    Matrix per(st.reps, ncol);
    for_each_index(st.reps, st.jobs, [&](int rep) {
      const std::vector<double> v = run_rep(row, r, rep, st);
      for (int c = 0; c < ncol; ++c) per(rep, c) = v[static_cast<std::size_t>(c)];
    });
    std::vector<McCell> cells(static_cast<std::size_t>(ncol));
    for (int c = 0; c < ncol; ++c) {
      double m = 0.0;
      for (int i = 0; i < st.reps; ++i) m += per(i, c);
      m /= st.reps;
      double v = 0.0;
      for (int i = 0; i < st.reps; ++i) v += (per(i, c) - m) * (per(i, c) - m);
      cells[static_cast<std::size_t>(c)].mean = m;
      cells[static_cast<std::size_t>(c)].sd = st.reps > 1 ? std::sqrt(v / (st.reps - 1)) : 0.0;
    }
    out.row_labels.push_back(row.label);
    out.cells.push_back(std::move(cells));
    out.per_rep.push_back(std::move(per));
  }
  return out;
}

McSummary replicate_table(const std::string& table_id, int reps, std::uint64_t seed,
                          int jobs) {
  McSettings st;
  st.reps = reps;
  st.seed = seed;
  st.jobs = jobs;
  return replicate_table(table_id, st);
}

}  // namespace compolicy
