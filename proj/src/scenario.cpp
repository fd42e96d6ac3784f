#include "compolicy/scenario.hpp"

#include <cmath>

#include "compolicy/numeric.hpp"

namespace compolicy {

double OutcomeSpec::base(const double* x, int p) const {
  double s = base_const;
  for (int j = 0; j < p && j < static_cast<int>(base_x.size()); ++j)
    s += base_x[static_cast<std::size_t>(j)] * x[j];
  return s;
}

double OutcomeSpec::effect(const double* x, int p) const {
  double s = eff_const;
  for (int j = 0; j < p && j < static_cast<int>(eff_x.size()); ++j)
    s += eff_x[static_cast<std::size_t>(j)] * x[j];
  return s;
}

std::vector<double> Scenario::true_weights_at(const double* x) const {
  if (utility_fixed) return true_weights;
  const int k = n_outcomes();
  std::vector<double> w(static_cast<std::size_t>(k), 0.0);
  double sum = 0.0;
  for (int j = 0; j < k - 1; ++j) {
    const std::vector<double>& th = true_theta[static_cast<std::size_t>(j)];
    double eta = th[0];
    for (int c = 0; c < p && c + 1 < static_cast<int>(th.size()); ++c)
      eta += th[static_cast<std::size_t>(c + 1)] * x[c];
    if (quadratic_weight) eta += quad_coef * x[0] * x[0];
    w[static_cast<std::size_t>(j)] = expit(eta);
    sum += w[static_cast<std::size_t>(j)];
  }
  w[static_cast<std::size_t>(k - 1)] = 1.0 - sum;
  return w;
}

double Scenario::true_contrast(const double* x, int k) const {
  const OutcomeSpec& o = outcomes[static_cast<std::size_t>(k)];
  if (o.multiplicative_noise) return 0.0;  // noise has mean zero either arm
  return 2.0 * o.effect(x, p);
}

double Scenario::true_score(const double* x) const {
  const std::vector<double> w = true_weights_at(x);
  double s = 0.0;
  for (int k = 0; k < n_outcomes(); ++k)
    s += w[static_cast<std::size_t>(k)] * true_contrast(x, k);
  return s;
}

int Scenario::optimal_action(const double* x) const {
  return sign_tie_positive(true_score(x));
}

double Scenario::prob_follow(const double* x) const {
  if (behavior_constant) return rho;
  double eta = true_beta.empty() ? 0.0 : true_beta[0];
  for (int j = 0; j < p && j + 1 < static_cast<int>(true_beta.size()); ++j)
    eta += true_beta[static_cast<std::size_t>(j + 1)] * x[j];
  return expit(eta);
}

double Scenario::mean_outcome(const double* x, int a, int k) const {
  const OutcomeSpec& o = outcomes[static_cast<std::size_t>(k)];
  if (o.multiplicative_noise) return o.base(x, p);
  return o.base(x, p) + a * o.effect(x, p);
}

namespace {

OutcomeSpec outcome_y(int p) {
  OutcomeSpec o;
  o.eff_const = 2.0;
  o.eff_x.assign(static_cast<std::size_t>(p), 0.0);
  o.eff_x[0] = 4.0;
  o.eff_x[1] = -2.0;
  return o;
}

OutcomeSpec outcome_z(int p) {
  OutcomeSpec o;
  o.eff_const = -2.0;
  o.eff_x.assign(static_cast<std::size_t>(p), 0.0);
  o.eff_x[0] = 2.0;
  o.eff_x[1] = -4.0;
  return o;
}

std::vector<double> padded(std::vector<double> v, int len) {
  v.resize(static_cast<std::size_t>(len), 0.0);
  return v;
}

}  // namespace

Scenario make_scenario(ScenarioId id) {
  Scenario sc;
  sc.id = id;
  sc.name = scenario_name(id);
  switch (id) {
    case ScenarioId::s1_fixed_fixed:
      sc.outcomes = {outcome_y(sc.p), outcome_z(sc.p)};
      sc.true_weights = {0.25, 0.75};
      sc.rho = 0.8;
      break;
    case ScenarioId::s2_fixed_varrho:
      sc.outcomes = {outcome_y(sc.p), outcome_z(sc.p)};
      sc.true_weights = {0.25, 0.75};
      sc.behavior_constant = false;
      sc.true_beta = padded({0.5, 1.0}, sc.p + 1);
      break;
    case ScenarioId::s3_var_var:
      sc.outcomes = {outcome_y(sc.p), outcome_z(sc.p)};
      sc.utility_fixed = false;
      sc.true_theta = {padded({1.0, -0.5}, sc.p + 1)};
      sc.behavior_constant = false;
      sc.true_beta = padded({0.5, 1.0}, sc.p + 1);
      break;
    case ScenarioId::s4_boot_power:
      sc.p = 2;
      sc.n = 300;
      sc.outcomes = {outcome_y(sc.p), outcome_z(sc.p)};
      sc.utility_fixed = false;
      sc.true_theta = {{1.0, 0.0, 0.0}};  // null; power variants override
      sc.behavior_constant = false;
      sc.true_beta = {2.5, 1.0, 0.0};
      break;
    case ScenarioId::s5_three_outcomes: {
      sc.outcomes = {outcome_y(sc.p), outcome_z(sc.p)};
      OutcomeSpec y3;
      y3.base_const = 1.0;
      y3.eff_const = 1.0;
      y3.eff_x = padded({1.0, 1.0}, sc.p);
      sc.outcomes.push_back(y3);
      sc.true_weights = {0.2, 0.4, 0.4};
      sc.rho = 0.8;
      break;
    }
    case ScenarioId::s6_misspec_a:
      sc.outcomes = {outcome_y(sc.p), outcome_z(sc.p)};
      sc.utility_fixed = false;
      sc.true_theta = {{1.0, -0.5, 0.0, 0.0, 1.0, 0.5}};
      sc.quadratic_weight = true;
      sc.quad_coef = 1.0;
      sc.behavior_constant = false;
      sc.true_beta = padded({0.5, 1.0}, sc.p + 1);
      break;
    case ScenarioId::s6_misspec_b:
      sc.outcomes = {outcome_y(sc.p), outcome_z(sc.p)};
      sc.utility_fixed = false;
      sc.true_theta = {{1.0, -0.5, 0.0, 0.0, 1.0, 4.0}};
      sc.quadratic_weight = true;
      sc.quad_coef = 4.0;
      sc.behavior_constant = false;
      sc.true_beta = padded({0.5, 1.0}, sc.p + 1);
      break;
  }
  return sc;
}

std::string scenario_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::s1_fixed_fixed: return "s1_fixed_fixed";
    case ScenarioId::s2_fixed_varrho: return "s2_fixed_varrho";
    case ScenarioId::s3_var_var: return "s3_var_var";
    case ScenarioId::s4_boot_power: return "s4_boot_power";
    case ScenarioId::s5_three_outcomes: return "s5_three_outcomes";
    case ScenarioId::s6_misspec_a: return "s6_misspec_a";
    case ScenarioId::s6_misspec_b: return "s6_misspec_b";
  }
  return "unknown";
}

Scenario scenario_by_name(const std::string& name) {
  for (ScenarioId id : {ScenarioId::s1_fixed_fixed, ScenarioId::s2_fixed_varrho,
                        ScenarioId::s3_var_var, ScenarioId::s4_boot_power,
                        ScenarioId::s5_three_outcomes, ScenarioId::s6_misspec_a,
                        ScenarioId::s6_misspec_b}) {
    if (scenario_name(id) == name) return make_scenario(id);
  }
  throw InputError("unknown scenario: " + name);
}

Matrix draw_covariates(const Scenario& sc, int n, RngStream& rng) {
  Matrix x(n, sc.p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < sc.p; ++j) x(i, j) = sc.x_sd * rng.next_normal();
  return x;
}

SimDraw generate(const Scenario& sc, std::uint64_t seed, std::uint64_t stream) {
  if (sc.n <= 0) throw InputError("scenario sample size must be positive");
  const int n = sc.n, p = sc.p, k = sc.n_outcomes();
  RngStream rng(seed, stream);
  SimDraw out;
  out.data.x = Matrix(n, p);
  out.data.y = Matrix(n, k);
  out.data.actions.assign(static_cast<std::size_t>(n), 1);
  out.d_opt.assign(static_cast<std::size_t>(n), 1);
  out.d_score.assign(static_cast<std::size_t>(n), 0.0);
  out.true_w = Matrix(n, k);
  double opt_value = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) out.data.x(i, j) = sc.x_sd * rng.next_normal();
    const double* x = out.data.x.row_ptr(i);
    const double u = rng.next_double();
    const int d = sc.optimal_action(x);
    const int a = u < sc.prob_follow(x) ? d : -d;
    out.data.actions[static_cast<std::size_t>(i)] = a;
    out.d_opt[static_cast<std::size_t>(i)] = d;
    out.d_score[static_cast<std::size_t>(i)] = sc.true_score(x);
    const std::vector<double> w = sc.true_weights_at(x);
    double v = 0.0;
    for (int c = 0; c < k; ++c) {
      out.true_w(i, c) = w[static_cast<std::size_t>(c)];
      const OutcomeSpec& o = sc.outcomes[static_cast<std::size_t>(c)];
      const double eps = o.noise_sd * rng.next_normal();
      double y;
      if (o.multiplicative_noise) {
        y = o.base(x, p) + a * o.effect(x, p) * eps;
      } else {
        y = o.base(x, p) + a * o.effect(x, p) + eps;
      }
      out.data.y(i, c) = y;
      v += w[static_cast<std::size_t>(c)] * sc.mean_outcome(x, d, c);
    }
    opt_value += v;
  }
  out.optimal_value_mean = opt_value / n;
  for (int j = 0; j < p; ++j)
    out.data.covariate_names.push_back("x" + std::to_string(j + 1));
  for (int c = 0; c < k; ++c)
    out.data.outcome_names.push_back("y" + std::to_string(c + 1));
  out.data.validate();
  return out;
}

}  // namespace compolicy
