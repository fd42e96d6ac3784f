#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "compolicy/dataset.hpp"
#include "compolicy/rng.hpp"

namespace compolicy {

// Built-in generative designs for the simulation studies.
enum class ScenarioId {
  s1_fixed_fixed,     // fixed weights, constant follow probability
  s2_fixed_varrho,    // fixed weights, covariate-dependent follow probability
  s3_var_var,         // patient-specific weights and follow probability
  s4_boot_power,      // two covariates, used by the heterogeneity power study
  s5_three_outcomes,  // three outcomes with fixed weights
  s6_misspec_a,       // quadratic weight model (x1^2 term)
  s6_misspec_b,       // quadratic weight model, steeper curvature
};

// One outcome column: y = base(x) + A * effect(x) + noise, or with the
// multiplicative form y = base(x) + A * effect(x) * noise.
struct OutcomeSpec {
  double base_const = 0.0;
  std::vector<double> base_x;
  double eff_const = 0.0;
  std::vector<double> eff_x;
  bool multiplicative_noise = false;
  double noise_sd = 0.5;

  double base(const double* x, int p) const;
  double effect(const double* x, int p) const;
};

struct Scenario {
  ScenarioId id = ScenarioId::s1_fixed_fixed;
  std::string name;
  int n = 500;
  int p = 5;
  double x_sd = 0.5;
  std::vector<OutcomeSpec> outcomes;

  // True utility weights: fixed simplex weights, or weight 1 given by
  // expit(theta^T (1, x) [+ quad_coef * x1^2]) with the rest implied.
  bool utility_fixed = true;
  std::vector<double> true_weights;
  std::vector<std::vector<double>> true_theta;
  bool quadratic_weight = false;
  double quad_coef = 1.0;

  // Treatment assignment: follow the true optimal action with probability
  // rho, or expit(beta^T (1, x)).
  bool behavior_constant = true;
  double rho = 0.8;
  std::vector<double> true_beta;

  int n_outcomes() const { return static_cast<int>(outcomes.size()); }
  std::vector<double> true_weights_at(const double* x) const;
  // True mean treatment contrast E[Y_k | x, +1] - E[Y_k | x, -1].
  double true_contrast(const double* x, int k) const;
  double true_score(const double* x) const;
  int optimal_action(const double* x) const;
  double prob_follow(const double* x) const;
  double mean_outcome(const double* x, int a, int k) const;
};

// Dataset together with the generator's hidden truth.
struct SimDraw {
  ObsDataset data;
  std::vector<int> d_opt;
  std::vector<double> d_score;
  Matrix true_w;              // n x K true weights
  double optimal_value_mean;  // mean conditional utility under d_opt
};

// Scenario presets with built-in defaults; callers adjust fields afterwards
// (sample size, weights, rho, theta variant).
Scenario make_scenario(ScenarioId id);
Scenario scenario_by_name(const std::string& name);
std::string scenario_name(ScenarioId id);

// Draw covariates only (for test sets).
Matrix draw_covariates(const Scenario& sc, int n, RngStream& rng);

// Full draw: covariates, treatment, outcomes, truth.  Per row the stream is
// consumed as p covariate normals, one uniform for the treatment, then one
// normal per outcome, so draws are reproducible by (seed, stream).
SimDraw generate(const Scenario& sc, std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace compolicy
