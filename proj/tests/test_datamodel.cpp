#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "compolicy/dataset.hpp"
#include "compolicy/numeric.hpp"
#include "compolicy/pseudolik.hpp"
#include "compolicy/qmodel.hpp"
#include "compolicy/rng.hpp"
#include "compolicy/scenario.hpp"
#include "compolicy/utility.hpp"

using namespace compolicy;

namespace {

ObsDataset tiny_dataset() {
  // Six records, two covariates, two outcomes; values picked by hand.
  ObsDataset d;
  d.x = Matrix(6, 2);
  const double xs[6][2] = {{0.3, -0.1}, {-0.5, 0.2}, {1.0, 0.4},
                           {-0.2, -0.8}, {0.6, 0.1}, {0.0, 0.5}};
  const int as[6] = {1, -1, 1, -1, -1, 1};
  d.y = Matrix(6, 2);
  for (int i = 0; i < 6; ++i) {
    d.x(i, 0) = xs[i][0];
    d.x(i, 1) = xs[i][1];
    d.actions.push_back(as[i]);
    d.y(i, 0) = 0.1 * i;
    d.y(i, 1) = 1.0 - 0.2 * i;
  }
  return d;
}

}  // namespace

TEST_CASE("q models recover exact coefficients from noiseless data") {
  // y = 0.5 + 1.5 x1 - x2 + a*(2 + 3 x1 + 0.5 x2), no noise.
  RngStream rng(13, 0);
  ObsDataset d;
  const int n = 40;
  d.x = Matrix(n, 2);
  d.y = Matrix(n, 2);
  for (int i = 0; i < n; ++i) {
    d.x(i, 0) = rng.next_normal();
    d.x(i, 1) = rng.next_normal();
    const int a = rng.next_double() < 0.5 ? 1 : -1;
    d.actions.push_back(a);
    const double x1 = d.x(i, 0), x2 = d.x(i, 1);
    d.y(i, 0) = 0.5 + 1.5 * x1 - x2 + a * (2.0 + 3.0 * x1 + 0.5 * x2);
    d.y(i, 1) = -1.0 + 0.2 * x1 + a * (1.0 - x1);
  }
  const QModelSet q = fit_q_models(d);
  const std::vector<double> want0 = {0.5, 1.5, -1.0, 2.0, 3.0, 0.5};
  const std::vector<double> want1 = {-1.0, 0.2, 0.0, 1.0, -1.0, 0.0};
  for (int j = 0; j < 6; ++j) {
    CHECK(std::fabs(q.fit(0).coefficients[static_cast<std::size_t>(j)] - want0[static_cast<std::size_t>(j)]) < 1e-8);
    CHECK(std::fabs(q.fit(1).coefficients[static_cast<std::size_t>(j)] - want1[static_cast<std::size_t>(j)]) < 1e-8);
  }
}

TEST_CASE("q models estimate the generative coefficients on a large sample") {
  Scenario sc = make_scenario(ScenarioId::s1_fixed_fixed);
  sc.n = 2000;
  const SimDraw draw = generate(sc, 77);
  const QModelSet q = fit_q_models(draw.data);
  // True coefficient layout: (intercept, x, a, a*x) with zero main effects
  // and treatment effects (2, 4, -2, 0...) / (-2, 2, -4, 0...).
  const std::vector<double> eff_y = {2.0, 4.0, -2.0, 0.0, 0.0, 0.0};
  const std::vector<double> eff_z = {-2.0, 2.0, -4.0, 0.0, 0.0, 0.0};
  for (int j = 0; j < 6; ++j) {
    CHECK(std::fabs(q.fit(0).coefficients[static_cast<std::size_t>(j)]) < 0.1);          // main effects are zero
    CHECK(std::fabs(q.fit(0).coefficients[static_cast<std::size_t>(6 + j)] - eff_y[static_cast<std::size_t>(j)]) < 0.1);
    CHECK(std::fabs(q.fit(1).coefficients[static_cast<std::size_t>(6 + j)] - eff_z[static_cast<std::size_t>(j)]) < 0.1);
  }
}

TEST_CASE("contrast equals the difference of the two arm predictions") {
  const QModelSet q = QModelSet::from_coefficients(
      {{0.4, -0.3, 0.9, 1.1, 0.7, -0.6}, {-0.2, 0.5, 0.0, -1.0, 0.3, 0.8}}, {0, 1});
  RngStream rng(19, 0);
  for (int t = 0; t < 50; ++t) {
    const double x[2] = {rng.next_normal(), rng.next_normal()};
    for (int k = 0; k < 2; ++k) {
      const double diff = q.q_value(x, 1, k) - q.q_value(x, -1, k);
      CHECK(std::fabs(q.contrast(x, k) - diff) < 1e-12);
    }
  }
}

TEST_CASE("decision follows the sign of the weighted contrast, ties to +1") {
  // Exact generative models: R_Y(x) = 2(2+4x1-2x2), R_Z(x) = 2(-2+2x1-4x2).
  const QModelSet q = QModelSet::from_coefficients(
      {{0, 0, 0, 0, 0, 0, 2, 4, -2, 0, 0, 0}, {0, 0, 0, 0, 0, 0, -2, 2, -4, 0, 0, 0}},
      {0, 1, 2, 3, 4});
  const UtilityModel u = UtilityModel::fixed({0.25, 0.75});
  const double origin[5] = {0, 0, 0, 0, 0};
  // D(0) = 0.25*4 + 0.75*(-4) = -2 < 0.
  CHECK(decision(q, u, origin) == -1);
  const double right[5] = {1, 0, 0, 0, 0};
  // D = 0.25*12 + 0.75*0 = 3 > 0.
  CHECK(decision(q, u, right) == 1);
  // Tie: weights 0.5/0.5 at x with R_Y = -R_Z.  R_Y = 2(2+4x1-2x2),
  // R_Z = 2(-2+2x1-4x2); equal magnitudes opposite signs at x = (0, 0) gives
  // D = 0.5*4 - 0.5*4 = 0 -> +1.
  const UtilityModel half = UtilityModel::fixed({0.5, 0.5});
  CHECK(decision(q, half, origin) == 1);
}

TEST_CASE("fixed utility weights are validated") {
  CHECK_THROWS_AS(UtilityModel::fixed({0.5, 0.6}), InputError);
  CHECK_THROWS_AS(UtilityModel::fixed({1.2, -0.2}), InputError);
  CHECK_THROWS_AS(UtilityModel::fixed({1.0}), InputError);
  const UtilityModel u = UtilityModel::fixed({0.2, 0.4, 0.4});
  const double x[5] = {0, 0, 0, 0, 0};
  const std::vector<double> w = u.weights(x);
  CHECK(w[0] == doctest::Approx(0.2));
  CHECK(w[2] == doctest::Approx(0.4));
}

TEST_CASE("patient-specific weights use expit features with implied remainder") {
  UtilityDesign des;
  des.cols = {0, 1};
  const UtilityModel u = UtilityModel::patient_specific({{1.0, -0.5, 0.0}}, des, 2);
  const double x[2] = {0.4, 2.0};
  const std::vector<double> w = u.weights(x);
  CHECK(w[0] == doctest::Approx(expit(1.0 - 0.5 * 0.4)));
  CHECK(w[0] + w[1] == doctest::Approx(1.0));
  // Squared features enter as x^2.
  UtilityDesign quad;
  quad.cols = {0};
  quad.squared = {0};
  const UtilityModel uq = UtilityModel::patient_specific({{0.5, 1.0, 2.0}}, quad, 2);
  const std::vector<double> wq = uq.weights(x);
  CHECK(wq[0] == doctest::Approx(expit(0.5 + 1.0 * 0.4 + 2.0 * 0.16)));
}

TEST_CASE("three-outcome weights can go negative and are reported") {
  UtilityDesign des;
  des.cols = {0};
  // Both leading weights near 0.9 -> remainder near -0.8.
  const UtilityModel u =
      UtilityModel::patient_specific({{2.2, 0.0}, {2.2, 0.0}}, des, 3);
  const double x[1] = {0.0};
  const std::vector<double> w = u.weights(x);
  CHECK(w[2] < 0.0);
  CHECK(w[0] + w[1] + w[2] == doctest::Approx(1.0));
  ObsDataset d;
  d.x = Matrix(4, 1);
  d.y = Matrix(4, 3, 1.0);
  d.actions = {1, -1, 1, -1};
  const double frac = u.negative_weight_fraction(d);
  CHECK(frac == doctest::Approx(1.0));
}

TEST_CASE("pseudo log likelihood at beta zero is -n log 2") {
  const ObsDataset d = tiny_dataset();
  BehaviorModel b;
  b.beta = {0.0, 0.0, 0.0};
  const std::vector<int> dec = {1, 1, -1, -1, 1, -1};
  CHECK(pseudo_loglik(d, dec, b) == doctest::Approx(-6.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("pseudo log likelihood matches a by-hand enumeration") {
  const ObsDataset d = tiny_dataset();
  BehaviorModel b;
  b.beta = {0.4, -1.0, 0.7};
  const std::vector<int> dec = {1, -1, -1, 1, -1, 1};
  // Independent accumulation straight from the definition.
  double want = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double eta = 0.4 - 1.0 * d.x(i, 0) + 0.7 * d.x(i, 1);
    const bool agree = d.actions[static_cast<std::size_t>(i)] == dec[static_cast<std::size_t>(i)];
    want += (agree ? eta : 0.0) - std::log(1.0 + std::exp(eta));
  }
  CHECK(pseudo_loglik(d, dec, b) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("dataset validation rejects broken inputs") {
  ObsDataset d = tiny_dataset();
  CHECK_NOTHROW(d.validate());
  ObsDataset one_arm = tiny_dataset();
  for (auto& a : one_arm.actions) a = 1;
  CHECK_THROWS_AS(one_arm.validate(), InputError);
  ObsDataset bad_action = tiny_dataset();
  bad_action.actions[2] = 0;
  CHECK_THROWS_AS(bad_action.validate(), InputError);
  ObsDataset nan_y = tiny_dataset();
  nan_y.y(1, 1) = std::nan("");
  CHECK_THROWS_AS(nan_y.validate(), InputError);
  ObsDataset one_outcome = tiny_dataset();
  one_outcome.y = Matrix(6, 1, 0.0);
  CHECK_THROWS_AS(one_outcome.validate(), InputError);
}

TEST_CASE("behavior model supports the intercept-only design") {
  BehaviorModel b;
  b.beta = {0.6};
  b.intercept_only = true;
  const double x[3] = {5.0, -2.0, 1.0};
  CHECK(b.prob_optimal(x) == doctest::Approx(expit(0.6)));
}

TEST_CASE("scenario truth matches hand-computed scores") {
  const Scenario sc = make_scenario(ScenarioId::s1_fixed_fixed);
  // D(x) = 2*(2.5 x1 - 3.5 x2 - 1) at weights (0.25, 0.75).
  const double a[5] = {0, 0, 0, 0, 0};
  CHECK(sc.true_score(a) == doctest::Approx(-2.0));
  const double b[5] = {1, 1, 0, 0, 0};
  CHECK(sc.true_score(b) == doctest::Approx(-4.0));
  const double c[5] = {1, 0, 0, 0, 0};
  CHECK(sc.true_score(c) == doctest::Approx(3.0));
  CHECK(sc.optimal_action(a) == -1);
  CHECK(sc.optimal_action(c) == 1);
  // Variable-weights scenario: w1(x) = expit(1 - 0.5 x1).
  const Scenario s3 = make_scenario(ScenarioId::s3_var_var);
  const std::vector<double> w = s3.true_weights_at(c);
  CHECK(w[0] == doctest::Approx(expit(0.5)));
  // Quadratic-weight scenario: w1 = expit(1 + x1^2 + theta0 . x).
  const Scenario s6 = make_scenario(ScenarioId::s6_misspec_a);
  const double xq[5] = {0.5, 0.0, 0.0, 1.0, -1.0};
  const std::vector<double> wq = s6.true_weights_at(xq);
  CHECK(wq[0] == doctest::Approx(expit(1.0 + 0.25 - 0.25 + 1.0 - 0.5)));
}

TEST_CASE("generated draws are reproducible and stream-distinct") {
  Scenario sc = make_scenario(ScenarioId::s2_fixed_varrho);
  sc.n = 100;
  const SimDraw a = generate(sc, 5, 0);
  const SimDraw b = generate(sc, 5, 0);
  const SimDraw c = generate(sc, 5, 1);
  CHECK(a.data.x.data() == b.data.x.data());
  CHECK(a.data.y.data() == b.data.y.data());
  CHECK(a.data.actions == b.data.actions);
  CHECK(a.data.x.data() != c.data.x.data());
  a.data.validate();
  // Truth columns line up with the scenario functions.
  for (int i = 0; i < 5; ++i) {
    CHECK(a.d_opt[static_cast<std::size_t>(i)] == sc.optimal_action(a.data.x.row_ptr(i)));
    CHECK(a.d_score[static_cast<std::size_t>(i)] ==
          doctest::Approx(sc.true_score(a.data.x.row_ptr(i))));
  }
}

TEST_CASE("multiplicative third-outcome reading has zero mean contrast") {
  Scenario sc = make_scenario(ScenarioId::s5_three_outcomes);
  sc.outcomes[2].multiplicative_noise = true;
  const double x[5] = {0.3, -0.2, 0, 0, 0};
  CHECK(sc.true_contrast(x, 2) == 0.0);
  CHECK(sc.mean_outcome(x, 1, 2) == doctest::Approx(1.0));
  CHECK(sc.mean_outcome(x, -1, 2) == doctest::Approx(1.0));
  // Additive default: contrast 2*(1 + x1 + x2).
  const Scenario add = make_scenario(ScenarioId::s5_three_outcomes);
  CHECK(add.true_contrast(x, 2) == doctest::Approx(2.0 * (1.0 + 0.3 - 0.2)));
}
