#pragma once

#include <cstdint>
#include <vector>

#include "compolicy/dataset.hpp"
#include "compolicy/estimation.hpp"
#include "compolicy/matrix.hpp"
#include "compolicy/qmodel.hpp"

namespace compolicy {

// Per-record influence vectors of the fitted model stack and their empirical
// second-moment matrix.  For the linear outcome models the influence
// expansion sqrt(n)(R_hat(x) - R(x)) = c(x)^T n^{-1/2} sum_i psi_{i,k} is
// exact, with psi_{i,k} = gram_inverse * d_i * resid_{i,k}; the treatment
// block is the logistic score psi_{i,A} = (C_i - P_i) * x_tilde_i.
struct InfluenceSet {
  std::vector<Matrix> psi_outcomes;  // one n x q matrix per outcome
  Matrix psi_action;                 // n x b matrix
  std::vector<double> sigma_hat;     // r x r second-moment matrix, row-major
  std::vector<double> sigma_root;    // symmetric PSD square root of sigma_hat
  int r = 0;                         // stacked dimension K*q + b
};

InfluenceSet influence_set(const ObsDataset& data, const QModelSet& q,
                           const FitReport& fit);

// One parametric resample of the estimator fluctuations: u_tilde tracks
// sqrt(n)(theta_hat - theta), b_tilde tracks sqrt(n)(beta_hat - beta).
struct BootstrapDraw {
  std::vector<double> u_tilde;
  std::vector<double> b_tilde;
};

// Kernel-localized response of the profile score to Gaussian fluctuations
// (z_y, z_z) of the two outcome-model coefficient processes and a candidate
// utility perturbation u: the empirical mean of
//   x_tilde (2P-1) |T(x, z_y, z_z) + (R_Y(x)-R_Z(x)) wdot(x)^T u| phi0(D(x)/h)/h
// with T(x, z_y, z_z) = w(x) R_Y(x) c(x)^T z_y + (1-w(x)) R_Z(x) c(x)^T z_z
// and wdot the gradient of the expit weight model.  Homogeneous of degree 1
// in (z_y, z_z, u) jointly.
std::vector<double> k_tilde(const InfluenceSet& infl, const ObsDataset& data,
                            const QModelSet& q, const FitReport& fit,
                            const std::vector<double>& z_y,
                            const std::vector<double>& z_z,
                            const std::vector<double>& u, double bandwidth);

// Parametric bootstrap of the estimator fluctuations.  Each draw maps a
// standard normal through sigma_root, minimizes u -> beta_hat^T k_tilde over
// u (Nelder-Mead from 0, restart radius 1), and solves the behavior block
// through the inverse average Fisher information.  Bandwidth is
// sd(D) * n^{-1/6}.  Fixed-weight fits are handled by embedding the weight as
// an intercept-only expit model (u is then one-dimensional).  Draws are
// independent; jobs <= 0 picks the configured default.
std::vector<BootstrapDraw> bootstrap_draws(const InfluenceSet& infl,
                                           const ObsDataset& data, const QModelSet& q,
                                           const FitReport& fit, int n_boot,
                                           std::uint64_t seed, int jobs = 1);

// Test of constant-versus-covariate-dependent utility weights: the null says
// every non-intercept weight coefficient is zero.
struct HeterogeneityTest {
  double statistic = 0.0;  // sqrt(n) * norm of the non-intercept theta part
  double p_value = 1.0;    // add-one bootstrap p-value, never exactly 0
  int n_boot = 0;
  double alpha = 0.05;
  bool reject = false;
};

// Compares sqrt(n)||theta_hat_(1)|| against the bootstrap norms
// ||u_tilde_(1)|| with p = (1 + #{draws >= statistic}) / (n_boot + 1).
HeterogeneityTest heterogeneity_test(const FitReport& fit,
                                     const std::vector<BootstrapDraw>& draws,
                                     double alpha = 0.05);

}  // namespace compolicy
