#include "compolicy/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "compolicy/neldermead.hpp"
#include "compolicy/numeric.hpp"
#include "compolicy/parallel.hpp"
#include "compolicy/rng.hpp"

namespace compolicy {

namespace {

// The bootstrap linearizes the fit around one expit weight model, so fixed
// weights are embedded as an intercept-only theta with w = expit(theta0).
struct WeightParam {
  std::vector<double> theta;
  UtilityDesign design;
};

WeightParam weight_param(const UtilityModel& u) {
  if (u.n_outcomes() != 2)
    throw InputError("the fluctuation bootstrap covers exactly two outcomes");
  WeightParam wp;
  if (u.is_fixed()) {
    const double w = u.fixed_weights()[0];
    const double t = std::log(w / (1.0 - w));  // +-inf at the simplex corners
    wp.theta = {std::clamp(std::isfinite(t) ? t : (w > 0.5 ? 30.0 : -30.0), -30.0, 30.0)};
    wp.design = UtilityDesign{{}, {}};
  } else {
    wp.theta = u.theta()[0];
    wp.design = u.design();
  }
  return wp;
}

Matrix behavior_features(const ObsDataset& data, const BehaviorModel& b) {
  const int n = data.n();
  const int bd = static_cast<int>(b.beta.size());
  Matrix xt(n, bd);
  for (int i = 0; i < n; ++i) {
    xt(i, 0) = 1.0;
    if (!b.intercept_only)
      for (int j = 0; j < data.p(); ++j) xt(i, 1 + j) = data.x(i, j);
  }
  return xt;
}

// Everything the draw loop reuses: per-record kernel weights, fluctuation
// loadings, weight gradients, and the inverse information.
struct BootContext {
  int n = 0;
  int b_dim = 0;
  int u_dim = 0;
  int q_dim = 0;
  double h = 0.0;
  Matrix xt;                  // n x b_dim behavior features
  std::vector<double> beta;   // fitted treatment coefficients
  std::vector<double> m;      // (2P-1) * phi0(D/h)/h / n per record
  std::vector<double> a;      // (beta^T x) * m per record (the |.| weights)
  Matrix ty;                  // n x q_dim loading of z_y in T
  Matrix tz;                  // n x q_dim loading of z_z in T
  Matrix g;                   // n x u_dim loading of u inside |.|
  std::vector<double> info_inv;  // inverse average Fisher information
};

BootContext boot_context(const ObsDataset& data, const QModelSet& q,
                         const FitReport& fit, double h) {
  if (data.k() != 2)
    throw InputError("the fluctuation bootstrap covers exactly two outcomes");
  if (h <= 0.0) throw NumericalError("bandwidth must be positive");
  const WeightParam wp = weight_param(fit.utility);
  BootContext c;
  c.n = data.n();
  c.b_dim = static_cast<int>(fit.behavior.beta.size());
  c.u_dim = wp.design.dim();
  c.q_dim = q.design_dim();
  c.h = h;
  c.xt = behavior_features(data, fit.behavior);
  c.beta = fit.behavior.beta;
  c.m.resize(static_cast<std::size_t>(c.n));
  c.a.resize(static_cast<std::size_t>(c.n));
  c.ty = Matrix(c.n, c.q_dim);
  c.tz = Matrix(c.n, c.q_dim);
  c.g = Matrix(c.n, c.u_dim);
  std::vector<double> info(static_cast<std::size_t>(c.b_dim) * c.b_dim, 0.0);
  for (int i = 0; i < c.n; ++i) {
    const double* x = data.x.row_ptr(i);
    const std::vector<double> feat = wp.design.row(x);
    double eta_w = 0.0;
    for (int j = 0; j < c.u_dim; ++j) eta_w += feat[static_cast<std::size_t>(j)] * wp.theta[static_cast<std::size_t>(j)];
    const double w = expit(eta_w);
    const double ry = q.contrast(x, 0);
    const double rz = q.contrast(x, 1);
    const double dscore = w * ry + (1.0 - w) * rz;
    const std::vector<double> crow = q.contrast_row(x);
    const double* xtr = c.xt.row_ptr(i);
    double eta_b = 0.0;
    for (int j = 0; j < c.b_dim; ++j) eta_b += xtr[j] * c.beta[static_cast<std::size_t>(j)];
    const double p = expit(eta_b);
    const double kern = std_normal_density(dscore / h) / h;
    c.m[static_cast<std::size_t>(i)] = (2.0 * p - 1.0) * kern / c.n;
    c.a[static_cast<std::size_t>(i)] = eta_b * c.m[static_cast<std::size_t>(i)];
    for (int j = 0; j < c.q_dim; ++j) {
      c.ty(i, j) = w * ry * crow[static_cast<std::size_t>(j)];
      c.tz(i, j) = (1.0 - w) * rz * crow[static_cast<std::size_t>(j)];
    }
    const double wdot = w * (1.0 - w);
    for (int j = 0; j < c.u_dim; ++j)
      c.g(i, j) = (ry - rz) * wdot * feat[static_cast<std::size_t>(j)];
    const double fisher = p * (1.0 - p);
    for (int aa = 0; aa < c.b_dim; ++aa)
      for (int bb = 0; bb < c.b_dim; ++bb)
        info[static_cast<std::size_t>(aa) * c.b_dim + bb] += fisher * xtr[aa] * xtr[bb] / c.n;
  }
  c.info_inv = spd_inverse(info, c.b_dim);
  return c;
}

// |T_i + g_i^T u| per record, given the precomputed fluctuation scalars T.
double abs_term(const BootContext& c, const std::vector<double>& t_row, int i,
                const std::vector<double>& u) {
  double s = t_row[static_cast<std::size_t>(i)];
  const double* gr = c.g.row_ptr(i);
  for (int j = 0; j < c.u_dim; ++j) s += gr[j] * u[static_cast<std::size_t>(j)];
  return std::fabs(s);
}

std::vector<double> t_scalars(const BootContext& c, const std::vector<double>& z_y,
                              const std::vector<double>& z_z) {
  std::vector<double> t(static_cast<std::size_t>(c.n), 0.0);
  for (int i = 0; i < c.n; ++i) {
    const double* ty = c.ty.row_ptr(i);
    const double* tz = c.tz.row_ptr(i);
    double s = 0.0;
    for (int j = 0; j < c.q_dim; ++j)
      s += ty[j] * z_y[static_cast<std::size_t>(j)] + tz[j] * z_z[static_cast<std::size_t>(j)];
    t[static_cast<std::size_t>(i)] = s;
  }
  return t;
}

std::vector<double> k_tilde_at(const BootContext& c, const std::vector<double>& t_row,
                               const std::vector<double>& u) {
  std::vector<double> out(static_cast<std::size_t>(c.b_dim), 0.0);
  for (int i = 0; i < c.n; ++i) {
    const double s = c.m[static_cast<std::size_t>(i)] * abs_term(c, t_row, i, u);
    const double* xtr = c.xt.row_ptr(i);
    for (int j = 0; j < c.b_dim; ++j) out[static_cast<std::size_t>(j)] += s * xtr[j];
  }
  return out;
}

std::vector<int> fitted_decisions(const ObsDataset& data, const QModelSet& q,
                                  const WeightParam& wp) {
  std::vector<int> dec(static_cast<std::size_t>(data.n()), 1);
  for (int i = 0; i < data.n(); ++i) {
    const double* x = data.x.row_ptr(i);
    const std::vector<double> feat = wp.design.row(x);
    double eta = 0.0;
    for (std::size_t j = 0; j < feat.size(); ++j) eta += feat[j] * wp.theta[j];
    const double w = expit(eta);
    dec[static_cast<std::size_t>(i)] =
        sign_tie_positive(w * q.contrast(x, 0) + (1.0 - w) * q.contrast(x, 1));
  }
  return dec;
}

}  // namespace

InfluenceSet influence_set(const ObsDataset& data, const QModelSet& q,
                           const FitReport& fit) {
  data.validate();
  const int n = data.n();
  const int nk = data.k();
  const int q_dim = q.design_dim();
  const int b_dim = static_cast<int>(fit.behavior.beta.size());
  InfluenceSet infl;
  infl.r = nk * q_dim + b_dim;
  for (int k = 0; k < nk; ++k) {
    const LinearFit& lf = q.fit(k);
    if (lf.n != n || static_cast<int>(lf.residuals.size()) != n)
      throw InputError("outcome model " + std::to_string(k) +
                       " carries no residuals for this dataset; fit it from the data");
    Matrix psi(n, q_dim);
    for (int i = 0; i < n; ++i) {
      const std::vector<double> d = q.design_row(data.x.row_ptr(i),
                                                 data.actions[static_cast<std::size_t>(i)]);
      const double resid = lf.residuals[static_cast<std::size_t>(i)];
      for (int aa = 0; aa < q_dim; ++aa) {
        double s = 0.0;
        for (int bb = 0; bb < q_dim; ++bb)
          s += lf.gram_inverse[static_cast<std::size_t>(aa) * q_dim + bb] * d[static_cast<std::size_t>(bb)];
        psi(i, aa) = s * resid;
      }
    }
    infl.psi_outcomes.push_back(std::move(psi));
  }

  const WeightParam wp = weight_param(fit.utility);
  const std::vector<int> dec = fitted_decisions(data, q, wp);
  const Matrix xt = behavior_features(data, fit.behavior);
  infl.psi_action = Matrix(n, b_dim);
  for (int i = 0; i < n; ++i) {
    const double* xtr = xt.row_ptr(i);
    double eta = 0.0;
    for (int j = 0; j < b_dim; ++j) eta += xtr[j] * fit.behavior.beta[static_cast<std::size_t>(j)];
    const double c = data.actions[static_cast<std::size_t>(i)] == dec[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    const double resid = c - expit(eta);
    for (int j = 0; j < b_dim; ++j) infl.psi_action(i, j) = resid * xtr[j];
  }

  // Uncentered second moment of the stacked rows: the blocks are estimating
  // equation residuals, so their means are already O(n^{-1/2}).
  const int r = infl.r;
  infl.sigma_hat.assign(static_cast<std::size_t>(r) * r, 0.0);
  std::vector<double> row(static_cast<std::size_t>(r), 0.0);
  for (int i = 0; i < n; ++i) {
    int at = 0;
    for (int k = 0; k < nk; ++k)
      for (int j = 0; j < q_dim; ++j) row[static_cast<std::size_t>(at++)] = infl.psi_outcomes[static_cast<std::size_t>(k)](i, j);
    for (int j = 0; j < b_dim; ++j) row[static_cast<std::size_t>(at++)] = infl.psi_action(i, j);
    for (int aa = 0; aa < r; ++aa)
      for (int bb = aa; bb < r; ++bb)
        infl.sigma_hat[static_cast<std::size_t>(aa) * r + bb] += row[static_cast<std::size_t>(aa)] * row[static_cast<std::size_t>(bb)] / n;
  }
  for (int aa = 0; aa < r; ++aa)
    for (int bb = 0; bb < aa; ++bb)
      infl.sigma_hat[static_cast<std::size_t>(aa) * r + bb] = infl.sigma_hat[static_cast<std::size_t>(bb) * r + aa];
  infl.sigma_root = sym_sqrt_psd(infl.sigma_hat, r);
  return infl;
}

std::vector<double> k_tilde(const InfluenceSet& infl, const ObsDataset& data,
                            const QModelSet& q, const FitReport& fit,
                            const std::vector<double>& z_y,
                            const std::vector<double>& z_z,
                            const std::vector<double>& u, double bandwidth) {
  const BootContext c = boot_context(data, q, fit, bandwidth);
  if (static_cast<int>(z_y.size()) != c.q_dim || static_cast<int>(z_z.size()) != c.q_dim)
    throw InputError("fluctuation vector length does not match the outcome model dimension");
  if (static_cast<int>(u.size()) != c.u_dim)
    throw InputError("utility perturbation length does not match the weight model dimension");
  (void)infl;
  return k_tilde_at(c, t_scalars(c, z_y, z_z), u);
}

std::vector<BootstrapDraw> bootstrap_draws(const InfluenceSet& infl,
                                           const ObsDataset& data, const QModelSet& q,
                                           const FitReport& fit, int n_boot,
                                           std::uint64_t seed, int jobs) {
  if (n_boot < 1) throw InputError("need at least one bootstrap draw");
  const int n = data.n();
  const WeightParam wp = weight_param(fit.utility);
  // Bandwidth sd(D) * n^{-1/6} from the fitted decision scores.
  std::vector<double> dscore(static_cast<std::size_t>(n), 0.0);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* x = data.x.row_ptr(i);
    const std::vector<double> feat = wp.design.row(x);
    double eta = 0.0;
    for (std::size_t j = 0; j < feat.size(); ++j) eta += feat[j] * wp.theta[j];
    const double w = expit(eta);
    dscore[static_cast<std::size_t>(i)] = w * q.contrast(x, 0) + (1.0 - w) * q.contrast(x, 1);
    mean += dscore[static_cast<std::size_t>(i)];
  }
  mean /= n;
  double var = 0.0;
  for (double v : dscore) var += (v - mean) * (v - mean);
  var /= (n > 1 ? n - 1 : 1);
  const double v_hat = std::sqrt(var);
  if (!(v_hat > 0.0))
    throw NumericalError("decision scores are constant; kernel bandwidth collapsed");
  const double h = v_hat * std::pow(static_cast<double>(n), -1.0 / 6.0);

  const BootContext c = boot_context(data, q, fit, h);
  const int r = infl.r;
  if (r != 2 * c.q_dim + c.b_dim)
    throw InputError("influence set dimension does not match the fitted models");

  std::vector<BootstrapDraw> draws(static_cast<std::size_t>(n_boot));
  for_each_index(n_boot, jobs, [&](int b) {
    RngStream rng(seed, static_cast<std::uint64_t>(b));
    // z_tilde = sigma_root * z, split into the Y, Z, and treatment blocks.
    const std::vector<double> zt = mvn_draw(infl.sigma_root, r, rng);
    const std::vector<double> z_y(zt.begin(), zt.begin() + c.q_dim);
    const std::vector<double> z_z(zt.begin() + c.q_dim, zt.begin() + 2 * c.q_dim);
    const std::vector<double> z_a(zt.begin() + 2 * c.q_dim, zt.end());

    const std::vector<double> t_row = t_scalars(c, z_y, z_z);
    const auto objective = [&](const std::vector<double>& u) {
      double s = 0.0;
      for (int i = 0; i < c.n; ++i)
        s += c.a[static_cast<std::size_t>(i)] * abs_term(c, t_row, i, u);
      return s;
    };
    const std::vector<double> u =
        minimize_nd(objective, std::vector<double>(static_cast<std::size_t>(c.u_dim), 0.0), 1.0);
    const std::vector<double> kt = k_tilde_at(c, t_row, u);
    std::vector<double> bt(static_cast<std::size_t>(c.b_dim), 0.0);
    for (int aa = 0; aa < c.b_dim; ++aa) {
      double s = 0.0;
      for (int bb = 0; bb < c.b_dim; ++bb)
        s += c.info_inv[static_cast<std::size_t>(aa) * c.b_dim + bb] *
             (z_a[static_cast<std::size_t>(bb)] - kt[static_cast<std::size_t>(bb)]);
      bt[static_cast<std::size_t>(aa)] = s;
    }
    draws[static_cast<std::size_t>(b)].u_tilde = u;
    draws[static_cast<std::size_t>(b)].b_tilde = std::move(bt);
  });
  return draws;
}

HeterogeneityTest heterogeneity_test(const FitReport& fit,
                                     const std::vector<BootstrapDraw>& draws,
                                     double alpha) {
  if (draws.empty()) throw InputError("heterogeneity test needs bootstrap draws");
  if (fit.n < 1) throw InputError("fit carries no sample size");
  const WeightParam wp = weight_param(fit.utility);
  double s = 0.0;
  for (std::size_t j = 1; j < wp.theta.size(); ++j) s += wp.theta[j] * wp.theta[j];
  HeterogeneityTest test;
  test.statistic = std::sqrt(static_cast<double>(fit.n)) * std::sqrt(s);
  test.n_boot = static_cast<int>(draws.size());
  test.alpha = alpha;
  int at_least = 0;
  for (const BootstrapDraw& d : draws) {
    double q = 0.0;
    for (std::size_t j = 1; j < d.u_tilde.size(); ++j) q += d.u_tilde[j] * d.u_tilde[j];
    if (std::sqrt(q) >= test.statistic) ++at_least;
  }
  test.p_value = (1.0 + at_least) / (test.n_boot + 1.0);
  test.reject = test.p_value <= alpha;
  return test;
}

}  // namespace compolicy
