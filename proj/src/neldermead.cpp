#include "compolicy/neldermead.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "compolicy/numeric.hpp"
#include "compolicy/rng.hpp"

namespace compolicy {

namespace {

using Objective = std::function<double(const std::vector<double>&)>;

double checked_eval(const Objective& f, const std::vector<double>& x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "objective is not finite at (";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    throw NumericalError(os.str());
  }
  return v;
}

// One Nelder-Mead run with the standard reflection/expansion/contraction
// coefficients.  Updates best_x/best_v with anything better it sees.
void nm_run(const Objective& f, const std::vector<double>& origin, double scale,
            std::vector<double>& best_x, double& best_v) {
  const int d = static_cast<int>(origin.size());
  const int max_evals = 500 * d;
  int evals = 0;
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(d + 1), origin);
  std::vector<double> vals(static_cast<std::size_t>(d + 1), 0.0);
  for (int j = 0; j < d; ++j) pts[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(j)] += scale;
  for (int j = 0; j <= d; ++j) {
    vals[static_cast<std::size_t>(j)] = checked_eval(f, pts[static_cast<std::size_t>(j)]);
    ++evals;
  }
  auto consider = [&](const std::vector<double>& x, double v) {
    if (v < best_v) { best_v = v; best_x = x; }
  };
  for (int j = 0; j <= d; ++j) consider(pts[static_cast<std::size_t>(j)], vals[static_cast<std::size_t>(j)]);
  std::vector<int> ord(static_cast<std::size_t>(d + 1));
  while (evals < max_evals) {
    for (int j = 0; j <= d; ++j) ord[static_cast<std::size_t>(j)] = j;
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      return vals[static_cast<std::size_t>(a)] < vals[static_cast<std::size_t>(b)];
    });
    // Simplex diameter: largest vertex distance from the best vertex.
    double diam = 0.0;
    for (int j = 1; j <= d; ++j) {
      double dist2 = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff = pts[static_cast<std::size_t>(ord[static_cast<std::size_t>(j)])][static_cast<std::size_t>(c)] -
                            pts[static_cast<std::size_t>(ord[0])][static_cast<std::size_t>(c)];
        dist2 += diff * diff;
      }
      diam = std::max(diam, std::sqrt(dist2));
    }
    if (diam < 1e-6) break;
    const int worst = ord[static_cast<std::size_t>(d)];
    const int second = ord[static_cast<std::size_t>(d - 1)];
    const int best = ord[0];
    std::vector<double> centroid(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j <= d; ++j) {
      if (j == worst) continue;
      for (int c = 0; c < d; ++c)
        centroid[static_cast<std::size_t>(c)] += pts[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] / d;
    }
    auto blend = [&](double t) {
      std::vector<double> x(static_cast<std::size_t>(d), 0.0);
      for (int c = 0; c < d; ++c)
        x[static_cast<std::size_t>(c)] = centroid[static_cast<std::size_t>(c)] +
            t * (centroid[static_cast<std::size_t>(c)] - pts[static_cast<std::size_t>(worst)][static_cast<std::size_t>(c)]);
      return x;
    };
    std::vector<double> refl = blend(1.0);
    const double refl_v = checked_eval(f, refl);
    ++evals;
    consider(refl, refl_v);
    if (refl_v < vals[static_cast<std::size_t>(best)]) {
      std::vector<double> expa = blend(2.0);
      const double expa_v = checked_eval(f, expa);
      ++evals;
      consider(expa, expa_v);
      if (expa_v < refl_v) {
        pts[static_cast<std::size_t>(worst)] = expa;
        vals[static_cast<std::size_t>(worst)] = expa_v;
      } else {
        pts[static_cast<std::size_t>(worst)] = refl;
        vals[static_cast<std::size_t>(worst)] = refl_v;
      }
      continue;
    }
    if (refl_v < vals[static_cast<std::size_t>(second)]) {
      pts[static_cast<std::size_t>(worst)] = refl;
      vals[static_cast<std::size_t>(worst)] = refl_v;
      continue;
    }
    std::vector<double> contr = blend(refl_v < vals[static_cast<std::size_t>(worst)] ? 0.5 : -0.5);
    const double contr_v = checked_eval(f, contr);
    ++evals;
    consider(contr, contr_v);
    if (contr_v < std::min(refl_v, vals[static_cast<std::size_t>(worst)])) {
      pts[static_cast<std::size_t>(worst)] = contr;
      vals[static_cast<std::size_t>(worst)] = contr_v;
      continue;
    }
    // Shrink toward the best vertex.
    for (int j = 0; j <= d; ++j) {
      if (j == best) continue;
      for (int c = 0; c < d; ++c) {
        pts[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] =
            0.5 * (pts[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] +
                   pts[static_cast<std::size_t>(best)][static_cast<std::size_t>(c)]);
      }
      vals[static_cast<std::size_t>(j)] = checked_eval(f, pts[static_cast<std::size_t>(j)]);
      ++evals;
      consider(pts[static_cast<std::size_t>(j)], vals[static_cast<std::size_t>(j)]);
      if (evals >= max_evals) break;
    }
  }
}

}  // namespace

std::vector<double> minimize_nd(const Objective& objective,
                                const std::vector<double>& start, double scale) {
  const int d = static_cast<int>(start.size());
  if (d == 0) throw InputError("minimize_nd needs a nonempty start point");
  if (!(scale > 0.0)) throw InputError("minimize_nd scale must be positive");
  std::vector<double> best_x = start;
  double best_v = checked_eval(objective, start);
  nm_run(objective, start, scale, best_x, best_v);
  // Fixed-key stream keeps the routine deterministic in its arguments.
  RngStream rng(0x5EEDF00DULL, 0);
  for (int r = 0; r < 3; ++r) {
    std::vector<double> offset = rng.normal_vector(d);
    double norm = 0.0;
    for (double v : offset) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<double> origin = start;
    if (norm > 0.0) {
      for (int c = 0; c < d; ++c)
        origin[static_cast<std::size_t>(c)] += scale * offset[static_cast<std::size_t>(c)] / norm;
    }
    nm_run(objective, origin, scale, best_x, best_v);
  }
  return best_x;
}

}  // namespace compolicy
