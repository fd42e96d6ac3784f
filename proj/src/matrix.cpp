#include "compolicy/matrix.hpp"

#include <cmath>
#include <string>

#include "compolicy/numeric.hpp"

namespace compolicy {

std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    const double* row = m.row_ptr(i);
    double s = 0.0;
    for (int j = 0; j < m.cols(); ++j) s += row[j] * v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

std::vector<double> qr_solve(const Matrix& x, const std::vector<double>& y) {
  const int n = x.rows();
  const int k = x.cols();
  if (n < k) throw NumericalError("least squares needs at least as many rows as columns");
  // Work on copies; reduce A to upper triangular with Householder reflections
  // applied to b as well.
  Matrix a = x;
  std::vector<double> b = y;
  for (int j = 0; j < k; ++j) {
    // Householder vector for column j below the diagonal.
    double norm = 0.0;
    for (int i = j; i < n; ++i) norm += a(i, j) * a(i, j);
    norm = std::sqrt(norm);
    if (norm < 1e-10) {
      throw NumericalError("design matrix is rank deficient: column " +
                           std::to_string(j) + " is linearly dependent");
    }
    const double alpha = a(j, j) >= 0.0 ? -norm : norm;
    std::vector<double> v(static_cast<std::size_t>(n - j), 0.0);
    v[0] = a(j, j) - alpha;
    for (int i = j + 1; i < n; ++i) v[static_cast<std::size_t>(i - j)] = a(i, j);
    double vnorm2 = 0.0;
    for (double t : v) vnorm2 += t * t;
    if (vnorm2 > 0.0) {
      for (int c = j; c < k; ++c) {
        double dot = 0.0;
        for (int i = j; i < n; ++i) dot += v[static_cast<std::size_t>(i - j)] * a(i, c);
        const double f = 2.0 * dot / vnorm2;
        for (int i = j; i < n; ++i) a(i, c) -= f * v[static_cast<std::size_t>(i - j)];
      }
      double dot = 0.0;
      for (int i = j; i < n; ++i) dot += v[static_cast<std::size_t>(i - j)] * b[static_cast<std::size_t>(i)];
      const double f = 2.0 * dot / vnorm2;
      for (int i = j; i < n; ++i) b[static_cast<std::size_t>(i)] -= f * v[static_cast<std::size_t>(i - j)];
    }
    a(j, j) = alpha;
    if (std::fabs(alpha) < 1e-10) {
      throw NumericalError("design matrix is rank deficient: column " +
                           std::to_string(j) + " is linearly dependent");
    }
  }
  // Back substitution on the triangular factor.
  std::vector<double> beta(static_cast<std::size_t>(k), 0.0);
  for (int j = k - 1; j >= 0; --j) {
    double s = b[static_cast<std::size_t>(j)];
    for (int c = j + 1; c < k; ++c) s -= a(j, c) * beta[static_cast<std::size_t>(c)];
    beta[static_cast<std::size_t>(j)] = s / a(j, j);
  }
  return beta;
}

std::vector<double> spd_inverse(const std::vector<double>& a, int k) {
  // Gauss-Jordan with the identity appended; adequate for the small symmetric
  // systems used here and keeps the error path explicit.
  std::vector<double> m(a);
  std::vector<double> inv(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) inv[static_cast<std::size_t>(i) * k + i] = 1.0;
  for (int col = 0; col < k; ++col) {
    // Partial pivot.
    int piv = col;
    double best = std::fabs(m[static_cast<std::size_t>(col) * k + col]);
    for (int r = col + 1; r < k; ++r) {
      const double v = std::fabs(m[static_cast<std::size_t>(r) * k + col]);
      if (v > best) { best = v; piv = r; }
    }
    if (best < 1e-12) throw NumericalError("matrix is singular, cannot invert");
    if (piv != col) {
      for (int c = 0; c < k; ++c) {
        std::swap(m[static_cast<std::size_t>(piv) * k + c], m[static_cast<std::size_t>(col) * k + c]);
        std::swap(inv[static_cast<std::size_t>(piv) * k + c], inv[static_cast<std::size_t>(col) * k + c]);
      }
    }
    const double d = m[static_cast<std::size_t>(col) * k + col];
    for (int c = 0; c < k; ++c) {
      m[static_cast<std::size_t>(col) * k + c] /= d;
      inv[static_cast<std::size_t>(col) * k + c] /= d;
    }
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = m[static_cast<std::size_t>(r) * k + col];
      if (f == 0.0) continue;
      for (int c = 0; c < k; ++c) {
        m[static_cast<std::size_t>(r) * k + c] -= f * m[static_cast<std::size_t>(col) * k + c];
        inv[static_cast<std::size_t>(r) * k + c] -= f * inv[static_cast<std::size_t>(col) * k + c];
      }
    }
  }
  return inv;
}

void sym_eigen(const std::vector<double>& a, int k, std::vector<double>& vals,
               std::vector<double>& vecs) {
  std::vector<double> m(a);
  vecs.assign(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) vecs[static_cast<std::size_t>(i) * k + i] = 1.0;
  auto at = [&](int i, int j) -> double& { return m[static_cast<std::size_t>(i) * k + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-24) break;
    for (int p = 0; p < k - 1; ++p) {
      for (int q = p + 1; q < k; ++q) {
        const double apq = at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < k; ++i) {
          const double mip = at(i, p), miq = at(i, q);
          at(i, p) = c * mip - s * miq;
          at(i, q) = s * mip + c * miq;
        }
        for (int j = 0; j < k; ++j) {
          const double mpj = at(p, j), mqj = at(q, j);
          at(p, j) = c * mpj - s * mqj;
          at(q, j) = s * mpj + c * mqj;
        }
        for (int i = 0; i < k; ++i) {
          const double vip = vecs[static_cast<std::size_t>(i) * k + p];
          const double viq = vecs[static_cast<std::size_t>(i) * k + q];
          vecs[static_cast<std::size_t>(i) * k + p] = c * vip - s * viq;
          vecs[static_cast<std::size_t>(i) * k + q] = s * vip + c * viq;
        }
      }
    }
  }
  vals.assign(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) vals[static_cast<std::size_t>(i)] = at(i, i);
}

std::vector<double> sym_sqrt_psd(const std::vector<double>& a, int k) {
  std::vector<double> vals, vecs;
  sym_eigen(a, k, vals, vecs);
  for (double& v : vals) v = v > 0.0 ? std::sqrt(v) : 0.0;
  // V diag(sqrt(vals)) V^T
  std::vector<double> out(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int l = 0; l < k; ++l) {
        s += vecs[static_cast<std::size_t>(i) * k + l] * vals[static_cast<std::size_t>(l)] *
             vecs[static_cast<std::size_t>(j) * k + l];
      }
      out[static_cast<std::size_t>(i) * k + j] = s;
    }
  }
  return out;
}

}  // namespace compolicy
