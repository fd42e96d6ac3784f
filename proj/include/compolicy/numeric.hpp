#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace compolicy {

// Thrown when an algorithm fails for numerical reasons (singular system,
// non-finite objective, degenerate input).  The CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on bad user input (malformed files, inconsistent configuration).
// The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// expit(x) = 1/(1+exp(-x)), safe over the whole double range.  Inputs are
// clamped at +-700 so exp never overflows; beyond that the result is 0/1 to
// machine precision anyway.
inline double expit(double x) {
  if (x > 700.0) x = 700.0;
  if (x < -700.0) x = -700.0;
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow for large |x|.
inline double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Standard normal density.
inline double std_normal_density(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Sign with the tie broken toward +1: sgn(0) = +1.
inline int sign_tie_positive(double x) { return x >= 0.0 ? 1 : -1; }

}  // namespace compolicy
