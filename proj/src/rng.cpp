#include "compolicy/rng.hpp"

#include <cmath>

namespace compolicy {

namespace {

// SplitMix64 finalizer; bijective 64-bit mix with good avalanche behaviour.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

const std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;  // odd, 2^64/phi

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : ctr_(0) {
  // Derive the stream key by mixing seed and stream index through two rounds
  // so that neighbouring (seed, stream) pairs land far apart.
  key_ = mix64(mix64(seed + kGamma) ^ mix64(stream * 0xD2B74407B1CE6E93ULL + 0x8CB92BA72F3D8DD7ULL));
}

std::uint64_t RngStream::next_u64() {
  return mix64(key_ + (++ctr_) * kGamma);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_double_open() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::next_normal() {
  const double u1 = next_double_open();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

std::vector<double> RngStream::normal_vector(int dim) {
  std::vector<double> z(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) z[static_cast<std::size_t>(i)] = next_normal();
  return z;
}

std::vector<double> mvn_draw(const std::vector<double>& cov_root, int dim,
                             RngStream& rng) {
  const std::vector<double> z = rng.normal_vector(dim);
  std::vector<double> out(static_cast<std::size_t>(dim), 0.0);
  for (int i = 0; i < dim; ++i) {
    double s = 0.0;
    const double* row = cov_root.data() + static_cast<std::size_t>(i) * dim;
    for (int j = 0; j < dim; ++j) s += row[j] * z[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

}  // namespace compolicy
