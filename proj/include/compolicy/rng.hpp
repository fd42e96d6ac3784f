#pragma once

#include <cstdint>
#include <vector>

namespace compolicy {

// Counter-based pseudo-random generator.  Each draw hashes (key, counter) with
// a SplitMix64-style finalizer, so the state is just two 64-bit words and any
// number of statistically independent streams can be derived from one seed by
// stream index.  Replication loops give every task its own stream, which makes
// parallel and serial execution produce identical results.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double next_double();
  // Uniform on (0, 1]; used where log(u) must be finite.
  double next_double_open();
  // Standard normal via the Box-Muller transform (two uniforms per call).
  double next_normal();
  std::vector<double> normal_vector(int dim);

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
};

// Multivariate normal draw cov_root * z with z iid standard normal.  cov_root
// is a dim x dim matrix stored row-major.
std::vector<double> mvn_draw(const std::vector<double>& cov_root, int dim,
                             RngStream& rng);

}  // namespace compolicy
