#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace stein {

// 64-bit finalizer from the splitmix64 generator (Vigna, 2015).
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed for substream `index` of stream `master`.  The mapping depends only
// on (master, index), so re-running a study with more replicates or more
// grid points never reshuffles the streams that already ran.  Independent
// substreams of a substream are obtained by chaining derive_seed calls.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master + 0x9E3779B97F4A7C15ull * (index + 1));
}

// Deterministic random source with an explicit 64-bit seed.
//
// All draws are defined on top of the mt19937_64 integer stream, which the
// C++ standard pins down exactly.  The floating-point transforms below use
// plain arithmetic plus sqrt/log/cos, so a (seed, call sequence) pair gives
// one reproducible stream on a given platform; the std <random> distribution
// adapters are avoided because their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal (Box-Muller, one value per call, two uniforms consumed).
  double normal();

  // Uniform integer in [0, bound), bias-free via rejection.  bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  Eigen::VectorXd normal_vector(Eigen::Index n);

  // Column-major fill order: entry (i, j) is draw number j*rows + i.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
};

// n distinct indices drawn uniformly from {0, ..., pool-1}, returned in
// ascending order.
std::vector<Eigen::Index> sample_without_replacement(Eigen::Index pool, Eigen::Index n, Rng& rng);

// As above but with P(select i) proportional to weights[i] > 0 at each of
// the n sequential draws (already-selected indices are removed from the
// pool).  Returned ascending.
std::vector<Eigen::Index> weighted_sample_without_replacement(const Eigen::VectorXd& weights,
                                                              Eigen::Index n, Rng& rng);

}  // namespace stein
