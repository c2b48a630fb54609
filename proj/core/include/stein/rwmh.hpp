#pragma once

#include <cstdint>
#include <vector>

#include "stein/target.hpp"

namespace stein {

struct RwmhConfig {
  double step_size = 0.1;        // proposal std deviation per coordinate
  std::uint64_t iterations = 0;  // recorded iterations (after burn-in)
  std::uint64_t burn_in = 0;     // leading iterations dropped from the record
  std::uint64_t seed = 0;
  Eigen::VectorXd init;          // empty => origin
};

// Raw random-walk Metropolis-Hastings output.  One recorded state per
// iteration; duplicates from rejections are kept (deduplication is a
// separate step, see distinct_prefix).
struct RwmhChain {
  Eigen::MatrixXd states;       // iterations x d, row i = state after step burn_in + i
  std::vector<bool> accepted;   // per recorded iteration
  double acceptance_rate = 0.0; // accepted / (burn_in + iterations)
  RwmhConfig config;            // provenance of the run
};

// Random-walk Metropolis with isotropic Gaussian proposals
// x' = x + step_size * N(0, I).  The symmetric proposal makes the
// acceptance probability min(1, p(x') / p(x)).  Deterministic in the seed:
// each iteration consumes exactly d normal draws then one uniform.
// Throws if log_density(init) is not finite.
RwmhChain rwmh_sample(const TargetDensity& target, const RwmhConfig& config);

// Proposal step sizes used by the experiment presets; tuned empirically so
// the d = 4 and d = 10 logistic posteriors accept at roughly 0.25 and 0.06.
double default_step_size(int dimension);

}  // namespace stein
