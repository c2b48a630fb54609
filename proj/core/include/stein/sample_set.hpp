#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "stein/rwmh.hpp"
#include "stein/target.hpp"

namespace stein {

// Where a node set came from; carried through save/load for reproducibility.
struct ChainProvenance {
  std::string sampler = "unknown";
  std::uint64_t seed = 0;
  double step_size = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t total_iterations = 0;
  std::uint64_t burn_in = 0;
  double acceptance_rate = std::numeric_limits<double>::quiet_NaN();
};

// N distinct nodes x_n with their scores g(x_n), stored row-wise.  This is
// the unit every kernel structure is built from; distinctness is enforced
// here once so kernel matrices built downstream cannot be made exactly
// singular by duplicated rows.
class SampleSet {
 public:
  // Throws if shapes disagree, values are non-finite, or two state rows are
  // exactly equal (bit-identical duplicates are what MCMC rejections produce).
  SampleSet(Eigen::MatrixXd states, Eigen::MatrixXd gradients, ChainProvenance provenance = {});

  // Convenience: compute the gradients via target.score on each row.
  static SampleSet from_states(const TargetDensity& target, Eigen::MatrixXd states,
                               ChainProvenance provenance = {});

  Eigen::Index size() const { return states_.rows(); }
  int dimension() const { return static_cast<int>(states_.cols()); }
  const Eigen::MatrixXd& states() const { return states_; }
  const Eigen::MatrixXd& gradients() const { return gradients_; }
  const ChainProvenance& provenance() const { return provenance_; }

  // Recompute scores with `target` and compare to the stored gradients.
  // True when every entry matches within rel_tol (relative to row norm).
  bool gradients_consistent(const TargetDensity& target, double rel_tol = 1e-12) const;

 private:
  Eigen::MatrixXd states_;
  Eigen::MatrixXd gradients_;
  ChainProvenance provenance_;
};

// First `count` distinct states of a chain, in order of first appearance,
// with scores evaluated by `target`.  count = nullopt keeps all distinct
// states.  Throws if the chain holds fewer distinct states than requested.
SampleSet distinct_prefix(const RwmhChain& chain, const TargetDensity& target,
                          std::optional<Eigen::Index> count = std::nullopt);

// Runs RWMH until `distinct` distinct states have appeared (or max_iterations
// MCMC steps have been taken, in which case it throws), then returns those
// states with their scores.  max_iterations = 0 means 1000 * distinct.
SampleSet sample_until_distinct(const TargetDensity& target, double step_size,
                                Eigen::Index distinct, std::uint64_t seed,
                                std::uint64_t max_iterations = 0);

// --- file format ------------------------------------------------------------
//
// Line-oriented text, all floats in shortest round-trip form:
//
//   steinsamples 1
//   n <N>
//   d <dim>
//   <metadata key> <value>          (optional provenance lines)
//   begin data
//   x_1 ... x_d g_1 ... g_d         (N rows, space-separated)
//
// Values survive a save/load cycle bit-for-bit.  load_samples also accepts
// a CSV with header x_1,...,x_d,g_1,...,g_d for chains produced elsewhere.

void save_samples(const SampleSet& samples, std::ostream& out);
void save_samples(const SampleSet& samples, const std::string& path);

SampleSet load_samples(std::istream& in);
SampleSet load_samples(const std::string& path);

}  // namespace stein
