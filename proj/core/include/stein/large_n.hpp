#pragma once

#include <iosfwd>

#include "stein/sample_set.hpp"
#include "stein/solver.hpp"

namespace stein {

struct LargeNConfig {
  int dimension = 4;
  Eigen::Index data_count = 1000;       // logistic-regression observations
  double step_size = 0.0;               // 0 => default_step_size(dimension)
  std::uint64_t mcmc_iterations = 10000;
  double length_scale = 1.0;
  Eigen::Index jacobi_block = 1;
  double residual_tolerance = 1e-8;     // no dense ground truth at this scale
  Eigen::Index max_iterations = 0;      // 0 => 10 * N
  std::uint64_t master_seed = 0;
};

struct LargeNResult {
  Eigen::Index nodes = 0;               // distinct states found in the chain
  double acceptance_rate = 0.0;
  SolveTrace cg_trace;                  // plain CG, full history
  SolveTrace pcg_trace;                 // Jacobi PCG, full history
};

// Side-by-side convergence study at MCMC scale: run one chain, keep every
// distinct state, then solve K_p w = 1 twice — plain CG and block-Jacobi
// PCG — under the residual criterion with per-iteration sigma(w_m) records.
// No dense factorization anywhere; this is the regime the matrix-free path
// exists for.
LargeNResult large_n_study(const LargeNConfig& config);

// Paired traces as CSV: iter,res_cg,sigma_cg,res_pcg,sigma_pcg.  The longer
// trace pads the finished one with "nan".
void write_large_n_csv(const LargeNResult& result, std::ostream& out);

}  // namespace stein
