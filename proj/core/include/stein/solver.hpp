#pragma once

#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "stein/kernel_action.hpp"
#include "stein/preconditioner.hpp"

namespace stein {

// Stop once the tracked worst-case error sigma(w_m) drops below
// tau * reference_sigma, where reference_sigma = sigma(w) of the exact
// solution (from a dense reference solve).  The iteration count under this
// rule is the quantity the gain experiments compare.
struct GroundTruthRatioCriterion {
  double tau = 1.01;
  double reference_sigma = 0.0;
};

// Stop once |r_m| <= tau * |r_0|; the practical rule when no dense
// reference is affordable.
struct ResidualRatioCriterion {
  double tau = 1e-8;
};

// Run exactly max_iterations iterations (diagnostic traces).
struct FixedIterationsCriterion {};

using StopCriterion =
    std::variant<GroundTruthRatioCriterion, ResidualRatioCriterion, FixedIterationsCriterion>;

struct SolveConfig {
  StopCriterion criterion = ResidualRatioCriterion{};
  Eigen::Index max_iterations = 0;        // 0 => 10 * N
  bool record_trace = false;              // keep per-iteration history
  // sigma(w_m) is tracked through K_p w_m = b - r_m, which costs no extra
  // matrix action; every refresh_interval iterations it is recomputed from
  // an honest K_p w_m product to stop drift.  0 disables the refresh.
  Eigen::Index sigma_refresh_interval = 50;
};

enum class TerminationReason {
  converged,           // the stop criterion was met
  max_iterations,      // iteration budget exhausted (normal exit for FixedIterations)
  breakdown,           // <s, K_p s> <= 0: operator not positive definite on the Krylov space
  preconditioner_failure,  // M^{-1} r produced non-finite values
};
const char* to_string(TerminationReason reason);

struct SolveTrace {
  Eigen::VectorXd solution;                   // final iterate w_m
  Eigen::Index iterations = 0;                // m of the final iterate
  TerminationReason reason = TerminationReason::max_iterations;
  // Histories indexed by iterate 0..m (present when record_trace or required
  // by the criterion; residual_norms is always recorded).
  std::vector<double> residual_norms;
  std::vector<std::optional<double>> sigmas;  // nullopt while 1'w <= 0
  std::vector<double> alphas;                 // per executed update, size m
  std::vector<double> betas;                  // size m (beta for steps 1..m)

  std::optional<double> final_sigma() const {
    return sigmas.empty() ? std::nullopt : sigmas.back();
  }
};

// Preconditioned conjugate gradient on K_p w = rhs.  Exactly one operator
// action and one preconditioner application per iteration (plus the sigma
// refresh, see SolveConfig).  With the identity preconditioner this *is*
// plain CG: cg() runs the same code path, so the two produce bit-identical
// traces.
SolveTrace pcg(const LinearOperator& action, const Preconditioner& preconditioner,
               const Eigen::VectorXd& rhs, const SolveConfig& config,
               const Eigen::VectorXd& initial = Eigen::VectorXd());

SolveTrace cg(const LinearOperator& action, const Eigen::VectorXd& rhs, const SolveConfig& config,
              const Eigen::VectorXd& initial = Eigen::VectorXd());

// Worst-case integration error of weights w over the unit-ball of the Stein
// RKHS: sigma(w) = sqrt(w' K_p w) / (1' w).  nullopt when 1' w <= 0 (the
// scale-invariant form only makes sense for positive total weight).  Costs
// one operator action.
std::optional<double> worst_case_error(const Eigen::VectorXd& w, const LinearOperator& action);

// Dense reference solve of K_p w = 1 via Cholesky; the ground truth the
// iterative path is judged against.  sigma = (1' w)^{-1/2}, which equals
// worst_case_error(w) exactly for the exact solution.
struct DenseSolution {
  Eigen::VectorXd weights;
  double sigma = 0.0;
};
DenseSolution dense_solve(const SampleSet& samples, const SteinKernel& kernel,
                          Eigen::Index limit = 5000);

// Minimum-norm dense reference: w = K_p^+ 1 through a full eigendecomposition
// (eigenvalues below 1e-12 * lambda_max truncated).  Coincides with
// dense_solve on well-conditioned systems but stays defined when K_p is
// numerically singular in double precision, which happens at large length
// scales where the Cholesky route breaks down.  sigma = (1' w)^{-1/2} again:
// w' K_p w = 1' K^+ K K^+ 1 = 1' w by the pseudo-inverse identity.
DenseSolution dense_solve_minimum_norm(const SampleSet& samples, const SteinKernel& kernel,
                                       Eigen::Index limit = 5000);

// Per-iteration trace as CSV: iter,res_norm,sigma,alpha,beta.  sigma is
// "nan" while undefined; alpha/beta are empty for iterate 0.
void write_trace_csv(const SolveTrace& trace, std::ostream& out);

}  // namespace stein
