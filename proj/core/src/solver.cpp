#include "stein/solver.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "stein/format.hpp"
#include "stein/low_rank.hpp"

namespace stein {
namespace {

// sigma(w) given q = w' K_p w (already computed); nullopt when the total
// weight or the quadratic form is non-positive.
std::optional<double> sigma_from_parts(double quad, double weight_sum) {
  if (!(weight_sum > 0.0) || !(quad > 0.0)) return std::nullopt;
  return std::sqrt(quad) / weight_sum;
}

bool sigma_criterion_met(const GroundTruthRatioCriterion& c, const std::optional<double>& sigma) {
  return sigma && *sigma < c.tau * c.reference_sigma;
}

}  // namespace

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::converged: return "converged";
    case TerminationReason::max_iterations: return "max-iterations";
    case TerminationReason::breakdown: return "breakdown";
    case TerminationReason::preconditioner_failure: return "preconditioner-failure";
  }
  return "unknown";
}

SolveTrace pcg(const LinearOperator& action, const Preconditioner& preconditioner,
               const Eigen::VectorXd& rhs, const SolveConfig& config,
               const Eigen::VectorXd& initial) {
  const Eigen::Index n = action.size();
  if (rhs.size() != n) throw std::invalid_argument("pcg: rhs length mismatch");
  const Eigen::Index max_iterations = config.max_iterations > 0 ? config.max_iterations : 10 * n;

  const bool ground_truth = std::holds_alternative<GroundTruthRatioCriterion>(config.criterion);
  if (ground_truth) {
    const auto& c = std::get<GroundTruthRatioCriterion>(config.criterion);
    if (!(c.reference_sigma > 0.0)) {
      throw std::invalid_argument("pcg: ground-truth criterion needs a positive reference sigma");
    }
  }
  const bool track_sigma = ground_truth || config.record_trace;

  SolveTrace trace;
  Eigen::VectorXd w;
  Eigen::VectorXd r;
  if (initial.size() == 0) {
    w = Eigen::VectorXd::Zero(n);
    r = rhs;  // K_p 0 = 0 exactly; skip the action
  } else {
    if (initial.size() != n) throw std::invalid_argument("pcg: initial guess length mismatch");
    w = initial;
    r = rhs - action.apply(w);
  }

  Eigen::VectorXd z = preconditioner.apply_inverse(r);
  if (!z.allFinite()) {
    trace.solution = std::move(w);
    trace.reason = TerminationReason::preconditioner_failure;
    trace.residual_norms.push_back(r.norm());
    return trace;
  }
  Eigen::VectorXd s = z;
  double rz = r.dot(z);

  const double r0_norm = r.norm();
  trace.residual_norms.push_back(r0_norm);

  // sigma(w_m) from the recurrence K_p w_m = rhs - r_m: w' K_p w = w.(rhs - r).
  auto current_sigma = [&](Eigen::Index m) -> std::optional<double> {
    Eigen::VectorXd kw;
    if (config.sigma_refresh_interval > 0 && m > 0 && m % config.sigma_refresh_interval == 0) {
      kw = action.apply(w);  // periodic exact recomputation against drift
    } else {
      kw = rhs - r;
    }
    return sigma_from_parts(w.dot(kw), w.sum());
  };

  std::optional<double> sigma;
  if (track_sigma) {
    sigma = initial.size() == 0 ? std::nullopt : sigma_from_parts(w.dot(rhs - r), w.sum());
    trace.sigmas.push_back(sigma);
  }

  Eigen::Index m = 0;
  TerminationReason reason = TerminationReason::max_iterations;
  for (;;) {
    // Criterion check on the current iterate w_m (m = 0 counts).
    if (ground_truth &&
        sigma_criterion_met(std::get<GroundTruthRatioCriterion>(config.criterion), sigma)) {
      reason = TerminationReason::converged;
      break;
    }
    if (const auto* res = std::get_if<ResidualRatioCriterion>(&config.criterion);
        res && trace.residual_norms.back() <= res->tau * r0_norm) {
      reason = TerminationReason::converged;
      break;
    }
    if (m >= max_iterations) {
      reason = TerminationReason::max_iterations;
      break;
    }
    if (trace.residual_norms.back() == 0.0) {
      // Exactly solved; continuing would divide by zero in beta.
      reason = TerminationReason::converged;
      break;
    }

    const Eigen::VectorXd ks = action.apply(s);
    const double sks = s.dot(ks);
    if (!(sks > 0.0)) {
      reason = TerminationReason::breakdown;
      break;
    }
    const double alpha = rz / sks;
    w += alpha * s;
    r -= alpha * ks;
    z = preconditioner.apply_inverse(r);
    if (!z.allFinite()) {
      reason = TerminationReason::preconditioner_failure;
      ++m;
      trace.residual_norms.push_back(r.norm());
      if (track_sigma) trace.sigmas.push_back(current_sigma(m));
      trace.alphas.push_back(alpha);
      break;
    }
    const double rz_next = r.dot(z);
    const double beta = rz_next / rz;
    rz = rz_next;
    s = z + beta * s;

    ++m;
    trace.residual_norms.push_back(r.norm());
    trace.alphas.push_back(alpha);
    trace.betas.push_back(beta);
    if (track_sigma) {
      sigma = current_sigma(m);
      trace.sigmas.push_back(sigma);
    }
  }

  trace.solution = std::move(w);
  trace.iterations = m;
  trace.reason = reason;
  if (!config.record_trace) {
    // Keep only the endpoints callers need for summaries.
    trace.residual_norms = {r0_norm, trace.residual_norms.back()};
    if (track_sigma && !trace.sigmas.empty()) trace.sigmas = {trace.sigmas.back()};
    trace.alphas.clear();
    trace.betas.clear();
  }
  return trace;
}

SolveTrace cg(const LinearOperator& action, const Eigen::VectorXd& rhs, const SolveConfig& config,
              const Eigen::VectorXd& initial) {
  const IdentityPreconditioner identity;
  return pcg(action, identity, rhs, config, initial);
}

std::optional<double> worst_case_error(const Eigen::VectorXd& w, const LinearOperator& action) {
  if (w.size() != action.size()) throw std::invalid_argument("worst_case_error: length mismatch");
  return sigma_from_parts(w.dot(action.apply(w)), w.sum());
}

DenseSolution dense_solve(const SampleSet& samples, const SteinKernel& kernel, Eigen::Index limit) {
  const Eigen::MatrixXd k = assemble_dense(kernel, samples, limit);
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("dense_solve: Cholesky factorization failed (matrix not numerically SPD)");
  }
  DenseSolution out;
  out.weights = llt.solve(Eigen::VectorXd::Ones(samples.size()));
  const double weight_sum = out.weights.sum();
  if (!(weight_sum > 0.0)) {
    throw std::runtime_error("dense_solve: non-positive total weight (system is ill-posed)");
  }
  out.sigma = 1.0 / std::sqrt(weight_sum);
  return out;
}

DenseSolution dense_solve_minimum_norm(const SampleSet& samples, const SteinKernel& kernel,
                                       Eigen::Index limit) {
  const Eigen::MatrixXd k = assemble_dense(kernel, samples, limit);
  const SymmetricPinv pinv(k);
  if (pinv.rank() == 0) {
    throw std::runtime_error("dense_solve_minimum_norm: matrix is numerically zero");
  }
  DenseSolution out;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(samples.size());
  out.weights = pinv.solve(ones);
  const double weight_sum = out.weights.sum();
  if (!(weight_sum > 0.0)) {
    throw std::runtime_error(
        "dense_solve_minimum_norm: non-positive total weight (ones vector is orthogonal to the "
        "numerical range)");
  }
  out.sigma = 1.0 / std::sqrt(weight_sum);
  return out;
}

void write_trace_csv(const SolveTrace& trace, std::ostream& out) {
  out << "iter,res_norm,sigma,alpha,beta\n";
  for (std::size_t i = 0; i < trace.residual_norms.size(); ++i) {
    out << i << ',' << format_double(trace.residual_norms[i]) << ',';
    if (i < trace.sigmas.size() && trace.sigmas[i]) {
      out << format_double(*trace.sigmas[i]);
    } else {
      out << "nan";
    }
    out << ',';
    if (i >= 1 && i - 1 < trace.alphas.size()) out << format_double(trace.alphas[i - 1]);
    out << ',';
    if (i >= 1 && i - 1 < trace.betas.size()) out << format_double(trace.betas[i - 1]);
    out << '\n';
  }
}

}  // namespace stein
