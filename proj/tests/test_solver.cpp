#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "doctest.h"
#include "stein/format.hpp"
#include "stein/jacobi.hpp"
#include "stein/kernel_action.hpp"
#include "stein/low_rank.hpp"
#include "stein/rng.hpp"
#include "stein/solver.hpp"
#include "stein/stein_kernel.hpp"
#include "support/operators.hpp"
#include "support/oracles.hpp"

using namespace stein;
using namespace testsupport;

namespace {

SteinKernel imq_stein(double length_scale) {
  return SteinKernel(BaseKernel(make_profile("imq"), length_scale));
}

bool bitwise_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

double k_norm(const Eigen::VectorXd& v, const Eigen::MatrixXd& k) {
  return std::sqrt(v.dot(k * v));
}

// Iterate w_m reproduced by a fixed-iteration run; CG is deterministic, so
// this retraces the exact Krylov path of a longer run.
Eigen::VectorXd iterate_at(const LinearOperator& action, const Preconditioner& preconditioner,
                           const Eigen::VectorXd& rhs, Eigen::Index m) {
  SolveConfig config;
  config.criterion = FixedIterationsCriterion{};
  config.max_iterations = std::max<Eigen::Index>(m, 1);
  if (m == 0) {
    return Eigen::VectorXd::Zero(action.size());
  }
  config.max_iterations = m;
  return pcg(action, preconditioner, rhs, config).solution;
}

}  // namespace

TEST_CASE("termination reasons have stable names") {
  CHECK(std::string(to_string(TerminationReason::converged)) == "converged");
  CHECK(std::string(to_string(TerminationReason::max_iterations)) == "max-iterations");
  CHECK(std::string(to_string(TerminationReason::breakdown)) == "breakdown");
  CHECK(std::string(to_string(TerminationReason::preconditioner_failure)) ==
        "preconditioner-failure");
}

TEST_CASE("input validation") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  IdentityPreconditioner identity;
  SolveConfig config;
  CHECK_THROWS_AS(pcg(action, identity, Eigen::VectorXd::Ones(10), config),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      pcg(action, identity, Eigen::VectorXd::Ones(60), config, Eigen::VectorXd::Ones(10)),
      std::invalid_argument);
  SolveConfig ground;
  ground.criterion = GroundTruthRatioCriterion{1.01, 0.0};
  CHECK_THROWS_AS(pcg(action, identity, Eigen::VectorXd::Ones(60), ground),
                  std::invalid_argument);
  CHECK_THROWS_AS(worst_case_error(Eigen::VectorXd::Ones(10), action), std::invalid_argument);
}

TEST_CASE("cg converges to the dense solution in the kernel norm") {
  // l = 0.3 keeps cond(K_p) ~ 1e4..1e5 where a 1e-10 residual ratio is
  // reachable; at l = 1 the N = 200 system (cond ~ 1e11) stagnates far above
  // any useful accuracy, which is the failure preconditioning exists to fix.
  for (Eigen::Index nodes : {Eigen::Index(60), Eigen::Index(200)}) {
    const LogisticBed& bed = logistic_bed(4, 300, nodes, 23);
    const SteinKernel kernel = imq_stein(0.3);
    KernelAction action(*bed.samples, kernel);
    const Eigen::MatrixXd dense = assemble_dense(kernel, *bed.samples);
    const DenseSolution reference = dense_solve(*bed.samples, kernel);

    SolveConfig config;
    config.criterion = ResidualRatioCriterion{1e-10};
    const SolveTrace trace = cg(action, Eigen::VectorXd::Ones(nodes), config);
    REQUIRE(trace.reason == TerminationReason::converged);
    const double error = k_norm(trace.solution - reference.weights, dense);
    CHECK(error <= 1e-6 * k_norm(reference.weights, dense));
  }
}

TEST_CASE("residual criterion defaults to 1e-8 and is honoured") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  SolveConfig config;  // default ResidualRatioCriterion
  CHECK(std::get<ResidualRatioCriterion>(config.criterion).tau == 1e-8);
  const SolveTrace trace = cg(action, Eigen::VectorXd::Ones(60), config);
  REQUIRE(trace.reason == TerminationReason::converged);
  CHECK(trace.residual_norms.back() <= 1e-8 * trace.residual_norms.front());
}

TEST_CASE("starting from the exact solution stops at iterate zero") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  const SteinKernel kernel = imq_stein(1.0);
  KernelAction action(*bed.samples, kernel);
  const DenseSolution reference = dense_solve(*bed.samples, kernel);
  SolveConfig config;
  config.criterion = GroundTruthRatioCriterion{1.01, reference.sigma};
  const SolveTrace trace =
      cg(action, Eigen::VectorXd::Ones(60), config, reference.weights);
  CHECK(trace.iterations == 0);
  CHECK(trace.reason == TerminationReason::converged);
  CHECK(bitwise_equal(trace.solution, reference.weights));
}

TEST_CASE("ground-truth stop within 5N iterations, sigma within tau") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  const SteinKernel kernel = imq_stein(1.0);
  KernelAction action(*bed.samples, kernel);
  const DenseSolution reference = dense_solve(*bed.samples, kernel);
  SolveConfig config;
  config.criterion = GroundTruthRatioCriterion{1.01, reference.sigma};
  config.max_iterations = 5 * 60;
  const SolveTrace trace = cg(action, Eigen::VectorXd::Ones(60), config);
  REQUIRE(trace.reason == TerminationReason::converged);
  CHECK(trace.iterations <= 5 * 60);
  REQUIRE(trace.final_sigma().has_value());
  CHECK(*trace.final_sigma() < 1.01 * reference.sigma);
  // The tracked sigma is honest: recompute from a fresh operator action.
  const auto honest = worst_case_error(trace.solution, action);
  REQUIRE(honest.has_value());
  CHECK(*honest < 1.01 * reference.sigma);
}

TEST_CASE("kernel-norm error is monotone along the iteration") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  const SteinKernel kernel = imq_stein(1.0);
  KernelAction action(*bed.samples, kernel);
  const Eigen::MatrixXd dense = assemble_dense(kernel, *bed.samples);
  const DenseSolution reference = dense_solve(*bed.samples, kernel);
  IdentityPreconditioner identity;
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(60);

  double previous = k_norm(-reference.weights, dense);  // e_0 for w_0 = 0
  for (Eigen::Index m = 1; m <= 25; ++m) {
    const Eigen::VectorXd w = iterate_at(action, identity, rhs, m);
    const double current = k_norm(w - reference.weights, dense);
    CHECK(current <= previous * (1.0 + 1e-12) + 1e-12);
    previous = current;
  }
}

TEST_CASE("per-iteration contraction beats the condition-number bound") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  const SteinKernel kernel = imq_stein(1.0);
  KernelAction action(*bed.samples, kernel);
  const Eigen::MatrixXd dense = assemble_dense(kernel, *bed.samples);
  const DenseSolution reference = dense_solve(*bed.samples, kernel);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(60);

  const IdentityPreconditioner identity;
  const BlockJacobiPreconditioner jacobi(action, 3);
  const NystromPreconditioner nystrom(action, 20, 1e-2, NystromSampling::uniform, 17);
  const std::vector<const Preconditioner*> preconditioners{&identity, &jacobi, &nystrom};

  for (const Preconditioner* p : preconditioners) {
    CAPTURE(p->descriptor());
    const double kappa =
        preconditioned_condition(dense, preconditioner_matrix(*p, 60));
    const double bound = std::sqrt(1.0 - 1.0 / kappa);
    double previous = k_norm(-reference.weights, dense);
    const double floor = 1e-10 * previous;
    for (Eigen::Index m = 1; m <= 20 && previous > floor; ++m) {
      const Eigen::VectorXd w = iterate_at(action, *p, rhs, m);
      const double current = k_norm(w - reference.weights, dense);
      CHECK(current <= previous * bound * (1.0 + 1e-6) + 1e-12);
      previous = current;
    }
  }
}

TEST_CASE("exact preconditioners solve in at most a few iterations") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  const SteinKernel kernel = imq_stein(0.3);
  KernelAction action(*bed.samples, kernel);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(60);
  const DenseSolution reference = dense_solve(*bed.samples, kernel);

  SolveConfig residual;  // tau 1e-8
  BlockJacobiPreconditioner full_block(action, 60);
  const SolveTrace jacobi_trace = pcg(action, full_block, rhs, residual);
  CHECK(jacobi_trace.reason == TerminationReason::converged);
  CHECK(jacobi_trace.iterations <= 1);

  SolveConfig ground;
  ground.criterion = GroundTruthRatioCriterion{1.01, reference.sigma};
  const SolveTrace jacobi_gt = pcg(action, full_block, rhs, ground);
  CHECK(jacobi_gt.reason == TerminationReason::converged);
  CHECK(jacobi_gt.iterations <= 1);

  // eta = 1e-6 is far below the smallest kernel eigenvalue here, so the
  // Woodbury-applied M is K_p to high accuracy.  (Much smaller eta squares
  // the conditioning inside the n = N inner system and the cutoff in its
  // pseudo-inverse starts discarding genuine directions.)
  NystromPreconditioner full_rank(action, 60, 1e-6, NystromSampling::uniform, 5);
  const SolveTrace nystrom_trace = pcg(action, full_rank, rhs, ground);
  CHECK(nystrom_trace.reason == TerminationReason::converged);
  CHECK(nystrom_trace.iterations <= 3);
}

TEST_CASE("plain cg is bit-identical to pcg with the identity preconditioner") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(60);
  SolveConfig config;
  config.criterion = FixedIterationsCriterion{};
  config.max_iterations = 12;
  config.record_trace = true;

  IdentityPreconditioner identity;
  const SolveTrace a = cg(action, rhs, config);
  const SolveTrace b = pcg(action, identity, rhs, config);
  CHECK(bitwise_equal(a.solution, b.solution));
  CHECK(a.residual_norms == b.residual_norms);
  CHECK(a.alphas == b.alphas);
  CHECK(a.betas == b.betas);
  REQUIRE(a.sigmas.size() == b.sigmas.size());
  for (std::size_t i = 0; i < a.sigmas.size(); ++i) {
    CHECK(a.sigmas[i] == b.sigmas[i]);
  }
}

TEST_CASE("fixed-iteration runs execute the requested count and record full traces") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  SolveConfig config;
  config.criterion = FixedIterationsCriterion{};
  config.max_iterations = 7;
  config.record_trace = true;
  const SolveTrace trace = cg(action, Eigen::VectorXd::Ones(60), config);
  CHECK(trace.iterations == 7);
  CHECK(trace.reason == TerminationReason::max_iterations);
  CHECK(trace.residual_norms.size() == 8);
  CHECK(trace.sigmas.size() == 8);
  CHECK(trace.alphas.size() == 7);
  CHECK(trace.betas.size() == 7);
  CHECK_FALSE(trace.sigmas[0].has_value());  // default start w_0 = 0
  for (std::size_t i = 1; i < trace.sigmas.size(); ++i) {
    REQUIRE(trace.sigmas[i].has_value());
    CHECK(std::isfinite(*trace.sigmas[i]));
  }
}

TEST_CASE("max-iterations default is ten times the system size") {
  Rng rng(77);
  const Eigen::MatrixXd g = rng.normal_matrix(5, 5);
  const Eigen::MatrixXd spd =
      g * g.transpose() + 5.0 * Eigen::MatrixXd::Identity(5, 5);
  const MatrixOperator op(spd);
  SolveConfig config;
  config.criterion = FixedIterationsCriterion{};  // max_iterations = 0 -> 10 N
  const SolveTrace trace = cg(op, Eigen::VectorXd::Ones(5), config);
  CHECK(trace.iterations == 50);
  CHECK(trace.reason == TerminationReason::max_iterations);
}

TEST_CASE("zero right-hand side converges immediately") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  SolveConfig config;
  const SolveTrace trace = cg(action, Eigen::VectorXd::Zero(60), config);
  CHECK(trace.iterations == 0);
  CHECK(trace.reason == TerminationReason::converged);
  CHECK(trace.solution.norm() == 0.0);
}

TEST_CASE("indefinite operators are reported as breakdown") {
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -1.0;
  const MatrixOperator op(indefinite);
  SolveConfig config;
  const SolveTrace trace = cg(op, Eigen::VectorXd::Ones(2), config);
  CHECK(trace.reason == TerminationReason::breakdown);
  CHECK(trace.iterations == 0);
}

TEST_CASE("non-finite preconditioner output is reported, immediately or mid-run") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(60);
  SolveConfig config;
  config.record_trace = true;

  const FunctionPreconditioner always_bad([](const Eigen::VectorXd& v) {
    Eigen::VectorXd out = v;
    out(0) = std::numeric_limits<double>::quiet_NaN();
    return out;
  });
  const SolveTrace immediate = pcg(action, always_bad, rhs, config);
  CHECK(immediate.reason == TerminationReason::preconditioner_failure);
  CHECK(immediate.iterations == 0);

  auto calls = std::make_shared<int>(0);
  const FunctionPreconditioner eventually_bad([calls](const Eigen::VectorXd& v) {
    Eigen::VectorXd out = v;
    if (++*calls > 3) out(0) = std::numeric_limits<double>::quiet_NaN();
    return out;
  });
  const SolveTrace later = pcg(action, eventually_bad, rhs, config);
  CHECK(later.reason == TerminationReason::preconditioner_failure);
  CHECK(later.iterations == 3);
  CHECK(later.residual_norms.size() == 4);
  CHECK(later.alphas.size() == 3);
  CHECK(later.betas.size() == 2);  // the failing step records alpha but no beta
}

TEST_CASE("tracked sigma matches an honest recomputation at every iterate") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  IdentityPreconditioner identity;
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(60);

  SolveConfig config;
  config.criterion = FixedIterationsCriterion{};
  config.max_iterations = 30;
  config.record_trace = true;
  const SolveTrace trace = cg(action, rhs, config);
  REQUIRE(trace.sigmas.size() == 31);

  for (Eigen::Index m = 1; m <= 30; m += 4) {
    const Eigen::VectorXd w = iterate_at(action, identity, rhs, m);
    const auto honest = worst_case_error(w, action);
    const auto tracked = trace.sigmas[static_cast<std::size_t>(m)];
    REQUIRE(honest.has_value());
    REQUIRE(tracked.has_value());
    CHECK(*tracked == doctest::Approx(*honest).epsilon(1e-8));
  }
}

TEST_CASE("sigma refresh interval does not disturb the tracked values") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(60);

  SolveConfig config;
  config.criterion = FixedIterationsCriterion{};
  config.max_iterations = 60;
  config.record_trace = true;
  CHECK(SolveConfig{}.sigma_refresh_interval == 50);  // documented default

  SolveConfig every_step = config;
  every_step.sigma_refresh_interval = 1;
  SolveConfig never = config;
  never.sigma_refresh_interval = 0;

  const SolveTrace base = cg(action, rhs, config);
  const SolveTrace honest = cg(action, rhs, every_step);
  const SolveTrace recurrence_only = cg(action, rhs, never);
  REQUIRE(base.sigmas.size() == 61);
  REQUIRE(honest.sigmas.size() == 61);
  REQUIRE(recurrence_only.sigmas.size() == 61);
  for (std::size_t i = 1; i < 61; ++i) {
    REQUIRE(base.sigmas[i].has_value());
    REQUIRE(honest.sigmas[i].has_value());
    REQUIRE(recurrence_only.sigmas[i].has_value());
    CHECK(*base.sigmas[i] == doctest::Approx(*honest.sigmas[i]).epsilon(1e-6));
    CHECK(*base.sigmas[i] == doctest::Approx(*recurrence_only.sigmas[i]).epsilon(1e-6));
  }
}

TEST_CASE("summary traces keep only the endpoints") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  SolveConfig config;  // record_trace = false
  const SolveTrace trace = cg(action, Eigen::VectorXd::Ones(60), config);
  CHECK(trace.residual_norms.size() == 2);
  CHECK(trace.sigmas.empty());  // sigma is not tracked under the residual rule
  CHECK(trace.alphas.empty());
  CHECK(trace.betas.empty());
  CHECK_FALSE(trace.final_sigma().has_value());
}

TEST_CASE("worst-case error is the sigma functional, undefined for non-positive weight") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  const SteinKernel kernel = imq_stein(1.0);
  KernelAction action(*bed.samples, kernel);
  const Eigen::MatrixXd dense = assemble_dense(kernel, *bed.samples);
  Rng rng(15);
  Eigen::VectorXd w = rng.normal_vector(60);
  if (w.sum() < 0.0) w = -w;
  const auto sigma = worst_case_error(w, action);
  REQUIRE(sigma.has_value());
  CHECK(*sigma == doctest::Approx(std::sqrt(w.dot(dense * w)) / w.sum()).epsilon(1e-10));

  CHECK_FALSE(worst_case_error(-w, action).has_value());
  CHECK_FALSE(worst_case_error(Eigen::VectorXd::Zero(60), action).has_value());
}

TEST_CASE("dense solve matches an independent pseudo-inverse and its own sigma identity") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  const SteinKernel kernel = imq_stein(1.0);
  KernelAction action(*bed.samples, kernel);
  const Eigen::MatrixXd dense = assemble_dense(kernel, *bed.samples);
  const DenseSolution reference = dense_solve(*bed.samples, kernel);

  const Eigen::VectorXd oracle = dense_pinv(dense) * Eigen::VectorXd::Ones(60);
  CHECK((reference.weights - oracle).norm() <= 1e-8 * oracle.norm());
  CHECK(reference.sigma == doctest::Approx(1.0 / std::sqrt(reference.weights.sum())));
  const auto honest = worst_case_error(reference.weights, action);
  REQUIRE(honest.has_value());
  CHECK(*honest == doctest::Approx(reference.sigma).epsilon(1e-6));

  CHECK_THROWS_AS(dense_solve(*bed.samples, kernel, 10), std::invalid_argument);
}

TEST_CASE("minimum-norm dense solve extends the Cholesky reference to singular systems") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);

  // Well-conditioned: agrees with the Cholesky route.
  const SteinKernel kernel = imq_stein(1.0);
  const DenseSolution chol = dense_solve(*bed.samples, kernel);
  const DenseSolution min_norm = dense_solve_minimum_norm(*bed.samples, kernel);
  CHECK((min_norm.weights - chol.weights).norm() <= 1e-8 * chol.weights.norm());
  CHECK(min_norm.sigma == doctest::Approx(chol.sigma).epsilon(1e-10));

  // Numerically rank-deficient system: a nextafter-near-duplicate node puts
  // one eigenvalue orders of magnitude below the truncation cutoff, so both
  // pseudo-inverse routes truncate the same subspace and must agree.  (An
  // exact duplicate is rejected by the SampleSet distinctness contract.)
  Eigen::MatrixXd states(61, 4);
  Eigen::MatrixXd grads(61, 4);
  states.topRows(60) = bed.samples->states();
  grads.topRows(60) = bed.samples->gradients();
  states.row(60) = states.row(0);
  states(60, 0) = std::nextafter(states(60, 0), std::numeric_limits<double>::infinity());
  grads.row(60) = grads.row(0);
  const SampleSet near_dup(std::move(states), std::move(grads));
  const Eigen::MatrixXd deficient = assemble_dense(kernel, near_dup);
  const Eigen::VectorXd oracle = dense_pinv(deficient) * Eigen::VectorXd::Ones(61);
  const DenseSolution solution = dense_solve_minimum_norm(near_dup, kernel);
  CHECK((solution.weights - oracle).norm() <= 1e-5 * oracle.norm());
  CHECK(solution.sigma == doctest::Approx(1.0 / std::sqrt(oracle.sum())).epsilon(1e-5));

  CHECK_THROWS_AS(dense_solve_minimum_norm(*bed.samples, kernel, 10), std::invalid_argument);
}

TEST_CASE("trace csv layout") {
  const LogisticBed& bed = logistic_bed(4, 300, 60, 41);
  KernelAction action(*bed.samples, imq_stein(1.0));
  SolveConfig config;
  config.criterion = FixedIterationsCriterion{};
  config.max_iterations = 2;
  config.record_trace = true;
  const SolveTrace trace = cg(action, Eigen::VectorXd::Ones(60), config);

  std::ostringstream out;
  write_trace_csv(trace, out);

  std::ostringstream expected;
  expected << "iter,res_norm,sigma,alpha,beta\n";
  expected << "0," << format_double(trace.residual_norms[0]) << ",nan,,\n";
  for (std::size_t i = 1; i <= 2; ++i) {
    expected << i << ',' << format_double(trace.residual_norms[i]) << ','
             << format_double(*trace.sigmas[i]) << ',' << format_double(trace.alphas[i - 1])
             << ',' << format_double(trace.betas[i - 1]) << '\n';
  }
  CHECK(out.str() == expected.str());
}
