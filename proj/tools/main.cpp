// steinpcg: command-line front end for the Stein-equation solver stack.
//
// Subcommands: sample, solve, estimate, sweep, large-n.  Every run is
// deterministic in its seed and thread-count invariant; all CSV output uses
// shortest round-trip float formatting.  Exit codes: 0 success, 1 runtime
// failure, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "stein/estimator.hpp"
#include "stein/format.hpp"
#include "stein/large_n.hpp"
#include "stein/logistic.hpp"
#include "stein/low_rank.hpp"
#include "stein/rng.hpp"
#include "stein/sample_set.hpp"
#include "stein/solver.hpp"
#include "stein/sweep.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  return out;
}

// ---- solve/estimate shared plumbing -----------------------------------------

struct KernelOptions {
  double length_scale = 1.0;
  Eigen::Index bandwidth = 0;  // 0 = auto from the memory budget
};

struct PrecondOptions {
  std::string family = "none";
  Eigen::Index block_size = 1;
  Eigen::Index inducing = 0;
  double nugget = 1e-2;
  Eigen::Index rank = 10;
  std::uint64_t seed = 0;
};

struct CriterionOptions {
  std::string criterion = "residual";  // residual | ground-truth | fixed
  double tau_residual = 1e-8;
  double tau_sigma = 1.01;
  Eigen::Index max_iterations = 0;
  Eigen::Index dense_limit = 5000;
};

void add_kernel_options(CLI::App& cmd, KernelOptions& opts) {
  cmd.add_option("--l", opts.length_scale, "Kernel length scale")->check(CLI::PositiveNumber);
  cmd.add_option("--bandwidth", opts.bandwidth,
                 "Rows per matrix-action batch (0 = fit a 256 MiB budget)");
}

void add_precond_options(CLI::App& cmd, PrecondOptions& opts) {
  cmd.add_option("--precond", opts.family,
                 "Preconditioner family: none|jacobi|nystrom|nystrom-diag|fitc|rand-nystrom|rand-svd|spectral");
  cmd.add_option("--b", opts.block_size, "Jacobi block size");
  cmd.add_option("--n", opts.inducing, "Inducing-node / sketch count (0 = ceil(sqrt(N)))");
  cmd.add_option("--eta", opts.nugget, "Woodbury nugget eta")->check(CLI::PositiveNumber);
  cmd.add_option("--r", opts.rank, "Spectral clamp rank");
  cmd.add_option("--precond-seed", opts.seed, "Seed for node sampling / sketches");
}

void add_criterion_options(CLI::App& cmd, CriterionOptions& opts) {
  cmd.add_option("--criterion", opts.criterion, "Stop rule: residual|ground-truth|fixed")
      ->check(CLI::IsMember({"residual", "ground-truth", "fixed"}));
  cmd.add_option("--tol", opts.tau_residual, "Residual ratio threshold")->check(CLI::PositiveNumber);
  cmd.add_option("--tau", opts.tau_sigma, "Ground-truth sigma ratio threshold");
  cmd.add_option("--max-iters", opts.max_iterations, "Iteration cap (0 = 10N)");
  cmd.add_option("--dense-limit", opts.dense_limit,
                 "Largest N the ground-truth criterion may factor densely");
}

stein::PrecondConfig to_precond_config(const PrecondOptions& opts) {
  stein::PrecondConfig config;
  config.family = stein::parse_family(opts.family);
  config.block_size = opts.block_size;
  config.inducing = opts.inducing;
  config.nugget = opts.nugget;
  config.spectral_rank = opts.rank;
  config.seed = opts.seed;
  return config;
}

struct SolveOutcome {
  stein::SolveTrace trace;
  std::string preconditioner;
};

SolveOutcome run_solve(const stein::SampleSet& samples, const KernelOptions& kernel_opts,
                       const PrecondOptions& precond_opts, const CriterionOptions& crit_opts,
                       bool record_trace) {
  const stein::SteinKernel kernel{
      stein::BaseKernel(stein::make_profile("imq"), kernel_opts.length_scale)};
  const stein::KernelAction action(samples, kernel, kernel_opts.bandwidth);

  stein::SolveConfig config;
  config.max_iterations = crit_opts.max_iterations;
  config.record_trace = record_trace;
  if (crit_opts.criterion == "residual") {
    config.criterion = stein::ResidualRatioCriterion{crit_opts.tau_residual};
  } else if (crit_opts.criterion == "fixed") {
    config.criterion = stein::FixedIterationsCriterion{};
  } else {
    if (samples.size() > crit_opts.dense_limit) {
      throw UsageError("--criterion ground-truth needs N <= dense limit (" +
                       std::to_string(crit_opts.dense_limit) + "), got N = " +
                       std::to_string(samples.size()));
    }
    const stein::DenseSolution dense = stein::dense_solve(samples, kernel, crit_opts.dense_limit);
    config.criterion = stein::GroundTruthRatioCriterion{crit_opts.tau_sigma, dense.sigma};
  }

  SolveOutcome outcome;
  const auto preconditioner = stein::make_preconditioner(to_precond_config(precond_opts), action);
  outcome.preconditioner = preconditioner->descriptor();
  if (!preconditioner->note().empty()) {
    std::cerr << "note: " << preconditioner->note() << "\n";
  }
  outcome.trace = stein::pcg(action, *preconditioner, Eigen::VectorXd::Ones(samples.size()), config);
  return outcome;
}

void print_solve_summary(const stein::SampleSet& samples, const SolveOutcome& outcome) {
  const auto& trace = outcome.trace;
  std::cout << "nodes " << samples.size() << "\n"
            << "preconditioner " << outcome.preconditioner << "\n"
            << "iterations " << trace.iterations << "\n"
            << "reason " << stein::to_string(trace.reason) << "\n"
            << "residual " << stein::format_double(trace.residual_norms.back()) << "\n";
  if (const auto sigma = trace.final_sigma()) {
    std::cout << "sigma " << stein::format_double(*sigma) << "\n";
  }
}

// ---- subcommand: sample ------------------------------------------------------

struct SampleArgs {
  int dimension = 4;
  Eigen::Index data_count = 1000;
  std::uint64_t iterations = 50000;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  double step_size = 0.0;
  std::string distinct = "all";
  std::string output;
};

int cmd_sample(const SampleArgs& args) {
  const double step =
      args.step_size > 0.0 ? args.step_size : stein::default_step_size(args.dimension);
  const auto target = stein::generate_logistic_data(args.dimension, args.data_count,
                                                    stein::derive_seed(args.seed, 0));
  stein::RwmhConfig chain_config;
  chain_config.step_size = step;
  chain_config.iterations = args.iterations;
  chain_config.burn_in = args.burn_in;
  chain_config.seed = stein::derive_seed(args.seed, 1);
  const stein::RwmhChain chain = stein::rwmh_sample(target, chain_config);

  std::optional<Eigen::Index> keep;
  if (args.distinct != "all") {
    const long long parsed = std::stoll(args.distinct);
    if (parsed < 1) throw UsageError("--distinct must be positive or 'all'");
    keep = static_cast<Eigen::Index>(parsed);
  }
  const stein::SampleSet samples = stein::distinct_prefix(chain, target, keep);
  stein::save_samples(samples, args.output);
  std::cout << "wrote " << args.output << "\n"
            << "iterations " << args.iterations << "\n"
            << "distinct " << samples.size() << "\n"
            << "acceptance " << stein::format_double(chain.acceptance_rate) << "\n"
            << "step " << stein::format_double(step) << "\n";
  return 0;
}

// ---- subcommand: solve -------------------------------------------------------

struct SolveArgs {
  std::string samples_path;
  KernelOptions kernel;
  PrecondOptions precond;
  CriterionOptions criterion;
  std::string trace_path;
};

int cmd_solve(const SolveArgs& args) {
  const stein::SampleSet samples = stein::load_samples(args.samples_path);
  const SolveOutcome outcome =
      run_solve(samples, args.kernel, args.precond, args.criterion, !args.trace_path.empty());
  print_solve_summary(samples, outcome);
  if (!args.trace_path.empty()) {
    auto out = open_output(args.trace_path);
    stein::write_trace_csv(outcome.trace, out);
    std::cout << "trace " << args.trace_path << "\n";
  }
  return 0;
}

// ---- subcommand: estimate ----------------------------------------------------

struct EstimateArgs {
  std::string samples_path;
  std::string integrand = "coord:1";
  KernelOptions kernel;
  PrecondOptions precond;
  CriterionOptions criterion;
  std::string csv_path;
};

int cmd_estimate(const EstimateArgs& args) {
  const stein::SampleSet samples = stein::load_samples(args.samples_path);
  const stein::Integrand integrand = stein::parse_integrand(args.integrand);

  const stein::SteinKernel kernel{
      stein::BaseKernel(stein::make_profile("imq"), args.kernel.length_scale)};
  const stein::KernelAction action(samples, kernel, args.kernel.bandwidth);
  const SolveOutcome outcome = run_solve(samples, args.kernel, args.precond, args.criterion, false);
  const stein::EstimateWithBound estimate =
      stein::estimate_with_bound(integrand, samples, action, outcome.trace);

  const std::string estimate_str =
      estimate.estimate ? stein::format_double(*estimate.estimate) : "nan";
  const std::string sigma_str = estimate.sigma ? stein::format_double(*estimate.sigma) : "nan";
  std::cout << "integrand " << integrand.name() << "\n"
            << "estimate " << estimate_str << "\n"
            << "sigma " << sigma_str << "\n"
            << "iterations " << outcome.trace.iterations << "\n"
            << "reason " << stein::to_string(outcome.trace.reason) << "\n";
  if (!args.csv_path.empty()) {
    auto out = open_output(args.csv_path);
    out << "integrand,estimate,sigma,iterations,reason\n"
        << integrand.name() << ',' << estimate_str << ',' << sigma_str << ','
        << outcome.trace.iterations << ',' << stein::to_string(outcome.trace.reason) << "\n";
  }
  return 0;
}

// ---- subcommand: sweep ---------------------------------------------------------

struct SweepArgs {
  std::string profile = "desk";
  int dimension = 4;
  Eigen::Index data_count = 1000;
  Eigen::Index nodes = 0;        // 0 = per profile
  Eigen::Index replicates = 0;   // 0 = per profile
  double step_size = 0.0;
  double tau = 1.01;
  Eigen::Index max_iterations = 0;
  Eigen::Index inducing = 50;
  std::uint64_t seed = 0;
  std::vector<double> length_scales;
  std::vector<std::string> families;
  std::string output;
};

int cmd_sweep(const SweepArgs& args) {
  stein::SweepConfig config;
  config.dimension = args.dimension;
  config.data_count = args.data_count;
  config.step_size = args.step_size;
  config.tau = args.tau;
  config.max_iterations = args.max_iterations;
  config.master_seed = args.seed;
  if (args.profile == "paper") {
    config.nodes = 1000;
    config.replicates = 50;
  } else if (args.profile != "desk") {
    throw UsageError("--profile must be desk or paper");
  }
  if (args.nodes > 0) config.nodes = args.nodes;
  if (args.replicates > 0) config.replicates = args.replicates;
  if (!args.length_scales.empty()) config.length_scales = args.length_scales;

  config.families = stein::default_family_grids(args.inducing);
  if (!args.families.empty()) {
    std::vector<stein::FamilyGrid> picked;
    for (const auto& name : args.families) {
      const stein::PrecondFamily family = stein::parse_family(name);
      for (const auto& grid : config.families) {
        if (grid.family == family) picked.push_back(grid);
      }
    }
    if (picked.empty()) throw UsageError("--families selected nothing");
    config.families = std::move(picked);
  }

  const stein::SweepResult result = stein::run_sweep(config);
  auto out = open_output(args.output);
  stein::write_sweep_csv(result, out);
  std::cout << "wrote " << args.output << "\n"
            << "cells " << result.cells.size() << "\n"
            << "replicates " << config.replicates << "\n";
  return 0;
}

// ---- subcommand: large-n -------------------------------------------------------

struct LargeNArgs {
  std::string profile = "desk";
  int dimension = 4;
  Eigen::Index data_count = 1000;
  std::uint64_t iterations = 0;  // 0 = per profile
  double step_size = 0.0;
  double length_scale = 1.0;
  Eigen::Index block_size = 1;
  double tolerance = 1e-8;
  Eigen::Index max_iterations = 0;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_large_n(const LargeNArgs& args) {
  stein::LargeNConfig config;
  config.dimension = args.dimension;
  config.data_count = args.data_count;
  config.step_size = args.step_size;
  config.length_scale = args.length_scale;
  config.jacobi_block = args.block_size;
  config.residual_tolerance = args.tolerance;
  config.max_iterations = args.max_iterations;
  config.master_seed = args.seed;
  if (args.profile == "paper") {
    config.mcmc_iterations = 50000;
  } else if (args.profile == "desk") {
    config.mcmc_iterations = 10000;
  } else {
    throw UsageError("--profile must be desk or paper");
  }
  if (args.iterations > 0) config.mcmc_iterations = args.iterations;

  const stein::LargeNResult result = stein::large_n_study(config);
  auto out = open_output(args.output);
  stein::write_large_n_csv(result, out);
  std::cout << "wrote " << args.output << "\n"
            << "nodes " << result.nodes << "\n"
            << "acceptance " << stein::format_double(result.acceptance_rate) << "\n"
            << "cg-iterations " << result.cg_trace.iterations << "\n"
            << "pcg-iterations " << result.pcg_trace.iterations << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-free Stein-equation solver and benchmark harness"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (INI/TOML; command-line flags win)");
  app.allow_config_extras(false);

  int threads = 0;
  app.add_option("--threads", threads, "Cap worker threads (0 = all cores)");

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Run RWMH on a synthetic logistic posterior");
  sample->add_option("--d", sample_args.dimension, "Posterior dimension")->check(CLI::PositiveNumber);
  sample->add_option("--n-data", sample_args.data_count, "Logistic observations")
      ->check(CLI::PositiveNumber);
  sample->add_option("--iters", sample_args.iterations, "MCMC iterations");
  sample->add_option("--burn-in", sample_args.burn_in, "Iterations to discard");
  sample->add_option("--seed", sample_args.seed, "Master seed (data + chain derived)");
  sample->add_option("--step", sample_args.step_size, "Proposal step size (0 = tuned default)");
  sample->add_option("--distinct", sample_args.distinct, "Keep first K distinct states, or 'all'");
  sample->add_option("-o,--output", sample_args.output, "Output sample file")->required();

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve K_p w = 1 by (preconditioned) CG");
  solve->add_option("--samples", solve_args.samples_path, "Input sample file")->required();
  add_kernel_options(*solve, solve_args.kernel);
  add_precond_options(*solve, solve_args.precond);
  add_criterion_options(*solve, solve_args.criterion);
  solve->add_option("--trace", solve_args.trace_path, "Write per-iteration trace CSV here");

  EstimateArgs estimate_args;
  auto* estimate = app.add_subcommand("estimate", "Posterior expectation with worst-case bound");
  estimate->add_option("--samples", estimate_args.samples_path, "Input sample file")->required();
  estimate->add_option("--integrand", estimate_args.integrand,
                       "coord:<i> | sqnorm | const:<v> | file:<path>");
  add_kernel_options(*estimate, estimate_args.kernel);
  add_precond_options(*estimate, estimate_args.precond);
  add_criterion_options(*estimate, estimate_args.criterion);
  estimate->add_option("--csv", estimate_args.csv_path, "Also write a machine-readable CSV row");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Gain grid over length scales and family parameters");
  sweep->add_option("--profile", sweep_args.profile, "desk (N=300, 10 reps) or paper (N=1000, 50 reps)");
  sweep->add_option("--d", sweep_args.dimension, "Posterior dimension")->check(CLI::PositiveNumber);
  sweep->add_option("--n-data", sweep_args.data_count, "Logistic observations");
  sweep->add_option("--nodes", sweep_args.nodes, "Distinct nodes per replicate (overrides profile)");
  sweep->add_option("--replicates", sweep_args.replicates, "Replicates (overrides profile)");
  sweep->add_option("--step", sweep_args.step_size, "Proposal step size (0 = tuned default)");
  sweep->add_option("--tau", sweep_args.tau, "Ground-truth sigma ratio threshold");
  sweep->add_option("--max-iters", sweep_args.max_iterations, "Per-solve cap (0 = 5N)");
  sweep->add_option("--inducing", sweep_args.inducing, "Inducing/sketch count for low-rank families");
  sweep->add_option("--seed", sweep_args.seed, "Master seed");
  sweep->add_option("--l-grid", sweep_args.length_scales, "Length-scale grid (comma separated)")
      ->delimiter(',');
  sweep->add_option("--families", sweep_args.families, "Subset of families (comma separated)")
      ->delimiter(',');
  sweep->add_option("-o,--output", sweep_args.output, "Output CSV")->required();

  LargeNArgs large_args;
  auto* large = app.add_subcommand("large-n", "Paired CG/Jacobi traces on an MCMC-scale node set");
  large->add_option("--profile", large_args.profile, "desk (1e4 iters) or paper (5e4 iters)");
  large->add_option("--d", large_args.dimension, "Posterior dimension")->check(CLI::PositiveNumber);
  large->add_option("--n-data", large_args.data_count, "Logistic observations");
  large->add_option("--iters", large_args.iterations, "MCMC iterations (overrides profile)");
  large->add_option("--step", large_args.step_size, "Proposal step size (0 = tuned default)");
  large->add_option("--l", large_args.length_scale, "Kernel length scale")
      ->check(CLI::PositiveNumber);
  large->add_option("--b", large_args.block_size, "Jacobi block size");
  large->add_option("--tol", large_args.tolerance, "Residual ratio threshold");
  large->add_option("--max-iters", large_args.max_iterations, "Iteration cap (0 = 10N)");
  large->add_option("--seed", large_args.seed, "Master seed");
  large->add_option("-o,--output", large_args.output, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (sample->parsed()) return cmd_sample(sample_args);
    if (solve->parsed()) return cmd_solve(solve_args);
    if (estimate->parsed()) return cmd_estimate(estimate_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (large->parsed()) return cmd_large_n(large_args);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
