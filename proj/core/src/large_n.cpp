#include "stein/large_n.hpp"

#include <algorithm>
#include <ostream>

#include "stein/format.hpp"
#include "stein/jacobi.hpp"
#include "stein/logistic.hpp"
#include "stein/rng.hpp"

namespace stein {

LargeNResult large_n_study(const LargeNConfig& config) {
  const double step =
      config.step_size > 0.0 ? config.step_size : default_step_size(config.dimension);
  const std::uint64_t seed_data = derive_seed(config.master_seed, 0);
  const std::uint64_t seed_chain = derive_seed(config.master_seed, 1);

  const auto target = generate_logistic_data(config.dimension, config.data_count, seed_data);
  RwmhConfig chain_config;
  chain_config.step_size = step;
  chain_config.iterations = config.mcmc_iterations;
  chain_config.seed = seed_chain;
  const RwmhChain chain = rwmh_sample(target, chain_config);
  const SampleSet samples = distinct_prefix(chain, target);

  const SteinKernel kernel{BaseKernel(make_profile("imq"), config.length_scale)};
  const KernelAction action(samples, kernel);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(samples.size());

  SolveConfig solve_config;
  solve_config.criterion = ResidualRatioCriterion{config.residual_tolerance};
  solve_config.max_iterations = config.max_iterations;
  solve_config.record_trace = true;

  LargeNResult result;
  result.nodes = samples.size();
  result.acceptance_rate = chain.acceptance_rate;
  result.cg_trace = cg(action, rhs, solve_config);
  const BlockJacobiPreconditioner jacobi(action, config.jacobi_block);
  result.pcg_trace = pcg(action, jacobi, rhs, solve_config);
  return result;
}

void write_large_n_csv(const LargeNResult& result, std::ostream& out) {
  auto field = [](const SolveTrace& trace, std::size_t i, bool sigma) -> std::string {
    if (i >= trace.residual_norms.size()) return "nan";
    if (!sigma) return format_double(trace.residual_norms[i]);
    if (i < trace.sigmas.size() && trace.sigmas[i]) return format_double(*trace.sigmas[i]);
    return "nan";
  };
  out << "iter,res_cg,sigma_cg,res_pcg,sigma_pcg\n";
  const std::size_t rows =
      std::max(result.cg_trace.residual_norms.size(), result.pcg_trace.residual_norms.size());
  for (std::size_t i = 0; i < rows; ++i) {
    out << i << ',' << field(result.cg_trace, i, false) << ',' << field(result.cg_trace, i, true)
        << ',' << field(result.pcg_trace, i, false) << ',' << field(result.pcg_trace, i, true)
        << '\n';
  }
}

}  // namespace stein
