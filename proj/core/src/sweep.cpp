#include "stein/sweep.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "stein/format.hpp"
#include "stein/logistic.hpp"
#include "stein/rng.hpp"
#include "stein/solver.hpp"

namespace stein {
namespace {

PrecondConfig cell_config(const FamilyGrid& grid, double param_value, std::uint64_t seed) {
  PrecondConfig config;
  config.family = grid.family;
  config.seed = seed;
  config.inducing = grid.inducing;
  if (grid.param_name == "b") {
    config.block_size = static_cast<Eigen::Index>(param_value);
  } else if (grid.param_name == "eta") {
    config.nugget = param_value;
  } else if (grid.param_name == "r") {
    config.spectral_rank = static_cast<Eigen::Index>(param_value);
  } else if (grid.param_name != "none") {
    throw std::invalid_argument("run_sweep: unknown parameter name '" + grid.param_name + "'");
  }
  return config;
}

}  // namespace

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate out;
  out.count = static_cast<Eigen::Index>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  out.mean = mean;
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    const double sample_var = ss / static_cast<double>(values.size() - 1);
    out.std_error = std::sqrt(sample_var / static_cast<double>(values.size()));
  }
  return out;
}

std::vector<double> default_length_scales() { return {1e-2, 1e-1, 1.0, 1e1, 1e2}; }

std::vector<FamilyGrid> default_family_grids(Eigen::Index inducing) {
  const std::vector<double> etas = {1e-4, 1e-2, 1.0, 1e2, 1e4};
  const std::vector<double> blocks = {1, 2, 3, 4, 5};
  const std::vector<double> ranks = {10, 20, 30, 40, 50};
  std::vector<FamilyGrid> grids;
  grids.push_back({PrecondFamily::none, "none", {0.0}, inducing});
  grids.push_back({PrecondFamily::jacobi, "b", blocks, inducing});
  grids.push_back({PrecondFamily::nystrom, "eta", etas, inducing});
  grids.push_back({PrecondFamily::nystrom_diag, "eta", etas, inducing});
  grids.push_back({PrecondFamily::fitc, "eta", etas, inducing});
  grids.push_back({PrecondFamily::rand_nystrom, "eta", etas, inducing});
  grids.push_back({PrecondFamily::rand_svd, "eta", etas, inducing});
  grids.push_back({PrecondFamily::spectral, "r", ranks, inducing});
  return grids;
}

SweepResult run_sweep(const SweepConfig& config) {
  if (config.replicates < 1) throw std::invalid_argument("run_sweep: need at least one replicate");
  if (config.length_scales.empty() || config.families.empty()) {
    throw std::invalid_argument("run_sweep: empty grid");
  }
  if (config.nodes > config.dense_limit) {
    throw std::invalid_argument("run_sweep: the ground-truth criterion needs nodes <= dense limit");
  }
  for (const FamilyGrid& grid : config.families) {
    if (grid.param_name != "none" && grid.param_name != "b" && grid.param_name != "eta" &&
        grid.param_name != "r") {
      throw std::invalid_argument("run_sweep: unknown parameter name '" + grid.param_name + "'");
    }
    if (grid.param_values.empty()) {
      throw std::invalid_argument("run_sweep: family grid without parameter values");
    }
  }
  const double step =
      config.step_size > 0.0 ? config.step_size : default_step_size(config.dimension);
  const Eigen::Index max_iterations =
      config.max_iterations > 0 ? config.max_iterations : 5 * config.nodes;

  // Flat cell order (family, l, param) — the CSV row order.
  struct CellRef {
    std::size_t family;
    std::size_t l;
    std::size_t param;
  };
  std::vector<CellRef> cell_refs;
  for (std::size_t f = 0; f < config.families.size(); ++f) {
    for (std::size_t l = 0; l < config.length_scales.size(); ++l) {
      for (std::size_t p = 0; p < config.families[f].param_values.size(); ++p) {
        cell_refs.push_back({f, l, p});
      }
    }
  }

  SweepResult result;
  result.config = config;
  result.records.resize(cell_refs.size() * static_cast<std::size_t>(config.replicates));

  // Phase A: one data set + node set per replicate, reused across length
  // scales.  Seeds: rep -> (data, chain) via a fixed derive_seed chain.
  std::vector<SampleSet> node_sets;
  node_sets.reserve(static_cast<std::size_t>(config.replicates));
  for (Eigen::Index rep = 0; rep < config.replicates; ++rep) {
    const std::uint64_t rep_seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(rep));
    const auto target =
        generate_logistic_data(config.dimension, config.data_count, derive_seed(rep_seed, 0));
    node_sets.push_back(
        sample_until_distinct(target, step, config.nodes, derive_seed(rep_seed, 1)));
  }

  // Phase B: independent (replicate, length-scale) shards.  Each shard does
  // one dense reference solve and one plain CG run, shared by all its cells.
  // Results land in preallocated slots keyed by (cell, replicate), so the
  // outcome does not depend on scheduling.
  const auto shards = static_cast<Eigen::Index>(config.length_scales.size()) * config.replicates;
  const auto profile = make_profile("imq");

#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index shard = 0; shard < shards; ++shard) {
    const auto rep = shard / static_cast<Eigen::Index>(config.length_scales.size());
    const auto l_idx =
        static_cast<std::size_t>(shard % static_cast<Eigen::Index>(config.length_scales.size()));
    const double length_scale = config.length_scales[l_idx];
    const std::uint64_t rep_seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(rep));
    const std::uint64_t shard_seed = derive_seed(rep_seed, 2 + static_cast<std::uint64_t>(l_idx));

    auto record_slot = [&](std::size_t c) -> GainRecord& {
      return result.records[c * static_cast<std::size_t>(config.replicates) +
                            static_cast<std::size_t>(rep)];
    };
    auto stamp = [&](std::size_t c) {
      const FamilyGrid& grid = config.families[cell_refs[c].family];
      GainRecord& record = record_slot(c);
      record.family = grid.family;
      record.length_scale = length_scale;
      record.param_name = grid.param_name;
      record.param_value = grid.param_values[cell_refs[c].param];
      record.replicate = rep;
    };

    // Nothing may escape this OpenMP body; a shard-level failure (e.g. a
    // dense factorization breakdown) censors every cell of the shard.
    try {
      const SampleSet& samples = node_sets[static_cast<std::size_t>(rep)];
      const SteinKernel kernel{BaseKernel(profile, length_scale)};
      const KernelAction action(samples, kernel);

      // Minimum-norm reference rather than Cholesky: the large-length-scale
      // systems in the grid are numerically singular, where an LLT solve
      // either fails outright or returns an inflated weight vector whose
      // sigma no iterate can reach.  The pseudo-inverse sigma matches the
      // Cholesky one on well-conditioned shards.
      const DenseSolution dense = dense_solve_minimum_norm(samples, kernel, config.dense_limit);
      SolveConfig solve_config;
      solve_config.criterion = GroundTruthRatioCriterion{config.tau, dense.sigma};
      solve_config.max_iterations = max_iterations;

      const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(samples.size());
      const SolveTrace cg_trace = cg(action, rhs, solve_config);
      const bool cg_censored = cg_trace.reason != TerminationReason::converged;

      for (std::size_t c = 0; c < cell_refs.size(); ++c) {
        if (cell_refs[c].l != l_idx) continue;
        stamp(c);
        GainRecord& record = record_slot(c);
        record.m_cg = cg_trace.iterations;
        try {
          const FamilyGrid& grid = config.families[cell_refs[c].family];
          const auto preconditioner = make_preconditioner(
              cell_config(grid, record.param_value,
                          derive_seed(shard_seed, static_cast<std::uint64_t>(c))),
              action);
          const SolveTrace pcg_trace = pcg(action, *preconditioner, rhs, solve_config);
          record.m_pcg = pcg_trace.iterations;
          record.censored = cg_censored || pcg_trace.reason != TerminationReason::converged;
        } catch (const std::exception&) {
          record.m_pcg = max_iterations;
          record.censored = true;
        }
        record.gain = gain(record.m_cg, record.m_pcg);
      }
    } catch (const std::exception&) {
      for (std::size_t c = 0; c < cell_refs.size(); ++c) {
        if (cell_refs[c].l != l_idx) continue;
        stamp(c);
        GainRecord& record = record_slot(c);
        record.m_cg = max_iterations;
        record.m_pcg = max_iterations;
        record.gain = gain(record.m_cg, record.m_pcg);
        record.censored = true;
      }
    }
  }

  // Aggregate cells in flat order.
  result.cells.reserve(cell_refs.size());
  for (std::size_t c = 0; c < cell_refs.size(); ++c) {
    const FamilyGrid& grid = config.families[cell_refs[c].family];
    SweepCell cell;
    cell.family = grid.family;
    cell.length_scale = config.length_scales[cell_refs[c].l];
    cell.param_name = grid.param_name;
    cell.param_value = grid.param_values[cell_refs[c].param];
    std::vector<double> usable;
    for (Eigen::Index rep = 0; rep < config.replicates; ++rep) {
      const GainRecord& record =
          result.records[c * static_cast<std::size_t>(config.replicates) +
                         static_cast<std::size_t>(rep)];
      if (record.censored) {
        ++cell.censored;
      } else {
        usable.push_back(record.gain);
      }
    }
    const Aggregate agg = aggregate(usable);
    cell.mean_gain = agg.mean;
    cell.stderr_gain = agg.std_error;
    cell.replicates_used = agg.count;
    result.cells.push_back(std::move(cell));
  }
  return result;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "family,l,param_name,param_value,mean_gain,stderr,replicates,censored\n";
  for (const SweepCell& cell : result.cells) {
    out << to_string(cell.family) << ',' << format_double(cell.length_scale) << ','
        << cell.param_name << ',' << format_double(cell.param_value) << ','
        << (cell.mean_gain ? format_double(*cell.mean_gain) : "nan") << ','
        << (cell.stderr_gain ? format_double(*cell.stderr_gain) : "nan") << ','
        << cell.replicates_used << ',' << cell.censored << '\n';
  }
}

}  // namespace stein
