#include "stein/sample_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "stein/format.hpp"
#include "stein/rng.hpp"

namespace stein {
namespace {

bool rows_equal(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m(a, j) != m(b, j)) return false;
  }
  return true;
}

std::uint64_t hash_row(const Eigen::MatrixXd& m, Eigen::Index i) {
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    std::uint64_t bits;
    const double v = m(i, j);
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h = mix64(h ^ bits);
  }
  return h;
}

// Index of an exact duplicate state row, or -1.  Hash buckets keep the scan
// O(N) expected even for chains with many rejections.
Eigen::Index find_duplicate_row(const Eigen::MatrixXd& m) {
  std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> buckets;
  buckets.reserve(static_cast<std::size_t>(m.rows()) * 2);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto& bucket = buckets[hash_row(m, i)];
    for (const Eigen::Index prior : bucket) {
      if (rows_equal(m, prior, i)) return i;
    }
    bucket.push_back(i);
  }
  return -1;
}

[[noreturn]] void fail_parse(const std::string& what) {
  throw std::runtime_error("load_samples: " + what);
}

std::vector<std::string> split_tokens(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream stream(line);
  while (std::getline(stream, token, sep)) out.push_back(token);
  return out;
}

SampleSet load_samples_csv(std::istream& in, const std::string& header) {
  const auto columns = split_tokens(header, ',');
  if (columns.size() < 2 || columns.size() % 2 != 0) {
    fail_parse("CSV header must hold columns x_1..x_d,g_1..g_d");
  }
  const auto d = static_cast<Eigen::Index>(columns.size() / 2);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto n = std::to_string(j + 1);
    if (columns[static_cast<std::size_t>(j)] != "x_" + n ||
        columns[static_cast<std::size_t>(d + j)] != "g_" + n) {
      fail_parse("CSV header must hold columns x_1..x_d,g_1..g_d");
    }
  }
  std::vector<double> values;
  std::string line;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tokens = split_tokens(line, ',');
    if (static_cast<Eigen::Index>(tokens.size()) != 2 * d) {
      fail_parse("CSV row " + std::to_string(rows + 1) + " has wrong column count");
    }
    for (const auto& token : tokens) values.push_back(parse_double(token));
    ++rows;
  }
  if (rows == 0) fail_parse("CSV holds no data rows");
  Eigen::MatrixXd x(rows, d), g(rows, d);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      x(i, j) = values[static_cast<std::size_t>(i * 2 * d + j)];
      g(i, j) = values[static_cast<std::size_t>(i * 2 * d + d + j)];
    }
  }
  ChainProvenance provenance;
  provenance.sampler = "csv-import";
  return SampleSet(std::move(x), std::move(g), std::move(provenance));
}

}  // namespace

SampleSet::SampleSet(Eigen::MatrixXd states, Eigen::MatrixXd gradients, ChainProvenance provenance)
    : states_(std::move(states)), gradients_(std::move(gradients)), provenance_(std::move(provenance)) {
  if (states_.rows() == 0 || states_.cols() == 0) {
    throw std::invalid_argument("SampleSet: empty node set");
  }
  if (states_.rows() != gradients_.rows() || states_.cols() != gradients_.cols()) {
    throw std::invalid_argument("SampleSet: states and gradients must have the same shape");
  }
  if (!states_.allFinite() || !gradients_.allFinite()) {
    throw std::invalid_argument("SampleSet: non-finite entries");
  }
  const Eigen::Index dup = find_duplicate_row(states_);
  if (dup >= 0) {
    throw std::invalid_argument("SampleSet: duplicate node at row " + std::to_string(dup) +
                                " (deduplicate the chain first)");
  }
}

SampleSet SampleSet::from_states(const TargetDensity& target, Eigen::MatrixXd states,
                                 ChainProvenance provenance) {
  Eigen::MatrixXd gradients(states.rows(), states.cols());
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    gradients.row(i) = target.score(states.row(i).transpose()).transpose();
  }
  return SampleSet(std::move(states), std::move(gradients), std::move(provenance));
}

bool SampleSet::gradients_consistent(const TargetDensity& target, double rel_tol) const {
  for (Eigen::Index i = 0; i < size(); ++i) {
    const Eigen::VectorXd expected = target.score(states_.row(i).transpose());
    const double scale = std::max(1.0, expected.norm());
    if ((gradients_.row(i).transpose() - expected).norm() > rel_tol * scale) return false;
  }
  return true;
}

SampleSet distinct_prefix(const RwmhChain& chain, const TargetDensity& target,
                          std::optional<Eigen::Index> count) {
  const Eigen::Index rows = chain.states.rows();
  if (rows == 0) throw std::invalid_argument("distinct_prefix: empty chain");

  std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> buckets;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < rows; ++i) {
    auto& bucket = buckets[hash_row(chain.states, i)];
    bool seen = false;
    for (const Eigen::Index prior : bucket) {
      if (rows_equal(chain.states, prior, i)) {
        seen = true;
        break;
      }
    }
    if (seen) continue;
    bucket.push_back(i);
    keep.push_back(i);
    if (count && static_cast<Eigen::Index>(keep.size()) == *count) break;
  }
  if (count && static_cast<Eigen::Index>(keep.size()) < *count) {
    throw std::runtime_error("distinct_prefix: chain holds only " + std::to_string(keep.size()) +
                             " distinct states, need " + std::to_string(*count));
  }

  Eigen::MatrixXd states(static_cast<Eigen::Index>(keep.size()), chain.states.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    states.row(static_cast<Eigen::Index>(i)) = chain.states.row(keep[i]);
  }
  ChainProvenance provenance;
  provenance.sampler = "rwmh";
  provenance.seed = chain.config.seed;
  provenance.step_size = chain.config.step_size;
  provenance.total_iterations = chain.config.burn_in + chain.config.iterations;
  provenance.burn_in = chain.config.burn_in;
  provenance.acceptance_rate = chain.acceptance_rate;
  return SampleSet::from_states(target, std::move(states), std::move(provenance));
}

SampleSet sample_until_distinct(const TargetDensity& target, double step_size,
                                Eigen::Index distinct, std::uint64_t seed,
                                std::uint64_t max_iterations) {
  if (distinct < 1) throw std::invalid_argument("sample_until_distinct: distinct must be positive");
  if (max_iterations == 0) max_iterations = 1000ull * static_cast<std::uint64_t>(distinct);

  // Run in doubling chunks so short chains stay cheap; the chain is restarted
  // from scratch each round, so the result depends only on (seed, length) of
  // the final round and stays deterministic.
  std::uint64_t iterations = std::max<std::uint64_t>(static_cast<std::uint64_t>(distinct), 64);
  for (;;) {
    iterations = std::min(iterations, max_iterations);
    RwmhConfig config;
    config.step_size = step_size;
    config.iterations = iterations;
    config.seed = seed;
    const RwmhChain chain = rwmh_sample(target, config);
    try {
      return distinct_prefix(chain, target, distinct);
    } catch (const std::runtime_error&) {
      if (iterations == max_iterations) {
        throw std::runtime_error("sample_until_distinct: fewer than " + std::to_string(distinct) +
                                 " distinct states after " + std::to_string(max_iterations) +
                                 " iterations; increase the cap or the step size");
      }
      iterations *= 2;
    }
  }
}

void save_samples(const SampleSet& samples, std::ostream& out) {
  const auto& p = samples.provenance();
  out << "steinsamples 1\n";
  out << "n " << samples.size() << "\n";
  out << "d " << samples.dimension() << "\n";
  out << "sampler " << p.sampler << "\n";
  out << "seed " << p.seed << "\n";
  out << "step " << format_double(p.step_size) << "\n";
  out << "iterations " << p.total_iterations << "\n";
  out << "burn_in " << p.burn_in << "\n";
  out << "acceptance " << format_double(p.acceptance_rate) << "\n";
  out << "begin data\n";
  const auto& x = samples.states();
  const auto& g = samples.gradients();
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(x(i, j));
    }
    for (Eigen::Index j = 0; j < g.cols(); ++j) out << ' ' << format_double(g(i, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_samples: write failed");
}

void save_samples(const SampleSet& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_samples: cannot open '" + path + "'");
  save_samples(samples, out);
}

SampleSet load_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail_parse("empty input");
  if (line != "steinsamples 1") {
    // CSV fallback: the first line must then be the x/g header.
    if (line.rfind("x_1,", 0) == 0) return load_samples_csv(in, line);
    fail_parse("unrecognized header '" + line + "'");
  }

  Eigen::Index n = -1, d = -1;
  ChainProvenance provenance;
  bool in_data = false;
  while (std::getline(in, line)) {
    if (line == "begin data") {
      in_data = true;
      break;
    }
    const auto space = line.find(' ');
    if (space == std::string::npos) fail_parse("malformed metadata line '" + line + "'");
    const std::string key = line.substr(0, space);
    const std::string value = line.substr(space + 1);
    if (key == "n") {
      n = static_cast<Eigen::Index>(std::stoll(value));
    } else if (key == "d") {
      d = static_cast<Eigen::Index>(std::stoll(value));
    } else if (key == "sampler") {
      provenance.sampler = value;
    } else if (key == "seed") {
      provenance.seed = std::stoull(value);
    } else if (key == "step") {
      provenance.step_size = parse_double(value);
    } else if (key == "iterations") {
      provenance.total_iterations = std::stoull(value);
    } else if (key == "burn_in") {
      provenance.burn_in = std::stoull(value);
    } else if (key == "acceptance") {
      provenance.acceptance_rate = parse_double(value);
    }
    // Unknown keys are ignored so the format can grow.
  }
  if (!in_data) fail_parse("missing 'begin data' sentinel");
  if (n < 1 || d < 1) fail_parse("missing or invalid n/d metadata");

  Eigen::MatrixXd x(n, d), g(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) fail_parse("data ends early at row " + std::to_string(i));
    std::istringstream row(line);
    std::string token;
    for (Eigen::Index j = 0; j < 2 * d; ++j) {
      if (!(row >> token)) fail_parse("row " + std::to_string(i) + " has too few values");
      const double value = parse_double(token);
      if (j < d) {
        x(i, j) = value;
      } else {
        g(i, j - d) = value;
      }
    }
    if (row >> token) fail_parse("row " + std::to_string(i) + " has too many values");
  }
  return SampleSet(std::move(x), std::move(g), std::move(provenance));
}

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_samples: cannot open '" + path + "'");
  return load_samples(in);
}

}  // namespace stein
