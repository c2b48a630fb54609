#include "stein/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stein {

double Rng::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % bound;
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
  return v;
}

Eigen::MatrixXd Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
  }
  return m;
}

std::vector<Eigen::Index> sample_without_replacement(Eigen::Index pool, Eigen::Index n, Rng& rng) {
  if (n < 0 || n > pool) {
    throw std::invalid_argument("sample_without_replacement: need 0 <= n <= pool");
  }
  // Partial Fisher-Yates over an index array; cost O(pool + n).
  std::vector<Eigen::Index> indices(static_cast<std::size_t>(pool));
  for (Eigen::Index i = 0; i < pool; ++i) indices[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.uniform_below(static_cast<std::uint64_t>(pool - i)));
    std::swap(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
  }
  indices.resize(static_cast<std::size_t>(n));
  std::sort(indices.begin(), indices.end());
  return indices;
}

std::vector<Eigen::Index> weighted_sample_without_replacement(const Eigen::VectorXd& weights,
                                                              Eigen::Index n, Rng& rng) {
  const Eigen::Index pool = weights.size();
  if (n < 0 || n > pool) {
    throw std::invalid_argument("weighted_sample_without_replacement: need 0 <= n <= pool");
  }
  if ((weights.array() <= 0.0).any() || !weights.allFinite()) {
    throw std::invalid_argument("weighted_sample_without_replacement: weights must be finite and positive");
  }
  std::vector<Eigen::Index> selected;
  selected.reserve(static_cast<std::size_t>(n));
  Eigen::VectorXd w = weights;
  double total = w.sum();
  for (Eigen::Index draw = 0; draw < n; ++draw) {
    // Inverse-CDF walk over the remaining mass; O(pool) per draw.
    const double u = rng.uniform() * total;
    double acc = 0.0;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < pool; ++i) {
      if (w(i) == 0.0) continue;
      acc += w(i);
      if (u < acc) {
        pick = i;
        break;
      }
    }
    if (pick < 0) {  // u landed on accumulated rounding; take the last live index
      for (Eigen::Index i = pool - 1; i >= 0; --i) {
        if (w(i) > 0.0) {
          pick = i;
          break;
        }
      }
    }
    selected.push_back(pick);
    total -= w(pick);
    w(pick) = 0.0;
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace stein
