#pragma once

#include <cstddef>

#include "stein/stein_kernel.hpp"

namespace stein {

// Minimal linear-map interface the solver works against.  Production code
// uses KernelAction; tests substitute dense or synthetic operators.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index size() const = 0;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& v) const = 0;
};

// Matrix-free action v -> K_p v.
//
// The N x N Stein kernel matrix is never stored.  apply() materialises
// row batches of at most `bandwidth` rows, multiplies each against the full
// input vector, and drops the batch, so extra memory is O(bandwidth * N)
// at any node count.
//
// Determinism: each row is filled and reduced with a fixed per-row
// accumulation order (vector kernels over the node axis, score contractions
// as d-step column sweeps), and rows never share accumulators.  Results are
// therefore bit-identical for any bandwidth and any thread count.
//
// Holds a reference to the SampleSet, which must outlive the action.
class KernelAction final : public LinearOperator {
 public:
  // bandwidth <= 0 selects rows_for_budget with the default 256 MiB cap.
  KernelAction(const SampleSet& samples, SteinKernel kernel, Eigen::Index bandwidth = 0);

  // Largest row count whose batch fits in budget_bytes (at least 1).
  static Eigen::Index rows_for_budget(Eigen::Index n, std::size_t budget_bytes);

  Eigen::Index size() const override { return samples_->size(); }
  Eigen::Index bandwidth() const { return bandwidth_; }
  const SampleSet& samples() const { return *samples_; }
  const SteinKernel& kernel() const { return kernel_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const override;

  // Row i of K_p (= column i by symmetry); used by preconditioner setups.
  Eigen::VectorXd row(Eigen::Index i) const;

  // Diagonal of K_p via the closed form, never via row().
  Eigen::VectorXd diagonal() const;

 private:
  struct RowScratch;

  // Fills out[0..N) with row i of K_p using caller-provided scratch.
  void fill_row(Eigen::Index i, RowScratch& scratch, double* out) const;

  const SampleSet* samples_;
  SteinKernel kernel_;
  Eigen::Index bandwidth_;
  Eigen::VectorXd sq_norms_;   // |x_n|^2 per node
  Eigen::VectorXd xg_dots_;    // x_n . g_n per node
};

}  // namespace stein
