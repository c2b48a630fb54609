#include "stein/kernel_action.hpp"

#include <algorithm>
#include <stdexcept>

namespace stein {

namespace {
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

// Per-thread scratch: four score/state contractions plus profile batches.
struct KernelAction::RowScratch {
  explicit RowScratch(Eigen::Index n) : xx(n), gx(n), xg(n), gg(n), t(n), p0(n), p1(n), p2(n) {}
  Eigen::VectorXd xx;  // X . x_i
  Eigen::VectorXd gx;  // G . x_i
  Eigen::VectorXd xg;  // X . g_i
  Eigen::VectorXd gg;  // G . g_i
  Eigen::ArrayXd t, p0, p1, p2;
};

KernelAction::KernelAction(const SampleSet& samples, SteinKernel kernel, Eigen::Index bandwidth)
    : samples_(&samples), kernel_(std::move(kernel)) {
  const Eigen::Index n = samples.size();
  bandwidth_ = bandwidth <= 0 ? rows_for_budget(n, std::size_t{256} << 20)
                              : std::min(bandwidth, n);

  // Node-wise invariants of the quadratic form, accumulated column-by-column
  // in the same order fill_row uses for its contractions.
  const auto& x = samples.states();
  const auto& g = samples.gradients();
  sq_norms_ = Eigen::VectorXd::Zero(n);
  xg_dots_ = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    sq_norms_.array() += x.col(k).array() * x.col(k).array();
    xg_dots_.array() += x.col(k).array() * g.col(k).array();
  }
}

Eigen::Index KernelAction::rows_for_budget(Eigen::Index n, std::size_t budget_bytes) {
  if (n < 1) throw std::invalid_argument("rows_for_budget: empty node set");
  const auto per_row = static_cast<std::size_t>(n) * sizeof(double);
  const auto rows = static_cast<Eigen::Index>(budget_bytes / std::max<std::size_t>(per_row, 1));
  return std::clamp<Eigen::Index>(rows, 1, n);
}

void KernelAction::fill_row(Eigen::Index i, RowScratch& s, double* out) const {
  const auto& x = samples_->states();
  const auto& g = samples_->gradients();
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double l = kernel_.base().length_scale();
  const double inv_ll = 1.0 / (l * l);

  // Contract states and scores against node i as d axpy sweeps over the
  // node axis; the k-order is fixed, so results do not depend on batching.
  s.xx.setZero();
  s.gx.setZero();
  s.xg.setZero();
  s.gg.setZero();
  for (Eigen::Index k = 0; k < d; ++k) {
    const double xik = x(i, k);
    const double gik = g(i, k);
    s.xx += x.col(k) * xik;
    s.gx += g.col(k) * xik;
    s.xg += x.col(k) * gik;
    s.gg += g.col(k) * gik;
  }

  // Squared scaled distances, clamped against rounding at the diagonal.
  s.t = ((sq_norms_.array() - 2.0 * s.xx.array() + sq_norms_(i)) * inv_ll).max(0.0);
  kernel_.base().profile().eval_batch(s.t, s.p0, s.p1, s.p2);

  // k_p row: mixed divergence + score cross terms + kernel-weighted score dot.
  // (x_i - x_j) . (g_i - g_j) expands into the four cached contractions.
  const double dd = static_cast<double>(d);
  Eigen::Map<Eigen::ArrayXd> row(out, n);
  row = (-2.0 * dd * inv_ll) * s.p1 - (4.0 * inv_ll) * (s.t * s.p2) +
        (-2.0 * inv_ll) * (s.p1 * (xg_dots_(i) - s.gx.array() - s.xg.array() + xg_dots_.array())) +
        s.p0 * s.gg.array();
}

Eigen::VectorXd KernelAction::apply(const Eigen::VectorXd& v) const {
  const Eigen::Index n = size();
  if (v.size() != n) throw std::invalid_argument("KernelAction::apply: vector length mismatch");

  Eigen::VectorXd result(n);
  RowMatrixXd batch(bandwidth_, n);
  for (Eigen::Index start = 0; start < n; start += bandwidth_) {
    const Eigen::Index rows = std::min(bandwidth_, n - start);
#pragma omp parallel
    {
      RowScratch scratch(n);
#pragma omp for schedule(static)
      for (Eigen::Index r = 0; r < rows; ++r) {
        fill_row(start + r, scratch, batch.row(r).data());
      }
      // Implicit barrier above; every batch row is complete before reduction.
#pragma omp for schedule(static)
      for (Eigen::Index r = 0; r < rows; ++r) {
        result(start + r) = batch.row(r).dot(v);
      }
    }
  }
  return result;
}

Eigen::VectorXd KernelAction::row(Eigen::Index i) const {
  const Eigen::Index n = size();
  if (i < 0 || i >= n) throw std::out_of_range("KernelAction::row: index out of range");
  RowScratch scratch(n);
  Eigen::VectorXd out(n);
  fill_row(i, scratch, out.data());
  return out;
}

Eigen::VectorXd KernelAction::diagonal() const {
  const Eigen::Index n = size();
  const auto& g = samples_->gradients();
  Eigen::VectorXd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) diag(i) = kernel_.diag(g.row(i).transpose());
  return diag;
}

}  // namespace stein
