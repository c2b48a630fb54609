#include "stein/low_rank.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "stein/format.hpp"
#include "stein/rng.hpp"

namespace stein {
namespace {

double checked_nugget(double nugget) {
  if (!(nugget > 0.0) || !std::isfinite(nugget)) {
    throw std::invalid_argument("preconditioner: nugget eta must be positive and finite");
  }
  return nugget;
}

Eigen::Index checked_count(Eigen::Index n, Eigen::Index n_nodes, const char* what) {
  if (n < 1 || n > n_nodes) {
    throw std::invalid_argument(std::string("preconditioner: need 1 <= ") + what + " <= N");
  }
  return n;
}

std::vector<Eigen::Index> draw_indices(const KernelAction& action, Eigen::Index n,
                                       NystromSampling sampling, std::uint64_t seed) {
  Rng rng(seed);
  if (sampling == NystromSampling::uniform) {
    return sample_without_replacement(action.size(), n, rng);
  }
  return weighted_sample_without_replacement(action.diagonal(), n, rng);
}

// K_Nn: one matrix-free row per inducing node (a row is a column, K_p being
// symmetric).
Eigen::MatrixXd cross_columns(const KernelAction& action, const std::vector<Eigen::Index>& indices) {
  Eigen::MatrixXd cross(action.size(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    cross.col(static_cast<Eigen::Index>(j)) = action.row(indices[j]);
  }
  return cross;
}

// K_nn extracted from the rows of K_Nn (no recomputation), symmetrized to
// kill the one-rounding asymmetry between row i evaluated at j and row j
// evaluated at i.
Eigen::MatrixXd inducing_block(const Eigen::MatrixXd& cross,
                               const std::vector<Eigen::Index>& indices) {
  const auto n = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd block(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) block(i, j) = cross(indices[static_cast<std::size_t>(i)], j);
  }
  return 0.5 * (block + block.transpose()).eval();
}

}  // namespace

SymmetricPinv::SymmetricPinv(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymmetricPinv: matrix must be square");
  if (m.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(m);
  if (eigen.info() != Eigen::Success) {
    throw std::runtime_error("SymmetricPinv: eigendecomposition failed");
  }
  vectors_ = eigen.eigenvectors();
  const Eigen::VectorXd& values = eigen.eigenvalues();
  const double cutoff = rel_tol * values.cwiseAbs().maxCoeff();
  inverse_values_ = Eigen::VectorXd::Zero(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i)) > cutoff && values(i) != 0.0) {
      inverse_values_(i) = 1.0 / values(i);
      ++rank_;
    }
  }
}

Eigen::VectorXd SymmetricPinv::solve(const Eigen::VectorXd& rhs) const {
  return vectors_ * inverse_values_.cwiseProduct(vectors_.transpose() * rhs);
}

Eigen::MatrixXd SymmetricPinv::solve(const Eigen::MatrixXd& rhs) const {
  return vectors_ * inverse_values_.asDiagonal() * (vectors_.transpose() * rhs);
}

// ---- Nystrom ----------------------------------------------------------------

NystromPreconditioner::NystromPreconditioner(const KernelAction& action, Eigen::Index inducing,
                                             double nugget, NystromSampling sampling,
                                             std::uint64_t seed)
    : nugget_(checked_nugget(nugget)),
      sampling_(sampling),
      indices_(draw_indices(action, checked_count(inducing, action.size(), "inducing count"),
                            sampling, seed)),
      cross_(cross_columns(action, indices_)),
      inner_(nugget * inducing_block(cross_, indices_) + cross_.transpose() * cross_) {
  if (inner_.degenerate()) {
    fallback_ = true;
    note_ = "inner matrix numerically zero; using identity";
  }
}

Eigen::VectorXd NystromPreconditioner::apply_inverse(const Eigen::VectorXd& v) const {
  if (fallback_) return v;
  return (v - cross_ * inner_.solve((cross_.transpose() * v).eval())) / nugget_;
}

std::string NystromPreconditioner::descriptor() const {
  return std::string("nystrom(n=") + std::to_string(indices_.size()) +
         ", eta=" + format_double(nugget_) +
         ", sampling=" + (sampling_ == NystromSampling::uniform ? "uniform" : "diagonal") + ")";
}

// ---- FITC -------------------------------------------------------------------

FitcPreconditioner::FitcPreconditioner(const KernelAction& action, Eigen::Index inducing,
                                       double nugget, std::uint64_t seed)
    : nugget_(checked_nugget(nugget)) {
  const Eigen::VectorXd marginal = action.diagonal();

  // inducing = 0 is a legitimate degenerate config: no low-rank part, pure
  // diagonal scaling by diag(K_p) + eta.
  if (inducing == 0) {
    diagonal_ = marginal.array() + nugget;
    note_ = "no inducing nodes; pure diagonal scaling";
    return;
  }

  const Eigen::Index n = checked_count(inducing, action.size(), "inducing count");
  indices_ = draw_indices(action, n, NystromSampling::uniform, seed);
  cross_ = cross_columns(action, indices_);
  const SymmetricPinv block_pinv(inducing_block(cross_, indices_));

  // Nystrom marginal via the kept eigenpairs: |T_i|^2 with T = K_Nn V L^{-1/2}.
  // Eigenvalues dropped by the tolerance (including rounding negatives)
  // contribute nothing, matching the pseudo-inverse definition of K~.
  Eigen::VectorXd half_inverse = block_pinv.inverse_eigenvalues();
  for (Eigen::Index i = 0; i < half_inverse.size(); ++i) {
    half_inverse(i) = half_inverse(i) > 0.0 ? std::sqrt(half_inverse(i)) : 0.0;
  }
  const Eigen::MatrixXd t = cross_ * block_pinv.eigenvectors() * half_inverse.asDiagonal();
  const Eigen::VectorXd nystrom_diag = t.rowwise().squaredNorm();

  Eigen::Index clamped = 0;
  diagonal_.resize(marginal.size());
  for (Eigen::Index i = 0; i < marginal.size(); ++i) {
    const double corrected = marginal(i) - nystrom_diag(i) + nugget;
    diagonal_(i) = std::max(corrected, nugget);
    if (corrected < nugget) ++clamped;
  }
  if (clamped > 0) {
    note_ = "clamped " + std::to_string(clamped) + " diagonal entries at eta";
  }

  const Eigen::MatrixXd scaled = diagonal_.cwiseInverse().asDiagonal() * cross_;
  inner_ = SymmetricPinv(inducing_block(cross_, indices_) + cross_.transpose() * scaled);
}

Eigen::VectorXd FitcPreconditioner::apply_inverse(const Eigen::VectorXd& v) const {
  const Eigen::VectorXd u = v.cwiseQuotient(diagonal_);
  if (indices_.empty()) return u;
  return u - (cross_ * inner_.solve((cross_.transpose() * u).eval())).cwiseQuotient(diagonal_);
}

std::string FitcPreconditioner::descriptor() const {
  return "fitc(n=" + std::to_string(indices_.size()) + ", eta=" + format_double(nugget_) + ")";
}

// ---- Randomized Nystrom -----------------------------------------------------

RandomizedNystromPreconditioner::RandomizedNystromPreconditioner(const KernelAction& action,
                                                                 Eigen::Index sketch_size,
                                                                 double nugget, std::uint64_t seed)
    : nugget_(checked_nugget(nugget)) {
  const Eigen::Index n = checked_count(sketch_size, action.size(), "sketch size");
  Rng rng(seed);
  sketch_ = rng.normal_matrix(action.size(), n);
  image_.resize(action.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) image_.col(j) = action.apply(sketch_.col(j));

  const Eigen::MatrixXd core = sketch_.transpose() * image_;
  inner_ = SymmetricPinv(nugget * 0.5 * (core + core.transpose()) +
                         image_.transpose() * image_);
  if (inner_.degenerate()) {
    fallback_ = true;
    note_ = "inner matrix numerically zero; using identity";
  }
}

Eigen::VectorXd RandomizedNystromPreconditioner::apply_inverse(const Eigen::VectorXd& v) const {
  if (fallback_) return v;
  return (v - image_ * inner_.solve((image_.transpose() * v).eval())) / nugget_;
}

std::string RandomizedNystromPreconditioner::descriptor() const {
  return "rand-nystrom(n=" + std::to_string(sketch_.cols()) + ", eta=" + format_double(nugget_) +
         ")";
}

// ---- Randomized SVD ---------------------------------------------------------

RandomizedSvdPreconditioner::RandomizedSvdPreconditioner(const KernelAction& action,
                                                         Eigen::Index sketch_size, double nugget,
                                                         std::uint64_t seed)
    : nugget_(checked_nugget(nugget)) {
  const Eigen::Index big_n = action.size();
  const Eigen::Index n = checked_count(sketch_size, big_n, "sketch size");
  Rng rng(seed);

  // Two power iterations: the range of K_p^3 Omega aligns with the dominant
  // eigenspace much faster than K_p Omega when the spectrum decays slowly.
  Eigen::MatrixXd y = rng.normal_matrix(big_n, n);
  for (int pass = 0; pass < 3; ++pass) {
    for (Eigen::Index j = 0; j < n; ++j) y.col(j) = action.apply(y.col(j));
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big_n, n);

  Eigen::MatrixXd kq(big_n, n);
  for (Eigen::Index j = 0; j < n; ++j) kq.col(j) = action.apply(q.col(j));

  // B = Q' K_p = (K_p Q)'; thin SVD of the n x N matrix.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(kq.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-12 * sv(0) : 0.0;
  Eigen::Index keep = 0;
  while (keep < sv.size() && sv(keep) > cutoff && sv(keep) > 0.0) ++keep;
  if (keep == 0) {
    fallback_ = true;
    note_ = "all singular values truncated; using identity";
    return;
  }

  values_ = sv.head(keep);
  left_ = q * svd.matrixU().leftCols(keep);  // U = Q U~
  right_ = svd.matrixV().leftCols(keep);
  Eigen::MatrixXd small = right_.transpose() * left_;
  small.diagonal() += nugget * values_.cwiseInverse();
  small_.compute(small);
  if (!small_.isInvertible()) {
    fallback_ = true;
    note_ = "inner matrix singular; using identity";
  }
}

Eigen::VectorXd RandomizedSvdPreconditioner::apply_inverse(const Eigen::VectorXd& v) const {
  if (fallback_) return v;
  return (v - left_ * small_.solve((right_.transpose() * v).eval())) / nugget_;
}

std::string RandomizedSvdPreconditioner::descriptor() const {
  return "rand-svd(n=" + std::to_string(values_.size()) + ", eta=" + format_double(nugget_) + ")";
}

// ---- Spectral ---------------------------------------------------------------

Eigen::Index spectral_effective_rank(const Eigen::VectorXd& descending_eigenvalues,
                                     Eigen::Index requested_rank) {
  Eigen::Index rank = std::min<Eigen::Index>(requested_rank, descending_eigenvalues.size());
  // lambda_r must be positive: it becomes the clamp value and a divisor.
  while (rank >= 1 && !(descending_eigenvalues(rank - 1) > 0.0)) --rank;
  return std::max<Eigen::Index>(rank, 1);
}

SpectralPreconditioner::SpectralPreconditioner(const KernelAction& action, Eigen::Index inducing,
                                               Eigen::Index rank, std::uint64_t seed)
    : requested_rank_(rank) {
  if (rank < 1) throw std::invalid_argument("SpectralPreconditioner: rank must be >= 1");
  const Eigen::Index n = checked_count(inducing, action.size(), "inducing count");
  indices_ = draw_indices(action, n, NystromSampling::uniform, seed);
  cross_ = cross_columns(action, indices_);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(inducing_block(cross_, indices_));
  if (eigen.info() != Eigen::Success) {
    throw std::runtime_error("SpectralPreconditioner: eigendecomposition failed");
  }
  const Eigen::VectorXd values = eigen.eigenvalues().reverse();  // descending
  rank_ = spectral_effective_rank(values, rank);
  if (rank_ < requested_rank_) {
    note_ = "rank reduced to " + std::to_string(rank_) + " (non-positive eigenvalues)";
  }
  if (rank_ == 1) return;  // clamping nothing: identity

  const double clamp = values(rank_ - 1);
  top_vectors_.resize(n, rank_ - 1);
  coefficients_.resize(rank_ - 1);
  for (Eigen::Index k = 0; k < rank_ - 1; ++k) {
    top_vectors_.col(k) = eigen.eigenvectors().col(n - 1 - k);
    coefficients_(k) = (1.0 - clamp / values(k)) / values(k);
  }
}

Eigen::VectorXd SpectralPreconditioner::apply_inverse(const Eigen::VectorXd& v) const {
  if (rank_ == 1) return v;
  // v - E_n V_r (I - lambda_r L^{-1}) L^{-1} V_r' K_nN v, with the two
  // diagonal factors folded into coefficients_.
  const Eigen::VectorXd projected = top_vectors_.transpose() * (cross_.transpose() * v);
  const Eigen::VectorXd update = top_vectors_ * coefficients_.cwiseProduct(projected);
  Eigen::VectorXd out = v;
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    out(indices_[j]) -= update(static_cast<Eigen::Index>(j));
  }
  return out;
}

std::string SpectralPreconditioner::descriptor() const {
  return "spectral(n=" + std::to_string(indices_.size()) + ", r=" + std::to_string(requested_rank_) +
         ")";
}

}  // namespace stein
