#pragma once

#include <vector>

#include <Eigen/LU>

#include "stein/kernel_action.hpp"
#include "stein/preconditioner.hpp"

namespace stein {

// Eigendecomposition-backed pseudo-inverse solve for symmetric matrices.
// Eigenvalues with |lambda| <= rel_tol * max|lambda| are treated as zero, so
// numerically rank-deficient inner matrices (inevitable for large length
// scales) are handled without blowing up.
class SymmetricPinv {
 public:
  SymmetricPinv() = default;  // rank-0 placeholder
  explicit SymmetricPinv(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

  Eigen::Index rank() const { return rank_; }
  bool degenerate() const { return rank_ == 0; }

  const Eigen::MatrixXd& eigenvectors() const { return vectors_; }
  // Reciprocals of the kept eigenvalues, 0 where dropped (ascending order).
  const Eigen::VectorXd& inverse_eigenvalues() const { return inverse_values_; }

 private:
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd inverse_values_;
  Eigen::Index rank_ = 0;
};

enum class NystromSampling {
  uniform,   // inducing nodes uniform without replacement
  diagonal,  // P(node i) proportional to [K_p]_{ii}
};

// Column Nystrom preconditioner M = K~ + eta I with K~ = K_Nn K_nn^+ K_nN,
// applied through the Woodbury identity
//   M^{-1} v = [v - K_Nn (eta K_nn + K_nN K_Nn)^+ K_nN v] / eta.
// Setup: n rows of K_p, one n x n eigendecomposition.
class NystromPreconditioner final : public Preconditioner {
 public:
  NystromPreconditioner(const KernelAction& action, Eigen::Index inducing, double nugget,
                        NystromSampling sampling, std::uint64_t seed);

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override;
  std::string descriptor() const override;
  std::string_view note() const override { return note_; }

  const std::vector<Eigen::Index>& indices() const { return indices_; }

 private:
  double nugget_;
  NystromSampling sampling_;
  std::vector<Eigen::Index> indices_;
  Eigen::MatrixXd cross_;   // K_Nn
  SymmetricPinv inner_;     // (eta K_nn + K_nN K_Nn)^+
  bool fallback_ = false;   // degenerate inner matrix -> identity
  std::string note_;
};

// FITC: Nystrom plus a diagonal correction that restores the exact marginal
// diagonal, M = K~ + diag(K_p - K~) + eta I.  With D that full diagonal,
//   M^{-1} v = D^{-1} v - D^{-1} K_Nn (K_nn + K_nN D^{-1} K_Nn)^+ K_nN D^{-1} v.
// Entries of D are clamped below at eta (they can round negative when the
// Nystrom part overshoots the diagonal).  inducing = 0 degrades to pure
// diagonal scaling by diag(K_p) + eta.
class FitcPreconditioner final : public Preconditioner {
 public:
  FitcPreconditioner(const KernelAction& action, Eigen::Index inducing, double nugget,
                     std::uint64_t seed);

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override;
  std::string descriptor() const override;
  std::string_view note() const override { return note_; }

  const std::vector<Eigen::Index>& indices() const { return indices_; }
  // The corrected diagonal D = diag(K_p - K~) + eta, after clamping.
  const Eigen::VectorXd& diagonal() const { return diagonal_; }

 private:
  double nugget_;
  std::vector<Eigen::Index> indices_;
  Eigen::MatrixXd cross_;      // K_Nn
  Eigen::VectorXd diagonal_;   // D
  SymmetricPinv inner_;        // (K_nn + K_nN D^{-1} K_Nn)^+
  std::string note_;
};

// Gaussian-sketch Nystrom: Y = K_p Omega for an N x n standard normal sketch,
// M = Y (Omega' Y)^+ Y' + eta I, applied through
//   M^{-1} v = [v - Y (eta (Omega' Y) + Y' Y)^+ Y' v] / eta.
// Setup: n matrix-free actions.
class RandomizedNystromPreconditioner final : public Preconditioner {
 public:
  RandomizedNystromPreconditioner(const KernelAction& action, Eigen::Index sketch_size,
                                  double nugget, std::uint64_t seed);

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override;
  std::string descriptor() const override;
  std::string_view note() const override { return note_; }

  const Eigen::MatrixXd& sketch() const { return sketch_; }        // Omega
  const Eigen::MatrixXd& sketch_image() const { return image_; }   // Y = K_p Omega

 private:
  double nugget_;
  Eigen::MatrixXd sketch_;
  Eigen::MatrixXd image_;
  SymmetricPinv inner_;
  bool fallback_ = false;
  std::string note_;
};

// Randomized SVD with two power iterations: Y = K_p^3 Omega, QR -> Q,
// B = (K_p Q)', thin SVD B = U~ S V', U = Q U~.  Then M = U S V' + eta I and
//   M^{-1} v = [v - U (eta S^{-1} + V' U)^{-1} V' v] / eta.
// Singular values below 1e-12 * s_max are truncated.  Setup: 4n actions.
class RandomizedSvdPreconditioner final : public Preconditioner {
 public:
  RandomizedSvdPreconditioner(const KernelAction& action, Eigen::Index sketch_size, double nugget,
                              std::uint64_t seed);

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override;
  std::string descriptor() const override;
  std::string_view note() const override { return note_; }

  const Eigen::MatrixXd& left_vectors() const { return left_; }     // U (N x k)
  const Eigen::MatrixXd& right_vectors() const { return right_; }   // V (N x k)
  const Eigen::VectorXd& singular_values() const { return values_; }

 private:
  double nugget_;
  Eigen::MatrixXd left_;
  Eigen::MatrixXd right_;
  Eigen::VectorXd values_;
  Eigen::FullPivLU<Eigen::MatrixXd> small_;  // eta S^{-1} + V' U
  bool fallback_ = false;
  std::string note_;
};

// Spectral clamp: using the Nystrom eigenpairs (lambda_k, v_k) of K_nn in
// descending order, M^{-1} = I - E_n V_r (I - lambda_r L_r^{-1}) L_r^{-1} V_r' K_nN
// maps the top r-1 approximate eigenvalues of K_p onto lambda_r and leaves
// the rest alone; with n = N the preconditioned spectrum is exactly clamped.
// r = 1 is the identity.  Requested ranks with lambda_r <= 0 are reduced to
// the largest usable rank.
class SpectralPreconditioner final : public Preconditioner {
 public:
  SpectralPreconditioner(const KernelAction& action, Eigen::Index inducing, Eigen::Index rank,
                         std::uint64_t seed);

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override;
  std::string descriptor() const override;
  std::string_view note() const override { return note_; }

  const std::vector<Eigen::Index>& indices() const { return indices_; }
  Eigen::Index effective_rank() const { return rank_; }

 private:
  Eigen::Index requested_rank_;
  Eigen::Index rank_;                  // effective r after reduction
  std::vector<Eigen::Index> indices_;
  Eigen::MatrixXd cross_;              // K_Nn
  Eigen::MatrixXd top_vectors_;        // V_r: n x (r-1), descending eigenvalues
  Eigen::VectorXd coefficients_;       // (1 - lambda_r / lambda_k) / lambda_k
  std::string note_;
};

// Rank actually used by the spectral clamp: the largest r' <= r with
// lambda_{r'} > 0 (eigenvalues descending).  1 means "identity".
Eigen::Index spectral_effective_rank(const Eigen::VectorXd& descending_eigenvalues,
                                     Eigen::Index requested_rank);

}  // namespace stein
