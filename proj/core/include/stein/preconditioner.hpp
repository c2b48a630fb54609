#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace stein {

class KernelAction;

// Inverse action M^{-1} v of a preconditioner for the Stein kernel system.
// Implementations are immutable after construction and safe to share across
// threads; apply_inverse must be linear and deterministic.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;

  virtual Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const = 0;

  // Human-readable identity, e.g. "nystrom(n=50, eta=0.01, sampling=uniform)".
  virtual std::string descriptor() const = 0;

  // Non-empty when construction degraded (e.g. fell back to the identity
  // because an inner matrix was numerically rank-zero).
  virtual std::string_view note() const { return {}; }
};

// M = I; turns PCG into plain CG.
class IdentityPreconditioner final : public Preconditioner {
 public:
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override { return v; }
  std::string descriptor() const override { return "none"; }
};

enum class PrecondFamily {
  none,          // identity
  jacobi,        // (block) diagonal of K_p
  nystrom,       // column Nystrom, uniform node sampling
  nystrom_diag,  // column Nystrom, diagonal-weighted node sampling
  fitc,          // Nystrom plus exact-diagonal correction
  rand_nystrom,  // Gaussian-sketch Nystrom
  rand_svd,      // randomized SVD with power iterations
  spectral,      // eigenvalue-clamping spectral approximation
};

PrecondFamily parse_family(std::string_view name);
std::string_view to_string(PrecondFamily family);

struct PrecondConfig {
  PrecondFamily family = PrecondFamily::none;
  Eigen::Index block_size = 1;     // jacobi: b
  Eigen::Index inducing = 0;       // low-rank families: n; 0 => ceil(sqrt(N))
  double nugget = 1e-2;            // Woodbury families: eta > 0
  Eigen::Index spectral_rank = 10; // spectral: r >= 1
  std::uint64_t seed = 0;          // node sampling / sketches
};

// Builds the configured preconditioner from the matrix-free action.  Setup
// touches at most n rows/actions of K_p (O(n^2 N + n^3) work, O(nN) memory);
// no family ever assembles the N x N matrix.
std::unique_ptr<Preconditioner> make_preconditioner(const PrecondConfig& config,
                                                    const KernelAction& action);

}  // namespace stein
