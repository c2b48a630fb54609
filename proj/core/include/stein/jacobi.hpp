#pragma once

#include <vector>

#include <Eigen/LU>

#include "stein/kernel_action.hpp"
#include "stein/preconditioner.hpp"

namespace stein {

// Block Jacobi: M = blockdiag(K_p) with contiguous b x b blocks (the final
// block keeps the remainder when b does not divide N).  b = 1 is classic
// diagonal scaling and uses the closed-form diagonal; b = N factors the full
// matrix, turning PCG into a direct solve for testing.
class BlockJacobiPreconditioner final : public Preconditioner {
 public:
  BlockJacobiPreconditioner(const KernelAction& action, Eigen::Index block_size);

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override;
  std::string descriptor() const override;

  Eigen::Index block_size() const { return block_size_; }

 private:
  Eigen::Index size_ = 0;
  Eigen::Index block_size_ = 1;
  Eigen::VectorXd inverse_diagonal_;            // b == 1 path
  std::vector<Eigen::FullPivLU<Eigen::MatrixXd>> blocks_;  // b > 1 path
};

}  // namespace stein
