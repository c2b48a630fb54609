#include "stein/jacobi.hpp"

#include <stdexcept>

namespace stein {

BlockJacobiPreconditioner::BlockJacobiPreconditioner(const KernelAction& action,
                                                     Eigen::Index block_size)
    : size_(action.size()), block_size_(block_size) {
  if (block_size < 1 || block_size > size_) {
    throw std::invalid_argument("BlockJacobiPreconditioner: need 1 <= block size <= N");
  }

  if (block_size == 1) {
    const Eigen::VectorXd diag = action.diagonal();
    if (!((diag.array() > 0.0).all())) {
      throw std::runtime_error("BlockJacobiPreconditioner: non-positive diagonal entry");
    }
    inverse_diagonal_ = diag.cwiseInverse();
    return;
  }

  // Assemble each diagonal block from scalar kernel evaluations; O(N b)
  // entries total, never a full row.
  const auto& kernel = action.kernel();
  const auto& x = action.samples().states();
  const auto& g = action.samples().gradients();
  for (Eigen::Index start = 0; start < size_; start += block_size) {
    const Eigen::Index b = std::min(block_size, size_ - start);
    Eigen::MatrixXd block(b, b);
    for (Eigen::Index i = 0; i < b; ++i) {
      block(i, i) = kernel.diag(g.row(start + i).transpose());
      for (Eigen::Index j = i + 1; j < b; ++j) {
        const double value =
            kernel.eval(x.row(start + i).transpose(), g.row(start + i).transpose(),
                        x.row(start + j).transpose(), g.row(start + j).transpose());
        block(i, j) = value;
        block(j, i) = value;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(block);
    if (!lu.isInvertible()) {
      throw std::runtime_error("BlockJacobiPreconditioner: singular block at rows [" +
                               std::to_string(start) + ", " + std::to_string(start + b) +
                               ") — node set is numerically degenerate");
    }
    blocks_.push_back(std::move(lu));
  }
}

Eigen::VectorXd BlockJacobiPreconditioner::apply_inverse(const Eigen::VectorXd& v) const {
  if (v.size() != size_) throw std::invalid_argument("BlockJacobiPreconditioner: length mismatch");
  if (block_size_ == 1) return inverse_diagonal_.cwiseProduct(v);
  Eigen::VectorXd out(size_);
  Eigen::Index start = 0;
  for (const auto& lu : blocks_) {
    const Eigen::Index b = std::min(block_size_, size_ - start);
    out.segment(start, b) = lu.solve(v.segment(start, b));
    start += b;
  }
  return out;
}

std::string BlockJacobiPreconditioner::descriptor() const {
  return "jacobi(b=" + std::to_string(block_size_) + ")";
}

}  // namespace stein
