#pragma once

#include "stein/kernel.hpp"
#include "stein/sample_set.hpp"

namespace stein {

// Stein reproducing kernel built from a base kernel k and the target score
// g = grad log p:
//
//   k_p(x, x') = div_1 div_2 k + grad_1 k . g(x') + g(x) . grad_2 k
//              + k(x, x') g(x) . g(x').
//
// Functions in its RKHS have zero mean under p, which is what turns linear
// systems in K_p into posterior-expectation machinery.  Only scores enter,
// never densities, so unnormalised targets are fine.
class SteinKernel {
 public:
  explicit SteinKernel(BaseKernel base);

  const BaseKernel& base() const { return base_; }

  // k_p(x, x') given the two points and their scores.
  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& gx,
              const Eigen::VectorXd& y, const Eigen::VectorXd& gy) const;

  // Diagonal closed form k_p(x, x) = -2 d phi'(0) / l^2 + |g(x)|^2
  // (= d / l^2 + |g|^2 for the IMQ profile).
  double diag(const Eigen::VectorXd& g) const;

 private:
  BaseKernel base_;
};

// Dense Stein kernel matrix [k_p(x_i, x_j)]_{ij}, exactly symmetric by
// construction (entries computed once per unordered pair).  Refuses node
// sets larger than `limit`: dense assembly is for reference solves and
// oracles, not the matrix-free path.
Eigen::MatrixXd assemble_dense(const SteinKernel& kernel, const SampleSet& samples,
                               Eigen::Index limit = 5000);

}  // namespace stein
