#include "stein/target.hpp"

#include <stdexcept>

namespace stein {

StdGaussianTarget::StdGaussianTarget(int dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("StdGaussianTarget: dimension must be positive");
}

double StdGaussianTarget::log_density(const Eigen::VectorXd& x) const {
  return -0.5 * x.squaredNorm();
}

Eigen::VectorXd StdGaussianTarget::score(const Eigen::VectorXd& x) const {
  return -x;
}

}  // namespace stein
