#include "stein/stein_kernel.hpp"

#include <stdexcept>

namespace stein {

SteinKernel::SteinKernel(BaseKernel base) : base_(std::move(base)) {}

double SteinKernel::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& gx,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& gy) const {
  const double l = base_.length_scale();
  const double inv_ll = 1.0 / (l * l);
  const Eigen::VectorXd diff = x - y;
  const double t = diff.squaredNorm() * inv_ll;
  const auto& profile = base_.profile();
  const double p0 = profile.value(t);
  const double p1 = profile.d1(t);
  const double p2 = profile.d2(t);
  const auto d = static_cast<double>(x.size());

  // grad_1 k . g(y) + g(x) . grad_2 k = -2 phi'(t)/l^2 * (x - y) . (g(x) - g(y)).
  const double div12 = -2.0 * d * p1 * inv_ll - 4.0 * t * p2 * inv_ll;
  const double cross = -2.0 * p1 * inv_ll * diff.dot(gx - gy);
  return div12 + cross + p0 * gx.dot(gy);
}

double SteinKernel::diag(const Eigen::VectorXd& g) const {
  const double l = base_.length_scale();
  const double inv_ll = 1.0 / (l * l);
  const double d = static_cast<double>(g.size());
  return -2.0 * d * base_.profile().d1(0.0) * inv_ll + g.squaredNorm();
}

Eigen::MatrixXd assemble_dense(const SteinKernel& kernel, const SampleSet& samples,
                               Eigen::Index limit) {
  const Eigen::Index n = samples.size();
  if (n > limit) {
    throw std::invalid_argument("assemble_dense: node count " + std::to_string(n) +
                                " exceeds the dense-assembly limit " + std::to_string(limit));
  }
  const auto& x = samples.states();
  const auto& g = samples.gradients();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = kernel.diag(g.row(i).transpose());
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double value = kernel.eval(x.row(i).transpose(), g.row(i).transpose(),
                                       x.row(j).transpose(), g.row(j).transpose());
      k(i, j) = value;
      k(j, i) = value;
    }
  }
  return k;
}

}  // namespace stein
