#include "stein/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace stein {

double ImqProfile::value(double t) const { return 1.0 / std::sqrt(1.0 + t); }

double ImqProfile::d1(double t) const {
  const double v = 1.0 / std::sqrt(1.0 + t);
  return -0.5 * v * v * v;
}

double ImqProfile::d2(double t) const {
  const double v = 1.0 / std::sqrt(1.0 + t);
  return 0.75 * v * v * v * v * v;
}

void RadialProfile::eval_batch(const Eigen::ArrayXd& t, Eigen::ArrayXd& phi0,
                               Eigen::ArrayXd& phi1, Eigen::ArrayXd& phi2) const {
  const Eigen::Index n = t.size();
  phi0.resize(n);
  phi1.resize(n);
  phi2.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phi0(i) = value(t(i));
    phi1(i) = d1(t(i));
    phi2(i) = d2(t(i));
  }
}

void ImqProfile::eval_batch(const Eigen::ArrayXd& t, Eigen::ArrayXd& phi0,
                            Eigen::ArrayXd& phi1, Eigen::ArrayXd& phi2) const {
  // Same operations and associativity as the scalar overloads.
  phi0 = (1.0 + t).sqrt().inverse();
  phi1 = -0.5 * phi0 * phi0 * phi0;
  phi2 = 0.75 * phi0 * phi0 * phi0 * phi0 * phi0;
}

std::shared_ptr<const RadialProfile> make_profile(std::string_view name) {
  if (name == "imq") return std::make_shared<ImqProfile>();
  throw std::invalid_argument("make_profile: unknown profile '" + std::string(name) + "'");
}

BaseKernel::BaseKernel(std::shared_ptr<const RadialProfile> profile, double length_scale)
    : profile_(std::move(profile)), length_scale_(length_scale) {
  if (!profile_) throw std::invalid_argument("BaseKernel: null profile");
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw std::invalid_argument("BaseKernel: length scale must be positive and finite");
  }
}

double BaseKernel::operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  const double inv_ll = 1.0 / (length_scale_ * length_scale_);
  return profile_->value((x - y).squaredNorm() * inv_ll);
}

KernelDerivatives BaseKernel::derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  if (x.size() != y.size()) throw std::invalid_argument("BaseKernel: dimension mismatch");
  const double inv_ll = 1.0 / (length_scale_ * length_scale_);
  const Eigen::VectorXd diff = x - y;
  const double t = diff.squaredNorm() * inv_ll;
  const double p1 = profile_->d1(t);
  const double p2 = profile_->d2(t);
  const auto d = static_cast<double>(x.size());

  KernelDerivatives out;
  out.value = profile_->value(t);
  out.grad2 = (-2.0 * p1 * inv_ll) * diff;  // d/dx' of phi(|x-x'|^2/l^2)
  out.grad1 = -out.grad2;
  out.div12 = -2.0 * d * p1 * inv_ll - 4.0 * t * p2 * inv_ll;
  return out;
}

}  // namespace stein
