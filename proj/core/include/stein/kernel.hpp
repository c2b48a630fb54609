#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace stein {

// Radial kernel profile phi written as a function of the *squared* scaled
// radius t = |x - x'|^2 / l^2, i.e. k(x, x') = phi(t).  Working in t keeps
// every derivative formula free of square roots:
//
//   grad_{x'} k = -2 phi'(t) (x - x') / l^2
//   div_1 div_2 k = -2 d phi'(t) / l^2 - 4 t phi''(t) / l^2
//
// Profiles must be twice differentiable with phi(0) = 1.
class RadialProfile {
 public:
  virtual ~RadialProfile() = default;
  virtual double value(double t) const = 0;    // phi(t)
  virtual double d1(double t) const = 0;       // phi'(t)
  virtual double d2(double t) const = 0;       // phi''(t)
  virtual std::string name() const = 0;

  // phi, phi', phi'' over a batch of t values; the hot path of the matrix
  // action.  Overrides must produce exactly the scalar results elementwise.
  virtual void eval_batch(const Eigen::ArrayXd& t, Eigen::ArrayXd& phi0,
                          Eigen::ArrayXd& phi1, Eigen::ArrayXd& phi2) const;
};

// Inverse multiquadric phi(t) = (1 + t)^{-1/2}.  Its Stein kernel is the
// standard choice for convergence control: bounded, smooth, and with tails
// heavy enough that the induced discrepancy detects non-convergence.
class ImqProfile final : public RadialProfile {
 public:
  double value(double t) const override;
  double d1(double t) const override;
  double d2(double t) const override;
  std::string name() const override { return "imq"; }
  void eval_batch(const Eigen::ArrayXd& t, Eigen::ArrayXd& phi0,
                  Eigen::ArrayXd& phi1, Eigen::ArrayXd& phi2) const override;
};

// Profile registry for CLI/config use.  Throws on unknown names.
std::shared_ptr<const RadialProfile> make_profile(std::string_view name);

// First and mixed-second derivative blocks of the base kernel; the raw
// material for the Stein kernel.
struct KernelDerivatives {
  double value = 0.0;       // k(x, x')
  Eigen::VectorXd grad1;    // grad_x k
  Eigen::VectorXd grad2;    // grad_{x'} k
  double div12 = 0.0;       // sum_i d^2 k / dx_i dx'_i
};

// Translation-invariant base kernel k(x, x') = phi(|x - x'|^2 / l^2).
class BaseKernel {
 public:
  BaseKernel(std::shared_ptr<const RadialProfile> profile, double length_scale);

  double length_scale() const { return length_scale_; }
  const RadialProfile& profile() const { return *profile_; }
  std::shared_ptr<const RadialProfile> profile_ptr() const { return profile_; }

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  KernelDerivatives derivatives(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

 private:
  std::shared_ptr<const RadialProfile> profile_;
  double length_scale_;
};

}  // namespace stein
