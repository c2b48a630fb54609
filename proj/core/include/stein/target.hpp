#pragma once

#include <string>

#include <Eigen/Core>

namespace stein {

// A target density known up to its normalising constant.  The whole stack
// only ever needs log p up to an additive constant and its gradient (the
// score function), so that is all a target has to provide.
class TargetDensity {
 public:
  virtual ~TargetDensity() = default;

  virtual int dimension() const = 0;

  // log p(x) up to an additive constant.
  virtual double log_density(const Eigen::VectorXd& x) const = 0;

  // Score g(x) = grad log p(x); the normalising constant drops out.
  virtual Eigen::VectorXd score(const Eigen::VectorXd& x) const = 0;

  virtual std::string name() const = 0;
};

// Standard Gaussian N(0, I_d).
class StdGaussianTarget final : public TargetDensity {
 public:
  explicit StdGaussianTarget(int dim);

  int dimension() const override { return dim_; }
  double log_density(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd score(const Eigen::VectorXd& x) const override;
  std::string name() const override { return "std-gaussian"; }

 private:
  int dim_;
};

}  // namespace stein
