#pragma once

#include <cstdint>

#include "stein/target.hpp"

namespace stein {

// Bayesian logistic regression posterior:
//
//   p(x | Z, y)  proportional to  exp(-|x|^2 / 2) * prod_i rho_i^{y_i} (1 - rho_i)^{1 - y_i},
//   rho_i = 1 / (1 + exp(-z_i . x)),
//
// i.e. a standard Gaussian prior on the coefficients x and Bernoulli-logit
// likelihood with covariate rows z_i.  Everything is evaluated through
// softplus(t) = max(t, 0) + log1p(exp(-|t|)) so log densities stay finite
// for any finite x.
class LogisticRegressionTarget final : public TargetDensity {
 public:
  // covariates: one observation per row; responses in {0, 1}, one per row.
  LogisticRegressionTarget(Eigen::MatrixXd covariates, Eigen::VectorXi responses);

  int dimension() const override { return static_cast<int>(covariates_.cols()); }
  double log_density(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd score(const Eigen::VectorXd& x) const override;
  std::string name() const override { return "logistic-regression"; }

  Eigen::Index observation_count() const { return covariates_.rows(); }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const Eigen::VectorXi& responses() const { return responses_; }

 private:
  Eigen::MatrixXd covariates_;
  Eigen::VectorXi responses_;
};

// Coefficients the synthetic data sets are generated from: (1, 1/2, ..., 1/d).
Eigen::VectorXd reference_coefficients(int dimension);

// Synthetic test bed: covariates drawn iid N(0, 1), responses drawn from the
// logistic model at reference_coefficients(dimension).  The covariate matrix
// is checked to have full column rank.  Deterministic in `seed`.
LogisticRegressionTarget generate_logistic_data(int dimension, Eigen::Index observations,
                                                std::uint64_t seed);

}  // namespace stein
