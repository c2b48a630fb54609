#include "stein/logistic.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

#include "stein/rng.hpp"

namespace stein {
namespace {

// Overflow-safe log(1 + exp(t)).
inline double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

inline double sigmoid(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

LogisticRegressionTarget::LogisticRegressionTarget(Eigen::MatrixXd covariates,
                                                   Eigen::VectorXi responses)
    : covariates_(std::move(covariates)), responses_(std::move(responses)) {
  if (covariates_.rows() != responses_.size()) {
    throw std::invalid_argument("LogisticRegressionTarget: covariate/response count mismatch");
  }
  if (covariates_.cols() < 1 || covariates_.rows() < 1) {
    throw std::invalid_argument("LogisticRegressionTarget: empty design");
  }
  for (Eigen::Index i = 0; i < responses_.size(); ++i) {
    if (responses_(i) != 0 && responses_(i) != 1) {
      throw std::invalid_argument("LogisticRegressionTarget: responses must be 0 or 1");
    }
  }
}

double LogisticRegressionTarget::log_density(const Eigen::VectorXd& x) const {
  // log prior + sum_i [y_i t_i - softplus(t_i)] with t_i = z_i . x.
  const Eigen::VectorXd t = covariates_ * x;
  double log_lik = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    log_lik += static_cast<double>(responses_(i)) * t(i) - softplus(t(i));
  }
  return -0.5 * x.squaredNorm() + log_lik;
}

Eigen::VectorXd LogisticRegressionTarget::score(const Eigen::VectorXd& x) const {
  // grad = -x + Z^T (y - rho(Zx)).
  const Eigen::VectorXd t = covariates_ * x;
  Eigen::VectorXd resid(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    resid(i) = static_cast<double>(responses_(i)) - sigmoid(t(i));
  }
  return -x + covariates_.transpose() * resid;
}

Eigen::VectorXd reference_coefficients(int dimension) {
  if (dimension < 1) throw std::invalid_argument("reference_coefficients: dimension must be positive");
  Eigen::VectorXd x(dimension);
  for (int j = 0; j < dimension; ++j) x(j) = 1.0 / static_cast<double>(j + 1);
  return x;
}

LogisticRegressionTarget generate_logistic_data(int dimension, Eigen::Index observations,
                                                std::uint64_t seed) {
  if (dimension < 1 || observations < 1) {
    throw std::invalid_argument("generate_logistic_data: need dimension >= 1 and observations >= 1");
  }
  Rng rng(seed);
  const Eigen::MatrixXd z = rng.normal_matrix(observations, dimension);
  const Eigen::VectorXd t = z * reference_coefficients(dimension);
  Eigen::VectorXi y(observations);
  for (Eigen::Index i = 0; i < observations; ++i) {
    y(i) = rng.uniform() < sigmoid(t(i)) ? 1 : 0;
  }
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(z).rank() < dimension) {
    throw std::runtime_error("generate_logistic_data: covariate matrix is column-rank deficient");
  }
  return LogisticRegressionTarget(z, y);
}

}  // namespace stein
