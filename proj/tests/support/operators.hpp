#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "stein/kernel_action.hpp"
#include "stein/preconditioner.hpp"

namespace testsupport {

// Dense matrix wrapped as a LinearOperator; the reference implementation the
// matrix-free path is compared against, and the vehicle for synthetic
// (indefinite, singular, ...) operators in solver edge-case tests.
class MatrixOperator final : public stein::LinearOperator {
 public:
  explicit MatrixOperator(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("MatrixOperator: square matrix required");
  }

  Eigen::Index size() const override { return m_.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const override { return m_ * v; }

  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

// Arbitrary callable as a LinearOperator (e.g. to inject NaN or count calls).
class FunctionOperator final : public stein::LinearOperator {
 public:
  FunctionOperator(Eigen::Index n, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn)
      : n_(n), fn_(std::move(fn)) {}

  Eigen::Index size() const override { return n_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const override { return fn_(v); }

 private:
  Eigen::Index n_;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn_;
};

// Preconditioner wrapping a fixed callable; used to inject failures.
class FunctionPreconditioner final : public stein::Preconditioner {
 public:
  explicit FunctionPreconditioner(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn)
      : fn_(std::move(fn)) {}

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& v) const override { return fn_(v); }
  std::string descriptor() const override { return "function"; }

 private:
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn_;
};

}  // namespace testsupport
