#pragma once

#include <functional>
#include <optional>
#include <string>

#include "stein/sample_set.hpp"
#include "stein/solver.hpp"

namespace stein {

// Integrand f whose posterior expectation is being estimated.  Either a
// pointwise function of the state, or a fixed vector of per-node values
// supplied from outside (external integrands travel as files).
class Integrand {
 public:
  static Integrand coordinate(int index);            // f(x) = x_{index} (0-based)
  static Integrand squared_norm();                   // f(x) = |x|^2
  static Integrand constant(double value);           // f(x) = value
  static Integrand from_values(Eigen::VectorXd values, std::string label = "values");

  const std::string& name() const { return name_; }

  // f evaluated at every node of the set.  For a value-vector integrand the
  // node count must match the stored length.
  Eigen::VectorXd evaluate(const SampleSet& samples) const;

 private:
  Integrand(std::string name, std::function<double(const Eigen::VectorXd&)> fn,
            Eigen::VectorXd values)
      : name_(std::move(name)), fn_(std::move(fn)), values_(std::move(values)) {}

  std::string name_;
  std::function<double(const Eigen::VectorXd&)> fn_;  // null for value vectors
  Eigen::VectorXd values_;
};

// "coord:<i>" (1-based in the spec string), "sqnorm", "const:<v>", or
// "file:<path>" with one value per line ('#' comments allowed).
Integrand parse_integrand(const std::string& spec);

// Posterior-expectation point estimate c = (f' w) / (1' w) given solved (or
// partially solved) weights.  nullopt when 1' w <= 0: the normalisation is
// then meaningless and the caller must not silently use the ratio.
std::optional<double> point_estimate(const Eigen::VectorXd& f_values, const Eigen::VectorXd& w);

struct EstimateWithBound {
  std::optional<double> estimate;  // c_{N,m}
  std::optional<double> sigma;     // worst-case error sigma(w_m)
};

// Bundles the point estimate with the worst-case-error bound of the iterate
// that produced it.  Reuses the sigma already tracked in the trace when
// present; otherwise spends one action on worst_case_error.
EstimateWithBound estimate_with_bound(const Integrand& f, const SampleSet& samples,
                                      const LinearOperator& action, const SolveTrace& solve);

}  // namespace stein
