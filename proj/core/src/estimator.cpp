#include "stein/estimator.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "stein/format.hpp"

namespace stein {

Integrand Integrand::coordinate(int index) {
  if (index < 0) throw std::invalid_argument("Integrand::coordinate: index must be >= 0");
  return Integrand("coord:" + std::to_string(index + 1),
                   [index](const Eigen::VectorXd& x) {
                     if (index >= x.size()) {
                       throw std::invalid_argument("coordinate integrand: index exceeds dimension");
                     }
                     return x(index);
                   },
                   Eigen::VectorXd());
}

Integrand Integrand::squared_norm() {
  return Integrand("sqnorm", [](const Eigen::VectorXd& x) { return x.squaredNorm(); },
                   Eigen::VectorXd());
}

Integrand Integrand::constant(double value) {
  return Integrand("const:" + format_double(value),
                   [value](const Eigen::VectorXd&) { return value; }, Eigen::VectorXd());
}

Integrand Integrand::from_values(Eigen::VectorXd values, std::string label) {
  if (values.size() == 0) throw std::invalid_argument("Integrand::from_values: empty vector");
  return Integrand(std::move(label), nullptr, std::move(values));
}

Eigen::VectorXd Integrand::evaluate(const SampleSet& samples) const {
  if (!fn_) {
    if (values_.size() != samples.size()) {
      throw std::invalid_argument("Integrand: value vector length " + std::to_string(values_.size()) +
                                  " does not match node count " + std::to_string(samples.size()));
    }
    return values_;
  }
  Eigen::VectorXd out(samples.size());
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    out(i) = fn_(samples.states().row(i).transpose());
  }
  return out;
}

Integrand parse_integrand(const std::string& spec) {
  if (spec == "sqnorm") return Integrand::squared_norm();
  if (spec.rfind("coord:", 0) == 0) {
    const int index = std::stoi(spec.substr(6));
    if (index < 1) throw std::invalid_argument("parse_integrand: coordinate index is 1-based");
    return Integrand::coordinate(index - 1);
  }
  if (spec.rfind("const:", 0) == 0) {
    return Integrand::constant(parse_double(spec.substr(6)));
  }
  if (spec.rfind("file:", 0) == 0) {
    const std::string path = spec.substr(5);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_integrand: cannot open '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream row(line);
      std::string token;
      while (row >> token) values.push_back(parse_double(token));
    }
    if (values.empty()) throw std::runtime_error("parse_integrand: no values in '" + path + "'");
    return Integrand::from_values(
        Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
        "file:" + path);
  }
  throw std::invalid_argument("parse_integrand: expected coord:<i>, sqnorm, const:<v>, or file:<path>, got '" +
                              spec + "'");
}

std::optional<double> point_estimate(const Eigen::VectorXd& f_values, const Eigen::VectorXd& w) {
  if (f_values.size() != w.size()) throw std::invalid_argument("point_estimate: length mismatch");
  const double weight_sum = w.sum();
  if (!(weight_sum > 0.0)) return std::nullopt;
  return f_values.dot(w) / weight_sum;
}

EstimateWithBound estimate_with_bound(const Integrand& f, const SampleSet& samples,
                                      const LinearOperator& action, const SolveTrace& solve) {
  if (solve.solution.size() != samples.size()) {
    throw std::invalid_argument("estimate_with_bound: solve size does not match samples");
  }
  EstimateWithBound out;
  out.estimate = point_estimate(f.evaluate(samples), solve.solution);
  out.sigma = solve.final_sigma();
  if (!out.sigma) out.sigma = worst_case_error(solve.solution, action);
  return out;
}

}  // namespace stein
