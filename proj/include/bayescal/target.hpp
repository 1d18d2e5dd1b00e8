#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace bayescal {

/// A differentiable log density over an unconstrained space, plus the
/// mapping of a point to the reported (constrained, derived) quantities.
/// Implementations must be safe to evaluate concurrently.
class Target {
 public:
  virtual ~Target() = default;

  virtual std::size_t dimension() const = 0;

  /// Returns log p(u) up to a constant and writes its gradient. May return a
  /// non-finite value, which the sampler treats as a rejected point.
  virtual double log_density(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const = 0;

  /// Names of the values produced by write_output. Defaults to x1..xd.
  virtual std::vector<std::string> output_names() const;

  /// Defaults to copying u.
  virtual void write_output(const Eigen::VectorXd& u, std::vector<double>& out) const;
};

}  // namespace bayescal
