#pragma once

// Maps between the unconstrained space the sampler moves in and the
// constrained parameter space of the models.

#include <Eigen/Core>
#include <vector>

namespace bayescal {

struct Transform {
  enum class Kind { identity, log, scaled_logit };
  Kind kind = Kind::identity;
  double lower = 0.0;  // scaled_logit only
  double upper = 1.0;

  static Transform identity() { return {}; }
  static Transform positive() { return {Kind::log, 0.0, 0.0}; }
  static Transform interval(double lo, double hi) { return {Kind::scaled_logit, lo, hi}; }

  double constrain(double u) const;
  double unconstrain(double x) const;
  /// log |dx/du| at u.
  double log_jacobian(double u) const;
  /// dx/du at u.
  double dx_du(double u) const;
  /// d log|dx/du| / du at u.
  double dlogj_du(double u) const;
};

/// One transform per unconstrained coordinate.
class ParameterLayout {
 public:
  ParameterLayout() = default;
  explicit ParameterLayout(std::vector<Transform> transforms) : transforms_(std::move(transforms)) {}

  std::size_t size() const { return transforms_.size(); }
  const Transform& operator[](std::size_t i) const { return transforms_[i]; }

  /// Writes x = constrain(u) and returns the summed log-Jacobian.
  double constrain(const Eigen::VectorXd& u, Eigen::VectorXd& x) const;
  Eigen::VectorXd unconstrain(const Eigen::VectorXd& x) const;

  /// Converts a gradient w.r.t. x into a gradient w.r.t. u, adding the
  /// log-Jacobian term when requested.
  void chain_rule(const Eigen::VectorXd& u, const Eigen::VectorXd& grad_x, bool jacobian,
                  Eigen::VectorXd& grad_u) const;

 private:
  std::vector<Transform> transforms_;
};

}  // namespace bayescal
