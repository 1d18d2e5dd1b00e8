#include "bayescal/transform.hpp"

#include <cmath>

namespace bayescal {

namespace {

double inv_logit(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// log(p (1 - p)) with p = inv_logit(u), stable for large |u|.
double log_logistic_density(double u) {
  const double a = std::abs(u);
  return -a - 2.0 * std::log1p(std::exp(-a));
}

}  // namespace

double Transform::constrain(double u) const {
  switch (kind) {
    case Kind::identity:
      return u;
    case Kind::log:
      return std::exp(u);
    case Kind::scaled_logit:
      return lower + (upper - lower) * inv_logit(u);
  }
  return u;
}

double Transform::unconstrain(double x) const {
  switch (kind) {
    case Kind::identity:
      return x;
    case Kind::log:
      return std::log(x);
    case Kind::scaled_logit: {
      const double p = (x - lower) / (upper - lower);
      return std::log(p) - std::log1p(-p);
    }
  }
  return x;
}

double Transform::log_jacobian(double u) const {
  switch (kind) {
    case Kind::identity:
      return 0.0;
    case Kind::log:
      return u;
    case Kind::scaled_logit:
      return std::log(upper - lower) + log_logistic_density(u);
  }
  return 0.0;
}

double Transform::dx_du(double u) const {
  switch (kind) {
    case Kind::identity:
      return 1.0;
    case Kind::log:
      return std::exp(u);
    case Kind::scaled_logit: {
      const double p = inv_logit(u);
      return (upper - lower) * p * (1.0 - p);
    }
  }
  return 1.0;
}

double Transform::dlogj_du(double u) const {
  switch (kind) {
    case Kind::identity:
      return 0.0;
    case Kind::log:
      return 1.0;
    case Kind::scaled_logit:
      return 1.0 - 2.0 * inv_logit(u);
  }
  return 0.0;
}

double ParameterLayout::constrain(const Eigen::VectorXd& u, Eigen::VectorXd& x) const {
  x.resize(static_cast<Eigen::Index>(size()));
  double logj = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    x[k] = transforms_[i].constrain(u[k]);
    logj += transforms_[i].log_jacobian(u[k]);
  }
  return logj;
}

Eigen::VectorXd ParameterLayout::unconstrain(const Eigen::VectorXd& x) const {
  Eigen::VectorXd u(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    u[k] = transforms_[i].unconstrain(x[k]);
  }
  return u;
}

void ParameterLayout::chain_rule(const Eigen::VectorXd& u, const Eigen::VectorXd& grad_x,
                                 bool jacobian, Eigen::VectorXd& grad_u) const {
  grad_u.resize(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    grad_u[k] = grad_x[k] * transforms_[i].dx_du(u[k]);
    if (jacobian) grad_u[k] += transforms_[i].dlogj_du(u[k]);
  }
}

}  // namespace bayescal
