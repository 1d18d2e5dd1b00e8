#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bayescal/model.hpp"
#include "bayescal/posterior.hpp"

namespace bayescal {

/// f(x, grad) returns the objective and writes its gradient.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct MinimizeOptions {
  int max_iterations = 2000;
  double grad_tol = 1e-8;
  double rel_tol = 1e-12;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // objective after every accepted step, starting at x0
};

/// BFGS with an Armijo backtracking line search. Every accepted step lowers
/// the objective, so `history` is non-increasing.
MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const MinimizeOptions& opts = {});

struct MleInit {
  Vec3 b{0.0, 0.0, 0.0};
  Vec3 sinv{1.0, 1.0, 1.0};
};

struct MleResult {
  Dims dims = Dims::three;
  Vec3 b{0.0, 0.0, 0.0};
  Vec3 sinv{1.0, 1.0, 1.0};
  double sigma_prime = 0.0;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> history;
  std::vector<std::string> warnings;
};

/// Minimizes sum_i (|sinv * (a_i - b)| - 1)^2 over (b, sinv), optimizing log sinv.
/// sigma' is the 1/N residual standard deviation at the optimum.
MleResult fit_odr_mle(const Dataset& d, const std::optional<MleInit>& init = std::nullopt,
                      const MinimizeOptions& opts = {});

/// Maximizes the constrained-space posterior density (no Jacobian term) starting
/// from u0. Returns the unconstrained optimum.
MinimizeResult find_posterior_mode(const PosteriorModel& model, const Eigen::VectorXd& u0,
                                   const MinimizeOptions& opts = {});

}  // namespace bayescal
