#include "bayescal/mle.hpp"

#include <cmath>
#include <limits>

#include "bayescal/error.hpp"

namespace bayescal {

MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const MinimizeOptions& opts) {
  const Eigen::Index n = x0.size();
  MinimizeResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(n);
  res.value = f(res.x, g);
  if (!std::isfinite(res.value) || !g.allFinite())
    throw PreconditionError("objective is not finite at the starting point");
  res.history.push_back(res.value);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  constexpr double kArmijo = 1e-4;

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    if (g.norm() < opts.grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = -h * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      h.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    // Until curvature information exists, the first trial step has unit length
    // so a steep start cannot jump straight into a distant basin.
    double t = scaled ? 1.0 : std::min(1.0, 1.0 / dir.norm());
    Eigen::VectorXd x_new(n), g_new(n);
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < 80; ++k) {
      x_new = res.x + t * dir;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= res.value + kArmijo * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No descent possible along the search direction at machine precision.
      res.converged = g.norm() < std::sqrt(opts.grad_tol);
      break;
    }
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double decrease = res.value - f_new;
    res.x = x_new;
    g = g_new;
    const double f_old = res.value;
    res.value = f_new;
    res.history.push_back(f_new);
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (!scaled) {
        h *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd i_rsy = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      h = i_rsy * h * i_rsy.transpose() + rho * s * s.transpose();
    }
    if (g.norm() < opts.grad_tol ||
        decrease <= opts.rel_tol * std::max(std::abs(f_old), std::numeric_limits<double>::min())) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  return res;
}

MleResult fit_odr_mle(const Dataset& d, const std::optional<MleInit>& init,
                      const MinimizeOptions& opts) {
  d.validate();
  const int D = count(d.dims);
  MleResult out;
  out.dims = d.dims;
  if (d.size() < static_cast<std::size_t>(2 * D + 1))
    out.warnings.push_back("only " + std::to_string(d.size()) + " rows for " +
                           std::to_string(2 * D) + " radial parameters; the fit is underdetermined");
  const MleInit start = init.value_or(MleInit{});
  Eigen::VectorXd x0(2 * D);
  for (int j = 0; j < D; ++j) {
    if (!(start.sinv[j] > 0.0)) throw PreconditionError("initial sinv must be positive");
    x0[j] = start.b[j];
    x0[D + j] = std::log(start.sinv[j]);
  }
  auto unpack = [D](const Eigen::VectorXd& x, Vec3& b, Vec3& sinv) {
    b = {0.0, 0.0, 0.0};
    sinv = {1.0, 1.0, 1.0};
    for (int j = 0; j < D; ++j) {
      b[j] = x[j];
      sinv[j] = std::exp(x[D + j]);
    }
  };
  Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    Vec3 b, sinv, gb, gs;
    unpack(x, b, sinv);
    const double v = radial_sse(d, b, sinv, &gb, &gs);
    grad.resize(2 * D);
    for (int j = 0; j < D; ++j) {
      grad[j] = gb[j];
      grad[D + j] = gs[j] * sinv[j];
    }
    return v;
  };
  const MinimizeResult r = minimize_bfgs(f, x0, opts);
  unpack(r.x, out.b, out.sinv);
  out.objective = r.value;
  out.converged = r.converged;
  out.iterations = r.iterations;
  out.history = r.history;
  out.sigma_prime = std::sqrt(r.value / static_cast<double>(d.size()));
  return out;
}

MinimizeResult find_posterior_mode(const PosteriorModel& model, const Eigen::VectorXd& u0,
                                   const MinimizeOptions& opts) {
  Objective f = [&](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
    const double lp = model.log_posterior(u, grad, false);
    grad = -grad;
    return -lp;
  };
  return minimize_bfgs(f, u0, opts);
}

}  // namespace bayescal
