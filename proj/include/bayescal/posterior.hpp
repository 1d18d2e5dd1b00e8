#pragma once

// Log-posteriors of the two calibration models with hand-derived gradients.
//
// Full model: every row i has a latent direction g_i; row 1 is pinned to the
// +z pole (+x axis in 2D) and rows 2..N carry angles. Likelihood is the
// isotropic normal a_ij ~ N(b_j + s_j g_ij, sigma).
//
// Radial (ODR) model: with g_hat_i = sinv * (a_i - b) the likelihood is
// prod_i N(1; |g_hat_i|, sigma'), independent of the pose angles.
//
// Priors: b_j ~ N(0, b_sd), s_j (resp. sinv_j) ~ LogNormal(s_log_mu, s_log_sd),
// sigma ~ HalfNormal(sigma_sd), angles flat on their intervals.

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bayescal/model.hpp"
#include "bayescal/target.hpp"
#include "bayescal/transform.hpp"

namespace bayescal {

struct PriorSpec {
  double b_sd = 1.0;
  double sigma_sd = 0.2;
  double s_log_mu = 0.0;
  double s_log_sd = 0.5;

  void validate() const;
  /// All scale hyperparameters multiplied by factor.
  PriorSpec widened(double factor) const;
};

enum class ModelKind { full, odr };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct FullModelState {
  Vec3 b{0.0, 0.0, 0.0};
  Vec3 s{1.0, 1.0, 1.0};
  double sigma = 0.1;
  std::vector<Orientation> angles;  // rows 2..N
};

struct OdrModelState {
  Vec3 b{0.0, 0.0, 0.0};
  Vec3 sinv{1.0, 1.0, 1.0};
  double sigma = 0.01;
};

class PosteriorModel : public Target {
 public:
  PosteriorModel(Dataset data, PriorSpec priors);

  virtual ModelKind kind() const = 0;
  Dims dims() const { return data_.dims; }
  const Dataset& data() const { return data_; }
  const PriorSpec& priors() const { return priors_; }
  const ParameterLayout& layout() const { return layout_; }
  std::size_t dimension() const override { return layout_.size(); }

  /// With jacobian=false this is the density of the constrained parameters
  /// evaluated at constrain(u).
  double log_posterior(const Eigen::VectorXd& u, bool jacobian = true) const;
  double log_posterior(const Eigen::VectorXd& u, Eigen::VectorXd& grad, bool jacobian = true) const;
  double log_density(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const override {
    return log_posterior(u, grad, true);
  }

  /// Individual terms in constrained coordinates x = layout().constrain(u).
  double log_prior(const Eigen::VectorXd& x) const;
  double log_likelihood(const Eigen::VectorXd& x) const;

 protected:
  enum class Part { prior = 1, likelihood = 2, both = 3 };
  /// Log density in constrained coordinates, accumulating d/dx into grad_x when non-null.
  virtual double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad_x, Part part) const = 0;

  double prior_b(const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::Index at) const;
  double prior_lognormal(const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::Index at) const;
  double prior_sigma(const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::Index at) const;

  Dataset data_;
  PriorSpec priors_;
  ParameterLayout layout_;
};

/// Unconstrained layout: b (D), log s (D), log sigma, then for rows 2..N the
/// logit-scaled theta in (0, pi) (3D only) followed by phi in (0, 2 pi).
class FullModel final : public PosteriorModel {
 public:
  /// Throws PreconditionError when N < 2.
  FullModel(Dataset data, PriorSpec priors);

  ModelKind kind() const override { return ModelKind::full; }
  std::size_t free_poses() const { return data_.size() - 1; }

  FullModelState state(const Eigen::VectorXd& u) const;
  Eigen::VectorXd unconstrain(const FullModelState& st) const;

  std::vector<std::string> output_names() const override;
  void write_output(const Eigen::VectorXd& u, std::vector<double>& out) const override;

  Eigen::Index theta_offset() const { return 2 * D() + 1; }
  Eigen::Index phi_offset() const {
    return theta_offset() + (dims() == Dims::three ? static_cast<Eigen::Index>(free_poses()) : 0);
  }

 protected:
  double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad_x, Part part) const override;

 private:
  Eigen::Index D() const { return count(dims()); }
};

/// Unconstrained layout: b (D), log sinv (D), log sigma'. Reported outputs add
/// the derived s_j = 1 / sinv_j.
class OdrModel final : public PosteriorModel {
 public:
  OdrModel(Dataset data, PriorSpec priors);

  ModelKind kind() const override { return ModelKind::odr; }

  OdrModelState state(const Eigen::VectorXd& u) const;
  Eigen::VectorXd unconstrain(const OdrModelState& st) const;

  std::vector<std::string> output_names() const override;
  void write_output(const Eigen::VectorXd& u, std::vector<double>& out) const override;

 protected:
  double evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad_x, Part part) const override;

 private:
  Eigen::Index D() const { return count(dims()); }
};

/// Radial residual objective sum_i (|sinv * (a_i - b)| - 1)^2 and its gradient
/// w.r.t. (b, sinv). Shared by the ODR likelihood checks and the ML baseline.
double radial_sse(const Dataset& d, const Vec3& b, const Vec3& sinv, Vec3* grad_b, Vec3* grad_sinv);

}  // namespace bayescal
