#include <algorithm>
#include <cmath>
#include <numbers>

#include "bayescal/error.hpp"
#include "bayescal/posterior.hpp"
#include "bayescal/sampler.hpp"

namespace bayescal {

namespace {

constexpr double kAngleMargin = 1e-3;

Orientation direction_angles(const Vec3& a, Dims dims) {
  Orientation o;
  const double r = norm(a, dims);
  double phi = std::atan2(a[1], a[0]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  o.phi = std::clamp(phi, kAngleMargin, 2.0 * std::numbers::pi - kAngleMargin);
  if (dims == Dims::three) {
    const double z = r > 0.0 ? std::clamp(a[2] / r, -1.0, 1.0) : 1.0;
    o.theta = std::clamp(std::acos(z), kAngleMargin, std::numbers::pi - kAngleMargin);
  } else {
    o.theta = std::numbers::pi / 2.0;
  }
  return o;
}

void check_user_values(const std::vector<double>& v, std::size_t minimum, std::size_t maximum) {
  if (v.size() < minimum || v.size() > maximum)
    throw PreconditionError("user init needs between " + std::to_string(minimum) + " and " +
                            std::to_string(maximum) + " values, got " + std::to_string(v.size()));
}

}  // namespace

Eigen::VectorXd base_init(const PosteriorModel& model, const InitPolicy& policy) {
  const int d = count(model.dims());
  const bool user = policy.kind == InitPolicy::Kind::user_values;
  if (model.kind() == ModelKind::odr) {
    const auto& odr = static_cast<const OdrModel&>(model);
    OdrModelState st;
    if (user) {
      const auto n = static_cast<std::size_t>(2 * d + 1);
      check_user_values(policy.values, n, n);
      for (int j = 0; j < d; ++j) {
        st.b[j] = policy.values[static_cast<std::size_t>(j)];
        st.sinv[j] = policy.values[static_cast<std::size_t>(d + j)];
      }
      st.sigma = policy.values[static_cast<std::size_t>(2 * d)];
    }
    return odr.unconstrain(st);
  }

  const auto& full = static_cast<const FullModel&>(model);
  FullModelState st;
  const std::size_t free = full.free_poses();
  const auto head = static_cast<std::size_t>(2 * d + 1);
  const std::size_t per_pose = model.dims() == Dims::three ? 2 : 1;
  if (user) {
    check_user_values(policy.values, head, head + per_pose * free);
    if (policy.values.size() != head && policy.values.size() != head + per_pose * free)
      throw PreconditionError("user init must give either the global parameters or all parameters");
    for (int j = 0; j < d; ++j) {
      st.b[j] = policy.values[static_cast<std::size_t>(j)];
      st.s[j] = policy.values[static_cast<std::size_t>(d + j)];
    }
    st.sigma = policy.values[static_cast<std::size_t>(2 * d)];
  }
  st.angles.resize(free);
  const auto& rows = model.data().rows;
  for (std::size_t i = 0; i < free; ++i) st.angles[i] = direction_angles(rows[i + 1].a, model.dims());
  if (user && policy.values.size() > head) {
    for (std::size_t i = 0; i < free; ++i) {
      if (model.dims() == Dims::three) {
        st.angles[i].theta = policy.values[head + i];
        st.angles[i].phi = policy.values[head + free + i];
      } else {
        st.angles[i].phi = policy.values[head + i];
      }
    }
  }
  return full.unconstrain(st);
}

std::vector<Eigen::VectorXd> make_init(const PosteriorModel& model, const SamplerConfig& cfg) {
  cfg.validate();
  const Eigen::VectorXd origin = base_init(model, cfg.init);
  if (!origin.allFinite()) throw PreconditionError("initial values violate parameter constraints");
  return jittered_inits(model, origin, cfg);
}

}  // namespace bayescal
