#include "bayescal/posterior.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "bayescal/error.hpp"

namespace bayescal {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

double normal_lpdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
}

std::vector<std::string> indexed(const std::string& stem, std::size_t from, std::size_t to) {
  std::vector<std::string> out;
  for (std::size_t i = from; i <= to; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

}  // namespace

std::vector<std::string> Target::output_names() const { return indexed("x", 1, dimension()); }

void Target::write_output(const Eigen::VectorXd& u, std::vector<double>& out) const {
  out.assign(u.data(), u.data() + u.size());
}

void PriorSpec::validate() const {
  if (!(b_sd > 0.0) || !(sigma_sd > 0.0) || !(s_log_sd > 0.0) || !std::isfinite(s_log_mu))
    throw PreconditionError("prior standard deviations must be positive");
}

PriorSpec PriorSpec::widened(double factor) const {
  PriorSpec p = *this;
  p.b_sd *= factor;
  p.sigma_sd *= factor;
  p.s_log_sd *= factor;
  return p;
}

const char* to_string(ModelKind kind) { return kind == ModelKind::full ? "full" : "odr"; }

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "full") return ModelKind::full;
  if (s == "odr") return ModelKind::odr;
  throw PreconditionError("unknown model '" + s + "' (expected full or odr)");
}

PosteriorModel::PosteriorModel(Dataset data, PriorSpec priors)
    : data_(std::move(data)), priors_(priors) {
  data_.validate();
  priors_.validate();
}

double PosteriorModel::log_posterior(const Eigen::VectorXd& u, bool jacobian) const {
  Eigen::VectorXd x;
  const double logj = layout_.constrain(u, x);
  const double lp = evaluate(x, nullptr, Part::both);
  return jacobian ? lp + logj : lp;
}

double PosteriorModel::log_posterior(const Eigen::VectorXd& u, Eigen::VectorXd& grad,
                                     bool jacobian) const {
  Eigen::VectorXd x;
  const double logj = layout_.constrain(u, x);
  Eigen::VectorXd grad_x = Eigen::VectorXd::Zero(x.size());
  const double lp = evaluate(x, &grad_x, Part::both);
  layout_.chain_rule(u, grad_x, jacobian, grad);
  return jacobian ? lp + logj : lp;
}

double PosteriorModel::log_prior(const Eigen::VectorXd& x) const {
  return evaluate(x, nullptr, Part::prior);
}

double PosteriorModel::log_likelihood(const Eigen::VectorXd& x) const {
  return evaluate(x, nullptr, Part::likelihood);
}

double PosteriorModel::prior_b(const Eigen::VectorXd& x, Eigen::VectorXd* g, Eigen::Index at) const {
  const double sd = priors_.b_sd;
  if (g) (*g)[at] += -x[at] / (sd * sd);
  return normal_lpdf(x[at], 0.0, sd);
}

double PosteriorModel::prior_lognormal(const Eigen::VectorXd& x, Eigen::VectorXd* g,
                                       Eigen::Index at) const {
  const double v = x[at];
  const double mu = priors_.s_log_mu;
  const double sd = priors_.s_log_sd;
  const double lv = std::log(v);
  if (g) (*g)[at] += -1.0 / v - (lv - mu) / (sd * sd * v);
  return normal_lpdf(lv, mu, sd) - lv;
}

double PosteriorModel::prior_sigma(const Eigen::VectorXd& x, Eigen::VectorXd* g,
                                   Eigen::Index at) const {
  const double sd = priors_.sigma_sd;
  if (g) (*g)[at] += -x[at] / (sd * sd);
  return normal_lpdf(x[at], 0.0, sd);
}

// ---------------------------------------------------------------- full model

FullModel::FullModel(Dataset data, PriorSpec priors) : PosteriorModel(std::move(data), priors) {
  if (data_.size() < 2)
    throw PreconditionError("the full model needs at least 2 rows (row 1 is the pinned pose), got " +
                            std::to_string(data_.size()));
  std::vector<Transform> t;
  const int d = count(dims());
  for (int j = 0; j < d; ++j) t.push_back(Transform::identity());
  for (int j = 0; j < d; ++j) t.push_back(Transform::positive());
  t.push_back(Transform::positive());
  if (dims() == Dims::three)
    for (std::size_t i = 0; i < free_poses(); ++i)
      t.push_back(Transform::interval(0.0, std::numbers::pi));
  for (std::size_t i = 0; i < free_poses(); ++i)
    t.push_back(Transform::interval(0.0, 2.0 * std::numbers::pi));
  layout_ = ParameterLayout(std::move(t));
}

FullModelState FullModel::state(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x;
  layout_.constrain(u, x);
  FullModelState st;
  for (Eigen::Index j = 0; j < D(); ++j) {
    st.b[j] = x[j];
    st.s[j] = x[D() + j];
  }
  st.sigma = x[2 * D()];
  st.angles.resize(free_poses());
  for (std::size_t i = 0; i < free_poses(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    st.angles[i].theta = dims() == Dims::three ? x[theta_offset() + k] : std::numbers::pi / 2.0;
    st.angles[i].phi = x[phi_offset() + k];
  }
  return st;
}

Eigen::VectorXd FullModel::unconstrain(const FullModelState& st) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(layout_.size()));
  for (Eigen::Index j = 0; j < D(); ++j) {
    x[j] = st.b[j];
    x[D() + j] = st.s[j];
  }
  x[2 * D()] = st.sigma;
  for (std::size_t i = 0; i < free_poses(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (dims() == Dims::three) x[theta_offset() + k] = st.angles.at(i).theta;
    x[phi_offset() + k] = st.angles.at(i).phi;
  }
  return layout_.unconstrain(x);
}

std::vector<std::string> FullModel::output_names() const {
  const auto d = static_cast<std::size_t>(D());
  auto names = indexed("b", 1, d);
  for (auto& n : indexed("s", 1, d)) names.push_back(n);
  names.push_back("sigma");
  const std::size_t n = data_.size();
  if (dims() == Dims::three)
    for (auto& s : indexed("theta", 2, n)) names.push_back(s);
  for (auto& s : indexed("phi", 2, n)) names.push_back(s);
  return names;
}

void FullModel::write_output(const Eigen::VectorXd& u, std::vector<double>& out) const {
  Eigen::VectorXd x;
  layout_.constrain(u, x);
  out.assign(x.data(), x.data() + x.size());
}

double FullModel::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad_x, Part part) const {
  const Eigen::Index d = D();
  double lp = 0.0;
  const bool prior = static_cast<int>(part) & static_cast<int>(Part::prior);
  const bool likelihood = static_cast<int>(part) & static_cast<int>(Part::likelihood);
  const Eigen::Index sig = 2 * d;

  if (prior) {
    for (Eigen::Index j = 0; j < d; ++j) {
      lp += prior_b(x, grad_x, j);
      lp += prior_lognormal(x, grad_x, d + j);
    }
    lp += prior_sigma(x, grad_x, sig);
  }
  if (!likelihood) return lp;

  const double sigma = x[sig];
  const double inv_var = 1.0 / (sigma * sigma);
  const auto n = static_cast<Eigen::Index>(data_.size());
  double sse = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double g[3];
    double dg_dtheta[3] = {0.0, 0.0, 0.0};
    double dg_dphi[3] = {0.0, 0.0, 0.0};
    if (i == 0) {
      // pinned pose
      g[0] = dims() == Dims::three ? 0.0 : 1.0;
      g[1] = 0.0;
      g[2] = dims() == Dims::three ? 1.0 : 0.0;
    } else if (dims() == Dims::three) {
      const double th = x[theta_offset() + i - 1];
      const double ph = x[phi_offset() + i - 1];
      const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
      g[0] = st * cp;
      g[1] = st * sp;
      g[2] = ct;
      dg_dtheta[0] = ct * cp;
      dg_dtheta[1] = ct * sp;
      dg_dtheta[2] = -st;
      dg_dphi[0] = -st * sp;
      dg_dphi[1] = st * cp;
    } else {
      const double ph = x[phi_offset() + i - 1];
      g[0] = std::cos(ph);
      g[1] = std::sin(ph);
      g[2] = 0.0;
      dg_dphi[0] = -g[1];
      dg_dphi[1] = g[0];
    }
    const auto& a = data_.rows[static_cast<std::size_t>(i)].a;
    double d_theta = 0.0, d_phi = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double r = a[j] - x[j] - x[d + j] * g[j];
      sse += r * r;
      if (grad_x) {
        const double w = r * inv_var;
        (*grad_x)[j] += w;
        (*grad_x)[d + j] += w * g[j];
        d_theta += w * x[d + j] * dg_dtheta[j];
        d_phi += w * x[d + j] * dg_dphi[j];
      }
    }
    if (grad_x && i > 0) {
      if (dims() == Dims::three) (*grad_x)[theta_offset() + i - 1] += d_theta;
      (*grad_x)[phi_offset() + i - 1] += d_phi;
    }
  }
  const double count_terms = static_cast<double>(n * d);
  lp += -count_terms * (std::log(sigma) + kHalfLog2Pi) - 0.5 * sse * inv_var;
  if (grad_x) (*grad_x)[sig] += -count_terms / sigma + sse * inv_var / sigma;
  return lp;
}

// ----------------------------------------------------------------- ODR model

OdrModel::OdrModel(Dataset data, PriorSpec priors) : PosteriorModel(std::move(data), priors) {
  std::vector<Transform> t;
  const int d = count(dims());
  for (int j = 0; j < d; ++j) t.push_back(Transform::identity());
  for (int j = 0; j < d; ++j) t.push_back(Transform::positive());
  t.push_back(Transform::positive());
  layout_ = ParameterLayout(std::move(t));
}

OdrModelState OdrModel::state(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x;
  layout_.constrain(u, x);
  OdrModelState st;
  for (Eigen::Index j = 0; j < D(); ++j) {
    st.b[j] = x[j];
    st.sinv[j] = x[D() + j];
  }
  st.sigma = x[2 * D()];
  return st;
}

Eigen::VectorXd OdrModel::unconstrain(const OdrModelState& st) const {
  Eigen::VectorXd x(2 * D() + 1);
  for (Eigen::Index j = 0; j < D(); ++j) {
    x[j] = st.b[j];
    x[D() + j] = st.sinv[j];
  }
  x[2 * D()] = st.sigma;
  return layout_.unconstrain(x);
}

std::vector<std::string> OdrModel::output_names() const {
  const auto d = static_cast<std::size_t>(D());
  auto names = indexed("b", 1, d);
  for (auto& n : indexed("sinv", 1, d)) names.push_back(n);
  names.push_back("sigma");
  for (auto& n : indexed("s", 1, d)) names.push_back(n);
  return names;
}

void OdrModel::write_output(const Eigen::VectorXd& u, std::vector<double>& out) const {
  Eigen::VectorXd x;
  layout_.constrain(u, x);
  out.assign(x.data(), x.data() + x.size());
  for (Eigen::Index j = 0; j < D(); ++j) out.push_back(1.0 / x[D() + j]);
}

double OdrModel::evaluate(const Eigen::VectorXd& x, Eigen::VectorXd* grad_x, Part part) const {
  const Eigen::Index d = D();
  const Eigen::Index sig = 2 * d;
  double lp = 0.0;
  if (static_cast<int>(part) & static_cast<int>(Part::prior)) {
    for (Eigen::Index j = 0; j < d; ++j) {
      lp += prior_b(x, grad_x, j);
      lp += prior_lognormal(x, grad_x, d + j);
    }
    lp += prior_sigma(x, grad_x, sig);
  }
  if (!(static_cast<int>(part) & static_cast<int>(Part::likelihood))) return lp;

  Vec3 b{0.0, 0.0, 0.0}, sinv{1.0, 1.0, 1.0};
  for (Eigen::Index j = 0; j < d; ++j) {
    b[j] = x[j];
    sinv[j] = x[d + j];
  }
  Dataset const& data = data_;
  Vec3 gb{}, gs{};
  const double sse = radial_sse(data, b, sinv, grad_x ? &gb : nullptr, grad_x ? &gs : nullptr);
  const double sigma = x[sig];
  const double inv_var = 1.0 / (sigma * sigma);
  const double n = static_cast<double>(data.size());
  lp += -n * (std::log(sigma) + kHalfLog2Pi) - 0.5 * sse * inv_var;
  if (grad_x) {
    // d/dtheta of -sse / (2 sigma^2) is -0.5 * inv_var * dsse
    for (Eigen::Index j = 0; j < d; ++j) {
      (*grad_x)[j] += -0.5 * inv_var * gb[j];
      (*grad_x)[d + j] += -0.5 * inv_var * gs[j];
    }
    (*grad_x)[sig] += -n / sigma + sse * inv_var / sigma;
  }
  return lp;
}

double radial_sse(const Dataset& d, const Vec3& b, const Vec3& sinv, Vec3* grad_b, Vec3* grad_sinv) {
  const int D = count(d.dims);
  double sse = 0.0;
  if (grad_b) *grad_b = {0.0, 0.0, 0.0};
  if (grad_sinv) *grad_sinv = {0.0, 0.0, 0.0};
  for (const auto& row : d.rows) {
    double gh[3] = {0.0, 0.0, 0.0};
    double r2 = 0.0;
    for (int j = 0; j < D; ++j) {
      gh[j] = sinv[j] * (row.a[j] - b[j]);
      r2 += gh[j] * gh[j];
    }
    const double r = std::sqrt(r2);
    const double e = r - 1.0;
    sse += e * e;
    if (!grad_b && !grad_sinv) continue;
    if (r == 0.0) continue;  // the radius is not differentiable at the origin
    const double w = 2.0 * e / r;
    for (int j = 0; j < D; ++j) {
      if (grad_b) (*grad_b)[j] += -w * gh[j] * sinv[j];
      if (grad_sinv) (*grad_sinv)[j] += w * gh[j] * (row.a[j] - b[j]);
    }
  }
  return sse;
}

}  // namespace bayescal
