#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "bayescal/diagnostics.hpp"
#include "bayescal/error.hpp"
#include "bayescal/posterior.hpp"
#include "bayescal/sampler.hpp"
#include "doctest.h"

using namespace bayescal;

namespace {

struct Gaussian : Target {
  Eigen::VectorXd sd;
  explicit Gaussian(Eigen::VectorXd s) : sd(std::move(s)) {}
  std::size_t dimension() const override { return static_cast<std::size_t>(sd.size()); }
  double log_density(const Eigen::VectorXd& u, Eigen::VectorXd& g) const override {
    const Eigen::ArrayXd z = u.array() / sd.array();
    g = -(z / sd.array()).matrix();
    return -0.5 * z.square().sum();
  }
};

struct Correlated : Target {
  Eigen::Matrix2d precision;
  explicit Correlated(double rho) {
    Eigen::Matrix2d cov;
    cov << 1.0, rho, rho, 1.0;
    precision = cov.inverse();
  }
  std::size_t dimension() const override { return 2; }
  double log_density(const Eigen::VectorXd& u, Eigen::VectorXd& g) const override {
    g = -precision * u;
    return -0.5 * u.dot(precision * u);
  }
};

// x1 ~ N(0, 1), x2 | x1 ~ N(x1^2, 1)
struct Banana : Target {
  std::size_t dimension() const override { return 2; }
  double log_density(const Eigen::VectorXd& u, Eigen::VectorXd& g) const override {
    const double r = u[1] - u[0] * u[0];
    g.resize(2);
    g[0] = -u[0] + 2.0 * u[0] * r;
    g[1] = -r;
    return -0.5 * u[0] * u[0] - 0.5 * r * r;
  }
};

struct NowhereFinite : Target {
  std::size_t dimension() const override { return 1; }
  double log_density(const Eigen::VectorXd&, Eigen::VectorXd& g) const override {
    g = Eigen::VectorXd::Zero(1);
    return std::nan("");
  }
};

// Finite only at the origin, so every trajectory leaves the support.
struct Spike : Target {
  std::size_t dimension() const override { return 1; }
  double log_density(const Eigen::VectorXd& u, Eigen::VectorXd& g) const override {
    g = Eigen::VectorXd::Zero(1);
    return u[0] == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
};

SamplerConfig short_config(std::uint64_t seed = 1) {
  SamplerConfig cfg;
  cfg.warmup = 1000;
  cfg.samples = 2000;
  cfg.seed = seed;
  return cfg;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<double> pooled(const PosteriorDraws& d, std::size_t p) {
  std::vector<double> out;
  for (int c = 0; c < d.chains; ++c)
    for (int s = 0; s < d.samples; ++s) out.push_back(d.at(c, s, p));
  return out;
}

}  // namespace

TEST_CASE("standard normal target") {
  Gaussian t(Eigen::VectorXd::Ones(1));
  const auto draws = run_hmc(t, SamplerConfig{}, Eigen::VectorXd::Zero(1));
  REQUIRE(draws.values.size() == 8000);
  auto x = pooled(draws, 0);
  double mean = 0.0, ss = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(sd - 1.0) < 0.05);

  SUBCASE("Kolmogorov-Smirnov at alpha 0.01") {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double f = normal_cdf(x[i]);
      d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    CHECK(d < 1.628 / std::sqrt(n));
  }
  SUBCASE("acceptance rate near the target") {
    for (const auto& s : draws.stats) {
      CHECK(s.mean_accept >= 0.0);
      CHECK(s.mean_accept <= 1.0);
      CHECK(std::abs(s.mean_accept - 0.8) < 0.1);
    }
  }
}

TEST_CASE("acceptance rate near the target on a 10-dimensional Gaussian") {
  Gaussian t(Eigen::VectorXd::LinSpaced(10, 0.5, 5.0));
  const auto draws = run_hmc(t, SamplerConfig{}, Eigen::VectorXd::Zero(10));
  for (const auto& s : draws.stats) CHECK(std::abs(s.mean_accept - 0.8) < 0.1);
}

TEST_CASE("correlated Gaussian covariance") {
  Correlated t(0.9);
  const auto draws = run_hmc(t, short_config(2), Eigen::VectorXd::Zero(2));
  const auto x = pooled(draws, 0), y = pooled(draws, 1);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  CHECK(std::abs(sxx / (n - 1) - 1.0) < 0.1);
  CHECK(std::abs(syy / (n - 1) - 1.0) < 0.1);
  CHECK(std::abs(sxy / (n - 1) - 0.9) < 0.09);
}

TEST_CASE("banana target mixes across chains with the default configuration") {
  Banana t;
  SamplerConfig cfg;
  cfg.seed = 3;
  const auto draws = run_hmc(t, cfg, Eigen::VectorXd::Zero(2));
  CHECK(split_rhat(draws.series(0)) < 1.05);
  CHECK(split_rhat(draws.series(1)) < 1.05);
}

TEST_CASE("mass matrix adaptation") {
  SUBCASE("isotropic") {
    Gaussian t(Eigen::VectorXd::Ones(3));
    const auto draws = run_hmc(t, short_config(4), Eigen::VectorXd::Zero(3));
    for (const auto& s : draws.stats)
      for (double m : s.inv_metric) CHECK(std::abs(m - 1.0) < 0.2);
  }
  SUBCASE("axis scaled") {
    Eigen::VectorXd sd(2);
    sd << 1.0, 100.0;
    Gaussian t(sd);
    const auto draws = run_hmc(t, short_config(5), Eigen::VectorXd::Zero(2));
    for (const auto& s : draws.stats) {
      const double ratio = std::sqrt(s.inv_metric[1] / s.inv_metric[0]);
      CHECK(ratio > 50.0);
      CHECK(ratio < 200.0);
    }
  }
}

TEST_CASE("draws are reproducible and independent of threading") {
  Correlated t(0.5);
  SamplerConfig cfg = short_config(9);
  cfg.warmup = 200;
  cfg.samples = 100;
  const auto a = run_hmc(t, cfg, Eigen::VectorXd::Zero(2));
  const auto b = run_hmc(t, cfg, Eigen::VectorXd::Zero(2));
  cfg.parallel = false;
  const auto c = run_hmc(t, cfg, Eigen::VectorXd::Zero(2));
  CHECK(a.values == b.values);
  CHECK(a.values == c.values);
  cfg.seed = 10;
  const auto d = run_hmc(t, cfg, Eigen::VectorXd::Zero(2));
  CHECK(a.values != d.values);
  bool chains_differ = false;
  for (int s = 0; s < a.samples; ++s) chains_differ = chains_differ || a.at(0, s, 0) != a.at(1, s, 0);
  CHECK(chains_differ);
}

TEST_CASE("sampler failures") {
  SamplerConfig cfg = short_config();
  cfg.warmup = 100;
  cfg.samples = 10;
  CHECK_THROWS_AS(run_hmc(NowhereFinite{}, cfg, Eigen::VectorXd::Zero(1)), SamplerError);
  CHECK_THROWS_AS(run_hmc(Spike{}, cfg, std::vector<Eigen::VectorXd>(4, Eigen::VectorXd::Zero(1))),
                  SamplerError);
  cfg.chains = 0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg.chains = 1;
  cfg.warmup = 99;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
}

TEST_CASE("default initial values") {
  const CalibrationParams p{{0.1, -0.2, 0.3}, {0.9, 1.0, 1.1}, 0.02, Dims::three};
  const Dataset d = simulate(p, grid_orientations(16), 1);
  SUBCASE("radial model") {
    OdrModel m(d, PriorSpec{});
    const auto st = m.state(base_init(m, InitPolicy{}));
    CHECK(st.b == Vec3{0.0, 0.0, 0.0});
    CHECK(st.sinv == Vec3{1.0, 1.0, 1.0});
    CHECK(st.sigma == doctest::Approx(0.01).epsilon(1e-15));
  }
  SUBCASE("full model angles from data directions") {
    Dataset pole = d;
    pole.rows[1].a = {0.0, 0.0, 1.0};
    FullModel m(pole, PriorSpec{});
    const auto st = m.state(base_init(m, InitPolicy{}));
    CHECK(st.b == Vec3{0.0, 0.0, 0.0});
    CHECK(st.sigma == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(st.angles[0].theta > 0.0);
    CHECK(st.angles[0].theta < 1e-2);
    const Vec3 dir = spherical_to_cartesian(st.angles[5]);
    const Vec3 a = d.rows[6].a;
    const double n = norm(a);
    for (int j = 0; j < 3; ++j) CHECK(dir[j] == doctest::Approx(a[j] / n).epsilon(1e-9));
  }
  SUBCASE("chains receive distinct jittered starts") {
    OdrModel m(d, PriorSpec{});
    SamplerConfig cfg;
    const auto inits = make_init(m, cfg);
    REQUIRE(inits.size() == 4);
    const Eigen::VectorXd base = base_init(m, InitPolicy{});
    for (std::size_t i = 0; i < inits.size(); ++i) {
      CHECK((inits[i] - base).cwiseAbs().maxCoeff() <= 0.01);
      for (std::size_t j = 0; j < i; ++j) CHECK(inits[i] != inits[j]);
    }
    CHECK(make_init(m, cfg) == inits);
  }
  SUBCASE("user values") {
    OdrModel m(d, PriorSpec{});
    InitPolicy pol{InitPolicy::Kind::user_values, {0.1, 0.2, 0.3, 1.1, 1.2, 0.9, 0.05}};
    const auto st = m.state(base_init(m, pol));
    CHECK(st.b[1] == doctest::Approx(0.2));
    CHECK(st.sinv[2] == doctest::Approx(0.9));
    pol.values.pop_back();
    CHECK_THROWS_AS(base_init(m, pol), PreconditionError);
  }
}

TEST_CASE("draws respect the constrained support") {
  const CalibrationParams p{{0.1, -0.2, 0.3}, {0.9, 1.0, 1.1}, 0.02, Dims::three};
  const Dataset d = simulate(p, with_reference_pose(grid_orientations(9)), 2);
  SamplerConfig cfg;
  cfg.warmup = 300;
  cfg.samples = 200;
  FullModel m(d, PriorSpec{});
  const auto draws = run_hmc(m, cfg, make_init(m, cfg));
  const std::size_t free = d.size() - 1;
  for (int c = 0; c < draws.chains; ++c)
    for (int s = 0; s < draws.samples; ++s) {
      for (std::size_t j = 3; j <= 6; ++j) CHECK(draws.at(c, s, j) > 0.0);
      for (std::size_t i = 0; i < free; ++i) {
        const double th = draws.at(c, s, 7 + i), ph = draws.at(c, s, 7 + free + i);
        CHECK((th > 0.0 && th < std::numbers::pi));
        CHECK((ph > 0.0 && ph < 2 * std::numbers::pi));
      }
    }
}
