#include "bayescal/sampler.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "bayescal/error.hpp"
#include "bayescal/rng.hpp"

namespace bayescal {

namespace {

constexpr double kDivergenceThreshold = 1000.0;
constexpr double kJitter = 0.01;
constexpr int kInitRetries = 100;

std::uint64_t sampler_stream(int chain) { return 2 * static_cast<std::uint64_t>(chain) + 1; }
std::uint64_t init_stream(int chain) { return 2 * static_cast<std::uint64_t>(chain) + 2; }

// Slow-window lengths for the metric phase. Each window doubles; the last one
// absorbs the remainder when the next doubling would not fit.
std::vector<int> slow_windows(int length, int base) {
  std::vector<int> out;
  int remaining = length;
  int w = base;
  while (remaining > 0) {
    int cur = std::min(w, remaining);
    if (remaining - cur < 2 * cur) cur = remaining;
    out.push_back(cur);
    remaining -= cur;
    w *= 2;
  }
  return out;
}

class DualAveraging {
 public:
  void restart(double eps) {
    mu_ = std::log(10.0 * eps);
    counter_ = 0;
    s_bar_ = 0.0;
    x_bar_ = 0.0;
  }
  double update(double accept, double target) {
    ++counter_;
    accept = std::min(1.0, accept);
    const double eta = 1.0 / (counter_ + kT0);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (target - accept);
    const double x = mu_ - s_bar_ * std::sqrt(static_cast<double>(counter_)) / kGamma;
    const double x_eta = std::pow(static_cast<double>(counter_), -kKappa);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    return std::exp(x);
  }
  double final_step() const { return std::exp(x_bar_); }

 private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;
  double mu_ = 0.0;
  long counter_ = 0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
};

class Chain {
 public:
  Chain(const Target& target, const SamplerConfig& cfg, int index, const Eigen::VectorXd& init)
      : target_(target), cfg_(cfg), rng_(make_engine(cfg.seed, sampler_stream(index))) {
    const auto d = static_cast<Eigen::Index>(target.dimension());
    q_ = init;
    grad_.resize(d);
    lp_ = target_.log_density(q_, grad_);
    if (!std::isfinite(lp_) || !grad_.allFinite())
      throw SamplerError("log density is not finite at the initial point of chain " +
                         std::to_string(index + 1));
    inv_metric_ = Eigen::VectorXd::Ones(d);
  }

  ChainStats run(std::vector<Eigen::VectorXd>& kept) {
    warmup();
    ChainStats stats;
    double accept_sum = 0.0;
    kept.reserve(static_cast<std::size_t>(cfg_.samples));
    for (int it = 0; it < cfg_.samples; ++it) {
      const auto t = transition();
      accept_sum += t.accept;
      if (t.divergent) ++stats.divergences;
      kept.push_back(q_);
    }
    stats.mean_accept = cfg_.samples > 0 ? accept_sum / cfg_.samples : 0.0;
    stats.warmup_divergences = warmup_divergences_;
    stats.step_size = eps_;
    stats.max_steps = max_steps();
    stats.inv_metric.assign(inv_metric_.data(), inv_metric_.data() + inv_metric_.size());
    return stats;
  }

 private:
  struct Outcome {
    double accept = 0.0;
    bool divergent = false;
  };

  double kinetic(const Eigen::VectorXd& p) const {
    return 0.5 * (p.array().square() * inv_metric_.array()).sum();
  }

  Eigen::VectorXd velocity(const Eigen::VectorXd& p) const { return (inv_metric_.array() * p.array()).matrix(); }

  Eigen::VectorXd sample_momentum() {
    Eigen::VectorXd p(q_.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = normal_(rng_) / std::sqrt(inv_metric_[i]);
    return p;
  }

  int max_steps() const {
    const double steps = std::ceil(trajectory_ / eps_);
    if (!std::isfinite(steps) || steps > cfg_.max_leapfrog) return cfg_.max_leapfrog;
    return std::max(1, static_cast<int>(steps));
  }

  // During warmup a trajectory also ends once the log density has risen by
  // more than an equilibrium fluctuation could explain. Far from the typical
  // set this turns the initial descent into many short moves whose released
  // energy is discarded at each momentum refresh, instead of one long flight
  // into a distant basin.
  Outcome transition(bool limit_descent = false) {
    const double descent_limit = std::max(10.0, static_cast<double>(q_.size()));
    std::uniform_int_distribution<int> steps_dist(1, max_steps());
    const int n_steps = steps_dist(rng_);
    Eigen::VectorXd p = sample_momentum();
    const double h0 = -lp_ + kinetic(p);
    Eigen::VectorXd q = q_;
    Eigen::VectorXd grad = grad_;
    double lp = lp_;
    bool divergent = false;
    double h = h0;
    for (int s = 0; s < n_steps; ++s) {
      p += 0.5 * eps_ * grad;
      q += eps_ * velocity(p);
      lp = target_.log_density(q, grad);
      p += 0.5 * eps_ * grad;
      h = -lp + kinetic(p);
      if (!std::isfinite(h) || !grad.allFinite() || h - h0 > kDivergenceThreshold) {
        divergent = true;
        break;
      }
      if (limit_descent && lp - lp_ > descent_limit) break;
    }
    Outcome out;
    out.divergent = divergent;
    out.accept = divergent ? 0.0 : std::min(1.0, std::exp(h0 - h));
    if (!divergent && uniform_(rng_) < out.accept) {
      q_ = std::move(q);
      grad_ = std::move(grad);
      lp_ = lp;
    }
    return out;
  }

  // Doubles or halves the step size until a single leapfrog step crosses an
  // acceptance of 0.8.
  void init_step_size() {
    auto one_step_delta = [&]() {
      Eigen::VectorXd p = sample_momentum();
      const double h0 = -lp_ + kinetic(p);
      Eigen::VectorXd grad = grad_;
      Eigen::VectorXd q = q_;
      p += 0.5 * eps_ * grad;
      q += eps_ * velocity(p);
      const double lp = target_.log_density(q, grad);
      p += 0.5 * eps_ * grad;
      double h = -lp + kinetic(p);
      if (!std::isfinite(h) || !grad.allFinite()) h = std::numeric_limits<double>::infinity();
      return h0 - h;
    };
    const double log_target = std::log(0.8);
    const int direction = one_step_delta() > log_target ? 1 : -1;
    for (int i = 0; i < 100; ++i) {
      const double delta = one_step_delta();
      if (direction == 1 && !(delta > log_target)) break;
      if (direction == -1 && !(delta < log_target)) break;
      eps_ = direction == 1 ? eps_ * 2.0 : eps_ / 2.0;
      if (eps_ > 1e7 || eps_ < 1e-300) break;
    }
    eps_ = std::clamp(eps_, 1e-12, 1e7);
  }

  void update_metric(const std::vector<Eigen::VectorXd>& window) {
    const auto n = static_cast<double>(window.size());
    const auto d = q_.size();
    if (window.size() < 3) return;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& w : window) mean += w;
    mean /= n;
    Eigen::MatrixXd centered(d, static_cast<Eigen::Index>(window.size()));
    for (std::size_t k = 0; k < window.size(); ++k)
      centered.col(static_cast<Eigen::Index>(k)) = window[k] - mean;
    const Eigen::MatrixXd cov = centered * centered.transpose() / (n - 1.0);
    Eigen::VectorXd var = cov.diagonal();
    inv_metric_ = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
    // Longest scale of the posterior in the new metric sets the trajectory length.
    const Eigen::VectorXd scale = inv_metric_.array().rsqrt();
    const Eigen::MatrixXd whitened = scale.asDiagonal() * cov * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(whitened, Eigen::EigenvaluesOnly);
    const double lambda_max = solver.eigenvalues().maxCoeff();
    if (std::isfinite(lambda_max) && lambda_max > 0.0)
      trajectory_ = std::numbers::pi * std::sqrt(std::max(lambda_max, 1.0));
  }

  void warmup() {
    const int total = cfg_.warmup;
    const int init_buffer = static_cast<int>(0.15 * total);
    const int term_buffer = static_cast<int>(0.10 * total);
    const int slow = total - init_buffer - term_buffer;
    const auto windows = slow_windows(slow, std::max(25, total / 40));

    eps_ = 1.0;
    init_step_size();
    DualAveraging da;
    da.restart(eps_);
    warmup_divergences_ = 0;

    auto adapt_step = [&]() {
      const auto t = transition(true);
      if (t.divergent) ++warmup_divergences_;
      eps_ = da.update(t.accept, cfg_.target_accept);
    };

    for (int it = 0; it < init_buffer; ++it) adapt_step();
    for (int w : windows) {
      std::vector<Eigen::VectorXd> window;
      window.reserve(static_cast<std::size_t>(w));
      for (int it = 0; it < w; ++it) {
        adapt_step();
        window.push_back(q_);
      }
      update_metric(window);
      init_step_size();
      da.restart(eps_);
    }
    for (int it = 0; it < term_buffer; ++it) adapt_step();
    eps_ = da.final_step();
    if (!std::isfinite(eps_) || eps_ <= 0.0) eps_ = 1e-3;
    if (warmup_divergences_ >= total)
      throw SamplerError("every warmup transition diverged");
  }

  const Target& target_;
  const SamplerConfig& cfg_;
  Engine rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  Eigen::VectorXd q_;
  Eigen::VectorXd grad_;
  double lp_ = 0.0;
  Eigen::VectorXd inv_metric_;
  double eps_ = 1.0;
  double trajectory_ = std::numbers::pi;
  int warmup_divergences_ = 0;
};

std::vector<Eigen::VectorXd> jittered(const Target& target, const Eigen::VectorXd& origin,
                                      const SamplerConfig& cfg) {
  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXd grad(origin.size());
  for (int c = 0; c < cfg.chains; ++c) {
    Engine rng = make_engine(cfg.seed, init_stream(c));
    std::uniform_real_distribution<double> jitter(-kJitter, kJitter);
    bool ok = false;
    for (int attempt = 0; attempt < kInitRetries && !ok; ++attempt) {
      Eigen::VectorXd u = origin;
      for (Eigen::Index i = 0; i < u.size(); ++i) u[i] += jitter(rng);
      const double lp = target.log_density(u, grad);
      if (std::isfinite(lp) && grad.allFinite()) {
        out.push_back(std::move(u));
        ok = true;
      }
    }
    if (!ok)
      throw SamplerError("could not find a finite starting point for chain " +
                         std::to_string(c + 1) + " after " + std::to_string(kInitRetries) +
                         " attempts");
  }
  return out;
}

}  // namespace

std::vector<Eigen::VectorXd> jittered_inits(const Target& target, const Eigen::VectorXd& origin,
                                            const SamplerConfig& cfg) {
  return jittered(target, origin, cfg);
}

void SamplerConfig::validate() const {
  if (chains < 1) throw PreconditionError("chains must be at least 1");
  if (warmup < 100) throw PreconditionError("warmup must be at least 100");
  if (samples < 1) throw PreconditionError("samples must be at least 1");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw PreconditionError("target_accept must lie in (0, 1)");
  if (max_leapfrog < 1) throw PreconditionError("max_leapfrog must be at least 1");
}

std::vector<std::vector<double>> PosteriorDraws::series(std::size_t param) const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(chains),
                                       std::vector<double>(static_cast<std::size_t>(samples)));
  for (int c = 0; c < chains; ++c)
    for (int s = 0; s < samples; ++s)
      out[static_cast<std::size_t>(c)][static_cast<std::size_t>(s)] = at(c, s, param);
  return out;
}

std::size_t PosteriorDraws::index_of(const std::string& name) const {
  return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

int PosteriorDraws::total_divergences() const {
  int total = 0;
  for (const auto& s : stats) total += s.divergences;
  return total;
}

PosteriorDraws run_hmc(const Target& target, const SamplerConfig& cfg,
                       const std::vector<Eigen::VectorXd>& inits) {
  cfg.validate();
  if (inits.size() != static_cast<std::size_t>(cfg.chains))
    throw PreconditionError("need one initial point per chain");
  const auto chains = static_cast<std::size_t>(cfg.chains);
  std::vector<std::vector<Eigen::VectorXd>> kept(chains);
  std::vector<ChainStats> stats(chains);
  std::vector<std::exception_ptr> errors(chains);

  auto work = [&](std::size_t c) {
    try {
      Chain chain(target, cfg, static_cast<int>(c), inits[c]);
      stats[c] = chain.run(kept[c]);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (cfg.parallel && chains > 1) {
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < chains; ++c) threads.emplace_back(work, c);
    for (auto& t : threads) t.join();
  } else {
    for (std::size_t c = 0; c < chains; ++c) work(c);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  PosteriorDraws draws;
  draws.names = target.output_names();
  draws.chains = cfg.chains;
  draws.samples = cfg.samples;
  draws.stats = std::move(stats);
  draws.values.reserve(chains * static_cast<std::size_t>(cfg.samples) * draws.names.size());
  std::vector<double> out;
  for (std::size_t c = 0; c < chains; ++c)
    for (const auto& q : kept[c]) {
      target.write_output(q, out);
      draws.values.insert(draws.values.end(), out.begin(), out.end());
    }
  return draws;
}

PosteriorDraws run_hmc(const Target& target, const SamplerConfig& cfg,
                       const Eigen::VectorXd& origin) {
  cfg.validate();
  return run_hmc(target, cfg, jittered(target, origin, cfg));
}

}  // namespace bayescal
