#pragma once

// Multi-chain Hamiltonian Monte Carlo with a diagonal metric.
//
// Each transition integrates a leapfrog trajectory whose step count is drawn
// uniformly from [1, L]. Warmup runs three phases: a fast step-size buffer,
// doubling slow windows that re-estimate the metric (and L), and a final
// step-size buffer. Step size is tuned by dual averaging toward target_accept.

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "bayescal/target.hpp"

namespace bayescal {

struct InitPolicy {
  enum class Kind { default_jitter, user_values };
  Kind kind = Kind::default_jitter;
  /// For user_values: one constrained value per model parameter (b, s or sinv, sigma, ...).
  std::vector<double> values;
};

struct SamplerConfig {
  int chains = 4;
  int warmup = 10000;
  int samples = 2000;
  std::uint64_t seed = 1;
  double target_accept = 0.8;
  int max_leapfrog = 1024;
  InitPolicy init;
  /// Run chains on separate threads. Results do not depend on this flag.
  bool parallel = true;

  void validate() const;
};

struct ChainStats {
  double mean_accept = 0.0;
  int divergences = 0;
  int warmup_divergences = 0;
  double step_size = 0.0;
  int max_steps = 0;
  std::vector<double> inv_metric;
};

/// Post-warmup draws in reported (constrained) coordinates.
struct PosteriorDraws {
  std::vector<std::string> names;
  int chains = 0;
  int samples = 0;
  std::vector<double> values;  // [chain][sample][param]
  std::vector<ChainStats> stats;

  std::size_t params() const { return names.size(); }
  double at(int chain, int sample, std::size_t param) const {
    return values[(static_cast<std::size_t>(chain) * static_cast<std::size_t>(samples) +
                   static_cast<std::size_t>(sample)) * params() + param];
  }
  /// chains x samples series for one parameter.
  std::vector<std::vector<double>> series(std::size_t param) const;
  /// Index of a parameter name, or params() when absent.
  std::size_t index_of(const std::string& name) const;
  int total_divergences() const;
};

/// Runs cfg.chains independent chains from the given unconstrained starting
/// points (one per chain). Throws SamplerError if a start is not finite or
/// every warmup transition diverged.
PosteriorDraws run_hmc(const Target& target, const SamplerConfig& cfg,
                       const std::vector<Eigen::VectorXd>& inits);

/// Convenience for generic targets: starts every chain at `origin` with the
/// default +-0.01 jitter.
PosteriorDraws run_hmc(const Target& target, const SamplerConfig& cfg,
                       const Eigen::VectorXd& origin);

/// One jittered copy of origin per chain (uniform +-0.01 per coordinate),
/// redrawn up to 100 times until the log density is finite.
std::vector<Eigen::VectorXd> jittered_inits(const Target& target, const Eigen::VectorXd& origin,
                                            const SamplerConfig& cfg);

class PosteriorModel;

/// Default starting points per chain for a calibration model, in unconstrained
/// coordinates. Radial model: sinv = 1, b = 0, sigma' = 0.01. Full model: b = 0,
/// s = 1, sigma = 0.1 and angles taken from the normalized measurement
/// directions. Each chain adds uniform +-0.01 jitter (redrawn up to 100 times
/// until the log density is finite).
std::vector<Eigen::VectorXd> make_init(const PosteriorModel& model, const SamplerConfig& cfg);

/// Base point before jitter (exposed for tests).
Eigen::VectorXd base_init(const PosteriorModel& model, const InitPolicy& policy);

}  // namespace bayescal
