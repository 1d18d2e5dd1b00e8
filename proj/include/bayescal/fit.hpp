#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bayescal/diagnostics.hpp"
#include "bayescal/model.hpp"
#include "bayescal/posterior.hpp"
#include "bayescal/sampler.hpp"

namespace bayescal {

struct RunConfig {
  ModelKind model = ModelKind::odr;
  Dims dims = Dims::three;
  PriorSpec priors;
  SamplerConfig sampler;
  Thresholds thresholds;
  /// Average rows sharing a pose_id before fitting.
  bool average_poses = false;

  void validate() const;
};

/// Row count above which the full model is known to mix slowly.
inline constexpr std::size_t kFullModelSlowRows = 30;

struct UnitFit {
  std::string unit_id = "default";
  ModelKind model = ModelKind::odr;
  Dims dims = Dims::three;
  std::size_t rows = 0;
  PosteriorDraws draws;
  SummaryTable summary;
  std::vector<std::string> warnings;

  bool converged() const { return summary.pass; }
  /// Posterior medians of b and s (s derived from sinv for the radial model).
  Vec3 median_b() const;
  Vec3 median_s() const;
};

struct FitResult {
  std::vector<UnitFit> units;
  bool converged() const;
};

/// Precondition warnings for fitting `rows` measurements with `model`.
std::vector<std::string> fit_warnings(ModelKind model, Dims dims, std::size_t rows);

std::unique_ptr<PosteriorModel> make_model(const Dataset& d, const RunConfig& cfg);

/// Fits a single dataset (labels ignored).
UnitFit fit_dataset(const Dataset& d, const RunConfig& cfg, const std::string& unit_id = "default");

/// Splits by unit_id (optionally averaging pose bursts) and fits each unit independently.
FitResult fit_units(const Dataset& d, const RunConfig& cfg);

}  // namespace bayescal
