#include "bayescal/fit.hpp"

#include <memory>

#include "bayescal/error.hpp"

namespace bayescal {

void RunConfig::validate() const {
  priors.validate();
  sampler.validate();
  if (!(thresholds.rhat_max > 1.0)) throw PreconditionError("rhat_max must exceed 1");
  if (!(thresholds.ess_frac > 0.0)) throw PreconditionError("ess_frac must be positive");
}

Vec3 UnitFit::median_b() const {
  Vec3 b{0.0, 0.0, 0.0};
  for (int j = 0; j < count(dims); ++j) {
    const auto* p = summary.find("b" + std::to_string(j + 1));
    if (!p) throw PreconditionError("summary lacks b" + std::to_string(j + 1));
    b[j] = p->median;
  }
  return b;
}

Vec3 UnitFit::median_s() const {
  Vec3 s{1.0, 1.0, 1.0};
  for (int j = 0; j < count(dims); ++j) {
    const std::string idx = std::to_string(j + 1);
    if (const auto* sinv = summary.find("sinv" + idx))
      s[j] = 1.0 / sinv->median;
    else if (const auto* p = summary.find("s" + idx))
      s[j] = p->median;
    else
      throw PreconditionError("summary lacks s" + idx);
  }
  return s;
}

bool FitResult::converged() const {
  for (const auto& u : units)
    if (!u.converged()) return false;
  return !units.empty();
}

std::vector<std::string> fit_warnings(ModelKind model, Dims dims, std::size_t rows) {
  std::vector<std::string> out;
  const auto radial_params = static_cast<std::size_t>(2 * count(dims) + 1);
  if (model == ModelKind::full && rows > kFullModelSlowRows)
    out.push_back("full model with " + std::to_string(rows) +
                  " rows: chains are known to mix slowly above " +
                  std::to_string(kFullModelSlowRows) + " rows; consider the odr model");
  if (model == ModelKind::odr && rows < radial_params)
    out.push_back("odr model with " + std::to_string(rows) + " rows has fewer rows than its " +
                  std::to_string(radial_params) + " parameters; estimates rest on the priors");
  return out;
}

std::unique_ptr<PosteriorModel> make_model(const Dataset& d, const RunConfig& cfg) {
  Dataset data = d;
  data.dims = cfg.dims;
  if (cfg.model == ModelKind::full) return std::make_unique<FullModel>(std::move(data), cfg.priors);
  return std::make_unique<OdrModel>(std::move(data), cfg.priors);
}

UnitFit fit_dataset(const Dataset& d, const RunConfig& cfg, const std::string& unit_id) {
  cfg.validate();
  if (d.dims != cfg.dims)
    throw PreconditionError("dataset has " + std::to_string(count(d.dims)) +
                            " dimensions but the run is configured for " +
                            std::to_string(count(cfg.dims)));
  UnitFit fit;
  fit.unit_id = unit_id;
  fit.model = cfg.model;
  fit.dims = cfg.dims;
  fit.rows = d.size();
  fit.warnings = fit_warnings(cfg.model, cfg.dims, d.size());
  const auto model = make_model(d, cfg);
  const auto inits = make_init(*model, cfg.sampler);
  fit.draws = run_hmc(*model, cfg.sampler, inits);
  fit.summary = summarize(fit.draws, cfg.thresholds);
  if (const int div = fit.draws.total_divergences(); div > 0)
    fit.warnings.push_back(std::to_string(div) + " divergent transitions after warmup");
  return fit;
}

FitResult fit_units(const Dataset& d, const RunConfig& cfg) {
  d.validate();
  const Dataset prepared = cfg.average_poses ? average_poses(d) : d;
  FitResult result;
  for (auto& [unit, part] : split_units(prepared)) result.units.push_back(fit_dataset(part, cfg, unit));
  return result;
}

}  // namespace bayescal
