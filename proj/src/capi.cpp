#include "bayescal/bayescal.h"

#include <cmath>
#include <exception>
#include <new>
#include <string>
#include <utility>

#include "bayescal/bench.hpp"
#include "bayescal/diagnostics.hpp"
#include "bayescal/error.hpp"
#include "bayescal/fit.hpp"
#include "bayescal/io.hpp"
#include "bayescal/model.hpp"

using namespace bayescal;

struct bayescal_dataset {
  Dataset data;
};
struct bayescal_config {
  RunConfig cfg;
};
struct bayescal_fit {
  FitResult fit;
};
struct bayescal_draws {
  PosteriorDraws draws;
};
struct bayescal_summary {
  std::vector<io::SummaryUnit> units;
};
struct bayescal_study {
  bench::StudySpec spec;
  bench::StudyResult result;
  bool ran = false;
};

namespace {

thread_local std::string g_last_error;

bayescal_status fail(bayescal_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs body, translating library exceptions into status codes.
template <class F>
bayescal_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return BAYESCAL_OK;
  } catch (const PreconditionError& e) {
    return fail(BAYESCAL_E_ARGUMENT, e.what());
  } catch (const ParseError& e) {
    return fail(BAYESCAL_E_PARSE, e.what());
  } catch (const IoError& e) {
    return fail(BAYESCAL_E_IO, e.what());
  } catch (const SamplerError& e) {
    return fail(BAYESCAL_E_SAMPLER, e.what());
  } catch (const DiagnosticError& e) {
    return fail(BAYESCAL_E_DIAGNOSTIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BAYESCAL_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BAYESCAL_E_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw PreconditionError(std::string(what) + " is NULL");
}

Vec3 to_vec3(const double v[3]) { return {v[0], v[1], v[2]}; }

void from_vec3(const Vec3& v, double out[3]) {
  for (int j = 0; j < 3; ++j) out[j] = v[j];
}

CalibrationParams to_params(const bayescal_params& p) {
  CalibrationParams out;
  out.dims = dims_from_int(p.dims);
  out.b = to_vec3(p.b);
  out.s = to_vec3(p.s);
  out.sigma = p.sigma;
  if (out.dims == Dims::two) {
    out.b[2] = 0.0;
    out.s[2] = 1.0;
  }
  out.validate();
  return out;
}

const UnitFit& unit_at(const bayescal_fit* f, size_t unit) {
  require(f, "fit");
  if (unit >= f->fit.units.size()) throw PreconditionError("unit index out of range");
  return f->fit.units[unit];
}

const io::SummaryUnit& summary_at(const bayescal_summary* s, size_t unit) {
  require(s, "summary");
  if (unit >= s->units.size()) throw PreconditionError("unit index out of range");
  return s->units[unit];
}

std::size_t param_at(const bayescal_draws* d, size_t param) {
  require(d, "draws");
  if (param >= d->draws.params()) throw PreconditionError("parameter index out of range");
  return param;
}

template <class Fn>
void write_file(const char* path, Fn&& fn) {
  require(path, "path");
  io::atomic_write(path, fn);
}

std::vector<Orientation> make_poses(const bayescal_simulation& sim, Dims dims) {
  switch (sim.poses) {
    case BAYESCAL_POSES_GRID:
      if (dims != Dims::three) throw PreconditionError("grid poses need 3 dimensions");
      return grid_orientations(sim.n);
    case BAYESCAL_POSES_RANDOM:
      return random_orientations(sim.n, dims, bench::cell_seed(sim.seed, 7));
    case BAYESCAL_POSES_FULL_CIRCLE:
    case BAYESCAL_POSES_HALF_CIRCLE:
      if (dims != Dims::two) throw PreconditionError("circle poses need 2 dimensions");
      return arc_orientations(sim.n, sim.poses == BAYESCAL_POSES_FULL_CIRCLE ? Arc::full_circle : Arc::half_circle);
  }
  throw PreconditionError("unknown pose layout");
}

}  // namespace

extern "C" {

BAYESCAL_API const char* bayescal_version(void) { return "0.1.0"; }

BAYESCAL_API const char* bayescal_last_error(void) { return g_last_error.c_str(); }

BAYESCAL_API const char* bayescal_status_name(bayescal_status status) {
  switch (status) {
    case BAYESCAL_OK:
      return "ok";
    case BAYESCAL_E_ARGUMENT:
      return "invalid argument";
    case BAYESCAL_E_PARSE:
      return "parse error";
    case BAYESCAL_E_IO:
      return "i/o error";
    case BAYESCAL_E_SAMPLER:
      return "sampler error";
    case BAYESCAL_E_DIAGNOSTIC:
      return "diagnostic error";
    case BAYESCAL_E_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

// ---- Measurements ----

BAYESCAL_API void bayescal_simulation_init(bayescal_simulation* sim) {
  if (!sim) return;
  *sim = bayescal_simulation{};
  sim->truth = {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 0.02, 3};
  sim->poses = BAYESCAL_POSES_GRID;
  sim->n = 400;
  sim->burst = 1;
  sim->reference_pose = 0;
  sim->unit_id = nullptr;
  sim->seed = 1;
}

BAYESCAL_API bayescal_status bayescal_simulate(const bayescal_simulation* sim, bayescal_dataset** out) {
  return guarded([&] {
    require(sim, "simulation");
    require(out, "output");
    if (sim->burst < 1) throw PreconditionError("burst must be at least 1");
    const CalibrationParams truth = to_params(sim->truth);
    std::vector<Orientation> poses = make_poses(*sim, truth.dims);
    if (sim->reference_pose) poses = with_reference_pose(std::move(poses));
    std::vector<Orientation> rows;
    rows.reserve(poses.size() * sim->burst);
    for (const auto& o : poses)
      for (size_t k = 0; k < sim->burst; ++k) rows.push_back(o);
    Dataset d = simulate(truth, rows, sim->seed);
    if (sim->burst > 1)
      for (size_t i = 0; i < d.size(); ++i) d.pose_id.emplace_back(static_cast<std::int64_t>(i / sim->burst + 1));
    if (sim->unit_id) d.unit_id.assign(d.size(), sim->unit_id);
    *out = new bayescal_dataset{std::move(d)};
  });
}

BAYESCAL_API bayescal_status bayescal_dataset_read(const char* path, int dims, bayescal_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output");
    std::optional<Dims> expected;
    if (dims != 0) expected = dims_from_int(dims);
    *out = new bayescal_dataset{io::read_measurements_file(path, expected)};
  });
}

BAYESCAL_API bayescal_status bayescal_dataset_write(const bayescal_dataset* d, const char* path) {
  return guarded([&] {
    require(d, "dataset");
    write_file(path, [&](std::ostream& os) { io::write_measurements(os, d->data); });
  });
}

BAYESCAL_API bayescal_status bayescal_dataset_from_rows(const double* rows, size_t n, int dims,
                                                        bayescal_dataset** out) {
  return guarded([&] {
    require(rows, "rows");
    require(out, "output");
    Dataset d;
    d.dims = dims_from_int(dims);
    const int k = count(d.dims);
    for (size_t i = 0; i < n; ++i) {
      Measurement m;
      for (int j = 0; j < k; ++j) m.a[j] = rows[i * k + j];
      d.rows.push_back(m);
    }
    d.validate();
    *out = new bayescal_dataset{std::move(d)};
  });
}

BAYESCAL_API size_t bayescal_dataset_size(const bayescal_dataset* d) { return d ? d->data.size() : 0; }

BAYESCAL_API int bayescal_dataset_dims(const bayescal_dataset* d) { return d ? count(d->data.dims) : 0; }

BAYESCAL_API bayescal_status bayescal_dataset_row(const bayescal_dataset* d, size_t i, double* out) {
  return guarded([&] {
    require(d, "dataset");
    require(out, "output");
    if (i >= d->data.size()) throw PreconditionError("row index out of range");
    for (int j = 0; j < count(d->data.dims); ++j) out[j] = d->data.rows[i].a[j];
  });
}

BAYESCAL_API bayescal_status bayescal_dataset_append(bayescal_dataset* dst, const bayescal_dataset* src) {
  return guarded([&] {
    require(dst, "destination");
    require(src, "source");
    Dataset& a = dst->data;
    const Dataset& b = src->data;
    if (a.dims != b.dims) throw PreconditionError("datasets have different dimensions");
    const size_t na = a.size();
    // Labels present on either side are kept, missing ones filled in.
    if (a.has_pose_ids() || b.has_pose_ids()) {
      a.pose_id.resize(na);
      if (b.has_pose_ids())
        a.pose_id.insert(a.pose_id.end(), b.pose_id.begin(), b.pose_id.end());
      else
        a.pose_id.resize(na + b.size());
    }
    if (a.has_unit_ids() || b.has_unit_ids()) {
      a.unit_id.resize(na, "default");
      if (b.has_unit_ids())
        a.unit_id.insert(a.unit_id.end(), b.unit_id.begin(), b.unit_id.end());
      else
        a.unit_id.resize(na + b.size(), "default");
    }
    a.rows.insert(a.rows.end(), b.rows.begin(), b.rows.end());
  });
}

BAYESCAL_API void bayescal_dataset_free(bayescal_dataset* d) { delete d; }

BAYESCAL_API bayescal_status bayescal_calibrate(const bayescal_dataset* d, const double b[3], const double s[3],
                                                bayescal_dataset** out) {
  return guarded([&] {
    require(d, "dataset");
    require(b, "b");
    require(s, "s");
    require(out, "output");
    *out = new bayescal_dataset{calibrate(d->data, to_vec3(b), to_vec3(s))};
  });
}

BAYESCAL_API bayescal_status bayescal_calibrate_with_summary(const bayescal_dataset* d, const bayescal_summary* s,
                                                             bayescal_dataset** out) {
  return guarded([&] {
    require(d, "dataset");
    require(s, "summary");
    require(out, "output");
    if (s->units.empty()) throw PreconditionError("summary has no units");
    for (const auto& u : s->units)
      if (u.dims != d->data.dims)
        throw PreconditionError("summary unit '" + u.unit_id + "' is " + std::to_string(count(u.dims)) +
                                "D but the data are " + std::to_string(count(d->data.dims)) + "D");
    // Unlabelled data with a single summary block use that block.
    if (!d->data.has_unit_ids() && s->units.size() == 1) {
      *out = new bayescal_dataset{calibrate(d->data, s->units[0].median_b(), s->units[0].median_s())};
      return;
    }
    Dataset result = d->data;
    std::vector<bool> done(result.size(), false);
    for (const auto& u : s->units) {
      const Dataset cal = calibrate(d->data, u.median_b(), u.median_s());
      for (size_t i = 0; i < result.size(); ++i) {
        const std::string& id = d->data.has_unit_ids() ? d->data.unit_id[i] : std::string("default");
        if (id == u.unit_id) {
          result.rows[i] = cal.rows[i];
          done[i] = true;
        }
      }
    }
    for (size_t i = 0; i < result.size(); ++i)
      if (!done[i])
        throw PreconditionError("row " + std::to_string(i + 1) + ": unit '" +
                                (d->data.has_unit_ids() ? d->data.unit_id[i] : std::string("default")) +
                                "' has no block in the summary");
    *out = new bayescal_dataset{std::move(result)};
  });
}

BAYESCAL_API bayescal_status bayescal_mean_radial_error(const bayescal_dataset* d, double* out) {
  return guarded([&] {
    require(d, "dataset");
    require(out, "output");
    const auto norms = radial_norms(d->data);
    if (norms.empty()) throw PreconditionError("dataset is empty");
    double sum = 0.0;
    for (double r : norms) sum += std::abs(r - 1.0);
    *out = sum / static_cast<double>(norms.size());
  });
}

BAYESCAL_API bayescal_status bayescal_write_norms(const bayescal_dataset* raw, const bayescal_dataset* calibrated,
                                                  const char* path) {
  return guarded([&] {
    require(raw, "raw dataset");
    require(calibrated, "calibrated dataset");
    write_file(path, [&](std::ostream& os) { io::write_norms(os, raw->data, calibrated->data); });
  });
}

// ---- Run configuration ----

BAYESCAL_API bayescal_config* bayescal_config_new(void) {
  try {
    return new bayescal_config{};
  } catch (...) {
    g_last_error = "out of memory";
    return nullptr;
  }
}

BAYESCAL_API bayescal_status bayescal_config_read(const char* path, bayescal_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output");
    *out = new bayescal_config{io::read_config_file(path)};
  });
}

BAYESCAL_API bayescal_status bayescal_config_write(const bayescal_config* c, const char* path) {
  return guarded([&] {
    require(c, "config");
    write_file(path, [&](std::ostream& os) { io::write_config(os, c->cfg); });
  });
}

BAYESCAL_API void bayescal_config_free(bayescal_config* c) { delete c; }

BAYESCAL_API bayescal_status bayescal_config_set_model(bayescal_config* c, const char* model) {
  return guarded([&] {
    require(c, "config");
    require(model, "model");
    c->cfg.model = model_kind_from_string(model);
  });
}

BAYESCAL_API bayescal_status bayescal_config_set_dims(bayescal_config* c, int dims) {
  return guarded([&] {
    require(c, "config");
    c->cfg.dims = dims_from_int(dims);
  });
}

BAYESCAL_API bayescal_status bayescal_config_set_seed(bayescal_config* c, uint64_t seed) {
  return guarded([&] {
    require(c, "config");
    c->cfg.sampler.seed = seed;
  });
}

BAYESCAL_API bayescal_status bayescal_config_set_chains(bayescal_config* c, int chains) {
  return guarded([&] {
    require(c, "config");
    if (chains < 1) throw PreconditionError("chains must be at least 1");
    c->cfg.sampler.chains = chains;
  });
}

BAYESCAL_API bayescal_status bayescal_config_set_warmup(bayescal_config* c, int warmup) {
  return guarded([&] {
    require(c, "config");
    if (warmup < 0) throw PreconditionError("warmup must be nonnegative");
    c->cfg.sampler.warmup = warmup;
  });
}

BAYESCAL_API bayescal_status bayescal_config_set_samples(bayescal_config* c, int samples) {
  return guarded([&] {
    require(c, "config");
    if (samples < 1) throw PreconditionError("samples must be at least 1");
    c->cfg.sampler.samples = samples;
  });
}

BAYESCAL_API bayescal_status bayescal_config_set_average_poses(bayescal_config* c, int on) {
  return guarded([&] {
    require(c, "config");
    c->cfg.average_poses = on != 0;
  });
}

BAYESCAL_API bayescal_status bayescal_config_set_thresholds(bayescal_config* c, double rhat_max, double ess_frac) {
  return guarded([&] {
    require(c, "config");
    if (!(rhat_max > 1.0)) throw PreconditionError("rhat_max must exceed 1");
    if (!(ess_frac > 0.0)) throw PreconditionError("ess_frac must be positive");
    c->cfg.thresholds = {rhat_max, ess_frac};
  });
}

BAYESCAL_API const char* bayescal_config_model(const bayescal_config* c) {
  return c ? to_string(c->cfg.model) : "";
}

BAYESCAL_API int bayescal_config_dims(const bayescal_config* c) { return c ? count(c->cfg.dims) : 0; }

// ---- Fitting ----

BAYESCAL_API bayescal_status bayescal_fit_run(const bayescal_dataset* d, const bayescal_config* c,
                                              bayescal_fit** out) {
  return guarded([&] {
    require(d, "dataset");
    require(c, "config");
    require(out, "output");
    RunConfig cfg = c->cfg;
    if (cfg.dims != d->data.dims)
      throw PreconditionError("config is " + std::to_string(count(cfg.dims)) + "D but the data are " +
                              std::to_string(count(d->data.dims)) + "D");
    *out = new bayescal_fit{fit_units(d->data, cfg)};
  });
}

BAYESCAL_API void bayescal_fit_free(bayescal_fit* f) { delete f; }

BAYESCAL_API int bayescal_fit_converged(const bayescal_fit* f) { return f && f->fit.converged() ? 1 : 0; }

BAYESCAL_API size_t bayescal_fit_units(const bayescal_fit* f) { return f ? f->fit.units.size() : 0; }

BAYESCAL_API const char* bayescal_fit_unit_id(const bayescal_fit* f, size_t unit) {
  return f && unit < f->fit.units.size() ? f->fit.units[unit].unit_id.c_str() : "";
}

BAYESCAL_API int bayescal_fit_unit_converged(const bayescal_fit* f, size_t unit) {
  return f && unit < f->fit.units.size() && f->fit.units[unit].converged() ? 1 : 0;
}

BAYESCAL_API size_t bayescal_fit_warning_count(const bayescal_fit* f, size_t unit) {
  return f && unit < f->fit.units.size() ? f->fit.units[unit].warnings.size() : 0;
}

BAYESCAL_API const char* bayescal_fit_warning(const bayescal_fit* f, size_t unit, size_t i) {
  if (!f || unit >= f->fit.units.size() || i >= f->fit.units[unit].warnings.size()) return "";
  return f->fit.units[unit].warnings[i].c_str();
}

BAYESCAL_API size_t bayescal_fit_reason_count(const bayescal_fit* f, size_t unit) {
  return f && unit < f->fit.units.size() ? f->fit.units[unit].summary.reasons.size() : 0;
}

BAYESCAL_API const char* bayescal_fit_reason(const bayescal_fit* f, size_t unit, size_t i) {
  if (!f || unit >= f->fit.units.size() || i >= f->fit.units[unit].summary.reasons.size()) return "";
  return f->fit.units[unit].summary.reasons[i].c_str();
}

BAYESCAL_API bayescal_status bayescal_fit_quantiles(const bayescal_fit* f, size_t unit, const char* name,
                                                    double* median, double* q05, double* q95) {
  return guarded([&] {
    require(name, "name");
    const ParameterSummary* p = unit_at(f, unit).summary.find(name);
    if (!p) throw PreconditionError(std::string("no parameter named '") + name + "'");
    if (median) *median = p->median;
    if (q05) *q05 = p->q05;
    if (q95) *q95 = p->q95;
  });
}

BAYESCAL_API bayescal_status bayescal_fit_medians(const bayescal_fit* f, size_t unit, double b[3], double s[3]) {
  return guarded([&] {
    require(b, "b");
    require(s, "s");
    const UnitFit& u = unit_at(f, unit);
    from_vec3(u.median_b(), b);
    from_vec3(u.median_s(), s);
  });
}

BAYESCAL_API bayescal_status bayescal_fit_write_summary(const bayescal_fit* f, const bayescal_config* c,
                                                        const char* path) {
  return guarded([&] {
    require(f, "fit");
    require(c, "config");
    write_file(path, [&](std::ostream& os) { io::write_summary(os, f->fit, c->cfg); });
  });
}

BAYESCAL_API bayescal_status bayescal_fit_write_summary_csv(const bayescal_fit* f, const char* path) {
  return guarded([&] {
    require(f, "fit");
    write_file(path, [&](std::ostream& os) { io::write_summary_csv(os, f->fit); });
  });
}

BAYESCAL_API bayescal_status bayescal_fit_write_draws(const bayescal_fit* f, size_t unit, const char* path) {
  return guarded([&] {
    const UnitFit& u = unit_at(f, unit);
    write_file(path, [&](std::ostream& os) { io::write_draws(os, u.draws); });
  });
}

// ---- Summaries ----

BAYESCAL_API bayescal_status bayescal_summary_read(const char* path, bayescal_summary** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output");
    *out = new bayescal_summary{io::read_summary_file(path)};
  });
}

BAYESCAL_API void bayescal_summary_free(bayescal_summary* s) { delete s; }

BAYESCAL_API size_t bayescal_summary_units(const bayescal_summary* s) { return s ? s->units.size() : 0; }

BAYESCAL_API const char* bayescal_summary_unit_id(const bayescal_summary* s, size_t unit) {
  return s && unit < s->units.size() ? s->units[unit].unit_id.c_str() : "";
}

BAYESCAL_API int bayescal_summary_dims(const bayescal_summary* s, size_t unit) {
  return s && unit < s->units.size() ? count(s->units[unit].dims) : 0;
}

BAYESCAL_API bayescal_status bayescal_summary_medians(const bayescal_summary* s, size_t unit, double b[3],
                                                      double s_out[3]) {
  return guarded([&] {
    require(b, "b");
    require(s_out, "s");
    const io::SummaryUnit& u = summary_at(s, unit);
    from_vec3(u.median_b(), b);
    from_vec3(u.median_s(), s_out);
  });
}

// ---- Draws and diagnostics ----

BAYESCAL_API bayescal_status bayescal_draws_read(const char* path, bayescal_draws** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "output");
    *out = new bayescal_draws{io::read_draws_file(path)};
  });
}

BAYESCAL_API void bayescal_draws_free(bayescal_draws* d) { delete d; }

BAYESCAL_API size_t bayescal_draws_params(const bayescal_draws* d) { return d ? d->draws.params() : 0; }

BAYESCAL_API const char* bayescal_draws_name(const bayescal_draws* d, size_t param) {
  return d && param < d->draws.params() ? d->draws.names[param].c_str() : "";
}

BAYESCAL_API int bayescal_draws_chains(const bayescal_draws* d) { return d ? d->draws.chains : 0; }

BAYESCAL_API int bayescal_draws_samples(const bayescal_draws* d) { return d ? d->draws.samples : 0; }

BAYESCAL_API bayescal_status bayescal_draws_rhat(const bayescal_draws* d, size_t param, double* value,
                                                 int* defined) {
  return guarded([&] {
    require(value, "value");
    require(defined, "defined");
    const auto series = d ? d->draws.series(param_at(d, param)) : ChainSeries{};
    try {
      *value = split_rhat(series);
      *defined = 1;
    } catch (const DiagnosticError&) {
      *defined = 0;
    }
  });
}

BAYESCAL_API bayescal_status bayescal_draws_ess(const bayescal_draws* d, size_t param, double* value, int* defined) {
  return guarded([&] {
    require(value, "value");
    require(defined, "defined");
    const auto series = d ? d->draws.series(param_at(d, param)) : ChainSeries{};
    try {
      *value = ess(series);
      *defined = 1;
    } catch (const DiagnosticError&) {
      *defined = 0;
    }
  });
}

BAYESCAL_API bayescal_status bayescal_draws_write_trace(const bayescal_draws* d, const char* path) {
  return guarded([&] {
    require(d, "draws");
    write_file(path, [&](std::ostream& os) { io::write_trace(os, d->draws); });
  });
}

BAYESCAL_API bayescal_status bayescal_draws_write_diagnostics(const bayescal_draws* d, double rhat_max,
                                                              double ess_frac, const char* path, int* pass) {
  return guarded([&] {
    require(d, "draws");
    const SummaryTable table = summarize(d->draws, Thresholds{rhat_max, ess_frac});
    write_file(path, [&](std::ostream& os) { io::write_diagnostics_table(os, table); });
    if (pass) *pass = table.pass ? 1 : 0;
  });
}

// ---- Simulation studies ----

BAYESCAL_API bayescal_status bayescal_study_new(const char* kind, bayescal_study** out) {
  return guarded([&] {
    require(kind, "kind");
    require(out, "output");
    *out = new bayescal_study{bench::StudySpec::defaults(bench::study_kind_from_string(kind)), {}, false};
  });
}

BAYESCAL_API void bayescal_study_free(bayescal_study* s) { delete s; }

BAYESCAL_API bayescal_status bayescal_study_set_n(bayescal_study* s, const size_t* n, size_t count_n) {
  return guarded([&] {
    require(s, "study");
    require(n, "n");
    s->spec.n_list.assign(n, n + count_n);
  });
}

BAYESCAL_API bayescal_status bayescal_study_set_replications(bayescal_study* s, int replications) {
  return guarded([&] {
    require(s, "study");
    s->spec.replications = replications;
  });
}

BAYESCAL_API bayescal_status bayescal_study_set_seed(bayescal_study* s, uint64_t seed) {
  return guarded([&] {
    require(s, "study");
    s->spec.seed = seed;
  });
}

BAYESCAL_API bayescal_status bayescal_study_set_run(bayescal_study* s, const bayescal_config* c) {
  return guarded([&] {
    require(s, "study");
    require(c, "config");
    RunConfig& run = s->spec.run;
    run.model = c->cfg.model;
    run.priors = c->cfg.priors;
    run.thresholds = c->cfg.thresholds;
    const std::uint64_t seed = run.sampler.seed;
    run.sampler = c->cfg.sampler;
    run.sampler.seed = seed;
  });
}

BAYESCAL_API bayescal_status bayescal_study_run(bayescal_study* s) {
  return guarded([&] {
    require(s, "study");
    s->result = bench::run_study(s->spec);
    s->ran = true;
  });
}

BAYESCAL_API int bayescal_study_failed(const bayescal_study* s) { return s ? s->result.failed : 0; }

BAYESCAL_API bayescal_status bayescal_study_write_rows(const bayescal_study* s, const char* path) {
  return guarded([&] {
    require(s, "study");
    if (!s->ran) throw PreconditionError("study has not been run");
    write_file(path, [&](std::ostream& os) { bench::write_rows_csv(os, s->result); });
  });
}

BAYESCAL_API bayescal_status bayescal_study_write_coverage(const bayescal_study* s, const char* path) {
  return guarded([&] {
    require(s, "study");
    if (!s->ran) throw PreconditionError("study has not been run");
    write_file(path, [&](std::ostream& os) { bench::write_coverage_csv(os, s->result); });
  });
}

BAYESCAL_API size_t bayescal_study_coverage_count(const bayescal_study* s) {
  return s ? s->result.coverage.size() : 0;
}

BAYESCAL_API bayescal_status bayescal_study_coverage(const bayescal_study* s, size_t i, const char** parameter,
                                                     size_t* n, int* hits, int* total) {
  return guarded([&] {
    require(s, "study");
    if (i >= s->result.coverage.size()) throw PreconditionError("coverage index out of range");
    const bench::CoverageRow& c = s->result.coverage[i];
    if (parameter) *parameter = c.parameter.c_str();
    if (n) *n = c.n;
    if (hits) *hits = c.hits;
    if (total) *total = c.total;
  });
}

}  // extern "C"
