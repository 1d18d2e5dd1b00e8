// bayescal-cli: simulate, fit, calibrate and diagnose accelerometer
// calibration runs from the command line.
//
// Exit status: 0 success (and converged), 2 the convergence verdict failed,
// 1 usage, input or runtime errors.
//
//   bayescal-cli --seed 7 simulate --b 0.1,-0.2,0.3 --s 0.9,1,1.1 --n 400 --out data.csv
//   bayescal-cli --warmup 2000 --samples 1000 fit data.csv --summary fit.txt --draws draws.csv
//   bayescal-cli calibrate data.csv --summary fit.txt --out calibrated.csv
//   bayescal-cli diagnose draws.csv --trace trace.csv --table diagnostics.csv
//   bayescal-cli study sim3d --n 9,400 --out sim3d.csv

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bayescal/bayescal.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

// Thrown to unwind with a library error already described.
struct Failure {
  int code;
};

void check(bayescal_status s, const std::string& context) {
  if (s == BAYESCAL_OK) return;
  std::cerr << "error: " << context << ": " << bayescal_last_error() << '\n';
  throw Failure{kExitError};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<bayescal_dataset, Deleter<bayescal_dataset, bayescal_dataset_free>>;
using Config = std::unique_ptr<bayescal_config, Deleter<bayescal_config, bayescal_config_free>>;
using Fit = std::unique_ptr<bayescal_fit, Deleter<bayescal_fit, bayescal_fit_free>>;
using Draws = std::unique_ptr<bayescal_draws, Deleter<bayescal_draws, bayescal_draws_free>>;
using Summary = std::unique_ptr<bayescal_summary, Deleter<bayescal_summary, bayescal_summary_free>>;
using Study = std::unique_ptr<bayescal_study, Deleter<bayescal_study, bayescal_study_free>>;

struct Global {
  std::uint64_t seed = 1;
  std::optional<int> chains, warmup, samples;
  std::optional<std::string> model;
  std::string config_path;
};

// Config file first, then explicit flags on top.
Config make_config(const Global& g) {
  bayescal_config* raw = nullptr;
  if (!g.config_path.empty()) {
    check(bayescal_config_read(g.config_path.c_str(), &raw), "reading config");
  } else {
    raw = bayescal_config_new();
    if (!raw) check(BAYESCAL_E_INTERNAL, "creating config");
  }
  Config c(raw);
  check(bayescal_config_set_seed(c.get(), g.seed), "--seed");
  if (g.chains) check(bayescal_config_set_chains(c.get(), *g.chains), "--chains");
  if (g.warmup) check(bayescal_config_set_warmup(c.get(), *g.warmup), "--warmup");
  if (g.samples) check(bayescal_config_set_samples(c.get(), *g.samples), "--samples");
  if (g.model) check(bayescal_config_set_model(c.get(), g.model->c_str()), "--model");
  return c;
}

// "draws.csv" -> "draws.<unit>.csv" when a fit has several units.
std::string unit_path(const std::string& path, const std::string& unit) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "." + unit;
  return path.substr(0, dot) + "." + unit + path.substr(dot);
}

// Path without its extension.
std::string stem(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

// "fit.txt" -> "fit.csv"; a summary already named .csv gets "fit.flat.csv".
std::string flat_csv_path(const std::string& summary) {
  const std::string base = stem(summary);
  return summary == base + ".csv" ? base + ".flat.csv" : base + ".csv";
}

void fill3(const std::vector<double>& in, double out[3], const char* flag) {
  if (in.size() < 2 || in.size() > 3) {
    std::cerr << "error: " << flag << " needs 2 or 3 comma-separated values\n";
    throw Failure{kExitError};
  }
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = in[j];
}

struct SimulateArgs {
  std::string out;
  int dims = 3;
  std::vector<double> b, s;
  double sigma = 0.02;
  std::size_t n = 400;
  std::string poses;
  std::size_t burst = 1;
  bool reference_pose = false;
  std::string unit_id;
};

int run_simulate(const Global& g, const SimulateArgs& a) {
  bayescal_simulation sim;
  bayescal_simulation_init(&sim);
  sim.truth.dims = a.dims;
  if (!a.b.empty()) fill3(a.b, sim.truth.b, "--b");
  if (!a.s.empty()) fill3(a.s, sim.truth.s, "--s");
  sim.truth.sigma = a.sigma;
  sim.n = a.n;
  const std::string poses = a.poses.empty() ? (a.dims == 2 ? "full-circle" : "grid") : a.poses;
  if (poses == "grid")
    sim.poses = BAYESCAL_POSES_GRID;
  else if (poses == "random")
    sim.poses = BAYESCAL_POSES_RANDOM;
  else if (poses == "full-circle")
    sim.poses = BAYESCAL_POSES_FULL_CIRCLE;
  else
    sim.poses = BAYESCAL_POSES_HALF_CIRCLE;
  sim.burst = a.burst;
  sim.reference_pose = a.reference_pose ? 1 : 0;
  sim.unit_id = a.unit_id.empty() ? nullptr : a.unit_id.c_str();
  sim.seed = g.seed;
  bayescal_dataset* raw = nullptr;
  check(bayescal_simulate(&sim, &raw), "simulate");
  Dataset d(raw);
  check(bayescal_dataset_write(d.get(), a.out.c_str()), "writing " + a.out);
  std::cerr << "wrote " << bayescal_dataset_size(d.get()) << " rows to " << a.out << '\n';
  return kExitOk;
}

struct FitArgs {
  std::string data;
  std::string summary;
  std::string summary_csv;
  std::string draws;
  std::optional<int> dims;
  bool average_poses = false;
};

int run_fit(const Global& g, const FitArgs& a) {
  Config cfg = make_config(g);
  // Dimensions: --dims, else the config file, else the data header.
  int dims = a.dims.value_or(g.config_path.empty() ? 0 : bayescal_config_dims(cfg.get()));
  bayescal_dataset* raw = nullptr;
  check(bayescal_dataset_read(a.data.c_str(), dims, &raw), "reading " + a.data);
  Dataset d(raw);
  check(bayescal_config_set_dims(cfg.get(), bayescal_dataset_dims(d.get())), "--dims");
  if (a.average_poses) check(bayescal_config_set_average_poses(cfg.get(), 1), "--average-poses");

  bayescal_fit* fit_raw = nullptr;
  check(bayescal_fit_run(d.get(), cfg.get(), &fit_raw), "fit");
  Fit fit(fit_raw);
  const std::size_t units = bayescal_fit_units(fit.get());
  for (std::size_t u = 0; u < units; ++u) {
    const std::string id = bayescal_fit_unit_id(fit.get(), u);
    for (std::size_t i = 0; i < bayescal_fit_warning_count(fit.get(), u); ++i)
      std::cerr << "warning: unit " << id << ": " << bayescal_fit_warning(fit.get(), u, i) << '\n';
    for (std::size_t i = 0; i < bayescal_fit_reason_count(fit.get(), u); ++i)
      std::cerr << "not converged: unit " << id << ": " << bayescal_fit_reason(fit.get(), u, i) << '\n';
  }
  check(bayescal_fit_write_summary(fit.get(), cfg.get(), a.summary.c_str()), "writing " + a.summary);
  const std::string csv = a.summary_csv.empty() ? flat_csv_path(a.summary) : a.summary_csv;
  check(bayescal_fit_write_summary_csv(fit.get(), csv.c_str()), "writing " + csv);
  if (!a.draws.empty())
    for (std::size_t u = 0; u < units; ++u) {
      const std::string path = units == 1 ? a.draws : unit_path(a.draws, bayescal_fit_unit_id(fit.get(), u));
      check(bayescal_fit_write_draws(fit.get(), u, path.c_str()), "writing " + path);
    }
  return bayescal_fit_converged(fit.get()) ? kExitOk : kExitNotConverged;
}

struct CalibrateArgs {
  std::string data;
  std::string summary;
  std::vector<double> b, s;
  std::string out;
  std::string norms;
  std::optional<int> dims;
};

int run_calibrate(const CalibrateArgs& a) {
  if (a.summary.empty() == (a.b.empty() && a.s.empty())) {
    std::cerr << "error: give either --summary or both --b and --s\n";
    return kExitError;
  }
  bayescal_dataset* raw = nullptr;
  check(bayescal_dataset_read(a.data.c_str(), a.dims.value_or(0), &raw), "reading " + a.data);
  Dataset d(raw);
  bayescal_dataset* cal_raw = nullptr;
  if (!a.summary.empty()) {
    bayescal_summary* s_raw = nullptr;
    check(bayescal_summary_read(a.summary.c_str(), &s_raw), "reading " + a.summary);
    Summary s(s_raw);
    check(bayescal_calibrate_with_summary(d.get(), s.get(), &cal_raw), "calibrate");
  } else {
    double b[3] = {0.0, 0.0, 0.0};
    double s[3] = {1.0, 1.0, 1.0};
    fill3(a.b, b, "--b");
    fill3(a.s, s, "--s");
    if (a.b.size() != static_cast<std::size_t>(bayescal_dataset_dims(d.get())) || a.s.size() != a.b.size()) {
      std::cerr << "error: --b and --s need one value per data axis\n";
      return kExitError;
    }
    check(bayescal_calibrate(d.get(), b, s, &cal_raw), "calibrate");
  }
  Dataset cal(cal_raw);
  check(bayescal_dataset_write(cal.get(), a.out.c_str()), "writing " + a.out);
  const std::string norms = a.norms.empty() ? stem(a.out) + "_norms.csv" : a.norms;
  check(bayescal_write_norms(d.get(), cal.get(), norms.c_str()), "writing " + norms);
  double before = 0.0, after = 0.0;
  check(bayescal_mean_radial_error(d.get(), &before), "norms");
  check(bayescal_mean_radial_error(cal.get(), &after), "norms");
  std::cout << "mean | |a| - 1 |: raw " << before << ", calibrated " << after << '\n';
  return kExitOk;
}

struct DiagnoseArgs {
  std::string draws;
  std::string trace;
  std::string table;
  double rhat_max = 1.10;
  double ess_frac = 0.5;
};

int run_diagnose(const DiagnoseArgs& a) {
  bayescal_draws* raw = nullptr;
  check(bayescal_draws_read(a.draws.c_str(), &raw), "reading " + a.draws);
  Draws d(raw);
  if (!a.trace.empty()) check(bayescal_draws_write_trace(d.get(), a.trace.c_str()), "writing " + a.trace);
  const std::string table = a.table.empty() ? unit_path(a.draws, "diagnostics") : a.table;
  int pass = 0;
  check(bayescal_draws_write_diagnostics(d.get(), a.rhat_max, a.ess_frac, table.c_str(), &pass),
        "writing " + table);
  std::cout << "parameter,rhat,ess\n";
  for (std::size_t p = 0; p < bayescal_draws_params(d.get()); ++p) {
    double rhat = 0.0, ess = 0.0;
    int rhat_ok = 0, ess_ok = 0;
    check(bayescal_draws_rhat(d.get(), p, &rhat, &rhat_ok), "rhat");
    check(bayescal_draws_ess(d.get(), p, &ess, &ess_ok), "ess");
    std::cout << bayescal_draws_name(d.get(), p) << ',';
    if (rhat_ok)
      std::cout << rhat;
    else
      std::cout << "NA";
    std::cout << ',';
    if (ess_ok)
      std::cout << ess;
    else
      std::cout << "NA";
    std::cout << '\n';
  }
  std::cout << "verdict: " << (pass ? "pass" : "fail") << '\n';
  return pass ? kExitOk : kExitNotConverged;
}

struct StudyArgs {
  std::string kind;
  std::string out;
  std::string coverage;
  std::vector<std::size_t> n;
  std::optional<int> replications;
};

int run_study(const Global& g, const StudyArgs& a) {
  bayescal_study* raw = nullptr;
  check(bayescal_study_new(a.kind.c_str(), &raw), "study");
  Study st(raw);
  check(bayescal_study_set_seed(st.get(), g.seed), "--seed");
  if (!a.n.empty()) check(bayescal_study_set_n(st.get(), a.n.data(), a.n.size()), "--n");
  if (a.replications) check(bayescal_study_set_replications(st.get(), *a.replications), "--replications");
  // Study defaults (2000 warmup / 1000 samples) unless flags or a config say otherwise.
  if (g.chains || g.warmup || g.samples || g.model || !g.config_path.empty()) {
    Global run = g;
    if (g.config_path.empty()) {
      if (!run.warmup) run.warmup = 2000;
      if (!run.samples) run.samples = 1000;
    }
    Config cfg = make_config(run);
    check(bayescal_study_set_run(st.get(), cfg.get()), "study configuration");
  }
  check(bayescal_study_run(st.get()), "study");
  check(bayescal_study_write_rows(st.get(), a.out.c_str()), "writing " + a.out);
  if (a.kind == "coverage") {
    const std::string cov = a.coverage.empty() ? unit_path(a.out, "coverage") : a.coverage;
    check(bayescal_study_write_coverage(st.get(), cov.c_str()), "writing " + cov);
    for (std::size_t i = 0; i < bayescal_study_coverage_count(st.get()); ++i) {
      const char* name = nullptr;
      std::size_t n = 0;
      int hits = 0, total = 0;
      check(bayescal_study_coverage(st.get(), i, &name, &n, &hits, &total), "coverage");
      std::cout << name << " N=" << n << ": " << hits << '/' << total << '\n';
    }
  }
  const int failed = bayescal_study_failed(st.get());
  if (failed > 0) {
    std::cerr << "warning: " << failed << " study cells failed to fit\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian calibration of triaxial accelerometers"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--chains", g.chains, "Number of chains");
  app.add_option("--warmup", g.warmup, "Warmup iterations per chain");
  app.add_option("--samples", g.samples, "Post-warmup draws per chain");
  app.add_option("--model", g.model, "full or odr")->check(CLI::IsMember({"full", "odr"}));
  app.add_option("--config", g.config_path, "Run configuration file")->check(CLI::ExistingFile);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Write a simulated measurement CSV");
  c_sim->add_option("--out", sim.out, "Output CSV")->required();
  c_sim->add_option("--dims", sim.dims, "2 or 3")->check(CLI::IsMember({2, 3}))->capture_default_str();
  c_sim->add_option("--b", sim.b, "Bias, comma separated")->delimiter(',');
  c_sim->add_option("--s", sim.s, "Scale factors, comma separated")->delimiter(',');
  c_sim->add_option("--sigma", sim.sigma, "Noise standard deviation")->capture_default_str();
  c_sim->add_option("--n", sim.n, "Number of poses")->capture_default_str();
  c_sim->add_option("--poses", sim.poses, "grid, random, full-circle or half-circle")
      ->check(CLI::IsMember({"grid", "random", "full-circle", "half-circle"}));
  c_sim->add_option("--burst", sim.burst, "Readings per pose (adds pose_id)")->capture_default_str();
  c_sim->add_flag("--reference-pose", sim.reference_pose, "Put the first pose on the reference axis");
  c_sim->add_option("--unit-id", sim.unit_id, "Label every row with this unit_id");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Fit calibration parameters to a measurement CSV");
  c_fit->add_option("data", fit.data, "Measurement CSV")->required()->check(CLI::ExistingFile);
  c_fit->add_option("--summary", fit.summary, "Summary output (structured text)")->required();
  c_fit->add_option("--summary-csv", fit.summary_csv, "Flat CSV summary (default <summary stem>.csv)");
  c_fit->add_option("--draws", fit.draws, "Raw draws CSV (per unit when several)");
  c_fit->add_option("--dims", fit.dims, "2 or 3 (default from the header)")->check(CLI::IsMember({2, 3}));
  c_fit->add_flag("--average-poses", fit.average_poses, "Average rows sharing a pose_id first");

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Apply fitted calibration to a measurement CSV");
  c_cal->add_option("data", cal.data, "Measurement CSV")->required()->check(CLI::ExistingFile);
  c_cal->add_option("--summary", cal.summary, "Summary written by fit")->check(CLI::ExistingFile);
  c_cal->add_option("--b", cal.b, "Bias, comma separated")->delimiter(',');
  c_cal->add_option("--s", cal.s, "Scale factors, comma separated")->delimiter(',');
  c_cal->add_option("--out", cal.out, "Calibrated CSV")->required();
  c_cal->add_option("--norms", cal.norms, "Radial norm series (default <out>_norms.csv)");
  c_cal->add_option("--dims", cal.dims, "2 or 3 (default from the header)")->check(CLI::IsMember({2, 3}));

  DiagnoseArgs diag;
  auto* c_diag = app.add_subcommand("diagnose", "Recompute diagnostics from a draws CSV");
  c_diag->add_option("draws", diag.draws, "Draws CSV written by fit")->required()->check(CLI::ExistingFile);
  c_diag->add_option("--trace", diag.trace, "Long-format trace output");
  c_diag->add_option("--table", diag.table, "Diagnostics table (default <draws>.diagnostics.csv)");
  c_diag->add_option("--rhat-max", diag.rhat_max, "R-hat threshold")->capture_default_str();
  c_diag->add_option("--ess-frac", diag.ess_frac, "ESS threshold as a fraction of draws")->capture_default_str();

  StudyArgs study;
  auto* c_study = app.add_subcommand("study", "Run a simulation study");
  c_study->add_option("kind", study.kind, "sim2d, sim3d or coverage")
      ->required()
      ->check(CLI::IsMember({"sim2d", "sim3d", "coverage"}));
  c_study->add_option("--out", study.out, "Per-cell rows CSV")->required();
  c_study->add_option("--coverage", study.coverage, "Coverage CSV (default <out>.coverage.csv)");
  c_study->add_option("--n", study.n, "Comma-separated N values")->delimiter(',');
  c_study->add_option("--replications", study.replications, "Coverage replications");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (*c_sim) return run_simulate(g, sim);
    if (*c_fit) return run_fit(g, fit);
    if (*c_cal) return run_calibrate(cal);
    if (*c_diag) return run_diagnose(diag);
    if (*c_study) return run_study(g, study);
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitError;
}
