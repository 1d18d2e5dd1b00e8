// Acceptance checks. Each criterion prints one line:
//
//   criterion <k> PASS|FAIL: <what was measured>
//
// Usage: acceptance [--criterion K]...   (all criteria when none given)

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bayescal/bench.hpp"
#include "bayescal/diagnostics.hpp"
#include "bayescal/fit.hpp"
#include "bayescal/mle.hpp"
#include "bayescal/model.hpp"
#include "bayescal/posterior.hpp"
#include "oracle/finite_diff.hpp"
#include "oracle/transcription.hpp"

using namespace bayescal;

namespace {

// ---- Pinned tolerances ----
constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-6;
constexpr int kFdStates = 100;
constexpr double kTranscriptionTol = 1e-10;
constexpr int kTranscriptionStates = 50;
constexpr double kRecoveryTol = 0.01;
constexpr double kCoverageLow = 0.78;
constexpr double kCoverageHigh = 0.98;
constexpr int kCoverageReps = 50;
constexpr std::size_t kCoverageN = 100;
constexpr double kMedianAgreeTol = 0.02;
constexpr std::size_t kFullConvergeN = 16;
constexpr std::size_t kSlowRows = 30;
constexpr double kGridStep = 1e-3;
constexpr int kNormDraws = 100000;
constexpr double kNormMeanTol = 1e-3;
constexpr double kNormSdRelTol = 0.10;
constexpr double kRhatIidMax = 1.01;
constexpr double kEssRelTol = 0.20;
constexpr double kRhatNonMixingMin = 1.10;
constexpr double kHoldoutReduction = 0.50;

// Settings used by the desk-scale fits: 4 chains, 2000 warmup, 1000 samples.
RunConfig desk_config(ModelKind model, Dims dims, std::uint64_t seed) {
  RunConfig cfg;
  cfg.model = model;
  cfg.dims = dims;
  cfg.sampler.chains = 4;
  cfg.sampler.warmup = 2000;
  cfg.sampler.samples = 1000;
  cfg.sampler.seed = seed;
  return cfg;
}

const CalibrationParams kTruth3{{0.1, -0.2, 0.3}, {0.9, 1.0, 1.1}, 0.02, Dims::three};
const CalibrationParams kTruth2{{0.1, -0.05, 0.0}, {0.9, 1.1, 1.0}, 0.02, Dims::two};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

Dataset random_data(Dims dims, std::size_t n, std::uint64_t seed) {
  const CalibrationParams p = dims == Dims::three ? CalibrationParams{{0.1, -0.2, 0.3}, {0.9, 1.0, 1.1}, 0.05, dims}
                                                  : CalibrationParams{{0.1, -0.05, 0.0}, {0.9, 1.1, 1.0}, 0.05, dims};
  return simulate(p, random_orientations(n, dims, seed), seed + 1);
}

Eigen::VectorXd random_u(std::size_t n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> z(0.0, scale);
  Eigen::VectorXd u(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = z(rng);
  return u;
}

std::vector<oracle::Row> rows_of(const Dataset& d) {
  std::vector<oracle::Row> out;
  for (const auto& r : d.rows) out.push_back({r.a[0], r.a[1], r.a[2]});
  return out;
}

// 1. Analytic gradients against central differences.
Outcome criterion1() {
  double worst = 0.0;
  std::uint64_t seed = 100;
  auto check = [&](const PosteriorModel& m) {
    std::mt19937_64 rng(++seed);
    for (int k = 0; k < kFdStates; ++k) {
      const Eigen::VectorXd u = random_u(m.dimension(), rng, 1.0);
      Eigen::VectorXd grad;
      m.log_posterior(u, grad);
      const Eigen::VectorXd fd =
          oracle::central_difference([&](const Eigen::VectorXd& v) { return m.log_posterior(v); }, u, kFdStep);
      worst = std::max(worst, oracle::max_relative_error(grad, fd));
    }
  };
  for (Dims dims : {Dims::two, Dims::three}) {
    check(FullModel(random_data(dims, 8, ++seed), PriorSpec{}));
    check(OdrModel(random_data(dims, 40, ++seed), PriorSpec{}));
  }
  return {worst < kFdRelTol, "max relative gradient error " + fmt(worst) + " over 4 x " +
                                 std::to_string(kFdStates) + " states (limit " + fmt(kFdRelTol) + ")"};
}

// 2. Log posterior against the independent transcription.
Outcome criterion2() {
  const oracle::Priors pr;
  double worst = 0.0;
  std::uint64_t seed = 200;
  for (Dims dims : {Dims::two, Dims::three}) {
    const FullModel full(random_data(dims, 8, ++seed), PriorSpec{});
    const OdrModel odr(random_data(dims, 30, ++seed), PriorSpec{});
    std::mt19937_64 rng(++seed);
    for (int k = 0; k < kTranscriptionStates; ++k) {
      const Eigen::VectorXd u = random_u(full.dimension(), rng, 1.0);
      const FullModelState st = full.state(u);
      std::vector<double> theta, phi;
      for (const auto& o : st.angles) {
        theta.push_back(o.theta);
        phi.push_back(o.phi);
      }
      const double ref = oracle::full_model(rows_of(full.data()), count(dims), st.b.data(), st.s.data(), st.sigma,
                                            theta, phi, pr);
      worst = std::max(worst, std::abs(full.log_posterior(u, false) - ref));
    }
    for (int k = 0; k < kTranscriptionStates; ++k) {
      const Eigen::VectorXd u = random_u(odr.dimension(), rng, 0.5);
      const OdrModelState st = odr.state(u);
      const double ref =
          oracle::odr_model(rows_of(odr.data()), count(dims), st.b.data(), st.sinv.data(), st.sigma, pr);
      worst = std::max(worst, std::abs(odr.log_posterior(u, false) - ref));
    }
  }
  return {worst < kTranscriptionTol,
          "max |library - transcription| " + fmt(worst) + " over " + std::to_string(kTranscriptionStates) +
              " states per model and dimension (limit " + fmt(kTranscriptionTol) + ")"};
}

// 3. ODR recovery at N=400.
Outcome criterion3() {
  const Dataset d = simulate(kTruth3, grid_orientations(400), 3001);
  const UnitFit fit = fit_dataset(d, desk_config(ModelKind::odr, Dims::three, 3002));
  std::map<std::string, double> truth;
  for (const auto& [name, v] : bench::truth_table(kTruth3)) truth[name] = v;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, v] : truth) {
    const auto* p = fit.summary.find(name);
    if (!p) return {false, "missing parameter " + name};
    const double err = std::abs(p->median - v);
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
  }
  const bool pass = worst <= kRecoveryTol && fit.converged();
  return {pass, "largest |median - truth| " + fmt(worst) + " (" + worst_name + "), verdict " +
                    (fit.converged() ? "pass" : "fail")};
}

// 4. Interval widths shrink from N=9 to N=400.
Outcome criterion4() {
  bench::StudySpec spec = bench::StudySpec::defaults(bench::StudyKind::sim3d);
  spec.n_list = {9, 400};
  spec.full_max_n = 0;
  spec.seed = 4;
  const bench::StudyResult r = bench::run_sim3d(spec);
  if (r.failed) return {false, r.failures.front()};
  int narrower = 0;
  std::string detail;
  for (const char* p : {"b1", "b2", "b3", "s1", "s2", "s3"}) {
    const auto* small = r.find("sim3d/N=9", "odr", p);
    const auto* large = r.find("sim3d/N=400", "odr", p);
    if (!small || !large) return {false, std::string("missing row for ") + p};
    const double w9 = small->q95 - small->q05;
    const double w400 = large->q95 - large->q05;
    if (w400 < w9) ++narrower;
    detail += std::string(p) + " " + fmt(w9) + "->" + fmt(w400) + " ";
  }
  return {narrower == 6, std::to_string(narrower) + "/6 narrower; " + detail};
}

// 5. Interval coverage over replications.
Outcome criterion5() {
  bench::StudySpec spec = bench::StudySpec::defaults(bench::StudyKind::coverage);
  spec.n_list = {kCoverageN};
  spec.replications = kCoverageReps;
  spec.run.model = ModelKind::odr;
  spec.seed = 5;
  const bench::StudyResult r = bench::run_coverage(spec);
  bool pass = r.failed == 0;
  std::string detail;
  for (const auto& c : r.coverage) {
    const double f = c.fraction();
    pass = pass && c.total == kCoverageReps && f >= kCoverageLow && f <= kCoverageHigh;
    detail += c.parameter + " " + std::to_string(c.hits) + "/" + std::to_string(c.total) + " ";
  }
  if (r.failed) detail += std::to_string(r.failed) + " failed fits";
  return {pass, "coverage " + detail + "(band [" + fmt(kCoverageLow) + ", " + fmt(kCoverageHigh) + "])"};
}

// 6. Full vs radial model on the 2D arcs.
Outcome criterion6() {
  bench::StudySpec spec = bench::StudySpec::defaults(bench::StudyKind::sim2d);
  spec.seed = 6;
  const bench::StudyResult r = bench::run_sim2d(spec);
  if (r.failed) return {false, r.failures.front()};
  bool pass = true;
  std::string detail = "half circle sd odr/full:";
  for (const char* p : {"b2", "s2"}) {
    const auto* odr = r.find("sim2d/half_circle", "odr", p);
    const auto* full = r.find("sim2d/half_circle", "full", p);
    if (!odr || !full) return {false, std::string("missing half-circle row for ") + p};
    pass = pass && odr->sd >= full->sd;
    detail += std::string(" ") + p + " " + fmt(odr->sd) + "/" + fmt(full->sd);
  }
  double worst = 0.0;
  for (const char* p : {"b1", "b2", "s1", "s2"}) {
    const auto* odr = r.find("sim2d/full_circle", "odr", p);
    const auto* full = r.find("sim2d/full_circle", "full", p);
    if (!odr || !full) return {false, std::string("missing full-circle row for ") + p};
    worst = std::max(worst, std::abs(odr->median - full->median));
  }
  pass = pass && worst <= kMedianAgreeTol;
  return {pass, detail + "; full circle max median difference " + fmt(worst)};
}

// 7. Full model converges at N=16 and only warns above 30 rows.
Outcome criterion7() {
  const Dataset d = simulate(kTruth3, with_reference_pose(grid_orientations(kFullConvergeN)), 7001);
  const UnitFit fit = fit_dataset(d, desk_config(ModelKind::full, Dims::three, 7002));
  double min_ess = std::numeric_limits<double>::infinity(), max_rhat = 0.0;
  for (const auto& p : fit.summary.parameters) {
    if (p.ess) min_ess = std::min(min_ess, *p.ess);
    if (p.rhat) max_rhat = std::max(max_rhat, *p.rhat);
  }
  const bool quiet_at_30 = fit_warnings(ModelKind::full, Dims::three, kSlowRows).empty();
  const bool warns_at_31 = !fit_warnings(ModelKind::full, Dims::three, kSlowRows + 1).empty();
  // Above the boundary the fit must still run to completion and carry the warning.
  bool completes = false, carries_warning = false;
  try {
    RunConfig quick = desk_config(ModelKind::full, Dims::three, 7004);
    quick.sampler.warmup = 300;
    quick.sampler.samples = 100;
    const UnitFit big = fit_dataset(simulate(kTruth3, with_reference_pose(grid_orientations(36)), 7003), quick);
    completes = true;
    carries_warning = !big.warnings.empty();
  } catch (const std::exception&) {
  }
  const bool pass = fit.converged() && quiet_at_30 && warns_at_31 && completes && carries_warning;
  return {pass, "N=16 verdict " + std::string(fit.converged() ? "pass" : "fail") + " (max rhat " + fmt(max_rhat) +
                    ", min ess " + fmt(min_ess) + " of " + std::to_string(fit.summary.total_draws) +
                    " draws); warning above 30 rows " + (warns_at_31 && quiet_at_30 ? "yes" : "no") +
                    "; N=36 fit completes " + (completes && carries_warning ? "with warning" : "no")};
}

// Radial sum of squares, written out independently of the library.
double radial_sse(const Dataset& d, double b1, double b2, double k1, double k2) {
  double sse = 0.0;
  for (const auto& r : d.rows) {
    const double x = k1 * (r.a[0] - b1), y = k2 * (r.a[1] - b2);
    const double e = std::sqrt(x * x + y * y) - 1.0;
    sse += e * e;
  }
  return sse;
}

// Exhaustive search on a regular grid around a centre.
std::array<double, 4> grid_search(const Dataset& d, const std::array<double, 4>& centre, double half, double step) {
  const int k = static_cast<int>(std::lround(half / step));
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 4> arg = centre;
  for (int i = -k; i <= k; ++i)
    for (int j = -k; j <= k; ++j)
      for (int l = -k; l <= k; ++l)
        for (int m = -k; m <= k; ++m) {
          const double b1 = centre[0] + i * step, b2 = centre[1] + j * step;
          const double k1 = centre[2] + l * step, k2 = centre[3] + m * step;
          const double v = radial_sse(d, b1, b2, k1, k2);
          if (v < best) {
            best = v;
            arg = {b1, b2, k1, k2};
          }
        }
  return arg;
}

// 8. ODR MLE against brute force.
Outcome criterion8() {
  const Dataset d = simulate(kTruth2, arc_orientations(12, Arc::full_circle), 8001);
  const MleResult mle = fit_odr_mle(d);
  const auto coarse = grid_search(d, {0.0, 0.0, 1.0, 1.0}, 0.3, 0.01);
  const auto fine = grid_search(d, coarse, 0.015, kGridStep);
  const std::array<double, 4> got{mle.b[0], mle.b[1], mle.sinv[0], mle.sinv[1]};
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(got[i] - fine[i]));
  const bool pass = worst <= kGridStep * (1.0 + 1e-9);
  return {pass, "max |mle - grid| " + fmt(worst) + " (grid step " + fmt(kGridStep) + "), mle b=(" + fmt(got[0]) +
                    ", " + fmt(got[1]) + ") sinv=(" + fmt(got[2]) + ", " + fmt(got[3]) + ")"};
}

// 9. Norm of the recovered direction under the exact parameters.
Outcome criterion9() {
  const CalibrationParams p{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 0.02, Dims::three};
  const Dataset d = simulate(p, random_orientations(kNormDraws, Dims::three, 9001), 9002);
  double sum = 0.0, sq = 0.0;
  for (const auto& r : d.rows) {
    const double n = std::sqrt(r.a[0] * r.a[0] + r.a[1] * r.a[1] + r.a[2] * r.a[2]);
    sum += n;
    sq += n * n;
  }
  const double mean = sum / kNormDraws;
  const double sd = std::sqrt((sq - kNormDraws * mean * mean) / (kNormDraws - 1));
  const bool pass = std::abs(mean - 1.0) < kNormMeanTol && std::abs(sd - p.sigma) < kNormSdRelTol * p.sigma;
  return {pass, "mean - 1 = " + fmt(mean - 1.0) + ", sd " + fmt(sd) + " (sigma " + fmt(p.sigma) + ")"};
}

// 10. Diagnostics on synthetic chains.
Outcome criterion10() {
  std::vector<double> rhats;
  double worst_ess = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    ChainSeries chains(4);
    for (auto& c : chains)
      for (int i = 0; i < 2000; ++i) c.push_back(z(rng));
    rhats.push_back(split_rhat(chains));
    worst_ess = std::max(worst_ess, std::abs(ess(chains) - 8000.0) / 8000.0);
  }
  std::sort(rhats.begin(), rhats.end());
  const double q99 = quantile(rhats, 0.99);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> z(0.0, 1e-3);
  ChainSeries stuck(2);
  for (int i = 0; i < 500; ++i) {
    stuck[0].push_back(1.0 + z(rng));
    stuck[1].push_back(-1.0 + z(rng));
  }
  const double r_stuck = split_rhat(stuck);
  const bool pass = q99 < kRhatIidMax && worst_ess < kEssRelTol && r_stuck > kRhatNonMixingMin;
  return {pass, "iid rhat p99 " + fmt(q99) + ", worst ess error " + fmt(100.0 * worst_ess) +
                    "%, non-mixing rhat " + fmt(r_stuck)};
}

double mean_radial_error(const Dataset& d) {
  double s = 0.0;
  for (double n : radial_norms(d)) s += std::abs(n - 1.0);
  return s / static_cast<double>(d.size());
}

// 11. Calibration improves held-out data.
Outcome criterion11() {
  const Dataset train = simulate(kTruth3, random_orientations(44, Dims::three, 11001), 11002);
  const Dataset test = simulate(kTruth3, random_orientations(50, Dims::three, 11003), 11004);
  const UnitFit fit = fit_dataset(train, desk_config(ModelKind::odr, Dims::three, 11005));
  const double before = mean_radial_error(test);
  const double after = mean_radial_error(calibrate(test, fit.median_b(), fit.median_s()));
  const double reduction = 1.0 - after / before;
  return {reduction >= kHoldoutReduction,
          "test mean | |a| - 1 | " + fmt(before) + " -> " + fmt(after) + " (" + fmt(100.0 * reduction) + "% lower)"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 12. Identical CLI invocations give identical files.
Outcome criterion12() {
  const std::filesystem::path dir = std::filesystem::path(BAYESCAL_TEST_TMP) / "acceptance12";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string cli = BAYESCAL_CLI_PATH;
  const std::string data = (dir / "data.csv").string();
  auto run = [&](const std::string& args) {
    return std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
  };
  if (run("--seed 12 simulate --n 100 --b 0.1,-0.2,0.3 --s 0.9,1,1.1 --out " + data) != 0)
    return {false, "simulate failed"};
  for (const char* tag : {"a", "b"}) {
    const std::string t = tag;
    const int rc = run("--seed 12 --warmup 1000 --samples 500 fit " + data + " --summary " +
                       (dir / ("summary_" + t + ".txt")).string() + " --draws " +
                       (dir / ("draws_" + t + ".csv")).string());
    if (rc != 0) return {false, "fit exited with status " + std::to_string(rc)};
  }
  const bool summary = slurp(dir / "summary_a.txt") == slurp(dir / "summary_b.txt");
  const bool flat = slurp(dir / "summary_a.csv") == slurp(dir / "summary_b.csv");
  const bool draws = slurp(dir / "draws_a.csv") == slurp(dir / "draws_b.csv");
  const bool nonempty = !slurp(dir / "draws_a.csv").empty();
  return {summary && flat && draws && nonempty, std::string("summary ") + (summary ? "identical" : "differs") +
                                                    ", flat summary " + (flat ? "identical" : "differs") +
                                                    ", draws " + (draws ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion number (repeatable)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> all{criterion1, criterion2, criterion3,  criterion4,
                                                  criterion5, criterion6, criterion7,  criterion8,
                                                  criterion9, criterion10, criterion11, criterion12};
  if (selected.empty())
    for (int k = 1; k <= 12; ++k) selected.push_back(k);

  int failed = 0;
  for (int k : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s: %s [%.1fs]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
