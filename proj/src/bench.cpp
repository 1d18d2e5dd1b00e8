#include "bayescal/bench.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "bayescal/error.hpp"
#include "bayescal/io.hpp"

namespace bayescal::bench {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct CellFit {
  UnitFit fit;
  double seconds = 0.0;
};

CellFit timed_fit(const Dataset& d, const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  CellFit out{fit_dataset(d, cfg), 0.0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void append_rows(StudyResult& res, const std::string& study, const std::string& cell, std::size_t n,
                 const std::string& arc, int replication, const CellFit& cf, const CalibrationParams& truth) {
  for (const auto& [name, value] : truth_table(truth)) {
    const auto* p = cf.fit.summary.find(name);
    if (!p) continue;
    StudyRow row;
    row.study = study;
    row.cell = cell;
    row.n = n;
    row.arc = arc;
    row.replication = replication;
    row.model = to_string(cf.fit.model);
    row.parameter = name;
    row.truth = value;
    row.median = p->median;
    row.q05 = p->q05;
    row.q95 = p->q95;
    row.sd = p->sd;
    row.rhat = p->rhat;
    row.ess = p->ess;
    row.converged = cf.fit.converged();
    row.wall_seconds = cf.seconds;
    res.rows.push_back(row);
  }
}

}  // namespace

const char* to_string(StudyKind k) {
  switch (k) {
    case StudyKind::sim2d:
      return "sim2d";
    case StudyKind::sim3d:
      return "sim3d";
    case StudyKind::coverage:
      return "coverage";
  }
  return "?";
}

StudyKind study_kind_from_string(const std::string& s) {
  if (s == "sim2d") return StudyKind::sim2d;
  if (s == "sim3d") return StudyKind::sim3d;
  if (s == "coverage") return StudyKind::coverage;
  throw PreconditionError("unknown study '" + s + "' (expected sim2d, sim3d or coverage)");
}

const char* to_string(Arc a) { return a == Arc::full_circle ? "full_circle" : "half_circle"; }

StudySpec StudySpec::defaults(StudyKind kind) {
  StudySpec s;
  s.study = kind;
  s.run.sampler.warmup = 2000;
  s.run.sampler.samples = 1000;
  if (kind == StudyKind::sim2d) {
    s.truth = {{0.1, -0.05, 0.0}, {0.9, 1.1, 1.0}, 0.02, Dims::two};
    s.run.dims = Dims::two;
    s.n_list = {10};
  } else {
    s.truth = {{0.1, -0.2, 0.3}, {0.9, 1.0, 1.1}, 0.02, Dims::three};
    s.run.dims = Dims::three;
    if (kind == StudyKind::sim3d)
      for (std::size_t k = 1; k <= 20; ++k) s.n_list.push_back(k * k);
    else
      s.n_list = {100};
  }
  return s;
}

void StudySpec::validate() const {
  truth.validate();
  run.validate();
  if (truth.dims != run.dims) throw PreconditionError("truth and run dimensions differ");
  if (n_list.empty()) throw PreconditionError("study needs at least one N");
  if (study == StudyKind::sim2d && truth.dims != Dims::two)
    throw PreconditionError("sim2d runs in 2 dimensions");
  if (study != StudyKind::sim2d && truth.dims != Dims::three)
    throw PreconditionError(std::string(to_string(study)) + " runs in 3 dimensions");
  if (study != StudyKind::sim2d)
    for (std::size_t n : n_list) grid_orientations(n);
  if (study == StudyKind::coverage && replications < 20)
    throw PreconditionError("coverage needs at least 20 replications");
}

const StudyRow* StudyResult::find(const std::string& cell, const std::string& model,
                                  const std::string& parameter) const {
  for (const auto& r : rows)
    if (r.cell == cell && r.model == model && r.parameter == parameter) return &r;
  return nullptr;
}

std::vector<std::pair<std::string, double>> truth_table(const CalibrationParams& truth) {
  std::vector<std::pair<std::string, double>> out;
  const int d = count(truth.dims);
  for (int j = 0; j < d; ++j) out.emplace_back("b" + std::to_string(j + 1), truth.b[j]);
  for (int j = 0; j < d; ++j) out.emplace_back("s" + std::to_string(j + 1), truth.s[j]);
  for (int j = 0; j < d; ++j) out.emplace_back("sinv" + std::to_string(j + 1), 1.0 / truth.s[j]);
  out.emplace_back("sigma", truth.sigma);
  return out;
}

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(seed) ^ a) ^ (b + 0x51ed));
}

StudyResult run_sim2d(const StudySpec& spec) {
  spec.validate();
  StudyResult res;
  const std::size_t n = spec.n_list.front();
  for (std::size_t ai = 0; ai < spec.arcs.size(); ++ai) {
    const Arc arc = spec.arcs[ai];
    const std::string cell = std::string("sim2d/") + to_string(arc);
    const Dataset data = simulate(spec.truth, arc_orientations(n, arc), cell_seed(spec.seed, 2, ai));
    for (ModelKind kind : {ModelKind::full, ModelKind::odr}) {
      RunConfig cfg = spec.run;
      cfg.model = kind;
      cfg.sampler.seed = cell_seed(spec.seed, 20 + ai, static_cast<std::uint64_t>(kind));
      try {
        append_rows(res, "sim2d", cell, n, to_string(arc), 0, timed_fit(data, cfg), spec.truth);
      } catch (const Error& e) {
        ++res.failed;
        res.failures.push_back(cell + "/" + to_string(kind) + ": " + e.what());
      }
    }
  }
  return res;
}

StudyResult run_sim3d(const StudySpec& spec) {
  spec.validate();
  StudyResult res;
  for (std::size_t n : spec.n_list) {
    const std::string cell = "sim3d/N=" + std::to_string(n);
    const Dataset data =
        simulate(spec.truth, with_reference_pose(grid_orientations(n)), cell_seed(spec.seed, 3, n));
    std::vector<ModelKind> kinds{ModelKind::odr};
    if (n >= 2 && n <= spec.full_max_n) kinds.push_back(ModelKind::full);
    for (ModelKind kind : kinds) {
      RunConfig cfg = spec.run;
      cfg.model = kind;
      cfg.sampler.seed = cell_seed(spec.seed, 30 + n, static_cast<std::uint64_t>(kind));
      try {
        append_rows(res, "sim3d", cell, n, "-", 0, timed_fit(data, cfg), spec.truth);
      } catch (const Error& e) {
        ++res.failed;
        res.failures.push_back(cell + "/" + to_string(kind) + ": " + e.what());
      }
    }
  }
  return res;
}

StudyResult run_coverage(const StudySpec& spec) {
  spec.validate();
  StudyResult res;
  const int d = count(spec.truth.dims);
  for (std::size_t n : spec.n_list) {
    std::vector<CoverageRow> cov;
    for (int j = 0; j < d; ++j) cov.push_back({"b" + std::to_string(j + 1), n, 0, 0});
    for (int j = 0; j < d; ++j) cov.push_back({"s" + std::to_string(j + 1), n, 0, 0});
    const auto truth = truth_table(spec.truth);
    for (int rep = 0; rep < spec.replications; ++rep) {
      const std::string cell = "coverage/N=" + std::to_string(n) + "/rep=" + std::to_string(rep + 1);
      const auto r = static_cast<std::uint64_t>(rep);
      const Dataset data = simulate(spec.truth, grid_orientations(n), cell_seed(spec.seed, 1000 + n, r));
      RunConfig cfg = spec.run;
      cfg.sampler.seed = cell_seed(spec.seed, 5000 + n, r);
      CellFit cf;
      try {
        cf = timed_fit(data, cfg);
      } catch (const Error& e) {
        ++res.failed;
        res.failures.push_back(cell + ": " + e.what());
        continue;
      }
      append_rows(res, "coverage", cell, n, "-", rep + 1, cf, spec.truth);
      for (auto& c : cov) {
        const auto* p = cf.fit.summary.find(c.parameter);
        double t = 0.0;
        for (const auto& [name, value] : truth)
          if (name == c.parameter) t = value;
        if (!p) continue;
        ++c.total;
        if (p->q05 <= t && t <= p->q95) ++c.hits;
      }
    }
    res.coverage.insert(res.coverage.end(), cov.begin(), cov.end());
  }
  return res;
}

StudyResult run_study(const StudySpec& spec) {
  switch (spec.study) {
    case StudyKind::sim2d:
      return run_sim2d(spec);
    case StudyKind::sim3d:
      return run_sim3d(spec);
    case StudyKind::coverage:
      return run_coverage(spec);
  }
  throw PreconditionError("unknown study");
}

void write_rows_csv(std::ostream& out, const StudyResult& r) {
  out << "study,cell,n,arc,replication,model,parameter,truth,median,q05,q95,sd,rhat,ess,converged,wall_seconds\n";
  for (const auto& row : r.rows)
    out << row.study << ',' << row.cell << ',' << row.n << ',' << row.arc << ',' << row.replication << ','
        << row.model << ',' << row.parameter << ',' << io::csv_double(row.truth) << ','
        << io::csv_double(row.median) << ',' << io::csv_double(row.q05) << ',' << io::csv_double(row.q95) << ','
        << io::csv_double(row.sd) << ',' << (row.rhat ? io::csv_double(*row.rhat) : "NA") << ','
        << (row.ess ? io::csv_double(*row.ess) : "NA") << ',' << (row.converged ? "pass" : "fail") << ','
        << io::csv_double(row.wall_seconds) << '\n';
}

void write_coverage_csv(std::ostream& out, const StudyResult& r) {
  out << "parameter,n,hits,total,coverage\n";
  for (const auto& c : r.coverage)
    out << c.parameter << ',' << c.n << ',' << c.hits << ',' << c.total << ',' << io::csv_double(c.fraction())
        << '\n';
}

}  // namespace bayescal::bench
