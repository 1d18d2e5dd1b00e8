#pragma once

// Simulation studies: the 2D full-vs-radial comparison, the 3D interval width
// versus N sweep, and repeated-fit interval coverage.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayescal/fit.hpp"
#include "bayescal/model.hpp"

namespace bayescal::bench {

enum class StudyKind { sim2d, sim3d, coverage };

const char* to_string(StudyKind k);
StudyKind study_kind_from_string(const std::string& s);
const char* to_string(Arc a);

struct StudySpec {
  StudyKind study = StudyKind::sim3d;
  CalibrationParams truth;
  std::vector<std::size_t> n_list;
  std::vector<Arc> arcs{Arc::full_circle, Arc::half_circle};  // sim2d only
  int replications = 50;                                     // coverage only
  std::size_t full_max_n = 25;  // sim3d: largest N also fitted with the full model
  RunConfig run;                // model field is ignored by sim2d / sim3d
  std::uint64_t seed = 1;

  /// Parameter values and N used for each study, with the sampler at
  /// 2000 warmup / 1000 samples.
  static StudySpec defaults(StudyKind kind);
  void validate() const;
};

struct StudyRow {
  std::string study;
  std::string cell;
  std::size_t n = 0;
  std::string arc;  // "-" outside sim2d
  int replication = 0;
  std::string model;
  std::string parameter;
  double truth = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double sd = 0.0;
  std::optional<double> rhat;
  std::optional<double> ess;
  bool converged = false;
  double wall_seconds = 0.0;
};

struct CoverageRow {
  std::string parameter;
  std::size_t n = 0;
  int hits = 0;
  int total = 0;
  double fraction() const { return total > 0 ? static_cast<double>(hits) / total : 0.0; }
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<CoverageRow> coverage;
  std::vector<std::string> failures;  // one message per failed cell
  int failed = 0;

  /// First row matching the keys; nullptr when absent.
  const StudyRow* find(const std::string& cell, const std::string& model, const std::string& parameter) const;
};

StudyResult run_sim2d(const StudySpec& spec);
StudyResult run_sim3d(const StudySpec& spec);
StudyResult run_coverage(const StudySpec& spec);
StudyResult run_study(const StudySpec& spec);

/// True values of the reported parameters (b, s, sinv, sigma).
std::vector<std::pair<std::string, double>> truth_table(const CalibrationParams& truth);

/// Deterministic seed for a study cell.
std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

void write_rows_csv(std::ostream& out, const StudyResult& r);
void write_coverage_csv(std::ostream& out, const StudyResult& r);

}  // namespace bayescal::bench
