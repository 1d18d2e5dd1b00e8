#pragma once

// File formats.
//
//   measurements  ax,ay,az[,pose_id][,unit_id]   (ax,ay for 2D data)
//   draws         chain,iteration,<parameter names...>
//   summary       structured text, one `unit` block per unit_id, plus a flat
//                 CSV twin unit_id,parameter,median,q05,q95,rhat,ess
//   config        RunConfig as structured text
//
// Doubles are written with 17 significant digits in CSV files so every file
// reads back bit-exactly.

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bayescal/diagnostics.hpp"
#include "bayescal/fit.hpp"
#include "bayescal/model.hpp"
#include "bayescal/sampler.hpp"
#include "bayescal/structured_text.hpp"

namespace bayescal::io {

/// Reads a measurement CSV. With expected dims the az column is required
/// (3D) or rejected (2D); without, presence of az decides.
Dataset read_measurements(std::istream& in, const std::string& source,
                          std::optional<Dims> expected = Dims::three);
Dataset read_measurements_file(const std::string& path, std::optional<Dims> expected = Dims::three);
void write_measurements(std::ostream& out, const Dataset& d);

PosteriorDraws read_draws(std::istream& in, const std::string& source);
PosteriorDraws read_draws_file(const std::string& path);
void write_draws(std::ostream& out, const PosteriorDraws& draws);

struct SummaryUnit {
  std::string unit_id;
  ModelKind model = ModelKind::odr;
  Dims dims = Dims::three;
  bool pass = false;
  std::vector<ParameterSummary> parameters;

  const ParameterSummary* find(const std::string& name) const;
  /// Medians of b and s (s from sinv when present). Throws ParseError if missing.
  Vec3 median_b() const;
  Vec3 median_s() const;
};

void write_summary(std::ostream& out, const FitResult& fit, const RunConfig& cfg);
void write_summary_csv(std::ostream& out, const FitResult& fit);
std::vector<SummaryUnit> read_summary(std::istream& in, const std::string& source);
std::vector<SummaryUnit> read_summary_file(const std::string& path);

TextBlock config_to_text(const RunConfig& cfg);
RunConfig config_from_text(const TextBlock& root, const std::string& source);
RunConfig read_config_file(const std::string& path);
void write_config(std::ostream& out, const RunConfig& cfg);

/// Long format chain,iteration,parameter,value.
void write_trace(std::ostream& out, const PosteriorDraws& draws);
/// parameter,median,q05,q95,mean,sd,rhat,ess with NA for undefined diagnostics.
void write_diagnostics_table(std::ostream& out, const SummaryTable& table);
/// row,unit_id,norm_raw,norm_calibrated
void write_norms(std::ostream& out, const Dataset& raw, const Dataset& calibrated);

/// Writes to path via a temporary file in the same directory and renames it
/// into place. Throws IoError with the OS message on failure.
void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& body);

/// "%.17g" text used in CSV files.
std::string csv_double(double v);

}  // namespace bayescal::io
