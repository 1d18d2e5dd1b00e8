#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bayescal/sampler.hpp"

namespace bayescal {

using ChainSeries = std::vector<std::vector<double>>;  // chains x samples

/// Classic split-R-hat: each chain is cut in half (the middle draw of an odd
/// chain is dropped) and sqrt(V/W) is computed over the 2m half-chains.
/// Throws DiagnosticError for fewer than 4 samples, ragged chains or zero
/// within-chain variance.
double split_rhat(const ChainSeries& chains);

/// Autocorrelation-based effective sample size combined across chains and
/// truncated by Geyer's initial positive and monotone sequences. Capped at
/// total * log10(total). Throws DiagnosticError for fewer than 8 samples or
/// constant chains.
double ess(const ChainSeries& chains);

/// Type-7 quantile of already sorted values.
double quantile(const std::vector<double>& sorted, double q);

struct Thresholds {
  double rhat_max = 1.10;
  double ess_frac = 0.5;  // of total post-warmup draws across chains
};

struct ParameterSummary {
  std::string name;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  std::optional<double> rhat;  // empty when undefined (constant draws)
  std::optional<double> ess;
};

struct SummaryTable {
  std::vector<ParameterSummary> parameters;
  bool pass = false;
  std::vector<std::string> reasons;
  Thresholds thresholds;
  int total_draws = 0;

  const ParameterSummary* find(const std::string& name) const;
};

SummaryTable summarize(const PosteriorDraws& draws, const Thresholds& thresholds = {});

}  // namespace bayescal
