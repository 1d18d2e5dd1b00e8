#include "bayescal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bayescal/error.hpp"

namespace bayescal {

namespace {

void check_shape(const ChainSeries& chains, std::size_t min_samples) {
  if (chains.empty()) throw DiagnosticError("no chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n) throw DiagnosticError("chains have different lengths");
  if (n < min_samples)
    throw DiagnosticError("need at least " + std::to_string(min_samples) + " samples per chain");
}

double mean_of(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += v[i];
  return acc / static_cast<double>(to - from);
}

double var_of(const std::vector<double>& v, std::size_t from, std::size_t to, double mean) {
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += (v[i] - mean) * (v[i] - mean);
  return acc / static_cast<double>(to - from - 1);
}

// Autocovariance at `lag` with 1/n normalization.
double autocov(const std::vector<double>& v, double mean, std::size_t lag) {
  const std::size_t n = v.size();
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) acc += (v[i] - mean) * (v[i + lag] - mean);
  return acc / static_cast<double>(n);
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

double split_rhat(const ChainSeries& chains) {
  check_shape(chains, 4);
  const std::size_t n = chains.front().size();
  const std::size_t half = n / 2;
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    const std::size_t second = n - half;
    for (auto [from, to] : {std::pair{std::size_t{0}, half}, std::pair{second, n}}) {
      const double m = mean_of(c, from, to);
      means.push_back(m);
      vars.push_back(var_of(c, from, to, m));
    }
  }
  const auto m = static_cast<double>(means.size());
  const auto len = static_cast<double>(half);
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between *= len / (m - 1.0);
  const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (!(within > 0.0)) throw DiagnosticError("zero within-chain variance");
  const double var_plus = (len - 1.0) / len * within + between / len;
  return std::sqrt(var_plus / within);
}

double ess(const ChainSeries& chains) {
  check_shape(chains, 8);
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mean_of(chains[c], 0, n);
    vars[c] = var_of(chains[c], 0, n, means[c]);
  }
  const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
  if (!(within > 0.0)) throw DiagnosticError("zero within-chain variance");
  const auto nd = static_cast<double>(n);
  double var_plus = within * (nd - 1.0) / nd;
  if (m > 1) {
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    double between = 0.0;
    for (double mu : means) between += (mu - grand) * (mu - grand);
    var_plus += between / static_cast<double>(m - 1);
  }

  auto rho = [&](std::size_t lag) {
    double acov = 0.0;
    for (std::size_t c = 0; c < m; ++c) acov += autocov(chains[c], means[c], lag);
    acov /= static_cast<double>(m);
    return 1.0 - (within - acov) / var_plus;
  };

  std::vector<double> r(n + 1, 0.0);
  double rho_even = 1.0;
  double rho_odd = rho(1);
  r[0] = rho_even;
  r[1] = rho_odd;
  // Geyer's initial positive sequence over pairs of lags. The final pair is
  // kept as a bias term, which helps for antithetic chains.
  std::size_t s = 1;
  while (s + 4 < n && rho_even + rho_odd > 0.0) {
    rho_even = rho(s + 1);
    rho_odd = rho(s + 2);
    if (rho_even + rho_odd >= 0.0) {
      r[s + 1] = rho_even;
      r[s + 2] = rho_odd;
    }
    s += 2;
  }
  const std::size_t max_s = s;
  if (rho_even > 0.0) r[max_s + 1] = rho_even;
  // initial monotone sequence
  for (std::size_t k = 1; k + 3 <= max_s; k += 2) {
    if (r[k + 1] + r[k + 2] > r[k - 1] + r[k]) {
      r[k + 1] = (r[k - 1] + r[k]) / 2.0;
      r[k + 2] = r[k + 1];
    }
  }
  const double total = static_cast<double>(m) * nd;
  double tau = -1.0 + r[max_s];
  for (std::size_t k = 0; k < max_s; ++k) tau += 2.0 * r[k];
  const double cap = total * std::log10(total);
  if (!(tau > 0.0)) return cap;
  return std::min(total / tau, cap);
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw PreconditionError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw PreconditionError("quantile level must lie in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

const ParameterSummary* SummaryTable::find(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return &p;
  return nullptr;
}

SummaryTable summarize(const PosteriorDraws& draws, const Thresholds& thresholds) {
  if (draws.values.empty() || draws.chains < 1 || draws.samples < 1)
    throw PreconditionError("cannot summarize an empty set of draws");
  SummaryTable table;
  table.thresholds = thresholds;
  table.total_draws = draws.chains * draws.samples;
  const double ess_min = thresholds.ess_frac * table.total_draws;
  table.pass = true;
  for (std::size_t p = 0; p < draws.params(); ++p) {
    ParameterSummary ps;
    ps.name = draws.names[p];
    const auto series = draws.series(p);
    std::vector<double> pooled;
    pooled.reserve(static_cast<std::size_t>(table.total_draws));
    for (const auto& c : series) pooled.insert(pooled.end(), c.begin(), c.end());
    ps.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / static_cast<double>(pooled.size());
    double ss = 0.0;
    for (double v : pooled) ss += (v - ps.mean) * (v - ps.mean);
    ps.sd = pooled.size() > 1 ? std::sqrt(ss / static_cast<double>(pooled.size() - 1)) : 0.0;
    std::sort(pooled.begin(), pooled.end());
    ps.median = quantile(pooled, 0.5);
    ps.q05 = quantile(pooled, 0.05);
    ps.q95 = quantile(pooled, 0.95);
    try {
      ps.rhat = split_rhat(series);
    } catch (const DiagnosticError&) {
    }
    try {
      ps.ess = ess(series);
    } catch (const DiagnosticError&) {
    }
    if (!ps.rhat) {
      table.pass = false;
      table.reasons.push_back(ps.name + ": rhat undefined");
    } else if (!(*ps.rhat < thresholds.rhat_max)) {
      table.pass = false;
      table.reasons.push_back(ps.name + ": rhat " + format_number(*ps.rhat) +
                              " >= " + format_number(thresholds.rhat_max));
    }
    if (!ps.ess) {
      table.pass = false;
      table.reasons.push_back(ps.name + ": ess undefined");
    } else if (!(*ps.ess > ess_min)) {
      table.pass = false;
      table.reasons.push_back(ps.name + ": ess " + format_number(*ps.ess) +
                              " <= " + format_number(ess_min));
    }
    table.parameters.push_back(std::move(ps));
  }
  return table;
}

}  // namespace bayescal
