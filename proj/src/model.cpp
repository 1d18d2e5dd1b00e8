#include "bayescal/model.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "bayescal/error.hpp"
#include "bayescal/rng.hpp"

namespace bayescal {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out[n - 1] = hi;
  return out;
}

}  // namespace

Dims dims_from_int(int d) {
  if (d == 2) return Dims::two;
  if (d == 3) return Dims::three;
  throw PreconditionError("dimensions must be 2 or 3, got " + std::to_string(d));
}

void CalibrationParams::validate() const {
  for (int j = 0; j < count(dims); ++j) {
    if (!(s[j] > 0.0) || !std::isfinite(s[j]))
      throw PreconditionError("scale s" + std::to_string(j + 1) + " must be positive");
    if (!std::isfinite(b[j]))
      throw PreconditionError("bias b" + std::to_string(j + 1) + " must be finite");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw PreconditionError("sigma must be nonnegative");
}

void Dataset::validate() const {
  if (rows.empty()) throw PreconditionError("dataset is empty");
  if (!pose_id.empty() && pose_id.size() != rows.size())
    throw PreconditionError("pose_id column length differs from row count");
  if (!unit_id.empty() && unit_id.size() != rows.size())
    throw PreconditionError("unit_id column length differs from row count");
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (double v : rows[i].a)
      if (!std::isfinite(v))
        throw PreconditionError("row " + std::to_string(i + 1) + " has a non-finite value");
}

double norm(const Vec3& v, Dims dims) {
  double acc = 0.0;
  for (int j = 0; j < count(dims); ++j) acc += v[j] * v[j];
  return std::sqrt(acc);
}

Vec3 spherical_to_cartesian(const Orientation& o) {
  const double st = std::sin(o.theta);
  return {st * std::cos(o.phi), st * std::sin(o.phi), std::cos(o.theta)};
}

Vec3 direction(const Orientation& o, Dims dims) {
  if (dims == Dims::two) return {std::cos(o.phi), std::sin(o.phi), 0.0};
  return spherical_to_cartesian(o);
}

Vec3 forward_mean(const CalibrationParams& p, const Vec3& g) {
  Vec3 out{0.0, 0.0, 0.0};
  for (int j = 0; j < count(p.dims); ++j) out[j] = p.s[j] * g[j] + p.b[j];
  return out;
}

Vec3 estimate_g(const CalibrationParams& p, const Vec3& a) {
  Vec3 out{0.0, 0.0, 0.0};
  for (int j = 0; j < count(p.dims); ++j) out[j] = (a[j] - p.b[j]) / p.s[j];
  return out;
}

Dataset simulate(const CalibrationParams& p, const std::vector<Orientation>& orientations,
                 std::uint64_t seed) {
  p.validate();
  if (orientations.empty()) throw PreconditionError("simulate needs at least one orientation");
  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.dims = p.dims;
  d.rows.reserve(orientations.size());
  for (const auto& o : orientations) {
    Measurement m{forward_mean(p, direction(o, p.dims))};
    for (int j = 0; j < count(p.dims); ++j) {
      const double eps = normal(rng);
      if (p.sigma > 0.0) m.a[j] += p.sigma * eps;
    }
    d.rows.push_back(m);
  }
  return d;
}

std::vector<Orientation> grid_orientations(std::size_t n_total) {
  if (n_total == 0) throw PreconditionError("grid size must be at least 1");
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n_total))));
  if (side * side != n_total)
    throw PreconditionError("grid size " + std::to_string(n_total) + " is not a perfect square");
  const auto phis = linspace(0.1, 2.0 * std::numbers::pi - 0.1, side);
  const auto thetas = linspace(0.1, std::numbers::pi - 0.1, side);
  std::vector<Orientation> out;
  out.reserve(n_total);
  for (double theta : thetas)
    for (double phi : phis) out.push_back({theta, phi});
  return out;
}

std::vector<Orientation> arc_orientations(std::size_t n, Arc arc) {
  if (n == 0) throw PreconditionError("arc needs at least one angle");
  std::vector<Orientation> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double phi;
    if (arc == Arc::full_circle)
      phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    else
      phi = n == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = {std::numbers::pi / 2.0, phi};
  }
  return out;
}

std::vector<Orientation> with_reference_pose(std::vector<Orientation> poses) {
  if (!poses.empty()) poses.front() = Orientation{0.0, 0.0};
  return poses;
}

std::vector<Orientation> random_orientations(std::size_t n, Dims dims, std::uint64_t seed) {
  Engine rng = make_engine(seed, 0x5eed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Orientation> out(n);
  for (auto& o : out) {
    o.phi = 2.0 * std::numbers::pi * unit(rng);
    o.theta = dims == Dims::two ? std::numbers::pi / 2.0 : std::acos(1.0 - 2.0 * unit(rng));
  }
  return out;
}

Dataset calibrate(const Dataset& d, const Vec3& b_med, const Vec3& s_med) {
  for (int j = 0; j < count(d.dims); ++j)
    if (!(s_med[j] > 0.0) || !std::isfinite(s_med[j]))
      throw PreconditionError("calibration scale s" + std::to_string(j + 1) + " must be positive");
  Dataset out = d;
  for (auto& row : out.rows)
    for (int j = 0; j < count(d.dims); ++j) row.a[j] = (row.a[j] - b_med[j]) / s_med[j];
  return out;
}

std::vector<double> radial_norms(const Dataset& d) {
  std::vector<double> out;
  out.reserve(d.size());
  for (const auto& row : d.rows) out.push_back(norm(row.a, d.dims));
  return out;
}

Dataset average_poses(const Dataset& d) {
  if (!d.has_pose_ids()) return d;
  struct Acc {
    Vec3 sum{0.0, 0.0, 0.0};
    std::size_t n = 0;
    std::size_t slot = 0;
  };
  Dataset out;
  out.dims = d.dims;
  std::map<std::pair<std::string, std::int64_t>, Acc> groups;
  std::vector<std::pair<std::string, std::int64_t>> order;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::string unit = d.has_unit_ids() ? d.unit_id[i] : std::string{};
    if (!d.pose_id[i]) {
      out.rows.push_back(d.rows[i]);
      out.pose_id.push_back(std::nullopt);
      if (d.has_unit_ids()) out.unit_id.push_back(unit);
      continue;
    }
    auto key = std::make_pair(unit, *d.pose_id[i]);
    auto it = groups.find(key);
    if (it == groups.end()) {
      it = groups.emplace(key, Acc{}).first;
      it->second.slot = out.rows.size();
      out.rows.push_back({});
      out.pose_id.push_back(*d.pose_id[i]);
      if (d.has_unit_ids()) out.unit_id.push_back(unit);
    }
    for (int j = 0; j < 3; ++j) it->second.sum[j] += d.rows[i].a[j];
    ++it->second.n;
  }
  for (const auto& [key, acc] : groups)
    for (int j = 0; j < 3; ++j) out.rows[acc.slot].a[j] = acc.sum[j] / static_cast<double>(acc.n);
  return out;
}

std::vector<std::pair<std::string, Dataset>> split_units(const Dataset& d) {
  std::vector<std::pair<std::string, Dataset>> out;
  if (!d.has_unit_ids()) {
    out.emplace_back("default", d);
    return out;
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto [it, fresh] = index.emplace(d.unit_id[i], out.size());
    if (fresh) {
      Dataset part;
      part.dims = d.dims;
      out.emplace_back(d.unit_id[i], std::move(part));
    }
    Dataset& part = out[it->second].second;
    part.rows.push_back(d.rows[i]);
    if (d.has_pose_ids()) part.pose_id.push_back(d.pose_id[i]);
    part.unit_id.push_back(d.unit_id[i]);
  }
  return out;
}

}  // namespace bayescal
