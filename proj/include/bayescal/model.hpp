#pragma once

// Accelerometer error model: a = S g + b + sigma * eps, with diagonal S and
// |g| = 1. Vectors are always stored with three components; in 2D mode the
// third component is zero and ignored.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bayescal {

using Vec3 = std::array<double, 3>;

/// Number of measured axes. Only 2 and 3 are meaningful.
enum class Dims : int { two = 2, three = 3 };

inline int count(Dims d) { return static_cast<int>(d); }
Dims dims_from_int(int d);

struct CalibrationParams {
  Vec3 b{0.0, 0.0, 0.0};
  Vec3 s{1.0, 1.0, 1.0};
  double sigma = 0.0;
  Dims dims = Dims::three;

  /// Throws PreconditionError unless s_j > 0 on the active axes and sigma >= 0.
  void validate() const;
};

/// Direction of gravity for one stationary pose, in spherical coordinates.
/// In 2D mode only phi is used and g = (cos phi, sin phi).
struct Orientation {
  double theta = 0.0;
  double phi = 0.0;
};

struct Measurement {
  Vec3 a{0.0, 0.0, 0.0};
};

struct Dataset {
  std::vector<Measurement> rows;
  std::vector<std::optional<std::int64_t>> pose_id;  // empty or one per row
  std::vector<std::string> unit_id;                  // empty or one per row
  Dims dims = Dims::three;

  std::size_t size() const { return rows.size(); }
  bool has_pose_ids() const { return !pose_id.empty(); }
  bool has_unit_ids() const { return !unit_id.empty(); }

  /// Throws PreconditionError if empty, ragged labels or a non-finite value.
  void validate() const;
};

Vec3 spherical_to_cartesian(const Orientation& o);
Vec3 direction(const Orientation& o, Dims dims);

Vec3 forward_mean(const CalibrationParams& p, const Vec3& g);

/// Inverse of forward_mean for noiseless data: (a - b) / s componentwise.
Vec3 estimate_g(const CalibrationParams& p, const Vec3& a);

/// Draws one noisy measurement per orientation. Deterministic given seed.
Dataset simulate(const CalibrationParams& p, const std::vector<Orientation>& orientations,
                 std::uint64_t seed);

/// sqrt(n) evenly spaced phi in [0.1, 2pi-0.1] crossed with sqrt(n) theta in [0.1, pi-0.1].
/// phi varies fastest. Throws PreconditionError for non-square n.
std::vector<Orientation> grid_orientations(std::size_t n_total);

/// 2D poses: n angles evenly spaced around the full circle starting at 0, or
/// n angles from 0 to pi inclusive for the half-circle arc.
enum class Arc { full_circle, half_circle };
std::vector<Orientation> arc_orientations(std::size_t n, Arc arc);

/// Replaces the first pose with the reference direction the full model pins
/// (+z in 3D, +x in 2D), so simulated data match that identifiability choice.
std::vector<Orientation> with_reference_pose(std::vector<Orientation> poses);

/// Uniformly distributed directions on the sphere (or circle in 2D).
std::vector<Orientation> random_orientations(std::size_t n, Dims dims, std::uint64_t seed);

/// a_cal = S^-1 (a - b), row order and labels preserved.
Dataset calibrate(const Dataset& d, const Vec3& b_med, const Vec3& s_med);

std::vector<double> radial_norms(const Dataset& d);

/// Averages rows sharing a pose_id (and unit_id), keeping first-appearance order.
/// Rows without a pose_id are kept as they are.
Dataset average_poses(const Dataset& d);

/// Splits by unit_id in first-appearance order. A dataset without unit ids
/// yields one group labelled "default".
std::vector<std::pair<std::string, Dataset>> split_units(const Dataset& d);

double norm(const Vec3& v, Dims dims = Dims::three);

}  // namespace bayescal
