// Copyright 2026 The odrl-drive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ODRL__GEOMETRY_HPP_
#define ODRL__GEOMETRY_HPP_

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace odrl
{

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Rotation matrix for a planar heading.
Mat2 rotation(double heading);

struct Pose2D
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double heading_) : x(x_), y(y_), heading(normalize_angle(heading_)) {}

  Vec2 position() const { return {x, y}; }
  Vec2 forward() const;
  Vec2 left() const;

  /// Pose of `local` (expressed in this frame) in the parent frame.
  Pose2D compose(const Pose2D & local) const;
  /// Pose of `global` expressed in this frame.
  Pose2D relative(const Pose2D & global) const;

  bool operator==(const Pose2D &) const = default;
};

/// Points into the coordinate frame defined by `frame`.
Vec2 to_frame(const Vec2 & point, const Pose2D & frame);
Vec2 from_frame(const Vec2 & point, const Pose2D & frame);
std::vector<Vec2> to_frame(std::span<const Vec2> points, const Pose2D & frame);
std::vector<Vec2> from_frame(std::span<const Vec2> points, const Pose2D & frame);

/// Piecewise-linear curve with at least two vertices and strictly increasing arclength.
class Polyline
{
public:
  /// Throws Error(InvalidSpec) on fewer than two points or repeated consecutive points.
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2> & points() const { return points_; }
  const std::vector<double> & cumulative_arclength() const { return cumulative_; }
  std::size_t size() const { return points_.size(); }
  std::size_t segment_count() const { return points_.size() - 1; }
  double length() const { return cumulative_.back(); }

  /// Point at arclength `s`; linear extrapolation past either end.
  Vec2 point_at(double s) const;
  /// Direction of travel at arclength `s` (clamped to the curve).
  double heading_at(double s) const;
  /// Signed curvature estimated from heading change over a +/- `window` span.
  double curvature_at(double s, double window = 2.0) const;

  std::size_t segment_at(double s) const;

  bool operator==(const Polyline & other) const { return points_ == other.points_; }

private:
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

struct Projection
{
  double arclength = 0.0;
  double lateral_offset = 0.0;  ///< positive left of the travel direction
  std::size_t segment_index = 0;
  Vec2 foot = Vec2::Zero();
};

/// Nearest-point projection. Ties between segments go to the lower segment index.
Projection project_onto_polyline(const Vec2 & p, const Polyline & line);

struct OrientedBox
{
  Vec2 center = Vec2::Zero();
  Vec2 half_extents = Vec2::Ones();  ///< (length / 2, width / 2)
  double heading = 0.0;

  OrientedBox() = default;
  OrientedBox(const Vec2 & c, const Vec2 & half, double h);
  OrientedBox(const Pose2D & pose, const Vec2 & half);

  std::array<Vec2, 4> corners() const;
  bool contains(const Vec2 & p) const;
};

/// Separating-axis test over both boxes' edge normals. Touching counts as intersecting.
bool obb_intersects(const OrientedBox & a, const OrientedBox & b);

/// Distance along a ray (origin, unit direction) to the first hit of the box boundary,
/// or nullopt when the ray misses. Origins inside the box report 0.
std::optional<double> ray_box_distance(const Vec2 & origin, const Vec2 & direction,
                                       const OrientedBox & box);

/// Distance along a ray to a segment [a, b], or nullopt.
std::optional<double> ray_segment_distance(const Vec2 & origin, const Vec2 & direction,
                                           const Vec2 & a, const Vec2 & b);

/// Distance from a box center to its own boundary along `direction` (unit, box frame).
double box_exit_distance(const Vec2 & half_extents, const Vec2 & direction);

}  // namespace odrl

#endif  // ODRL__GEOMETRY_HPP_
