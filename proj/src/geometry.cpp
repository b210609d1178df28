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

#include "odrl/geometry.hpp"

#include "odrl/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace odrl
{

double normalize_angle(double angle)
{
  double r = std::remainder(angle, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) {
    r += 2.0 * std::numbers::pi;
  }
  return r;
}

Mat2 rotation(double heading)
{
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

Vec2 Pose2D::forward() const { return {std::cos(heading), std::sin(heading)}; }

Vec2 Pose2D::left() const { return {-std::sin(heading), std::cos(heading)}; }

Pose2D Pose2D::compose(const Pose2D & local) const
{
  const Vec2 p = from_frame(local.position(), *this);
  return {p.x(), p.y(), heading + local.heading};
}

Pose2D Pose2D::relative(const Pose2D & global) const
{
  const Vec2 p = to_frame(global.position(), *this);
  return {p.x(), p.y(), global.heading - heading};
}

Vec2 to_frame(const Vec2 & point, const Pose2D & frame)
{
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  const double dx = point.x() - frame.x;
  const double dy = point.y() - frame.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Vec2 from_frame(const Vec2 & point, const Pose2D & frame)
{
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  return {frame.x + c * point.x() - s * point.y(), frame.y + s * point.x() + c * point.y()};
}

std::vector<Vec2> to_frame(std::span<const Vec2> points, const Pose2D & frame)
{
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto & p : points) {
    out.push_back(to_frame(p, frame));
  }
  return out;
}

std::vector<Vec2> from_frame(std::span<const Vec2> points, const Pose2D & frame)
{
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto & p : points) {
    out.push_back(from_frame(p, frame));
  }
  return out;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points))
{
  if (points_.size() < 2) {
    throw Error(ErrorCode::InvalidSpec, "polyline needs at least two points");
  }
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double d = (points_[i] - points_[i - 1]).norm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::InvalidSpec, "polyline vertices must be distinct and finite");
    }
    cumulative_.push_back(cumulative_.back() + d);
  }
}

std::size_t Polyline::segment_at(double s) const
{
  if (s <= 0.0) {
    return 0;
  }
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  return std::min(idx == 0 ? 0 : idx - 1, segment_count() - 1);
}

Vec2 Polyline::point_at(double s) const
{
  const std::size_t i = segment_at(s);
  const Vec2 & a = points_[i];
  const Vec2 & b = points_[i + 1];
  const double seg = cumulative_[i + 1] - cumulative_[i];
  return a + (b - a) * ((s - cumulative_[i]) / seg);
}

double Polyline::heading_at(double s) const
{
  const std::size_t i = segment_at(std::clamp(s, 0.0, length()));
  const Vec2 d = points_[i + 1] - points_[i];
  return std::atan2(d.y(), d.x());
}

double Polyline::curvature_at(double s, double window) const
{
  const double lo = std::clamp(s - window, 0.0, length());
  const double hi = std::clamp(s + window, 0.0, length());
  if (hi - lo <= 0.0) {
    return 0.0;
  }
  return normalize_angle(heading_at(hi) - heading_at(lo)) / (hi - lo);
}

Projection project_onto_polyline(const Vec2 & p, const Polyline & line)
{
  const auto & pts = line.points();
  const auto & cum = line.cumulative_arclength();
  const std::size_t last = line.segment_count() - 1;

  Projection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_t = 0.0;
  for (std::size_t i = 0; i <= last; ++i) {
    const Vec2 d = pts[i + 1] - pts[i];
    const double len2 = d.squaredNorm();
    const double t = std::clamp((p - pts[i]).dot(d) / len2, 0.0, 1.0);
    const Vec2 foot = pts[i] + t * d;
    const double d2 = (p - foot).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_t = t;
      best.segment_index = i;
      best.foot = foot;
      best.arclength = cum[i] + t * (cum[i + 1] - cum[i]);
    }
  }

  const std::size_t i = best.segment_index;
  const Vec2 dir = (pts[i + 1] - pts[i]).normalized();
  const Vec2 rel = p - best.foot;
  const double cross = dir.x() * rel.y() - dir.y() * rel.x();
  const bool at_start = (i == 0 && best_t == 0.0);
  const bool at_end = (i == last && best_t == 1.0);
  if (at_start || at_end) {
    // Beyond the curve ends only the perpendicular component is lateral.
    best.lateral_offset = cross;
  } else {
    best.lateral_offset = (cross >= 0.0 ? 1.0 : -1.0) * std::sqrt(best_d2);
  }
  return best;
}

OrientedBox::OrientedBox(const Vec2 & c, const Vec2 & half, double h)
: center(c), half_extents(half), heading(h)
{
  if (!(half.x() > 0.0 && half.y() > 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "box half extents must be positive");
  }
}

OrientedBox::OrientedBox(const Pose2D & pose, const Vec2 & half)
: OrientedBox(pose.position(), half, pose.heading)
{
}

std::array<Vec2, 4> OrientedBox::corners() const
{
  const Mat2 r = rotation(heading);
  const Vec2 ax = r.col(0) * half_extents.x();
  const Vec2 ay = r.col(1) * half_extents.y();
  return {center + ax + ay, center - ax + ay, center - ax - ay, center + ax - ay};
}

bool OrientedBox::contains(const Vec2 & p) const
{
  const Vec2 local = rotation(heading).transpose() * (p - center);
  return std::abs(local.x()) <= half_extents.x() && std::abs(local.y()) <= half_extents.y();
}

bool obb_intersects(const OrientedBox & a, const OrientedBox & b)
{
  const Mat2 ra = rotation(a.heading);
  const Mat2 rb = rotation(b.heading);
  const Vec2 offset = b.center - a.center;
  const std::array<Vec2, 4> axes = {ra.col(0), ra.col(1), rb.col(0), rb.col(1)};
  for (const auto & axis : axes) {
    const double extent_a = a.half_extents.x() * std::abs(ra.col(0).dot(axis)) +
                            a.half_extents.y() * std::abs(ra.col(1).dot(axis));
    const double extent_b = b.half_extents.x() * std::abs(rb.col(0).dot(axis)) +
                            b.half_extents.y() * std::abs(rb.col(1).dot(axis));
    if (std::abs(offset.dot(axis)) > extent_a + extent_b) {
      return false;
    }
  }
  return true;
}

std::optional<double> ray_box_distance(const Vec2 & origin, const Vec2 & direction,
                                       const OrientedBox & box)
{
  const Mat2 rt = rotation(box.heading).transpose();
  const Vec2 o = rt * (origin - box.center);
  const Vec2 d = rt * direction;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    const double h = box.half_extents[k];
    if (std::abs(d[k]) < 1e-15) {
      if (std::abs(o[k]) > h) {
        return std::nullopt;
      }
      continue;
    }
    double t0 = (-h - o[k]) / d[k];
    double t1 = (h - o[k]) / d[k];
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_far < t_near || t_far < 0.0) {
    return std::nullopt;
  }
  return std::max(t_near, 0.0);
}

std::optional<double> ray_segment_distance(const Vec2 & origin, const Vec2 & direction,
                                           const Vec2 & a, const Vec2 & b)
{
  const Vec2 e = b - a;
  const double denom = direction.x() * e.y() - direction.y() * e.x();
  if (std::abs(denom) < 1e-15) {
    return std::nullopt;
  }
  const Vec2 w = a - origin;
  const double t = (w.x() * e.y() - w.y() * e.x()) / denom;
  const double u = (w.x() * direction.y() - w.y() * direction.x()) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) {
    return std::nullopt;
  }
  return t;
}

double box_exit_distance(const Vec2 & half_extents, const Vec2 & direction)
{
  double t = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    if (std::abs(direction[k]) > 1e-15) {
      t = std::min(t, half_extents[k] / std::abs(direction[k]));
    }
  }
  return t;
}

}  // namespace odrl
