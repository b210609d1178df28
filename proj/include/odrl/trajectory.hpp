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

#ifndef ODRL__TRAJECTORY_HPP_
#define ODRL__TRAJECTORY_HPP_

#include "odrl/geometry.hpp"

#include <Eigen/Core>

namespace odrl
{

/// T future waypoints in the ego frame, stored as a 2 x T matrix (one column per waypoint).
///
/// Column-major storage makes `flat()` the interleaved (x0, y0, x1, y1, ...) vector
/// used for prototype distances.
class Trajectory
{
public:
  Trajectory() = default;
  explicit Trajectory(Eigen::Index horizon) : points_(Eigen::Matrix2Xd::Zero(2, horizon)) {}
  explicit Trajectory(Eigen::Matrix2Xd points) : points_(std::move(points)) {}

  static Trajectory from_flat(const Eigen::Ref<const Eigen::VectorXd> & flat)
  {
    return Trajectory(Eigen::Map<const Eigen::Matrix2Xd>(flat.data(), 2, flat.size() / 2));
  }

  Eigen::Index horizon() const { return points_.cols(); }

  Vec2 point(Eigen::Index t) const { return points_.col(t); }
  auto point(Eigen::Index t) { return points_.col(t); }

  const Eigen::Matrix2Xd & points() const { return points_; }
  Eigen::Matrix2Xd & points() { return points_; }

  Eigen::Map<const Eigen::VectorXd> flat() const
  {
    return {points_.data(), points_.size()};
  }

  bool all_finite() const { return points_.allFinite(); }

  bool operator==(const Trajectory & other) const
  {
    return points_.cols() == other.points_.cols() && points_ == other.points_;
  }

private:
  Eigen::Matrix2Xd points_;
};

/// Re-expresses a trajectory given in frame `from` into frame `to`.
inline Trajectory change_frame(const Trajectory & traj, const Pose2D & from, const Pose2D & to)
{
  Trajectory out(traj.horizon());
  for (Eigen::Index t = 0; t < traj.horizon(); ++t) {
    out.point(t) = to_frame(from_frame(traj.point(t), from), to);
  }
  return out;
}

}  // namespace odrl

#endif  // ODRL__TRAJECTORY_HPP_
