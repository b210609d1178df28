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

#ifndef ODRL__SIMULATOR_HPP_
#define ODRL__SIMULATOR_HPP_

#include "odrl/geometry.hpp"
#include "odrl/trajectory.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace odrl
{

enum class Suite { General, SafetyCritical };
enum class Archetype { None, SideApproach, Frontal, StationaryInLane };
enum class AgentKind { Vehicle, Pedestrian, StaticObstacle };
enum class TerminalEvent { None, Collision, OffRoad, OffRoute, Timeout, RouteComplete };

std::string_view to_string(Suite v);
std::string_view to_string(Archetype v);
std::string_view to_string(AgentKind v);
std::string_view to_string(TerminalEvent v);
Suite suite_from_string(std::string_view s);
Archetype archetype_from_string(std::string_view s);
AgentKind agent_kind_from_string(std::string_view s);
TerminalEvent terminal_event_from_string(std::string_view s);

/// Simulator constants shared by every scenario.
struct SimParams
{
  double dt = 0.5;
  int horizon = 6;  ///< waypoints per trajectory action
  double v_max = 15.0;
  double omega_max = 1.0;
  int ray_count = 16;
  double ray_max = 30.0;
  int max_agents = 4;
  Vec2 ego_half_extents{2.25, 1.0};
  double route_complete_fraction = 0.99;
  double offroute_factor = 2.0;
  /// Interpolated collision checks per step, the last one being the post-step state.
  int collision_substeps = 4;

  int observation_dim() const { return ray_count + 1 + 5 + 4 * max_agents; }
};

/// Knobs for procedural scenario generation.
struct SuiteParams
{
  double nominal_speed = 6.0;  ///< ego cruise speed assumed when timing adversaries
  double road_halfwidth = 4.0;
  double min_average_speed = 2.5;  ///< sets max_steps = route length / (this * dt)
};

struct TimedPose
{
  double t = 0.0;
  Pose2D pose;
  bool operator==(const TimedPose &) const = default;
};

struct AgentScript
{
  AgentKind kind = AgentKind::Vehicle;
  Vec2 half_extents{2.25, 1.0};
  std::vector<TimedPose> schedule;
  bool adversarial = false;  ///< inserted hazard; absent from expert logs

  const Pose2D & initial_pose() const { return schedule.front().pose; }
  /// Linear interpolation of the schedule, holding the end poses outside its span.
  Pose2D pose_at(double t) const;
  Vec2 velocity_at(double t) const;
  OrientedBox footprint_at(double t) const { return {pose_at(t), half_extents}; }

  bool operator==(const AgentScript & other) const
  {
    return kind == other.kind && half_extents == other.half_extents &&
           schedule == other.schedule && adversarial == other.adversarial;
  }
};

struct ScenarioSpec
{
  std::string id;
  Suite suite = Suite::General;
  Archetype archetype = Archetype::None;
  Polyline route{{Vec2(0.0, 0.0), Vec2(1.0, 0.0)}};
  double road_halfwidth = 4.0;
  std::vector<AgentScript> agents;
  int max_steps = 1;
  std::uint64_t seed = 0;
  double initial_speed = 0.0;

  /// Throws Error(InvalidSpec) when an invariant is violated.
  void validate() const;
  /// Same scenario with the adversarial agents removed.
  ScenarioSpec without_adversaries() const;

  bool operator==(const ScenarioSpec &) const = default;
};

/// Bit set of events detected on one state.
class EventSet
{
public:
  EventSet() = default;

  void add(TerminalEvent e);
  bool has(TerminalEvent e) const;
  bool empty() const { return bits_ == 0; }
  std::uint8_t bits() const { return bits_; }
  /// Collision > OffRoad > OffRoute > RouteComplete > Timeout.
  TerminalEvent primary() const;

  EventSet & operator|=(const EventSet & o)
  {
    bits_ |= o.bits_;
    return *this;
  }
  bool operator==(const EventSet &) const = default;

private:
  std::uint8_t bits_ = 0;
};

struct WorldState
{
  Pose2D ego_pose;
  double ego_speed = 0.0;
  double ego_accel = 0.0;
  double ego_yaw_rate = 0.0;
  int step_index = 0;
  std::vector<Pose2D> agents;
  bool done = false;
  TerminalEvent terminal_event = TerminalEvent::None;
  double max_arclength = 0.0;  ///< furthest route projection reached

  double time(const SimParams & params) const { return step_index * params.dt; }
  bool operator==(const WorldState &) const = default;
};

struct Observation
{
  std::vector<double> rays;
  double ego_speed = 0.0;
  /// lateral offset, heading error, curvature at +5, +10, +20 m
  std::array<double, 5> route_features{};
  /// (dx, dy, vx, vy) per agent in the ego frame, nearest first, zero padded
  std::vector<double> nearest_agents;

  Eigen::VectorXd flatten() const;
  static Observation unflatten(const Eigen::Ref<const Eigen::VectorXd> & v, const SimParams & p);
  bool operator==(const Observation &) const = default;
};

struct StepResult
{
  WorldState world;
  EventSet events;
};

WorldState build_world(const ScenarioSpec & spec, const SimParams & params = {});

/// Advances one control step by tracking the first waypoint of `action`.
/// Throws Error(SteppedTerminal) on a finished world.
StepResult step(const ScenarioSpec & spec, const WorldState & world, const Trajectory & action,
                const SimParams & params = {});

Observation observe(const ScenarioSpec & spec, const WorldState & world,
                    const SimParams & params = {});

EventSet detect_events(const ScenarioSpec & spec, const WorldState & world,
                       const SimParams & params = {});

/// Route projection of the ego position.
Projection ego_projection(const ScenarioSpec & spec, const WorldState & world);

OrientedBox ego_footprint(const WorldState & world, const SimParams & params);

std::vector<ScenarioSpec> generate_suite(Suite suite, int n, std::uint64_t seed,
                                         const SuiteParams & params = {});

nlohmann::json to_json(const ScenarioSpec & spec);
ScenarioSpec scenario_from_json(const nlohmann::json & j);

struct ScenarioSuite
{
  Suite suite = Suite::General;
  std::uint64_t seed = 0;
  std::vector<ScenarioSpec> scenarios;
};

nlohmann::json to_json(const ScenarioSuite & suite);
ScenarioSuite suite_from_json(const nlohmann::json & j);
void write_suite(const std::filesystem::path & path, const ScenarioSuite & suite);
ScenarioSuite read_suite(const std::filesystem::path & path);

}  // namespace odrl

#endif  // ODRL__SIMULATOR_HPP_
