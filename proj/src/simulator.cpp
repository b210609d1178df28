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

#include "odrl/simulator.hpp"

#include "odrl/common.hpp"
#include "odrl/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

namespace odrl
{

namespace
{

constexpr double kPi = std::numbers::pi;

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N> & values, std::string_view what)
{
  for (auto v : values) {
    if (to_string(v) == s) {
      return v;
    }
  }
  throw Error(ErrorCode::CorruptFile, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

std::uint8_t event_bit(TerminalEvent e)
{
  switch (e) {
    case TerminalEvent::Collision: return 1;
    case TerminalEvent::OffRoad: return 2;
    case TerminalEvent::OffRoute: return 4;
    case TerminalEvent::RouteComplete: return 8;
    case TerminalEvent::Timeout: return 16;
    case TerminalEvent::None: return 0;
  }
  return 0;
}

/// Road edge polyline offset by `offset` along the left normal (vertex normals averaged).
std::vector<Vec2> offset_curve(const Polyline & route, double offset)
{
  const auto & pts = route.points();
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Vec2 tangent = Vec2::Zero();
    if (i > 0) tangent += (pts[i] - pts[i - 1]).normalized();
    if (i + 1 < pts.size()) tangent += (pts[i + 1] - pts[i]).normalized();
    tangent.normalize();
    out.emplace_back(pts[i] + offset * Vec2(-tangent.y(), tangent.x()));
  }
  return out;
}

Pose2D lerp_pose(const Pose2D & a, const Pose2D & b, double f)
{
  return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y),
          a.heading + f * normalize_angle(b.heading - a.heading)};
}

Pose2D route_pose(const Polyline & route, double s, double lateral, double heading_offset = 0.0)
{
  const double h = route.heading_at(s);
  const Vec2 p = route.point_at(s) + lateral * Vec2(-std::sin(h), std::cos(h));
  return {p.x(), p.y(), h + heading_offset};
}

}  // namespace

std::string_view to_string(Suite v)
{
  return v == Suite::General ? "General" : "SafetyCritical";
}

std::string_view to_string(Archetype v)
{
  switch (v) {
    case Archetype::None: return "None";
    case Archetype::SideApproach: return "SideApproach";
    case Archetype::Frontal: return "Frontal";
    case Archetype::StationaryInLane: return "StationaryInLane";
  }
  return "None";
}

std::string_view to_string(AgentKind v)
{
  switch (v) {
    case AgentKind::Vehicle: return "Vehicle";
    case AgentKind::Pedestrian: return "Pedestrian";
    case AgentKind::StaticObstacle: return "StaticObstacle";
  }
  return "Vehicle";
}

std::string_view to_string(TerminalEvent v)
{
  switch (v) {
    case TerminalEvent::None: return "None";
    case TerminalEvent::Collision: return "Collision";
    case TerminalEvent::OffRoad: return "OffRoad";
    case TerminalEvent::OffRoute: return "OffRoute";
    case TerminalEvent::Timeout: return "Timeout";
    case TerminalEvent::RouteComplete: return "RouteComplete";
  }
  return "None";
}

Suite suite_from_string(std::string_view s)
{
  return parse_enum(s, std::array{Suite::General, Suite::SafetyCritical}, "suite");
}

Archetype archetype_from_string(std::string_view s)
{
  return parse_enum(
    s,
    std::array{Archetype::None, Archetype::SideApproach, Archetype::Frontal,
               Archetype::StationaryInLane},
    "archetype");
}

AgentKind agent_kind_from_string(std::string_view s)
{
  return parse_enum(
    s, std::array{AgentKind::Vehicle, AgentKind::Pedestrian, AgentKind::StaticObstacle},
    "agent kind");
}

TerminalEvent terminal_event_from_string(std::string_view s)
{
  return parse_enum(
    s,
    std::array{TerminalEvent::None, TerminalEvent::Collision, TerminalEvent::OffRoad,
               TerminalEvent::OffRoute, TerminalEvent::Timeout, TerminalEvent::RouteComplete},
    "terminal event");
}

// ---------------------------------------------------------------------------
// Agents and specs

Pose2D AgentScript::pose_at(double t) const
{
  if (t <= schedule.front().t) {
    return schedule.front().pose;
  }
  if (t >= schedule.back().t) {
    return schedule.back().pose;
  }
  const auto it = std::upper_bound(
    schedule.begin(), schedule.end(), t, [](double v, const TimedPose & p) { return v < p.t; });
  const auto & b = *it;
  const auto & a = *(it - 1);
  return lerp_pose(a.pose, b.pose, (t - a.t) / (b.t - a.t));
}

Vec2 AgentScript::velocity_at(double t) const
{
  if (schedule.size() < 2 || t < schedule.front().t || t >= schedule.back().t) {
    return Vec2::Zero();
  }
  const auto it = std::upper_bound(
    schedule.begin(), schedule.end(), t, [](double v, const TimedPose & p) { return v < p.t; });
  const auto & b = *it;
  const auto & a = *(it - 1);
  return (b.pose.position() - a.pose.position()) / (b.t - a.t);
}

void ScenarioSpec::validate() const
{
  if (suite == Suite::SafetyCritical && archetype == Archetype::None) {
    throw Error(ErrorCode::InvalidSpec, id + ": safety-critical scenario needs an archetype");
  }
  if (suite == Suite::General && archetype != Archetype::None) {
    throw Error(ErrorCode::InvalidSpec, id + ": general scenario cannot carry an archetype");
  }
  if (max_steps < 1) {
    throw Error(ErrorCode::InvalidSpec, id + ": max_steps must be >= 1");
  }
  if (!(road_halfwidth > 0.0)) {
    throw Error(ErrorCode::InvalidSpec, id + ": road_halfwidth must be positive");
  }
  if (!(initial_speed >= 0.0) || !std::isfinite(initial_speed)) {
    throw Error(ErrorCode::InvalidSpec, id + ": initial speed must be finite and >= 0");
  }
  for (const auto & agent : agents) {
    if (agent.schedule.empty()) {
      throw Error(ErrorCode::InvalidSpec, id + ": agent without schedule");
    }
    if (agent.kind == AgentKind::StaticObstacle && agent.schedule.size() != 1) {
      throw Error(ErrorCode::InvalidSpec, id + ": static obstacle schedule must have one entry");
    }
    if (!(agent.half_extents.x() > 0.0 && agent.half_extents.y() > 0.0)) {
      throw Error(ErrorCode::InvalidSpec, id + ": agent extents must be positive");
    }
    for (std::size_t k = 1; k < agent.schedule.size(); ++k) {
      if (!(agent.schedule[k].t > agent.schedule[k - 1].t)) {
        throw Error(ErrorCode::InvalidSpec, id + ": schedule timestamps must increase");
      }
    }
  }
}

ScenarioSpec ScenarioSpec::without_adversaries() const
{
  ScenarioSpec out = *this;
  std::erase_if(out.agents, [](const AgentScript & a) { return a.adversarial; });
  return out;
}

// ---------------------------------------------------------------------------
// Events

void EventSet::add(TerminalEvent e) { bits_ |= event_bit(e); }

bool EventSet::has(TerminalEvent e) const { return (bits_ & event_bit(e)) != 0; }

TerminalEvent EventSet::primary() const
{
  for (auto e : {TerminalEvent::Collision, TerminalEvent::OffRoad, TerminalEvent::OffRoute,
                 TerminalEvent::RouteComplete, TerminalEvent::Timeout}) {
    if (has(e)) {
      return e;
    }
  }
  return TerminalEvent::None;
}

// ---------------------------------------------------------------------------
// Observation

Eigen::VectorXd Observation::flatten() const
{
  Eigen::VectorXd v(static_cast<Eigen::Index>(rays.size() + 1 + route_features.size() +
                                              nearest_agents.size()));
  Eigen::Index k = 0;
  for (double r : rays) v[k++] = r;
  v[k++] = ego_speed;
  for (double f : route_features) v[k++] = f;
  for (double a : nearest_agents) v[k++] = a;
  return v;
}

Observation Observation::unflatten(const Eigen::Ref<const Eigen::VectorXd> & v, const SimParams & p)
{
  if (v.size() != p.observation_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "observation vector has wrong dimension");
  }
  Observation o;
  Eigen::Index k = 0;
  o.rays.assign(v.data(), v.data() + p.ray_count);
  k += p.ray_count;
  o.ego_speed = v[k++];
  for (auto & f : o.route_features) f = v[k++];
  o.nearest_agents.assign(v.data() + k, v.data() + v.size());
  return o;
}

// ---------------------------------------------------------------------------
// World dynamics

OrientedBox ego_footprint(const WorldState & world, const SimParams & params)
{
  return {world.ego_pose, params.ego_half_extents};
}

Projection ego_projection(const ScenarioSpec & spec, const WorldState & world)
{
  return project_onto_polyline(world.ego_pose.position(), spec.route);
}

WorldState build_world(const ScenarioSpec & spec, const SimParams & params)
{
  (void)params;
  spec.validate();
  WorldState w;
  const double h = spec.route.heading_at(0.0);
  const Vec2 start = spec.route.points().front();
  w.ego_pose = Pose2D(start.x(), start.y(), h);
  w.ego_speed = std::min(spec.initial_speed, params.v_max);
  w.step_index = 0;
  w.agents.reserve(spec.agents.size());
  for (const auto & agent : spec.agents) {
    w.agents.push_back(agent.pose_at(0.0));
  }
  w.max_arclength = 0.0;
  return w;
}

EventSet detect_events(const ScenarioSpec & spec, const WorldState & world,
                       const SimParams & params)
{
  EventSet events;
  const OrientedBox ego = ego_footprint(world, params);
  for (std::size_t i = 0; i < spec.agents.size(); ++i) {
    if (obb_intersects(ego, OrientedBox(world.agents[i], spec.agents[i].half_extents))) {
      events.add(TerminalEvent::Collision);
      break;
    }
  }
  const Projection proj = ego_projection(spec, world);
  const double lateral = std::abs(proj.lateral_offset);
  if (lateral > spec.road_halfwidth) {
    events.add(TerminalEvent::OffRoad);
  }
  if (lateral > params.offroute_factor * spec.road_halfwidth) {
    events.add(TerminalEvent::OffRoute);
  }
  if (proj.arclength >= params.route_complete_fraction * spec.route.length()) {
    events.add(TerminalEvent::RouteComplete);
  }
  if (world.step_index >= spec.max_steps) {
    events.add(TerminalEvent::Timeout);
  }
  return events;
}

StepResult step(const ScenarioSpec & spec, const WorldState & world, const Trajectory & action,
                const SimParams & params)
{
  if (world.done) {
    throw Error(ErrorCode::SteppedTerminal, "step called on a finished world");
  }
  if (action.horizon() < 1 || !action.all_finite()) {
    throw Error(ErrorCode::LengthMismatch, "action needs at least one finite waypoint");
  }

  const double dt = params.dt;
  const Vec2 target = action.point(0);
  const double dist = target.norm();

  double yaw_change = 0.0;
  double speed = 0.0;
  if (dist > 1e-9) {
    const double max_turn = params.omega_max * dt;
    yaw_change = std::clamp(std::atan2(target.y(), target.x()), -max_turn, max_turn);
    speed = std::min(dist / dt, params.v_max);
  }

  StepResult out;
  WorldState & next = out.world;
  next = world;
  const double heading = world.ego_pose.heading + yaw_change;
  next.ego_pose = Pose2D(world.ego_pose.x + speed * dt * std::cos(heading),
                         world.ego_pose.y + speed * dt * std::sin(heading), heading);
  next.ego_accel = (speed - world.ego_speed) / dt;
  next.ego_speed = speed;
  next.ego_yaw_rate = yaw_change / dt;
  next.step_index = world.step_index + 1;

  const double t0 = world.time(params);
  const double t1 = next.time(params);
  for (std::size_t i = 0; i < spec.agents.size(); ++i) {
    next.agents[i] = spec.agents[i].pose_at(t1);
  }

  // Intermediate sweeps keep fast closing agents from tunnelling between control steps.
  for (int k = 1; k < params.collision_substeps; ++k) {
    const double f = static_cast<double>(k) / params.collision_substeps;
    const Pose2D ego_mid(world.ego_pose.x + f * (next.ego_pose.x - world.ego_pose.x),
                         world.ego_pose.y + f * (next.ego_pose.y - world.ego_pose.y),
                         world.ego_pose.heading + f * yaw_change);
    const OrientedBox ego_box(ego_mid, params.ego_half_extents);
    for (const auto & agent : spec.agents) {
      if (obb_intersects(ego_box, agent.footprint_at(t0 + f * dt))) {
        out.events.add(TerminalEvent::Collision);
        break;
      }
    }
    if (out.events.has(TerminalEvent::Collision)) {
      break;
    }
  }

  const Projection proj = ego_projection(spec, next);
  next.max_arclength = std::max(world.max_arclength, proj.arclength);
  out.events |= detect_events(spec, next, params);
  if (!out.events.empty()) {
    next.done = true;
    next.terminal_event = out.events.primary();
  }
  return out;
}

Observation observe(const ScenarioSpec & spec, const WorldState & world, const SimParams & params)
{
  Observation obs;
  const Pose2D & ego = world.ego_pose;
  const Vec2 origin = ego.position();
  const double reach = params.ray_max + params.ego_half_extents.norm();

  // Road edge segments that can be hit within range.
  std::vector<std::pair<Vec2, Vec2>> edges;
  for (double side : {1.0, -1.0}) {
    const auto curve = offset_curve(spec.route, side * spec.road_halfwidth);
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      const double seg = (curve[i + 1] - curve[i]).norm();
      if ((curve[i] - origin).norm() <= reach + seg) {
        edges.emplace_back(curve[i], curve[i + 1]);
      }
    }
  }
  std::vector<OrientedBox> boxes;
  boxes.reserve(spec.agents.size());
  for (std::size_t i = 0; i < spec.agents.size(); ++i) {
    boxes.emplace_back(world.agents[i], spec.agents[i].half_extents);
  }

  obs.rays.resize(static_cast<std::size_t>(params.ray_count));
  for (int r = 0; r < params.ray_count; ++r) {
    const double local_angle = 2.0 * kPi * r / params.ray_count;
    const Vec2 local_dir(std::cos(local_angle), std::sin(local_angle));
    const Vec2 dir(std::cos(ego.heading + local_angle), std::sin(ego.heading + local_angle));
    double hit = std::numeric_limits<double>::infinity();
    for (const auto & box : boxes) {
      if (auto d = ray_box_distance(origin, dir, box)) {
        hit = std::min(hit, *d);
      }
    }
    for (const auto & [a, b] : edges) {
      if (auto d = ray_segment_distance(origin, dir, a, b)) {
        hit = std::min(hit, *d);
      }
    }
    const double clearance = hit - box_exit_distance(params.ego_half_extents, local_dir);
    obs.rays[static_cast<std::size_t>(r)] = std::clamp(clearance, 0.0, params.ray_max);
  }

  obs.ego_speed = world.ego_speed;

  const Projection proj = ego_projection(spec, world);
  obs.route_features[0] = proj.lateral_offset;
  obs.route_features[1] = normalize_angle(ego.heading - spec.route.heading_at(proj.arclength));
  obs.route_features[2] = spec.route.curvature_at(proj.arclength + 5.0);
  obs.route_features[3] = spec.route.curvature_at(proj.arclength + 10.0);
  obs.route_features[4] = spec.route.curvature_at(proj.arclength + 20.0);

  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    const double d = (world.agents[i].position() - origin).norm();
    if (d <= params.ray_max) {
      order.emplace_back(d, i);
    }
  }
  std::sort(order.begin(), order.end());
  obs.nearest_agents.assign(static_cast<std::size_t>(4 * params.max_agents), 0.0);
  const Vec2 ego_velocity = world.ego_speed * ego.forward();
  const double t = world.time(params);
  const Mat2 rt = rotation(ego.heading).transpose();
  for (std::size_t k = 0; k < order.size() && k < static_cast<std::size_t>(params.max_agents); ++k) {
    const std::size_t i = order[k].second;
    const Vec2 rel = to_frame(world.agents[i].position(), ego);
    const Vec2 vel = rt * (spec.agents[i].velocity_at(t) - ego_velocity);
    obs.nearest_agents[4 * k + 0] = rel.x();
    obs.nearest_agents[4 * k + 1] = rel.y();
    obs.nearest_agents[4 * k + 2] = vel.x();
    obs.nearest_agents[4 * k + 3] = vel.y();
  }
  return obs;
}

// ---------------------------------------------------------------------------
// Scenario generation

namespace
{

Polyline curvy_route(Rng & rng, double length)
{
  constexpr double kSpacing = 2.0;
  double heading = rng.uniform(-kPi, kPi);
  Vec2 p = Vec2::Zero();
  std::vector<Vec2> pts{p};
  double travelled = 0.0;
  while (travelled < length) {
    const double seg_len = rng.uniform(15.0, 35.0);
    const double curvature = rng.uniform() < 0.4 ? 0.0 : rng.uniform(-1.0 / 30.0, 1.0 / 30.0);
    for (double s = 0.0; s < seg_len && travelled < length; s += kSpacing) {
      heading += curvature * kSpacing;
      p += kSpacing * Vec2(std::cos(heading), std::sin(heading));
      pts.push_back(p);
      travelled += kSpacing;
    }
  }
  return Polyline(std::move(pts));
}

Polyline straight_route(Rng & rng, double length)
{
  const double heading = rng.uniform(-kPi, kPi);
  const Vec2 dir(std::cos(heading), std::sin(heading));
  std::vector<Vec2> pts;
  const int n = static_cast<int>(std::ceil(length / 10.0));
  for (int i = 0; i <= n; ++i) {
    pts.push_back(dir * (length * i / n));
  }
  return Polyline(std::move(pts));
}

/// Vehicle travelling along the route at constant speed; negative speed drives against it.
AgentScript route_follower(const Polyline & route, double s0, double lateral, double speed,
                           double duration, AgentKind kind, const Vec2 & half)
{
  AgentScript agent;
  agent.kind = kind;
  agent.half_extents = half;
  const double heading_offset = speed < 0.0 ? kPi : 0.0;
  for (double t = 0.0; t <= duration + 1e-9; t += 1.0) {
    agent.schedule.push_back({t, route_pose(route, s0 + speed * t, lateral, heading_offset)});
  }
  return agent;
}

double nominal_arrival_time(double distance, double v0, const SuiteParams & p)
{
  constexpr double kAccel = 1.5;
  const double dv = std::max(0.0, p.nominal_speed - v0);
  return distance / p.nominal_speed + dv * dv / (2.0 * kAccel * p.nominal_speed);
}

ScenarioSpec general_scenario(std::uint64_t seed, int index, const SuiteParams & p)
{
  Rng rng(seed);
  ScenarioSpec spec;
  spec.id = "general-" + std::to_string(index);
  spec.suite = Suite::General;
  spec.archetype = Archetype::None;
  spec.seed = seed;
  spec.road_halfwidth = p.road_halfwidth;
  spec.route = curvy_route(rng, rng.uniform(90.0, 140.0));
  spec.initial_speed = rng.uniform(4.5, 6.5);
  const double length = spec.route.length();
  spec.max_steps = static_cast<int>(std::ceil(length / (p.min_average_speed * 0.5)));
  const double duration = spec.max_steps * 0.5 + 5.0;

  const Vec2 car(2.25, 1.0);
  bool has_lead = false;
  bool has_oncoming = false;
  const auto count = static_cast<int>(rng.below(4));
  for (int k = 0; k < count; ++k) {
    auto type = rng.below(4);
    if ((type == 1 && has_lead) || (type == 2 && has_oncoming)) {
      type = 0;
    }
    switch (type) {
      case 1: {
        has_lead = true;
        spec.agents.push_back(route_follower(spec.route, rng.uniform(18.0, 35.0),
                                             rng.uniform(-0.2, 0.2), rng.uniform(3.5, 5.5),
                                             duration, AgentKind::Vehicle, car));
        break;
      }
      case 2: {
        has_oncoming = true;
        spec.agents.push_back(route_follower(spec.route, rng.uniform(50.0, length + 20.0),
                                             rng.uniform(2.9, 3.4), -rng.uniform(4.0, 7.0),
                                             duration, AgentKind::Vehicle, car));
        break;
      }
      case 3: {
        const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
        spec.agents.push_back(route_follower(spec.route, rng.uniform(10.0, length),
                                             side * rng.uniform(5.0, 6.0), 1.2, duration,
                                             AgentKind::Pedestrian, Vec2(0.4, 0.4)));
        break;
      }
      default: {
        AgentScript parked;
        parked.kind = AgentKind::StaticObstacle;
        parked.half_extents = car;
        parked.schedule.push_back(
          {0.0, route_pose(spec.route, rng.uniform(20.0, length - 10.0), -rng.uniform(3.3, 3.9))});
        spec.agents.push_back(std::move(parked));
        break;
      }
    }
  }
  return spec;
}

ScenarioSpec safety_scenario(std::uint64_t seed, int index, Archetype archetype,
                             const SuiteParams & p)
{
  Rng rng(seed);
  ScenarioSpec spec;
  spec.id = "safety-" + std::to_string(index);
  spec.suite = Suite::SafetyCritical;
  spec.archetype = archetype;
  spec.seed = seed;
  spec.road_halfwidth = p.road_halfwidth;
  spec.route = straight_route(rng, rng.uniform(90.0, 110.0));
  spec.initial_speed = rng.uniform(4.5, 6.5);
  const double length = spec.route.length();
  spec.max_steps = static_cast<int>(std::ceil(length / (p.min_average_speed * 0.5)));
  const double duration = spec.max_steps * 0.5 + 5.0;
  const double heading = spec.route.heading_at(0.0);
  const Vec2 left(-std::sin(heading), std::cos(heading));

  AgentScript adversary;
  adversary.adversarial = true;
  adversary.kind = AgentKind::Vehicle;
  adversary.half_extents = Vec2(2.25, 1.0);
  switch (archetype) {
    case Archetype::SideApproach: {
      const double crossing = rng.uniform(25.0, 40.0);
      const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
      const double speed = rng.uniform(4.0, 6.0);
      const double t_cross =
        nominal_arrival_time(crossing, spec.initial_speed, p) + rng.uniform(-0.6, 0.6);
      const Vec2 on_route = spec.route.point_at(crossing);
      const double agent_heading = heading - side * kPi / 2.0;
      const Vec2 start = on_route + left * (side * speed * t_cross);
      const Vec2 end = on_route - left * (side * speed * (duration - t_cross));
      adversary.schedule.push_back({0.0, Pose2D(start.x(), start.y(), agent_heading)});
      adversary.schedule.push_back({duration, Pose2D(end.x(), end.y(), agent_heading)});
      break;
    }
    case Archetype::Frontal: {
      const double s0 = rng.uniform(55.0, 75.0);
      const double lateral = rng.uniform(-0.3, 1.0);
      const double speed = rng.uniform(4.0, 6.5);
      adversary.schedule.push_back({0.0, route_pose(spec.route, s0, lateral, kPi)});
      // Oncoming in the ego lane, braking to a halt short of the route start so that an
      // ego that never moves is not struck.
      const double s_hold = 12.0;
      adversary.schedule.push_back(
        {(s0 - s_hold) / speed, route_pose(spec.route, s_hold, lateral, kPi)});
      adversary.schedule.push_back({duration, route_pose(spec.route, s_hold, lateral, kPi)});
      break;
    }
    case Archetype::StationaryInLane:
    default: {
      adversary.kind = AgentKind::StaticObstacle;
      adversary.schedule.push_back({0.0, route_pose(spec.route, rng.uniform(28.0, 45.0),
                                                    rng.uniform(-0.6, 0.6),
                                                    rng.uniform(-0.1, 0.1))});
      break;
    }
  }
  spec.agents.push_back(std::move(adversary));
  return spec;
}

}  // namespace

std::vector<ScenarioSpec> generate_suite(Suite suite, int n, std::uint64_t seed,
                                         const SuiteParams & params)
{
  if (n < 1) {
    throw Error(ErrorCode::InvalidSpec, "suite size must be >= 1");
  }
  Rng master(seed);
  std::vector<ScenarioSpec> out;
  out.reserve(static_cast<std::size_t>(n));
  constexpr std::array kCycle{Archetype::SideApproach, Archetype::Frontal,
                              Archetype::StationaryInLane};
  for (int i = 0; i < n; ++i) {
    const std::uint64_t scenario_seed = master.next_u64();
    if (suite == Suite::General) {
      out.push_back(general_scenario(scenario_seed, i, params));
    } else {
      out.push_back(safety_scenario(scenario_seed, i, kCycle[static_cast<std::size_t>(i) % 3],
                                    params));
    }
    out.back().validate();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const ScenarioSpec & spec)
{
  nlohmann::json route = nlohmann::json::array();
  for (const auto & p : spec.route.points()) {
    route.push_back({p.x(), p.y()});
  }
  nlohmann::json agents = nlohmann::json::array();
  for (const auto & a : spec.agents) {
    nlohmann::json schedule = nlohmann::json::array();
    for (const auto & tp : a.schedule) {
      schedule.push_back({tp.t, tp.pose.x, tp.pose.y, tp.pose.heading});
    }
    agents.push_back({{"kind", to_string(a.kind)},
                      {"half_extents", {a.half_extents.x(), a.half_extents.y()}},
                      {"adversarial", a.adversarial},
                      {"schedule", schedule}});
  }
  return {{"id", spec.id},
          {"suite", to_string(spec.suite)},
          {"archetype", to_string(spec.archetype)},
          {"seed", spec.seed},
          {"road_halfwidth", spec.road_halfwidth},
          {"max_steps", spec.max_steps},
          {"initial_speed", spec.initial_speed},
          {"route", route},
          {"agents", agents}};
}

ScenarioSpec scenario_from_json(const nlohmann::json & j)
{
  try {
    ScenarioSpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.suite = suite_from_string(j.at("suite").get<std::string>());
    spec.archetype = archetype_from_string(j.at("archetype").get<std::string>());
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.road_halfwidth = j.at("road_halfwidth").get<double>();
    spec.max_steps = j.at("max_steps").get<int>();
    spec.initial_speed = j.at("initial_speed").get<double>();
    std::vector<Vec2> pts;
    for (const auto & p : j.at("route")) {
      pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    spec.route = Polyline(std::move(pts));
    for (const auto & a : j.at("agents")) {
      AgentScript agent;
      agent.kind = agent_kind_from_string(a.at("kind").get<std::string>());
      agent.half_extents =
        Vec2(a.at("half_extents").at(0).get<double>(), a.at("half_extents").at(1).get<double>());
      agent.adversarial = a.at("adversarial").get<bool>();
      for (const auto & tp : a.at("schedule")) {
        agent.schedule.push_back({tp.at(0).get<double>(),
                                  Pose2D(tp.at(1).get<double>(), tp.at(2).get<double>(),
                                         tp.at(3).get<double>())});
      }
      spec.agents.push_back(std::move(agent));
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorCode::CorruptFile, std::string("scenario json: ") + e.what());
  }
}

nlohmann::json to_json(const ScenarioSuite & suite)
{
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto & s : suite.scenarios) {
    scenarios.push_back(to_json(s));
  }
  return {{"format", "odrl-suite"},
          {"version", 1},
          {"suite", to_string(suite.suite)},
          {"seed", suite.seed},
          {"count", suite.scenarios.size()},
          {"scenarios", scenarios}};
}

ScenarioSuite suite_from_json(const nlohmann::json & j)
{
  try {
    if (j.at("format").get<std::string>() != "odrl-suite") {
      throw Error(ErrorCode::CorruptFile, "not a scenario suite file");
    }
    ScenarioSuite suite;
    suite.suite = suite_from_string(j.at("suite").get<std::string>());
    suite.seed = j.at("seed").get<std::uint64_t>();
    for (const auto & s : j.at("scenarios")) {
      suite.scenarios.push_back(scenario_from_json(s));
    }
    return suite;
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorCode::CorruptFile, std::string("suite json: ") + e.what());
  }
}

void write_suite(const std::filesystem::path & path, const ScenarioSuite & suite)
{
  write_text_file(path, to_json(suite).dump(1) + "\n");
}

ScenarioSuite read_suite(const std::filesystem::path & path)
{
  return suite_from_json(parse_json_file(path));
}

}  // namespace odrl
