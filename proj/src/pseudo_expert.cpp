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

#include "odrl/pseudo_expert.hpp"

#include "odrl/io.hpp"

#include <algorithm>
#include <limits>

namespace odrl
{

void ExpertLog::validate() const
{
  if (waypoints.size() < 2) {
    throw Error(ErrorCode::InvalidSpec, "expert log needs at least two waypoints");
  }
  if (futures.size() != waypoints.size()) {
    throw Error(ErrorCode::InvalidSpec, "expert log needs one future per waypoint");
  }
  const auto t = futures.front().horizon();
  for (const auto & f : futures) {
    if (f.horizon() != t || t < 1 || !f.all_finite()) {
      throw Error(ErrorCode::InvalidSpec, "expert log futures must share one finite horizon");
    }
  }
}

Reference interpolate_reference_detailed(const Pose2D & ego, const ExpertLog & log)
{
  if (log.waypoints.size() < 2 || log.futures.size() != log.waypoints.size()) {
    throw Error(ErrorCode::InvalidSpec, "expert log needs at least two waypoints with futures");
  }
  const Vec2 p = ego.position();
  const std::size_t n = log.waypoints.size();

  std::size_t best = 0;
  std::size_t second = 1;
  double best_d2 = std::numeric_limits<double>::infinity();
  double second_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d2 = (log.waypoints[i].pose.position() - p).squaredNorm();
    if (d2 < best_d2) {
      second = best;
      second_d2 = best_d2;
      best = i;
      best_d2 = d2;
    } else if (d2 < second_d2) {
      second = i;
      second_d2 = d2;
    }
  }

  std::size_t partner = second;
  if (partner + 1 != best && best + 1 != partner) {
    // Globally nearest pair is not adjacent (route loops back): use the nearer log neighbour.
    if (best == 0) {
      partner = 1;
    } else if (best + 1 == n) {
      partner = best - 1;
    } else {
      const double dl = (log.waypoints[best - 1].pose.position() - p).squaredNorm();
      const double dr = (log.waypoints[best + 1].pose.position() - p).squaredNorm();
      partner = dr < dl ? best + 1 : best - 1;
    }
  }

  Reference ref;
  ref.first = std::min(best, partner);
  ref.second = std::max(best, partner);
  const TimedPose & wa = log.waypoints[ref.first];
  const TimedPose & wb = log.waypoints[ref.second];
  const Vec2 seg = wb.pose.position() - wa.pose.position();
  const double len2 = seg.squaredNorm();

  if (len2 == 0.0) {
    ref.degenerate = true;
    ref.first = ref.second = best;
    ref.lambda = 0.0;
    ref.trajectory = change_frame(log.futures[best], log.waypoints[best].pose, ego);
    return ref;
  }

  ref.lambda = std::clamp((p - wa.pose.position()).dot(seg) / len2, 0.0, 1.0);
  const Trajectory ta = change_frame(log.futures[ref.first], wa.pose, ego);
  const Trajectory tb = change_frame(log.futures[ref.second], wb.pose, ego);
  ref.trajectory = Trajectory(((1.0 - ref.lambda) * ta.points() + ref.lambda * tb.points()).eval());
  return ref;
}

PseudoExpertLabel pseudo_expert_action(const Pose2D & ego, const ExpertLog & log,
                                       const ActionVocabulary & vocab)
{
  if (log.horizon() != vocab.horizon()) {
    throw Error(ErrorCode::LengthMismatch, "expert log horizon " + std::to_string(log.horizon()) +
                                             " != vocabulary horizon " +
                                             std::to_string(vocab.horizon()));
  }
  PseudoExpertLabel label;
  label.reference = interpolate_reference(ego, log);
  const auto nearest = nearest_prototype(vocab, label.reference);
  label.action_index = nearest.index;
  label.match_distance = nearest.distance * nearest.distance;
  return label;
}

ExpertLog make_expert_log(std::string scenario_id, const std::vector<TimedPose> & poses,
                          int horizon)
{
  ExpertLog log;
  log.scenario_id = std::move(scenario_id);
  const auto n = poses.size();
  for (std::size_t i = 0; i + static_cast<std::size_t>(horizon) < n; ++i) {
    Trajectory future(horizon);
    for (int k = 0; k < horizon; ++k) {
      future.point(k) = to_frame(poses[i + 1 + static_cast<std::size_t>(k)].pose.position(),
                                 poses[i].pose);
    }
    log.waypoints.push_back(poses[i]);
    log.futures.push_back(std::move(future));
  }
  log.validate();
  return log;
}

nlohmann::json to_json(const ExpertLog & log)
{
  nlohmann::json wps = nlohmann::json::array();
  for (const auto & w : log.waypoints) {
    wps.push_back({w.t, w.pose.x, w.pose.y, w.pose.heading});
  }
  nlohmann::json futures = nlohmann::json::array();
  for (const auto & f : log.futures) {
    const auto flat = f.flat();
    futures.push_back(std::vector<double>(flat.begin(), flat.end()));
  }
  return {{"format", "odrl-expert-log"},
          {"version", 1},
          {"scenario_id", log.scenario_id},
          {"horizon", log.horizon()},
          {"waypoints", wps},
          {"futures", futures}};
}

ExpertLog expert_log_from_json(const nlohmann::json & j)
{
  try {
    if (j.at("format").get<std::string>() != "odrl-expert-log") {
      throw Error(ErrorCode::CorruptFile, "not an expert log");
    }
    ExpertLog log;
    log.scenario_id = j.at("scenario_id").get<std::string>();
    const int horizon = j.at("horizon").get<int>();
    for (const auto & w : j.at("waypoints")) {
      log.waypoints.push_back(
        {w.at(0).get<double>(), Pose2D(w.at(1).get<double>(), w.at(2).get<double>(),
                                       w.at(3).get<double>())});
    }
    for (const auto & f : j.at("futures")) {
      const auto flat = f.get<std::vector<double>>();
      if (flat.size() != static_cast<std::size_t>(2 * horizon)) {
        throw Error(ErrorCode::CorruptFile, "expert log future length mismatch");
      }
      log.futures.push_back(Trajectory::from_flat(
        Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()))));
    }
    log.validate();
    return log;
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorCode::CorruptFile, std::string("expert log: ") + e.what());
  } catch (const Error & e) {
    if (e.code() == ErrorCode::InvalidSpec) {
      throw Error(ErrorCode::CorruptFile, e.what());
    }
    throw;
  }
}

void write_expert_log(const std::filesystem::path & path, const ExpertLog & log)
{
  write_text_file(path, to_json(log).dump(1) + "\n");
}

ExpertLog read_expert_log(const std::filesystem::path & path)
{
  return expert_log_from_json(parse_json_file(path));
}

}  // namespace odrl
