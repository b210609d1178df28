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

#ifndef ODRL__PSEUDO_EXPERT_HPP_
#define ODRL__PSEUDO_EXPERT_HPP_

#include "odrl/simulator.hpp"
#include "odrl/trajectory.hpp"
#include "odrl/vocabulary.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace odrl
{

/// Clean expert demonstration of one scenario.
struct ExpertLog
{
  std::string scenario_id;
  std::vector<TimedPose> waypoints;
  /// Future of each waypoint, expressed in that waypoint's frame.
  std::vector<Trajectory> futures;

  int horizon() const { return futures.empty() ? 0 : static_cast<int>(futures.front().horizon()); }

  /// Throws Error(InvalidSpec) on fewer than two waypoints or ragged futures.
  void validate() const;

  bool operator==(const ExpertLog &) const = default;
};

struct Reference
{
  Trajectory trajectory;
  std::size_t first = 0;   ///< lower log index of the interpolation pair
  std::size_t second = 0;  ///< upper log index
  double lambda = 0.0;     ///< weight of `second`
  bool degenerate = false; ///< the pair coincided; `first`'s future was used verbatim
};

/// Interpolates the futures of the two nearest adjacent log waypoints in the ego frame.
Reference interpolate_reference_detailed(const Pose2D & ego, const ExpertLog & log);

inline Trajectory interpolate_reference(const Pose2D & ego, const ExpertLog & log)
{
  return interpolate_reference_detailed(ego, log).trajectory;
}

struct PseudoExpertLabel
{
  int action_index = 0;
  Trajectory reference;
  double match_distance = 0.0;  ///< squared distance between flattened trajectories
};

PseudoExpertLabel pseudo_expert_action(const Pose2D & ego, const ExpertLog & log,
                                       const ActionVocabulary & vocab);

/// Builds a log from executed poses: waypoint i keeps the next T positions as its future.
ExpertLog make_expert_log(std::string scenario_id, const std::vector<TimedPose> & poses,
                          int horizon);

nlohmann::json to_json(const ExpertLog & log);
ExpertLog expert_log_from_json(const nlohmann::json & j);
void write_expert_log(const std::filesystem::path & path, const ExpertLog & log);
ExpertLog read_expert_log(const std::filesystem::path & path);

}  // namespace odrl

#endif  // ODRL__PSEUDO_EXPERT_HPP_
