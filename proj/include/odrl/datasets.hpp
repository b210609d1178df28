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

#ifndef ODRL__DATASETS_HPP_
#define ODRL__DATASETS_HPP_

#include "odrl/pseudo_expert.hpp"
#include "odrl/simulator.hpp"
#include "odrl/vocabulary.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace odrl
{

/// Tuning of the rule-based route follower that stands in for a pretrained driving policy.
struct ExpertConfig
{
  double cruise_speed = 6.0;
  double accel = 1.5;          ///< m/s^2 toward cruise speed
  double lookahead = 15.0;     ///< obstacles further than this gap are ignored
  double stop_margin = 1.5;    ///< bumper gap kept when stopping
  double corridor_margin = 0.3;
  double lateral_convergence = 10.0;  ///< arclength over which lateral offset decays
  double max_decel = 4.0;     ///< comfort braking limit

  bool operator==(const ExpertConfig &) const = default;
};

/// Plans T waypoints along the route, slowing for agents in the ego corridor.
Trajectory scripted_expert(const ScenarioSpec & spec, const WorldState & world,
                           const SimParams & params = {}, const ExpertConfig & cfg = {});

enum class BehaviorKind { NoisyExpert, Random };

struct BehaviorPolicySpec
{
  BehaviorKind kind = BehaviorKind::NoisyExpert;
  double sigma = 0.0;
  double weight = 1.0;

  std::string label() const;
  bool operator==(const BehaviorPolicySpec &) const = default;
};

/// Parses "noisy0.2:1,noisy0.4:1,random:1"; weights are normalized to sum to one.
std::vector<BehaviorPolicySpec> parse_mixture(std::string_view text);
std::string format_mixture(std::span<const BehaviorPolicySpec> mixture);

int behavior_action(const BehaviorPolicySpec & policy, const ScenarioSpec & spec,
                    const WorldState & world, const ActionVocabulary & vocab, Rng & rng,
                    const SimParams & params = {}, const ExpertConfig & cfg = {});

struct RewardConfig
{
  double w_imitation = 0.1;
  double w_event = 1.0;
  double c_collision = -10.0;
  double c_offroad = -10.0;
  double c_offroute = -10.0;

  void validate() const;
  bool operator==(const RewardConfig &) const = default;
};

/// Negative mean squared waypoint distance.
double imitation_reward(const Trajectory & behavior, const Trajectory & reference);

double event_penalty(const EventSet & events, const RewardConfig & cfg);

struct Transition
{
  Eigen::VectorXd obs;       ///< flattened Observation
  int action_index = 0;
  double reward = 0.0;
  Eigen::VectorXd next_obs;
  std::uint8_t done = 0;
  int pseudo_expert_index = -1;  ///< -1 when unlabeled
  std::uint32_t episode_id = 0;
  std::uint32_t step_index = 0;
  std::uint16_t policy_tag = 0;  ///< index into the mixture

  bool operator==(const Transition & o) const
  {
    return obs.size() == o.obs.size() && obs == o.obs && action_index == o.action_index &&
           reward == o.reward && next_obs.size() == o.next_obs.size() && next_obs == o.next_obs &&
           done == o.done && pseudo_expert_index == o.pseudo_expert_index &&
           episode_id == o.episode_id && step_index == o.step_index && policy_tag == o.policy_tag;
  }
};

struct MixtureEntry
{
  BehaviorPolicySpec policy;
  std::uint64_t episodes = 0;
  std::uint64_t transitions = 0;
  bool operator==(const MixtureEntry &) const = default;
};

struct DatasetManifest
{
  std::vector<MixtureEntry> mixture;
  RewardConfig reward;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> suite_seeds;
  std::uint64_t episodes = 0;
  int obs_dim = 0;
  bool operator==(const DatasetManifest &) const = default;
};

nlohmann::json to_json(const DatasetManifest & m);
DatasetManifest manifest_from_json(const nlohmann::json & j);

struct OfflineDataset
{
  std::vector<Transition> transitions;
  Digest vocabulary_hash{};
  DatasetManifest manifest;

  bool operator==(const OfflineDataset &) const = default;
};

/// Throws Error(HashMismatch) naming both digests when the dataset was built with another vocabulary.
void require_vocabulary(const OfflineDataset & dataset, const ActionVocabulary & vocab);

struct CollectConfig
{
  RewardConfig reward;
  SimParams sim;
  ExpertConfig expert;
  std::uint64_t total_episodes = 100;  ///< split across the mixture by weight
  std::uint64_t seed = 0;
};

/// Episode counts per policy by largest remainder; exact when weights divide the total.
std::vector<std::uint64_t> allocate_episodes(std::span<const BehaviorPolicySpec> mixture,
                                             std::uint64_t total);

/// Rolls out the behavior mixture and labels rewards and pseudo-expert actions.
/// `logs` maps scenario id to its clean expert log.
OfflineDataset collect(std::span<const BehaviorPolicySpec> mixture,
                       std::span<const ScenarioSpec> scenarios, const ActionVocabulary & vocab,
                       const std::map<std::string, ExpertLog> & logs, const CollectConfig & cfg);

void write_dataset(const std::filesystem::path & path, const OfflineDataset & dataset);
OfflineDataset read_dataset(const std::filesystem::path & path);
std::vector<std::uint8_t> serialize_dataset(const OfflineDataset & dataset);
OfflineDataset deserialize_dataset(std::span<const std::uint8_t> bytes);
/// One JSON object per transition, for debugging.
std::string dataset_to_jsonl(const OfflineDataset & dataset);

/// Drives the scripted expert through the scenario without its adversaries and
/// keeps the executed poses, running past the route end so the last futures are complete.
ExpertLog record_expert_log(const ScenarioSpec & spec, const SimParams & params = {},
                            const ExpertConfig & cfg = {});

/// Expert plans used to fit the vocabulary: log futures plus plans made during expert
/// rollouts from perturbed start states (`perturbations` per scenario).
std::vector<Trajectory> expert_trajectory_corpus(std::span<const ScenarioSpec> scenarios,
                                                 const SimParams & params,
                                                 const ExpertConfig & cfg, int perturbations,
                                                 std::uint64_t seed);

}  // namespace odrl

#endif  // ODRL__DATASETS_HPP_
