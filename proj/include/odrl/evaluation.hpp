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

#ifndef ODRL__EVALUATION_HPP_
#define ODRL__EVALUATION_HPP_

#include "odrl/datasets.hpp"
#include "odrl/simulator.hpp"
#include "odrl/training.hpp"
#include "odrl/vocabulary.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace odrl
{

struct StepRecord
{
  int step_index = 0;
  Pose2D pose;
  double speed = 0.0;
  double accel = 0.0;
  int action_index = -1;  ///< -1 on the initial record and for non-vocabulary policies
  double route_progress = 0.0;
  std::uint8_t events = 0;  ///< EventSet bits detected on this step
  bool operator==(const StepRecord &) const = default;
};

struct EpisodeLog
{
  std::string scenario_id;
  Suite suite = Suite::General;
  Archetype archetype = Archetype::None;
  std::vector<StepRecord> steps;  ///< initial state first
  TerminalEvent terminal_event = TerminalEvent::None;
  double route_progress = 0.0;
  bool operator==(const EpisodeLog &) const = default;
};

struct PolicyDecision
{
  int action_index = -1;
  Trajectory trajectory;
};

/// Closed-loop controller; called once per step on a live world.
using ActionSelector =
  std::function<PolicyDecision(const ScenarioSpec &, const WorldState &, const Observation &)>;

/// Index of the largest logit, lowest index on ties.
int greedy_action(const Eigen::Ref<const Eigen::VectorXd> & logits);

ActionSelector checkpoint_policy(const NetworkCheckpoint & ckpt, const ActionVocabulary & vocab,
                                 const SimParams & params = {});
/// The scripted expert executing its own continuous plan.
ActionSelector scripted_expert_policy(const SimParams & params = {}, const ExpertConfig & cfg = {});
/// A behavior policy seeded per scenario so reruns repeat.
ActionSelector behavior_policy(const BehaviorPolicySpec & spec, const ActionVocabulary & vocab,
                               std::uint64_t seed, const SimParams & params = {},
                               const ExpertConfig & cfg = {});

EpisodeLog rollout(const ScenarioSpec & scenario, const ActionSelector & policy,
                   const SimParams & params = {});

/// One JSON object per step.
std::string episode_log_to_jsonl(const EpisodeLog & log);

/// Greedy rollout of the checkpoint's actor.
EpisodeLog run_episode(const NetworkCheckpoint & ckpt, const ScenarioSpec & scenario,
                       const ActionVocabulary & vocab, const SimParams & params = {});

double collision_rate(std::span<const EpisodeLog> logs);
double route_completion(std::span<const EpisodeLog> logs);

struct Jerk
{
  double longitudinal = 0.0;
  double lateral = 0.0;
};

Jerk jerk(const EpisodeLog & log, double dt);

struct UnifiedMetrics
{
  double src = 0.0;
  double jsr = 0.0;
};

UnifiedMetrics unified_metrics(double rc_general, double cr_general, double cr_safety);

struct BreakdownRow
{
  std::string scenario_id;
  Suite suite = Suite::General;
  Archetype archetype = Archetype::None;
  TerminalEvent terminal_event = TerminalEvent::None;
  double route_progress = 0.0;
  int steps = 0;
  double jerk_long = 0.0;  ///< NaN when the episode is too short
  double jerk_lat = 0.0;
  bool operator==(const BreakdownRow & o) const;
};

struct MetricsReport
{
  double cr_general = 0.0;
  double rc_general = 0.0;
  double jerk_long = 0.0;
  double jerk_lat = 0.0;
  double cr_safety = 0.0;
  double rc_safety = 0.0;
  double src = 0.0;
  double jsr = 0.0;
  std::vector<BreakdownRow> breakdown;

  std::string summary_csv() const;
  std::string breakdown_csv() const;
  bool operator==(const MetricsReport &) const = default;
};

struct Evaluation
{
  MetricsReport report;
  std::vector<EpisodeLog> general;
  std::vector<EpisodeLog> safety;
};

Evaluation evaluate_policy(const ActionSelector & policy, std::span<const ScenarioSpec> general,
                           std::span<const ScenarioSpec> safety, const SimParams & params = {});

MetricsReport evaluate(const NetworkCheckpoint & ckpt, std::span<const ScenarioSpec> general,
                       std::span<const ScenarioSpec> safety, const ActionVocabulary & vocab,
                       const SimParams & params = {});

/// Route and driven path of every episode, for external plotting.
nlohmann::json trajectory_plot_data(std::span<const ScenarioSpec> scenarios,
                                    std::span<const EpisodeLog> logs);

enum class AblationAxis { Alpha, RewardWeights, Mixture };
std::string_view to_string(AblationAxis axis);
AblationAxis ablation_axis_from_string(std::string_view s);

/// Everything a sweep point needs besides the swept value.
struct AblationContext
{
  std::vector<ScenarioSpec> train_scenarios;
  std::map<std::string, ExpertLog> logs;
  ActionVocabulary vocab;
  std::vector<BehaviorPolicySpec> mixture;
  CollectConfig collect;
  TrainConfig train;
  std::vector<ScenarioSpec> general;
  std::vector<ScenarioSpec> safety;
};

struct AblationRow
{
  std::string label;
  double alpha = 0.0;
  double w_imitation = 0.0;
  double c_event = 0.0;
  std::string mixture;
  MetricsReport metrics;
};

struct AblationTable
{
  AblationAxis axis = AblationAxis::Alpha;
  std::vector<AblationRow> rows;

  /// RC general, CR general, CR safety, SRC, JSR and jerk per grid point.
  std::string to_csv() const;
  /// RC general against 1 - CR safety.
  std::string scatter_csv() const;
};

/// Grid entries: Alpha "0.1"; RewardWeights "w_imitation/C_event" with C_event applied to
/// every event penalty; Mixture "noisy0.2:1,noisy0.4:1".
AblationTable ablation_sweep(AblationAxis axis, std::span<const std::string> grid,
                             const AblationContext & ctx);

}  // namespace odrl

#endif  // ODRL__EVALUATION_HPP_
