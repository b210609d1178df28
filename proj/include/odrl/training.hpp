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

#ifndef ODRL__TRAINING_HPP_
#define ODRL__TRAINING_HPP_

#include "odrl/datasets.hpp"
#include "odrl/neural.hpp"
#include "odrl/simulator.hpp"
#include "odrl/vocabulary.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace odrl
{

using Network = Mlp<double>;

enum class TargetValueMode { Sampled, Expected };
enum class RlObjectiveMode { ExactExpectation, Sampled };

std::string_view to_string(TargetValueMode m);
std::string_view to_string(RlObjectiveMode m);
TargetValueMode target_value_mode_from_string(std::string_view s);
RlObjectiveMode rl_objective_mode_from_string(std::string_view s);

struct TrainConfig
{
  double gamma = 0.9;
  double alpha = 0.1;
  int batch_size = 8;
  std::int64_t total_iters = 2000;
  double base_lr = 3e-5;
  double weight_decay = 0.01;
  double tau = 1e-4;
  std::uint64_t seed = 0;
  TargetValueMode target_value_mode = TargetValueMode::Sampled;
  RlObjectiveMode rl_objective_mode = RlObjectiveMode::ExactExpectation;
  std::vector<int> hidden{128, 128};
  /// false trains the actor on the pseudo-expert term alone and skips the critic.
  bool use_rl_objective = true;
  /// Behavior-cloning warm start on pseudo-expert labels before the main run.
  std::int64_t pretrain_iters = 0;
  double pretrain_lr = 1e-3;
  std::int64_t checkpoint_interval = 0;
  /// Test mode: full finite-difference check of both losses every N iterations.
  std::int64_t gradcheck_interval = 0;

  void validate() const;
};

/// Maps a flattened Observation to the network input scale.
Eigen::VectorXd encode_observation(const Eigen::Ref<const Eigen::VectorXd> & raw,
                                   const SimParams & params);

struct Batch
{
  Eigen::MatrixXd obs;       ///< encoded, D x B
  Eigen::MatrixXd next_obs;  ///< encoded, D x B
  std::vector<int> actions;
  std::vector<int> pseudo_expert;
  Eigen::VectorXd rewards;
  Eigen::VectorXd done;

  int size() const { return static_cast<int>(actions.size()); }
};

/// Dataset with observations encoded once, ready for batch assembly.
struct EncodedDataset
{
  Eigen::MatrixXd obs;
  Eigen::MatrixXd next_obs;
  std::vector<int> actions;
  std::vector<int> pseudo_expert;
  Eigen::VectorXd rewards;
  Eigen::VectorXd done;

  static EncodedDataset from(const OfflineDataset & dataset, const SimParams & params);
  Batch gather(std::span<const std::size_t> indices) const;
  std::size_t size() const { return actions.size(); }
};

/// A_k = q_k - sum_j probs_j q_j
Eigen::VectorXd advantage(const Eigen::VectorXd & q_values, const Eigen::VectorXd & probs);

struct CriticLossResult
{
  double loss = 0.0;
  Network gradients;
  Eigen::VectorXd targets;  ///< TD targets y, treated as constants
};

/// Mean squared TD error for fixed targets.
CriticLossResult critic_loss_for_targets(const Batch & batch, const Network & critic,
                                         const Eigen::VectorXd & targets);

Eigen::VectorXd td_targets(const Batch & batch, const Network & actor_target,
                           const Network & critic_target, const TrainConfig & cfg, Rng & rng);

CriticLossResult critic_loss(const Batch & batch, const Network & actor_target,
                             const Network & critic, const Network & critic_target,
                             const TrainConfig & cfg, Rng & rng);

struct ActorLossResult
{
  double loss = 0.0;
  double rl_term = 0.0;
  double bc_term = 0.0;
  double mean_abs_advantage = 0.0;
  double max_abs_weighted_advantage = 0.0;  ///< |sum_k pi_k A_k| over the batch
  Network gradients;
  /// Stop-gradient weights c_kb multiplying -log pi in the RL term.
  Eigen::MatrixXd rl_weights;
};

ActorLossResult actor_loss(const Batch & batch, const Network & actor, const Network & critic,
                           const TrainConfig & cfg, Rng & rng);

/// Surrogate value with the stop-gradient weights held fixed; its gradient is what
/// actor_loss returns.
double actor_surrogate(const Batch & batch, const Network & actor,
                       const Eigen::MatrixXd & rl_weights, double alpha);

struct NetworkCheckpoint
{
  Network actor;
  Network critic;
  TargetParams<double> actor_target;
  TargetParams<double> critic_target;
  OptimizerState<double> actor_opt;
  OptimizerState<double> critic_opt;
  std::int64_t step = 0;
  Digest vocabulary_hash{};

  bool operator==(const NetworkCheckpoint &) const = default;
};

NetworkCheckpoint fresh_checkpoint(int obs_dim, int actions, const TrainConfig & cfg,
                                   const Digest & vocabulary_hash);

std::vector<std::uint8_t> serialize_checkpoint(const NetworkCheckpoint & ckpt);
NetworkCheckpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);
void write_checkpoint(const std::filesystem::path & path, const NetworkCheckpoint & ckpt);
NetworkCheckpoint read_checkpoint(const std::filesystem::path & path);
void require_vocabulary(const NetworkCheckpoint & ckpt, const ActionVocabulary & vocab);

struct TrainingLogRow
{
  std::int64_t iteration = 0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double rl_term = 0.0;
  double bc_term = 0.0;
  double mean_abs_advantage = 0.0;
  double lr = 0.0;
  double critic_grad_norm = 0.0;
  double actor_grad_norm = 0.0;
  bool operator==(const TrainingLogRow &) const = default;
};

struct TrainingLog
{
  std::vector<TrainingLogRow> rows;
  std::string to_csv() const;
  bool operator==(const TrainingLog &) const = default;
};

/// Thrown on a non-finite loss or gradient; carries the last checkpoint that was finite.
class TrainingAborted : public Error
{
public:
  TrainingAborted(const std::string & what, NetworkCheckpoint last_good)
  : Error(ErrorCode::NonFiniteLoss, what), last_good_(std::move(last_good))
  {
  }
  const NetworkCheckpoint & last_good() const { return last_good_; }

private:
  NetworkCheckpoint last_good_;
};

struct TrainResult
{
  NetworkCheckpoint checkpoint;
  TrainingLog log;
};

using CheckpointCallback = std::function<void(const NetworkCheckpoint &)>;

TrainResult train(const OfflineDataset & dataset, const ActionVocabulary & vocab,
                  const TrainConfig & cfg, const SimParams & params = {},
                  std::optional<NetworkCheckpoint> init = std::nullopt,
                  const CheckpointCallback & on_checkpoint = {});

/// Pseudo-expert behavior cloning used as a warm start.
NetworkCheckpoint pretrain_bc(const EncodedDataset & data, NetworkCheckpoint init,
                              const TrainConfig & cfg);

struct GradientCheck
{
  double critic_max_rel_error = 0.0;
  double actor_max_rel_error = 0.0;
  int skipped = 0;  ///< parameters whose probes crossed a ReLU kink
};

/// Central finite differences over every parameter of both losses on one batch.
GradientCheck finite_difference_check(const Batch & batch, const NetworkCheckpoint & nets,
                                      const TrainConfig & cfg, std::uint64_t seed,
                                      double h = 1e-5);

/// Relative error used by the gradient checks.
double relative_error(double analytic, double numeric);

}  // namespace odrl

#endif  // ODRL__TRAINING_HPP_
