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

// Hand-built datasets shared by the unit tests and the acceptance gate.

#ifndef ODRL_TESTS__FIXTURES_HPP_
#define ODRL_TESTS__FIXTURES_HPP_

#include "odrl/datasets.hpp"
#include "odrl/training.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <numbers>
#include <vector>

namespace fixtures
{

/// Two states, two actions. State 0: action 0 moves to state 1 with no reward,
/// action 1 ends with 0.5. State 1: action 0 ends with -1, action 1 ends with 2.
/// The optimum (0 then 1) needs a bootstrapped value to beat the immediate 0.5.
inline std::vector<std::vector<oracles::TabularOutcome>> toy_mdp()
{
  return {{{0.0, 1, false}, {0.5, 0, true}}, {{-1.0, 0, true}, {2.0, 0, true}}};
}

/// Raw observation of a toy state: the first ray reads 0 or ray_max, the rest is blank.
inline Eigen::VectorXd toy_observation(int state, const odrl::SimParams & params)
{
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(params.observation_dim());
  obs[0] = state == 0 ? 0.0 : params.ray_max;
  obs[1] = state == 0 ? params.ray_max : 0.0;
  return obs;
}

inline odrl::ActionVocabulary toy_vocabulary(int horizon)
{
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * horizon, 2);
  for (int t = 0; t < horizon; ++t) {
    m(2 * t, 0) = 3.0 * (t + 1);
    m(2 * t, 1) = 1.0 * (t + 1);
  }
  return odrl::ActionVocabulary(m, 0, {});
}

/// Every (state, action) pair repeated `copies` times. Labels alternate between the
/// actions so the cloning term favours neither.
inline odrl::OfflineDataset toy_dataset(const odrl::ActionVocabulary & vocab,
                                        const odrl::SimParams & params, int copies = 32)
{
  odrl::OfflineDataset ds;
  ds.vocabulary_hash = vocab.digest();
  ds.manifest.obs_dim = params.observation_dim();
  const auto mdp = toy_mdp();
  std::uint32_t episode = 0;
  for (int c = 0; c < copies; ++c) {
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        const auto & o = mdp[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
        odrl::Transition t;
        t.obs = toy_observation(s, params);
        t.next_obs = toy_observation(o.next_state, params);
        t.action_index = a;
        t.reward = o.reward;
        t.done = o.done ? 1 : 0;
        t.pseudo_expert_index = (c + s + a) % 2;
        t.episode_id = episode++;
        ds.transitions.push_back(t);
      }
    }
  }
  return ds;
}

/// Random smooth drive of n poses sampled every 0.5 s.
inline std::vector<odrl::TimedPose> random_drive(int n, odrl::Rng & rng)
{
  std::vector<odrl::TimedPose> poses;
  double x = rng.uniform(-50, 50);
  double y = rng.uniform(-50, 50);
  double h = rng.uniform(-std::numbers::pi, std::numbers::pi);
  double v = rng.uniform(2.0, 10.0);
  for (int i = 0; i < n; ++i) {
    poses.push_back({0.5 * i, odrl::Pose2D(x, y, h)});
    h += rng.uniform(-0.15, 0.15);
    v = std::clamp(v + rng.uniform(-1.0, 1.0), 1.0, 12.0);
    x += v * 0.5 * std::cos(h);
    y += v * 0.5 * std::sin(h);
  }
  return poses;
}

inline odrl::ActionVocabulary random_vocabulary(int k, int horizon, odrl::Rng & rng)
{
  Eigen::MatrixXd m(2 * horizon, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double v = rng.uniform(0.0, 12.0);
    const double lat = rng.uniform(-0.3, 0.3);
    for (int t = 0; t < horizon; ++t) {
      const double s = v * 0.5 * (t + 1);
      m(2 * t, c) = s + rng.normal() * 0.2;
      m(2 * t + 1, c) = lat * s + rng.normal() * 0.2;
    }
  }
  return odrl::ActionVocabulary(m, 0, {});
}

inline odrl::TrainConfig toy_config()
{
  odrl::TrainConfig cfg;
  cfg.total_iters = 5000;
  cfg.base_lr = 1e-3;
  cfg.tau = 0.01;
  cfg.hidden = {32, 32};
  cfg.seed = 17;
  return cfg;
}

/// Probability the trained actor gives to each action in each toy state.
inline std::vector<Eigen::VectorXd> toy_policy(const odrl::NetworkCheckpoint & ckpt,
                                               const odrl::SimParams & params)
{
  std::vector<Eigen::VectorXd> out;
  for (int s = 0; s < 2; ++s) {
    const Eigen::VectorXd x = odrl::encode_observation(toy_observation(s, params), params);
    const Eigen::MatrixXd logits = odrl::predict(ckpt.actor, Eigen::MatrixXd(x));
    out.push_back(odrl::softmax<double>(logits.col(0)));
  }
  return out;
}

}  // namespace fixtures

#endif  // ODRL_TESTS__FIXTURES_HPP_
