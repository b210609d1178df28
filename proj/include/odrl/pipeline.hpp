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

// Pipeline stages behind the command-line tool. Every stage reads its inputs from and
// writes its outputs under one run directory, next to a manifest.json recording input
// digests, the config snapshot and the seed.

#ifndef ODRL__PIPELINE_HPP_
#define ODRL__PIPELINE_HPP_

#include "odrl/datasets.hpp"
#include "odrl/evaluation.hpp"
#include "odrl/training.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace odrl
{

struct SuiteSizes
{
  int general = 137;
  int safety = 20;
  int train_general = 60;
  int train_safety = 60;
};

struct VocabularyConfig
{
  int k = 256;
  int max_iters = 50;
  int perturbations = 2;  ///< perturbed expert rollouts per training scenario
};

struct PipelineConfig
{
  std::uint64_t seed = 0;
  std::filesystem::path out = "run";
  SimParams sim;
  ExpertConfig expert;
  SuiteSizes suites;
  VocabularyConfig vocab;
  std::string mixture = "noisy0.2:1,noisy0.4:1";
  std::uint64_t episodes = 480;
  RewardConfig reward;
  TrainConfig train;
  AblationAxis ablation_axis = AblationAxis::Alpha;
  std::vector<std::string> ablation_grid{"0.0", "0.1", "0.2", "0.4", "1.0"};

  /// Throws Error(ConfigError) naming the offending field.
  void validate() const;
};

/// Unknown keys are rejected so typos do not silently fall back to defaults.
PipelineConfig pipeline_config_from_json(const nlohmann::json & j);
nlohmann::json to_json(const PipelineConfig & cfg);
PipelineConfig load_pipeline_config(const std::filesystem::path & path);

/// Stage seeds derived from the master seed by stage name.
std::uint64_t stage_seed(const PipelineConfig & cfg, std::string_view stage);

/// Artifact locations inside a run directory.
struct RunLayout
{
  std::filesystem::path root;

  std::filesystem::path suites_dir() const { return root / "suites"; }
  std::filesystem::path general_suite() const { return suites_dir() / "general.json"; }
  std::filesystem::path safety_suite() const { return suites_dir() / "safety.json"; }
  std::filesystem::path train_general_suite() const { return suites_dir() / "train_general.json"; }
  std::filesystem::path train_safety_suite() const { return suites_dir() / "train_safety.json"; }
  std::filesystem::path vocab_dir() const { return root / "vocab"; }
  std::filesystem::path vocabulary() const { return vocab_dir() / "vocabulary.txt"; }
  std::filesystem::path dataset_dir() const { return root / "dataset"; }
  std::filesystem::path dataset() const { return dataset_dir() / "dataset.odrl"; }
  std::filesystem::path train_dir() const { return root / "train"; }
  std::filesystem::path checkpoint() const { return train_dir() / "checkpoint.odrc"; }
  std::filesystem::path eval_dir() const { return root / "eval"; }
  std::filesystem::path summary() const { return eval_dir() / "summary.csv"; }
  std::filesystem::path ablate_dir() const { return root / "ablate"; }
  std::filesystem::path report() const { return root / "report.md"; }
};

void cmd_suites(const PipelineConfig & cfg);
void cmd_vocab(const PipelineConfig & cfg);
void cmd_collect(const PipelineConfig & cfg);
void cmd_train(const PipelineConfig & cfg);
void cmd_eval(const PipelineConfig & cfg);
void cmd_ablate(const PipelineConfig & cfg);
/// Evaluates the scripted expert and each mixture policy as baselines and writes report.md
/// with those rows, the trained model's summary and any ablation tables present.
void cmd_report(const PipelineConfig & cfg);
/// suites, vocab, collect, train, eval, report in order.
void run_pipeline(const PipelineConfig & cfg);

/// 2 config, 3 hash or corrupt input, 4 numerical abort, 1 anything else.
int exit_code(ErrorCode code);

}  // namespace odrl

#endif  // ODRL__PIPELINE_HPP_
