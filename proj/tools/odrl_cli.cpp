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

// Command-line entry point for the offline RL driving pipeline.

#include "odrl/pipeline.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

namespace
{

struct Overrides
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<double> alpha;
  std::optional<double> w_imitation;
  std::optional<double> c_event;
  std::vector<std::string> mixture;
  std::optional<std::string> axis;
  std::vector<std::string> grid;
};

odrl::PipelineConfig resolve(const Overrides & o, const std::string & command)
{
  using odrl::Error;
  using odrl::ErrorCode;
  odrl::PipelineConfig cfg;
  if (!o.config.empty()) cfg = odrl::load_pipeline_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.w_imitation) cfg.reward.w_imitation = *o.w_imitation;
  if (o.c_event) {
    cfg.reward.c_collision = cfg.reward.c_offroad = cfg.reward.c_offroute = *o.c_event;
  }
  const bool sweep = command == "ablate";
  if (!sweep && (o.alpha.size() > 1 || o.mixture.size() > 1)) {
    throw Error(ErrorCode::ConfigError, "only 'ablate' accepts repeated --alpha or --mixture");
  }
  if (sweep && o.alpha.size() > 1 && o.mixture.size() > 1) {
    throw Error(ErrorCode::ConfigError, "sweep either --alpha or --mixture, not both");
  }
  if (sweep && o.alpha.size() > 1) {
    cfg.ablation_axis = odrl::AblationAxis::Alpha;
    cfg.ablation_grid.clear();
    for (double a : o.alpha) {
      char buf[32];
      const auto end = std::to_chars(buf, buf + sizeof(buf), a).ptr;
      cfg.ablation_grid.emplace_back(buf, end);
    }
  } else if (o.alpha.size() == 1) {
    cfg.train.alpha = o.alpha.front();
  }
  if (sweep && o.mixture.size() > 1) {
    cfg.ablation_axis = odrl::AblationAxis::Mixture;
    cfg.ablation_grid = o.mixture;
  } else if (o.mixture.size() == 1) {
    cfg.mixture = o.mixture.front();
  }
  if (o.axis) cfg.ablation_axis = odrl::ablation_axis_from_string(*o.axis);
  if (!o.grid.empty()) cfg.ablation_grid = o.grid;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Offline RL driving pipeline: suites, vocabulary, data, training, evaluation"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON pipeline config")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out", o.out, "run directory (must exist)");
  app.add_option("--alpha", o.alpha, "pseudo-expert BC weight; repeat under ablate to sweep");
  app.add_option("--w-imitation", o.w_imitation, "imitation reward weight");
  app.add_option("--c-event", o.c_event, "penalty for every terminal event");
  app.add_option("--mixture", o.mixture, "behavior mixture \"noisy0.2:1,noisy0.4:1\"; repeat under ablate");
  app.add_option("--axis", o.axis, "ablation axis: alpha, reward or mixture");
  app.add_option("--grid", o.grid, "ablation grid entry; repeatable");

  const std::map<std::string, std::pair<std::string, std::function<void(const odrl::PipelineConfig &)>>>
    commands{
      {"suites", {"generate evaluation and training scenario suites", odrl::cmd_suites}},
      {"vocab", {"fit the action vocabulary on expert trajectories", odrl::cmd_vocab}},
      {"collect", {"roll out the behavior mixture into an offline dataset", odrl::cmd_collect}},
      {"train", {"train actor and critic on the offline dataset", odrl::cmd_train}},
      {"eval", {"closed-loop evaluation of the trained checkpoint", odrl::cmd_eval}},
      {"ablate", {"train and evaluate one model per grid point", odrl::cmd_ablate}},
      {"report", {"baselines plus trained and ablation results as markdown", odrl::cmd_report}},
      {"all", {"suites, vocab, collect, train, eval and report in order", odrl::run_pipeline}},
    };
  for (const auto & [name, entry] : commands) app.add_subcommand(name, entry.first)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto cfg = resolve(o, command);
    commands.at(command).second(cfg);
  } catch (const odrl::Error & e) {
    std::cerr << "odrl_cli " << command << ": " << e.what() << "\n";
    return odrl::exit_code(e.code());
  } catch (const std::exception & e) {
    std::cerr << "odrl_cli " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
