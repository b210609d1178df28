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

#include "odrl/pipeline.hpp"

#include "odrl/io.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace odrl
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

/// Reads fields of one JSON object, remembering which keys were consumed.
class Fields
{
public:
  Fields(const json & j, std::string where) : j_(j), where_(std::move(where))
  {
    if (!j_.is_object()) {
      throw Error(ErrorCode::ConfigError, where_ + " must be an object");
    }
  }

  template <typename T>
  void get(const char * key, T & out)
  {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception & e) {
      throw Error(ErrorCode::ConfigError, path(key) + ": " + e.what());
    }
  }

  Fields sub(const char * key)
  {
    used_.insert(key);
    static const json empty = json::object();
    return Fields(j_.contains(key) ? j_.at(key) : empty, path(key));
  }

  void finish() const
  {
    for (const auto & item : j_.items()) {
      if (!used_.count(item.key())) {
        throw Error(ErrorCode::ConfigError, "unknown key " + path(item.key()));
      }
    }
  }

private:
  std::string path(const std::string & key) const
  {
    return where_.empty() ? key : where_ + "." + key;
  }

  const json & j_;
  std::string where_;
  std::set<std::string> used_;
};

void read_sim(Fields f, SimParams & p)
{
  f.get("dt", p.dt);
  f.get("horizon", p.horizon);
  f.get("v_max", p.v_max);
  f.get("omega_max", p.omega_max);
  f.get("ray_count", p.ray_count);
  f.get("ray_max", p.ray_max);
  f.get("max_agents", p.max_agents);
  std::array<double, 2> ext{p.ego_half_extents.x(), p.ego_half_extents.y()};
  f.get("ego_half_extents", ext);
  p.ego_half_extents = Vec2(ext[0], ext[1]);
  f.get("route_complete_fraction", p.route_complete_fraction);
  f.get("offroute_factor", p.offroute_factor);
  f.get("collision_substeps", p.collision_substeps);
  f.finish();
}

json sim_json(const SimParams & p)
{
  return {{"dt", p.dt},
          {"horizon", p.horizon},
          {"v_max", p.v_max},
          {"omega_max", p.omega_max},
          {"ray_count", p.ray_count},
          {"ray_max", p.ray_max},
          {"max_agents", p.max_agents},
          {"ego_half_extents", {p.ego_half_extents.x(), p.ego_half_extents.y()}},
          {"route_complete_fraction", p.route_complete_fraction},
          {"offroute_factor", p.offroute_factor},
          {"collision_substeps", p.collision_substeps}};
}

void read_expert(Fields f, ExpertConfig & e)
{
  f.get("cruise_speed", e.cruise_speed);
  f.get("accel", e.accel);
  f.get("lookahead", e.lookahead);
  f.get("stop_margin", e.stop_margin);
  f.get("corridor_margin", e.corridor_margin);
  f.get("lateral_convergence", e.lateral_convergence);
  f.get("max_decel", e.max_decel);
  f.finish();
}

json expert_json(const ExpertConfig & e)
{
  return {{"cruise_speed", e.cruise_speed},
          {"accel", e.accel},
          {"lookahead", e.lookahead},
          {"stop_margin", e.stop_margin},
          {"corridor_margin", e.corridor_margin},
          {"lateral_convergence", e.lateral_convergence},
          {"max_decel", e.max_decel}};
}

void read_reward(Fields f, RewardConfig & r)
{
  f.get("w_imitation", r.w_imitation);
  f.get("w_event", r.w_event);
  f.get("c_collision", r.c_collision);
  f.get("c_offroad", r.c_offroad);
  f.get("c_offroute", r.c_offroute);
  f.finish();
}

json reward_json(const RewardConfig & r)
{
  return {{"w_imitation", r.w_imitation},
          {"w_event", r.w_event},
          {"c_collision", r.c_collision},
          {"c_offroad", r.c_offroad},
          {"c_offroute", r.c_offroute}};
}

void read_train(Fields f, TrainConfig & t)
{
  f.get("gamma", t.gamma);
  f.get("alpha", t.alpha);
  f.get("batch_size", t.batch_size);
  f.get("total_iters", t.total_iters);
  f.get("base_lr", t.base_lr);
  f.get("weight_decay", t.weight_decay);
  f.get("tau", t.tau);
  std::string target = std::string(to_string(t.target_value_mode));
  f.get("target_value_mode", target);
  std::string objective = std::string(to_string(t.rl_objective_mode));
  f.get("rl_objective_mode", objective);
  f.get("hidden", t.hidden);
  f.get("use_rl_objective", t.use_rl_objective);
  f.get("pretrain_iters", t.pretrain_iters);
  f.get("pretrain_lr", t.pretrain_lr);
  f.get("checkpoint_interval", t.checkpoint_interval);
  f.get("gradcheck_interval", t.gradcheck_interval);
  f.finish();
  t.target_value_mode = target_value_mode_from_string(target);
  t.rl_objective_mode = rl_objective_mode_from_string(objective);
}

json train_json(const TrainConfig & t)
{
  return {{"gamma", t.gamma},
          {"alpha", t.alpha},
          {"batch_size", t.batch_size},
          {"total_iters", t.total_iters},
          {"base_lr", t.base_lr},
          {"weight_decay", t.weight_decay},
          {"tau", t.tau},
          {"target_value_mode", to_string(t.target_value_mode)},
          {"rl_objective_mode", to_string(t.rl_objective_mode)},
          {"hidden", t.hidden},
          {"use_rl_objective", t.use_rl_objective},
          {"pretrain_iters", t.pretrain_iters},
          {"pretrain_lr", t.pretrain_lr},
          {"checkpoint_interval", t.checkpoint_interval},
          {"gradcheck_interval", t.gradcheck_interval}};
}

std::string run_relative(const fs::path & p, const fs::path & root)
{
  return p.lexically_relative(root).generic_string();
}

/// Writes one stage's files; everything written is deleted again unless `commit` runs.
class StageOutputs
{
public:
  StageOutputs(const PipelineConfig & cfg, fs::path dir, std::string command)
  : cfg_(cfg), dir_(std::move(dir)), command_(std::move(command))
  {
    if (!fs::is_directory(cfg.out)) {
      throw Error(ErrorCode::ConfigError,
                  "output directory '" + cfg.out.string() + "' does not exist");
    }
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) {
      throw Error(ErrorCode::ConfigError, "cannot create '" + dir_.string() + "': " + ec.message());
    }
  }

  StageOutputs(const StageOutputs &) = delete;
  StageOutputs & operator=(const StageOutputs &) = delete;

  ~StageOutputs()
  {
    if (committed_) return;
    std::error_code ec;
    for (const auto & p : written_) fs::remove(p, ec);
    fs::remove(dir_ / "manifest.json", ec);
  }

  void text(const fs::path & path, std::string_view contents)
  {
    written_.push_back(path);
    write_text_file(path, contents);
  }

  void track(const fs::path & path) { written_.push_back(path); }

  void input(const fs::path & path) { inputs_[run_relative(path, cfg_.out)] = to_hex(file_digest(path)); }

  void commit(const json & extra = json::object())
  {
    json outputs = json::object();
    for (const auto & p : written_) {
      if (fs::exists(p)) outputs[run_relative(p, cfg_.out)] = to_hex(file_digest(p));
    }
    json snapshot = to_json(cfg_);
    snapshot.erase("out");
    json m = {{"command", command_},
              {"seed", cfg_.seed},
              {"config", snapshot},
              {"inputs", inputs_},
              {"outputs", outputs}};
    if (!extra.empty()) m["details"] = extra;
    write_text_file(dir_ / "manifest.json", m.dump(2) + "\n");
    committed_ = true;
  }

private:
  const PipelineConfig & cfg_;
  fs::path dir_;
  std::string command_;
  std::vector<fs::path> written_;
  std::map<std::string, std::string> inputs_;
  bool committed_ = false;
};

/// Confirms an upstream stage ran and its files still match what its manifest recorded.
void require_stage(const PipelineConfig & cfg, const fs::path & dir, const std::string & command)
{
  const auto manifest = dir / "manifest.json";
  if (!fs::exists(manifest)) {
    throw Error(ErrorCode::ConfigError, "missing '" + manifest.string() + "'; run '" + command +
                                          "' first");
  }
  json m;
  try {
    m = parse_json_file(manifest);
  } catch (const Error & e) {
    throw Error(ErrorCode::CorruptFile, manifest.string() + ": " + e.what());
  }
  if (!m.contains("outputs") || !m["outputs"].is_object()) {
    throw Error(ErrorCode::CorruptFile, manifest.string() + " lists no outputs");
  }
  for (const auto & [name, hex] : m["outputs"].items()) {
    const fs::path path = cfg.out / name;
    if (!fs::exists(path)) {
      throw Error(ErrorCode::HashMismatch, "'" + path.string() + "' recorded in " +
                                             manifest.string() + " is missing");
    }
    const std::string actual = to_hex(file_digest(path));
    if (actual != hex.get<std::string>()) {
      throw Error(ErrorCode::HashMismatch, "'" + path.string() + "' has digest " + actual +
                                             " but " + manifest.string() + " records " +
                                             hex.get<std::string>());
    }
  }
}

std::vector<ScenarioSpec> concat(std::vector<ScenarioSpec> a, const std::vector<ScenarioSpec> & b)
{
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

struct Suites
{
  std::vector<ScenarioSpec> general;
  std::vector<ScenarioSpec> safety;
  std::vector<ScenarioSpec> train;
};

Suites load_suites(const PipelineConfig & cfg, StageOutputs & stage)
{
  const RunLayout run{cfg.out};
  require_stage(cfg, run.suites_dir(), "suites");
  for (const auto & p : {run.general_suite(), run.safety_suite(), run.train_general_suite(),
                         run.train_safety_suite()}) {
    stage.input(p);
  }
  Suites s;
  s.general = read_suite(run.general_suite()).scenarios;
  s.safety = read_suite(run.safety_suite()).scenarios;
  s.train = concat(read_suite(run.train_general_suite()).scenarios,
                   read_suite(run.train_safety_suite()).scenarios);
  return s;
}

ActionVocabulary load_vocabulary(const PipelineConfig & cfg, StageOutputs & stage)
{
  const RunLayout run{cfg.out};
  require_stage(cfg, run.vocab_dir(), "vocab");
  stage.input(run.vocabulary());
  return read_vocabulary(run.vocabulary());
}

std::map<std::string, ExpertLog> expert_logs(const PipelineConfig & cfg,
                                             const std::vector<ScenarioSpec> & scenarios)
{
  std::map<std::string, ExpertLog> logs;
  for (const auto & s : scenarios) logs[s.id] = record_expert_log(s, cfg.sim, cfg.expert);
  return logs;
}

CollectConfig collect_config(const PipelineConfig & cfg)
{
  CollectConfig c;
  c.reward = cfg.reward;
  c.sim = cfg.sim;
  c.expert = cfg.expert;
  c.total_episodes = cfg.episodes;
  c.seed = stage_seed(cfg, "collect");
  return c;
}

TrainConfig train_config(const PipelineConfig & cfg)
{
  TrainConfig t = cfg.train;
  t.seed = stage_seed(cfg, "train");
  return t;
}

std::string fmt(double v)
{
  std::ostringstream ss;
  ss.precision(4);
  ss << std::fixed << v;
  return ss.str();
}

std::string report_row(const std::string & name, const MetricsReport & m)
{
  return "| " + name + " | " + fmt(m.cr_general) + " | " + fmt(m.rc_general) + " | " +
         fmt(m.jerk_long) + " | " + fmt(m.jerk_lat) + " | " + fmt(m.cr_safety) + " | " +
         fmt(m.rc_safety) + " | " + fmt(m.src) + " | " + fmt(m.jsr) + " |\n";
}

MetricsReport parse_summary(const fs::path & path)
{
  std::istringstream in(read_text_file(path));
  std::string header, values;
  std::getline(in, header);
  std::getline(in, values);
  std::vector<double> v;
  std::istringstream row(values);
  for (std::string cell; std::getline(row, cell, ',');) v.push_back(std::stod(cell));
  if (v.size() != 8) {
    throw Error(ErrorCode::CorruptFile, "'" + path.string() + "' is not a metrics summary");
  }
  MetricsReport m;
  m.cr_general = v[0];
  m.rc_general = v[1];
  m.jerk_long = v[2];
  m.jerk_lat = v[3];
  m.cr_safety = v[4];
  m.rc_safety = v[5];
  m.src = v[6];
  m.jsr = v[7];
  return m;
}

}  // namespace

void PipelineConfig::validate() const
{
  if (sim.dt <= 0.0 || sim.horizon < 1 || sim.ray_count < 1 || sim.max_agents < 0) {
    throw Error(ErrorCode::ConfigError, "sim: dt, horizon and ray_count must be positive");
  }
  if (suites.general < 1 || suites.safety < 1 || suites.train_general < 0 ||
      suites.train_safety < 0 || suites.train_general + suites.train_safety < 1) {
    throw Error(ErrorCode::ConfigError, "suites: sizes must be positive");
  }
  if (vocab.k < 2 || vocab.max_iters < 1 || vocab.perturbations < 0) {
    throw Error(ErrorCode::ConfigError, "vocab: k must be >= 2 and max_iters >= 1");
  }
  if (episodes < 1) throw Error(ErrorCode::ConfigError, "episodes must be >= 1");
  try {
    parse_mixture(mixture);
  } catch (const Error & e) {
    throw Error(ErrorCode::ConfigError, "mixture: " + std::string(e.what()));
  }
  reward.validate();
  train.validate();
  if (ablation_grid.empty()) throw Error(ErrorCode::ConfigError, "ablate.grid is empty");
}

PipelineConfig pipeline_config_from_json(const json & j)
{
  PipelineConfig cfg;
  Fields f(j, "");
  f.get("seed", cfg.seed);
  std::string out = cfg.out.string();
  f.get("out", out);
  cfg.out = out;
  read_sim(f.sub("sim"), cfg.sim);
  read_expert(f.sub("expert"), cfg.expert);
  {
    auto s = f.sub("suites");
    s.get("general", cfg.suites.general);
    s.get("safety", cfg.suites.safety);
    s.get("train_general", cfg.suites.train_general);
    s.get("train_safety", cfg.suites.train_safety);
    s.finish();
  }
  {
    auto v = f.sub("vocab");
    v.get("k", cfg.vocab.k);
    v.get("max_iters", cfg.vocab.max_iters);
    v.get("perturbations", cfg.vocab.perturbations);
    v.finish();
  }
  {
    auto c = f.sub("collect");
    c.get("mixture", cfg.mixture);
    c.get("episodes", cfg.episodes);
    read_reward(c.sub("reward"), cfg.reward);
    c.finish();
  }
  read_train(f.sub("train"), cfg.train);
  {
    auto a = f.sub("ablate");
    std::string axis(to_string(cfg.ablation_axis));
    a.get("axis", axis);
    cfg.ablation_axis = ablation_axis_from_string(axis);
    a.get("grid", cfg.ablation_grid);
    a.finish();
  }
  f.finish();
  cfg.validate();
  return cfg;
}

json to_json(const PipelineConfig & cfg)
{
  return {{"seed", cfg.seed},
          {"out", cfg.out.generic_string()},
          {"sim", sim_json(cfg.sim)},
          {"expert", expert_json(cfg.expert)},
          {"suites",
           {{"general", cfg.suites.general},
            {"safety", cfg.suites.safety},
            {"train_general", cfg.suites.train_general},
            {"train_safety", cfg.suites.train_safety}}},
          {"vocab",
           {{"k", cfg.vocab.k},
            {"max_iters", cfg.vocab.max_iters},
            {"perturbations", cfg.vocab.perturbations}}},
          {"collect",
           {{"mixture", cfg.mixture}, {"episodes", cfg.episodes}, {"reward", reward_json(cfg.reward)}}},
          {"train", train_json(cfg.train)},
          {"ablate", {{"axis", to_string(cfg.ablation_axis)}, {"grid", cfg.ablation_grid}}}};
}

PipelineConfig load_pipeline_config(const fs::path & path)
{
  if (!fs::exists(path)) {
    throw Error(ErrorCode::ConfigError, "config file '" + path.string() + "' does not exist");
  }
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception & e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return pipeline_config_from_json(j);
}

std::uint64_t stage_seed(const PipelineConfig & cfg, std::string_view stage)
{
  return derive_seed(cfg.seed, stage);
}

void cmd_suites(const PipelineConfig & cfg)
{
  cfg.validate();
  const RunLayout run{cfg.out};
  StageOutputs stage(cfg, run.suites_dir(), "suites");
  auto emit = [&](const fs::path & path, Suite suite, int n, std::string_view name) {
    ScenarioSuite s;
    s.suite = suite;
    s.seed = stage_seed(cfg, name);
    s.scenarios = generate_suite(suite, n, s.seed);
    stage.track(path);
    write_suite(path, s);
  };
  emit(run.general_suite(), Suite::General, cfg.suites.general, "suites/general");
  emit(run.safety_suite(), Suite::SafetyCritical, cfg.suites.safety, "suites/safety");
  emit(run.train_general_suite(), Suite::General, cfg.suites.train_general, "suites/train_general");
  emit(run.train_safety_suite(), Suite::SafetyCritical, cfg.suites.train_safety,
       "suites/train_safety");
  stage.commit();
}

void cmd_vocab(const PipelineConfig & cfg)
{
  cfg.validate();
  const RunLayout run{cfg.out};
  StageOutputs stage(cfg, run.vocab_dir(), "vocab");
  const auto suites = load_suites(cfg, stage);
  const auto corpus = expert_trajectory_corpus(suites.train, cfg.sim, cfg.expert,
                                               cfg.vocab.perturbations,
                                               stage_seed(cfg, "vocab/corpus"));
  const auto fit = kmeans(corpus, cfg.vocab.k, cfg.vocab.max_iters, stage_seed(cfg, "vocab"));
  stage.track(run.vocabulary());
  write_vocabulary(run.vocabulary(), fit.vocabulary);
  stage.commit({{"corpus_size", corpus.size()},
                {"inertia", fit.inertia},
                {"iterations", fit.iterations},
                {"digest", to_hex(fit.vocabulary.digest())}});
}

void cmd_collect(const PipelineConfig & cfg)
{
  cfg.validate();
  const RunLayout run{cfg.out};
  StageOutputs stage(cfg, run.dataset_dir(), "collect");
  const auto suites = load_suites(cfg, stage);
  const auto vocab = load_vocabulary(cfg, stage);
  const auto mixture = parse_mixture(cfg.mixture);
  const auto ds = collect(mixture, suites.train, vocab, expert_logs(cfg, suites.train),
                          collect_config(cfg));
  stage.track(run.dataset());
  write_dataset(run.dataset(), ds);
  stage.commit({{"transitions", ds.transitions.size()}, {"manifest", to_json(ds.manifest)}});
}

void cmd_train(const PipelineConfig & cfg)
{
  cfg.validate();
  const RunLayout run{cfg.out};
  StageOutputs stage(cfg, run.train_dir(), "train");
  const auto vocab = load_vocabulary(cfg, stage);
  require_stage(cfg, run.dataset_dir(), "collect");
  stage.input(run.dataset());
  const auto ds = read_dataset(run.dataset());
  require_vocabulary(ds, vocab);
  stage.track(run.checkpoint());
  const auto result = train(ds, vocab, train_config(cfg), cfg.sim, std::nullopt,
                            [&](const NetworkCheckpoint & ckpt) {
                              write_checkpoint(run.checkpoint(), ckpt);
                            });
  write_checkpoint(run.checkpoint(), result.checkpoint);
  stage.text(run.train_dir() / "training_log.csv", result.log.to_csv());
  stage.commit({{"steps", result.checkpoint.step}});
}

void cmd_eval(const PipelineConfig & cfg)
{
  cfg.validate();
  const RunLayout run{cfg.out};
  StageOutputs stage(cfg, run.eval_dir(), "eval");
  const auto suites = load_suites(cfg, stage);
  const auto vocab = load_vocabulary(cfg, stage);
  require_stage(cfg, run.train_dir(), "train");
  stage.input(run.checkpoint());
  const auto ckpt = read_checkpoint(run.checkpoint());
  const auto ev =
    evaluate_policy(checkpoint_policy(ckpt, vocab, cfg.sim), suites.general, suites.safety, cfg.sim);
  stage.text(run.summary(), ev.report.summary_csv());
  stage.text(run.eval_dir() / "breakdown.csv", ev.report.breakdown_csv());
  json plot = trajectory_plot_data(suites.general, ev.general);
  const json safety = trajectory_plot_data(suites.safety, ev.safety);
  for (const auto & e : safety["episodes"]) plot["episodes"].push_back(e);
  stage.text(run.eval_dir() / "trajectories.json", plot.dump() + "\n");
  stage.commit();
}

void cmd_ablate(const PipelineConfig & cfg)
{
  cfg.validate();
  const RunLayout run{cfg.out};
  StageOutputs stage(cfg, run.ablate_dir(), "ablate");
  const auto suites = load_suites(cfg, stage);
  AblationContext ctx;
  ctx.vocab = load_vocabulary(cfg, stage);
  ctx.train_scenarios = suites.train;
  ctx.logs = expert_logs(cfg, suites.train);
  ctx.mixture = parse_mixture(cfg.mixture);
  ctx.collect = collect_config(cfg);
  ctx.train = train_config(cfg);
  ctx.general = suites.general;
  ctx.safety = suites.safety;
  const auto table = ablation_sweep(cfg.ablation_axis, cfg.ablation_grid, ctx);
  const std::string name(to_string(cfg.ablation_axis));
  stage.text(run.ablate_dir() / (name + ".csv"), table.to_csv());
  stage.text(run.ablate_dir() / (name + "_scatter.csv"), table.scatter_csv());
  stage.commit();
}

void cmd_report(const PipelineConfig & cfg)
{
  cfg.validate();
  const RunLayout run{cfg.out};
  StageOutputs stage(cfg, run.root, "report");
  const auto suites = load_suites(cfg, stage);
  const auto vocab = load_vocabulary(cfg, stage);

  std::string md = "# Closed-loop results\n\n";
  md += "General suite: " + std::to_string(suites.general.size()) +
        " scenarios. Safety-critical suite: " + std::to_string(suites.safety.size()) +
        " scenarios.\n\n";
  md += "| policy | CR gen | RC gen | jerk long | jerk lat | CR safe | RC safe | SRC | JSR |\n";
  md += "|---|---|---|---|---|---|---|---|---|\n";
  md += report_row("scripted expert", evaluate_policy(scripted_expert_policy(cfg.sim, cfg.expert),
                                                      suites.general, suites.safety, cfg.sim)
                                        .report);
  for (const auto & p : parse_mixture(cfg.mixture)) {
    const auto policy =
      behavior_policy(p, vocab, stage_seed(cfg, "report/" + p.label()), cfg.sim, cfg.expert);
    md += report_row("behavior " + p.label(),
                     evaluate_policy(policy, suites.general, suites.safety, cfg.sim).report);
  }
  if (fs::exists(run.eval_dir() / "manifest.json")) {
    require_stage(cfg, run.eval_dir(), "eval");
    stage.input(run.summary());
    md += report_row("trained (alpha " + fmt(cfg.train.alpha) + ")", parse_summary(run.summary()));
  }
  if (fs::exists(run.ablate_dir() / "manifest.json")) {
    require_stage(cfg, run.ablate_dir(), "ablate");
    std::vector<fs::path> tables;
    for (const auto & entry : fs::directory_iterator(run.ablate_dir())) {
      const auto & p = entry.path();
      if (p.extension() == ".csv" && !p.stem().string().ends_with("_scatter")) tables.push_back(p);
    }
    std::sort(tables.begin(), tables.end());
    for (const auto & p : tables) {
      stage.input(p);
      md += "\n## Ablation: " + p.stem().string() + "\n\n```\n" + read_text_file(p) + "```\n";
    }
  }
  stage.text(run.report(), md);
  stage.commit();
}

void run_pipeline(const PipelineConfig & cfg)
{
  cmd_suites(cfg);
  cmd_vocab(cfg);
  cmd_collect(cfg);
  cmd_train(cfg);
  cmd_eval(cfg);
  cmd_report(cfg);
}

int exit_code(ErrorCode code)
{
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::EmptyMixture:
    case ErrorCode::InvalidSpec:
    case ErrorCode::OutOfRange:
      return 2;
    case ErrorCode::HashMismatch:
    case ErrorCode::CorruptFile:
    case ErrorCode::MissingLabel:
      return 3;
    case ErrorCode::NonFiniteLoss:
      return 4;
    default:
      return 1;
  }
}

}  // namespace odrl
