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

#include "odrl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace odrl
{

int greedy_action(const Eigen::Ref<const Eigen::VectorXd> & logits)
{
  int best = 0;
  for (Eigen::Index k = 1; k < logits.size(); ++k) {
    if (logits[k] > logits[best]) best = static_cast<int>(k);
  }
  return best;
}

ActionSelector checkpoint_policy(const NetworkCheckpoint & ckpt, const ActionVocabulary & vocab,
                                 const SimParams & params)
{
  require_vocabulary(ckpt, vocab);
  auto actor = std::make_shared<const Network>(ckpt.actor);
  auto protos = std::make_shared<const ActionVocabulary>(vocab);
  return [actor, protos, params](const ScenarioSpec &, const WorldState &, const Observation & obs) {
    const Eigen::MatrixXd input = encode_observation(obs.flatten(), params);
    const Eigen::VectorXd logits = predict(*actor, input).col(0);
    const int a = greedy_action(logits);
    return PolicyDecision{a, protos->prototype(a)};
  };
}

ActionSelector scripted_expert_policy(const SimParams & params, const ExpertConfig & cfg)
{
  return [params, cfg](const ScenarioSpec & spec, const WorldState & world, const Observation &) {
    return PolicyDecision{-1, scripted_expert(spec, world, params, cfg)};
  };
}

ActionSelector behavior_policy(const BehaviorPolicySpec & spec, const ActionVocabulary & vocab,
                               std::uint64_t seed, const SimParams & params,
                               const ExpertConfig & cfg)
{
  auto protos = std::make_shared<const ActionVocabulary>(vocab);
  // One stream per scenario, restarted when a scenario begins at step 0.
  auto rng = std::make_shared<Rng>(seed);
  return [spec, protos, seed, params, cfg, rng](const ScenarioSpec & scenario,
                                                const WorldState & world, const Observation &) {
    if (world.step_index == 0) {
      *rng = Rng(derive_seed(seed, "behavior/" + scenario.id));
    }
    const int a = behavior_action(spec, scenario, world, *protos, *rng, params, cfg);
    return PolicyDecision{a, protos->prototype(a)};
  };
}

namespace
{

StepRecord record(const ScenarioSpec & spec, const WorldState & world, int action)
{
  StepRecord r;
  r.step_index = world.step_index;
  r.pose = world.ego_pose;
  r.speed = world.ego_speed;
  r.accel = world.ego_accel;
  r.action_index = action;
  r.route_progress = std::clamp(world.max_arclength / spec.route.length(), 0.0, 1.0);
  return r;
}

}  // namespace

EpisodeLog rollout(const ScenarioSpec & scenario, const ActionSelector & policy,
                   const SimParams & params)
{
  EpisodeLog log;
  log.scenario_id = scenario.id;
  log.suite = scenario.suite;
  log.archetype = scenario.archetype;
  WorldState world = build_world(scenario, params);
  log.steps.push_back(record(scenario, world, -1));
  while (!world.done) {
    const Observation obs = observe(scenario, world, params);
    const PolicyDecision d = policy(scenario, world, obs);
    StepResult result = step(scenario, world, d.trajectory, params);
    world = std::move(result.world);
    log.steps.push_back(record(scenario, world, d.action_index));
    log.steps.back().events = result.events.bits();
  }
  log.terminal_event = world.terminal_event;
  log.route_progress = log.steps.back().route_progress;
  return log;
}

std::string episode_log_to_jsonl(const EpisodeLog & log)
{
  std::string out;
  for (const auto & s : log.steps) {
    nlohmann::json j = {{"scenario_id", log.scenario_id},
                        {"step_index", s.step_index},
                        {"pose", {s.pose.x, s.pose.y, s.pose.heading}},
                        {"speed", s.speed},
                        {"accel", s.accel},
                        {"action_index", s.action_index},
                        {"route_progress", s.route_progress},
                        {"events", s.events}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

EpisodeLog run_episode(const NetworkCheckpoint & ckpt, const ScenarioSpec & scenario,
                       const ActionVocabulary & vocab, const SimParams & params)
{
  return rollout(scenario, checkpoint_policy(ckpt, vocab, params), params);
}

double collision_rate(std::span<const EpisodeLog> logs)
{
  if (logs.empty()) {
    throw Error(ErrorCode::EmptySet, "collision rate of no episodes");
  }
  const auto hits = std::count_if(logs.begin(), logs.end(), [](const EpisodeLog & l) {
    return l.terminal_event == TerminalEvent::Collision;
  });
  return static_cast<double>(hits) / static_cast<double>(logs.size());
}

double route_completion(std::span<const EpisodeLog> logs)
{
  if (logs.empty()) {
    throw Error(ErrorCode::EmptySet, "route completion of no episodes");
  }
  double sum = 0.0;
  for (const auto & l : logs) sum += l.route_progress;
  return sum / static_cast<double>(logs.size());
}

Jerk jerk(const EpisodeLog & log, double dt)
{
  const auto n = log.steps.size();
  if (n < 4) {
    throw Error(ErrorCode::TooShort, "jerk needs at least four records");
  }
  std::vector<Vec2> vel(n);
  for (std::size_t k = 0; k < n; ++k) {
    vel[k] = log.steps[k].speed * log.steps[k].pose.forward();
  }
  // Central-difference acceleration at interior records, split along/across the heading.
  std::vector<Vec2> acc;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Vec2 a = (vel[k + 1] - vel[k - 1]) / (2.0 * dt);
    const Vec2 f = log.steps[k].pose.forward();
    const Vec2 l = log.steps[k].pose.left();
    acc.emplace_back(a.dot(f), a.dot(l));
  }
  Jerk j;
  for (std::size_t k = 1; k < acc.size(); ++k) {
    j.longitudinal += std::abs(acc[k].x() - acc[k - 1].x()) / dt;
    j.lateral += std::abs(acc[k].y() - acc[k - 1].y()) / dt;
  }
  const double m = static_cast<double>(acc.size() - 1);
  j.longitudinal /= m;
  j.lateral /= m;
  return j;
}

UnifiedMetrics unified_metrics(double rc_general, double cr_general, double cr_safety)
{
  for (double v : {rc_general, cr_general, cr_safety}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::OutOfRange, "metric inputs must lie in [0, 1]");
    }
  }
  return {rc_general * (1.0 - cr_safety), (1.0 - cr_general) * (1.0 - cr_safety)};
}

bool BreakdownRow::operator==(const BreakdownRow & o) const
{
  auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
  return scenario_id == o.scenario_id && suite == o.suite && archetype == o.archetype &&
         terminal_event == o.terminal_event && route_progress == o.route_progress &&
         steps == o.steps && same(jerk_long, o.jerk_long) && same(jerk_lat, o.jerk_lat);
}

namespace
{

std::string fmt(double v)
{
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

}  // namespace

std::string MetricsReport::summary_csv() const
{
  std::ostringstream ss;
  ss << "cr_general,rc_general,jerk_long,jerk_lat,cr_safety,rc_safety,src,jsr\n";
  ss << fmt(cr_general) << ',' << fmt(rc_general) << ',' << fmt(jerk_long) << ',' << fmt(jerk_lat)
     << ',' << fmt(cr_safety) << ',' << fmt(rc_safety) << ',' << fmt(src) << ',' << fmt(jsr)
     << '\n';
  return ss.str();
}

std::string MetricsReport::breakdown_csv() const
{
  std::ostringstream ss;
  ss << "scenario_id,suite,archetype,terminal_event,route_progress,steps,jerk_long,jerk_lat\n";
  for (const auto & r : breakdown) {
    ss << r.scenario_id << ',' << to_string(r.suite) << ',' << to_string(r.archetype) << ','
       << to_string(r.terminal_event) << ',' << fmt(r.route_progress) << ',' << r.steps << ','
       << fmt(r.jerk_long) << ',' << fmt(r.jerk_lat) << '\n';
  }
  return ss.str();
}

Evaluation evaluate_policy(const ActionSelector & policy, std::span<const ScenarioSpec> general,
                           std::span<const ScenarioSpec> safety, const SimParams & params)
{
  if (general.empty() || safety.empty()) {
    throw Error(ErrorCode::EmptySet, "evaluation suites must be nonempty");
  }
  Evaluation ev;
  auto run = [&](std::span<const ScenarioSpec> suite, std::vector<EpisodeLog> & logs) {
    for (const auto & spec : suite) {
      logs.push_back(rollout(spec, policy, params));
      const auto & log = logs.back();
      BreakdownRow row;
      row.scenario_id = log.scenario_id;
      row.suite = log.suite;
      row.archetype = log.archetype;
      row.terminal_event = log.terminal_event;
      row.route_progress = log.route_progress;
      row.steps = static_cast<int>(log.steps.size()) - 1;
      row.jerk_long = row.jerk_lat = std::numeric_limits<double>::quiet_NaN();
      if (log.steps.size() >= 4) {
        const Jerk j = jerk(log, params.dt);
        row.jerk_long = j.longitudinal;
        row.jerk_lat = j.lateral;
      }
      ev.report.breakdown.push_back(row);
    }
  };
  run(general, ev.general);
  run(safety, ev.safety);

  MetricsReport & m = ev.report;
  m.cr_general = collision_rate(ev.general);
  m.rc_general = route_completion(ev.general);
  m.cr_safety = collision_rate(ev.safety);
  m.rc_safety = route_completion(ev.safety);
  const auto u = unified_metrics(m.rc_general, m.cr_general, m.cr_safety);
  m.src = u.src;
  m.jsr = u.jsr;
  int counted = 0;
  for (const auto & row : m.breakdown) {
    if (row.suite == Suite::General && !std::isnan(row.jerk_long)) {
      m.jerk_long += row.jerk_long;
      m.jerk_lat += row.jerk_lat;
      ++counted;
    }
  }
  if (counted > 0) {
    m.jerk_long /= counted;
    m.jerk_lat /= counted;
  }
  return ev;
}

MetricsReport evaluate(const NetworkCheckpoint & ckpt, std::span<const ScenarioSpec> general,
                       std::span<const ScenarioSpec> safety, const ActionVocabulary & vocab,
                       const SimParams & params)
{
  return evaluate_policy(checkpoint_policy(ckpt, vocab, params), general, safety, params).report;
}

nlohmann::json trajectory_plot_data(std::span<const ScenarioSpec> scenarios,
                                    std::span<const EpisodeLog> logs)
{
  nlohmann::json episodes = nlohmann::json::array();
  for (const auto & log : logs) {
    const auto it = std::find_if(scenarios.begin(), scenarios.end(),
                                 [&](const ScenarioSpec & s) { return s.id == log.scenario_id; });
    nlohmann::json route = nlohmann::json::array();
    if (it != scenarios.end()) {
      for (const auto & p : it->route.points()) route.push_back({p.x(), p.y()});
    }
    nlohmann::json path = nlohmann::json::array();
    for (const auto & s : log.steps) path.push_back({s.pose.x, s.pose.y});
    episodes.push_back({{"scenario_id", log.scenario_id},
                        {"terminal_event", to_string(log.terminal_event)},
                        {"route_progress", log.route_progress},
                        {"route", route},
                        {"ego", path}});
  }
  return {{"episodes", episodes}};
}

std::string_view to_string(AblationAxis axis)
{
  switch (axis) {
    case AblationAxis::Alpha: return "Alpha";
    case AblationAxis::RewardWeights: return "RewardWeights";
    case AblationAxis::Mixture: return "Mixture";
  }
  return "Alpha";
}

AblationAxis ablation_axis_from_string(std::string_view s)
{
  if (s == "Alpha" || s == "alpha") return AblationAxis::Alpha;
  if (s == "RewardWeights" || s == "reward") return AblationAxis::RewardWeights;
  if (s == "Mixture" || s == "mixture") return AblationAxis::Mixture;
  throw Error(ErrorCode::ConfigError, "unknown ablation axis '" + std::string(s) + "'");
}

AblationTable ablation_sweep(AblationAxis axis, std::span<const std::string> grid,
                             const AblationContext & ctx)
{
  if (grid.empty()) {
    throw Error(ErrorCode::EmptySet, "ablation grid is empty");
  }
  AblationTable table;
  table.axis = axis;
  std::map<std::string, OfflineDataset> datasets;
  for (const auto & point : grid) {
    std::vector<BehaviorPolicySpec> mixture = ctx.mixture;
    CollectConfig collect_cfg = ctx.collect;
    TrainConfig train_cfg = ctx.train;
    try {
      switch (axis) {
        case AblationAxis::Alpha:
          train_cfg.alpha = std::stod(point);
          break;
        case AblationAxis::RewardWeights: {
          const auto slash = point.find('/');
          if (slash == std::string::npos) {
            throw Error(ErrorCode::ConfigError, "reward grid entry needs w_imitation/C_event");
          }
          collect_cfg.reward.w_imitation = std::stod(point.substr(0, slash));
          const double c = std::stod(point.substr(slash + 1));
          collect_cfg.reward.c_collision = collect_cfg.reward.c_offroad =
            collect_cfg.reward.c_offroute = c;
          break;
        }
        case AblationAxis::Mixture:
          mixture = parse_mixture(point);
          break;
      }
    } catch (const std::logic_error &) {
      throw Error(ErrorCode::ConfigError, "malformed grid entry '" + point + "'");
    }
    train_cfg.validate();

    std::ostringstream key;
    key.precision(17);
    key << format_mixture(mixture) << '|' << collect_cfg.reward.w_imitation << '|'
        << collect_cfg.reward.w_event << '|' << collect_cfg.reward.c_collision << '|'
        << collect_cfg.reward.c_offroad << '|' << collect_cfg.reward.c_offroute;
    auto it = datasets.find(key.str());
    if (it == datasets.end()) {
      it = datasets
             .emplace(key.str(), collect(mixture, ctx.train_scenarios, ctx.vocab, ctx.logs,
                                         collect_cfg))
             .first;
    }
    const auto trained = train(it->second, ctx.vocab, train_cfg, collect_cfg.sim);

    AblationRow row;
    row.label = point;
    row.alpha = train_cfg.alpha;
    row.w_imitation = collect_cfg.reward.w_imitation;
    row.c_event = collect_cfg.reward.c_collision;
    row.mixture = format_mixture(mixture);
    row.metrics =
      evaluate(trained.checkpoint, ctx.general, ctx.safety, ctx.vocab, collect_cfg.sim);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string AblationTable::to_csv() const
{
  std::ostringstream ss;
  ss << "label,alpha,w_imitation,c_event,mixture,rc_general,cr_general,cr_safety,src,jsr,"
        "jerk_long,jerk_lat\n";
  for (const auto & r : rows) {
    ss << '"' << r.label << "\"," << fmt(r.alpha) << ',' << fmt(r.w_imitation) << ','
       << fmt(r.c_event) << ",\"" << r.mixture << "\"," << fmt(r.metrics.rc_general) << ','
       << fmt(r.metrics.cr_general) << ',' << fmt(r.metrics.cr_safety) << ','
       << fmt(r.metrics.src) << ',' << fmt(r.metrics.jsr) << ',' << fmt(r.metrics.jerk_long)
       << ',' << fmt(r.metrics.jerk_lat) << '\n';
  }
  return ss.str();
}

std::string AblationTable::scatter_csv() const
{
  std::ostringstream ss;
  ss << "label,rc_general,one_minus_cr_safety\n";
  for (const auto & r : rows) {
    ss << '"' << r.label << "\"," << fmt(r.metrics.rc_general) << ','
       << fmt(1.0 - r.metrics.cr_safety) << '\n';
  }
  return ss.str();
}

}  // namespace odrl
