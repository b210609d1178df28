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

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace odrl;

namespace
{

ScenarioSpec straight_spec(const std::string & id, double length, int max_steps)
{
  ScenarioSpec s;
  s.id = id;
  s.route = Polyline({Vec2(0, 0), Vec2(length, 0)});
  s.max_steps = max_steps;
  return s;
}

Trajectory straight_action(double speed, const SimParams & p)
{
  Trajectory t(p.horizon);
  for (int k = 0; k < p.horizon; ++k) t.point(k) = Vec2(speed * p.dt * (k + 1), 0.0);
  return t;
}

/// Three prototypes: standing still, cruising straight at 5 m/s, bending left.
ActionVocabulary three_action_vocabulary(const SimParams & p)
{
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * p.horizon, 3);
  m.col(1) = straight_action(5.0, p).flat();
  for (int k = 0; k < p.horizon; ++k) {
    m(2 * k, 2) = 2.5 * (k + 1);
    m(2 * k + 1, 2) = 0.3 * (k + 1) * (k + 1);
  }
  return ActionVocabulary(m, 0, Digest{});
}

/// Checkpoint whose actor ignores its input and always prefers `action`.
NetworkCheckpoint constant_actor(const ActionVocabulary & vocab, int action, const SimParams & p)
{
  TrainConfig cfg;
  cfg.hidden = {8};
  auto ckpt = fresh_checkpoint(p.observation_dim(), vocab.size(), cfg, vocab.digest());
  auto & last = ckpt.actor.layers.back();
  last.weight.setZero();
  last.bias.setZero();
  last.bias[action] = 5.0;
  return ckpt;
}

EpisodeLog log_with_speeds(const std::vector<double> & speeds, const std::vector<double> & headings)
{
  EpisodeLog log;
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    StepRecord r;
    r.step_index = static_cast<int>(k);
    r.pose = Pose2D(0.0, 0.0, headings[k]);
    r.speed = speeds[k];
    log.steps.push_back(r);
  }
  return log;
}

EpisodeLog terminal_log(TerminalEvent e, double progress)
{
  EpisodeLog log;
  log.terminal_event = e;
  log.route_progress = progress;
  return log;
}

ScenarioSpec transform_spec(const ScenarioSpec & s, const Pose2D & rigid)
{
  ScenarioSpec out = s;
  std::vector<Vec2> pts;
  for (const auto & p : s.route.points()) pts.push_back(rigid.compose(Pose2D(p.x(), p.y(), 0)).position());
  out.route = Polyline(pts);
  for (auto & a : out.agents) {
    for (auto & tp : a.schedule) tp.pose = rigid.compose(tp.pose);
  }
  return out;
}

}  // namespace

TEST_CASE("greedy action breaks ties toward the lowest index")
{
  CHECK(greedy_action(Eigen::VectorXd::Constant(5, 0.3)) == 0);
  Eigen::VectorXd z(4);
  z << 0.1, 0.9, 0.9, -2.0;
  CHECK(greedy_action(z) == 1);
}

TEST_CASE("greedy action is invariant under positive affine maps of the logits")
{
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd z(12);
    for (auto & v : z) v = rng.uniform(-5.0, 5.0);
    const double scale = rng.uniform(0.1, 10.0);
    const double shift = rng.uniform(-50.0, 50.0);
    CHECK(greedy_action(z) == greedy_action((scale * z.array() + shift).matrix()));
  }
}

TEST_CASE("cruising policy completes an empty straight route")
{
  const SimParams p;
  const auto vocab = three_action_vocabulary(p);
  const auto ckpt = constant_actor(vocab, 1, p);
  const auto spec = straight_spec("straight", 100.0, 60);
  const auto log = run_episode(ckpt, spec, vocab, p);
  CHECK(log.terminal_event == TerminalEvent::RouteComplete);
  CHECK(log.route_progress >= 0.99);
  CHECK(route_completion(std::span(&log, 1)) >= 0.99);
  CHECK(run_episode(ckpt, spec, vocab, p) == log);
}

TEST_CASE("episode log invariants")
{
  const SimParams p;
  const auto vocab = three_action_vocabulary(p);
  const auto safety = generate_suite(Suite::SafetyCritical, 6, 3);
  for (int a = 0; a < 3; ++a) {
    const auto ckpt = constant_actor(vocab, a, p);
    for (const auto & spec : safety) {
      const auto log = run_episode(ckpt, spec, vocab, p);
      CHECK(log.terminal_event != TerminalEvent::None);
      CHECK(log.steps.front().action_index == -1);
      for (std::size_t k = 1; k < log.steps.size(); ++k) {
        CHECK(log.steps[k].route_progress >= log.steps[k - 1].route_progress);
        CHECK(log.steps[k].action_index == a);
      }
      CHECK(log.route_progress >= 0.0);
      CHECK(log.route_progress <= 1.0);
      std::istringstream lines(episode_log_to_jsonl(log));
      std::string line;
      std::size_t count = 0;
      while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.at("step_index").get<int>() == static_cast<int>(count));
        ++count;
      }
      CHECK(count == log.steps.size());
    }
  }
}

TEST_CASE("run_episode rejects a foreign vocabulary")
{
  const SimParams p;
  const auto vocab = three_action_vocabulary(p);
  auto ckpt = constant_actor(vocab, 1, p);
  ckpt.vocabulary_hash[0] ^= 0xff;
  try {
    run_episode(ckpt, straight_spec("s", 50.0, 30), vocab, p);
    FAIL("expected throw");
  } catch (const Error & e) {
    CHECK(e.code() == ErrorCode::HashMismatch);
  }
}

TEST_CASE("collision rate counts collision terminals")
{
  std::vector<EpisodeLog> logs(10, terminal_log(TerminalEvent::RouteComplete, 1.0));
  CHECK(collision_rate(logs) == 0.0);
  for (int i = 0; i < 3; ++i) logs[static_cast<std::size_t>(i)].terminal_event = TerminalEvent::Collision;
  CHECK(collision_rate(logs) == doctest::Approx(0.3).epsilon(1e-15));
  for (auto & l : logs) l.terminal_event = TerminalEvent::Collision;
  CHECK(collision_rate(logs) == 1.0);
  CHECK_THROWS_AS(collision_rate(std::span<const EpisodeLog>()), Error);
  CHECK_THROWS_AS(route_completion(std::span<const EpisodeLog>()), Error);
}

TEST_CASE("collision and non-collision terminals partition any log set")
{
  Rng rng(2);
  const TerminalEvent kinds[] = {TerminalEvent::Collision, TerminalEvent::OffRoad,
                                 TerminalEvent::OffRoute, TerminalEvent::Timeout,
                                 TerminalEvent::RouteComplete};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EpisodeLog> logs;
    const int n = 1 + static_cast<int>(rng.next_u64() % 30);
    int other = 0;
    for (int i = 0; i < n; ++i) {
      const auto e = kinds[rng.next_u64() % 5];
      other += e != TerminalEvent::Collision;
      logs.push_back(terminal_log(e, 0.5));
    }
    CHECK(collision_rate(logs) + static_cast<double>(other) / n == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("route completion at the start and at the midpoint")
{
  const SimParams p;
  const auto spec = straight_spec("mid", 100.0, 40);
  const auto standing = rollout(spec, [&](const ScenarioSpec &, const WorldState &, const Observation &) {
    return PolicyDecision{-1, Trajectory(p.horizon)};
  }, p);
  CHECK(standing.route_progress == 0.0);

  // 2.5 m per step for twenty steps, then stand still until the step budget runs out.
  const auto halted = rollout(spec, [&](const ScenarioSpec &, const WorldState & w, const Observation &) {
    if (w.step_index < 20) return PolicyDecision{-1, straight_action(5.0, p)};
    return PolicyDecision{-1, Trajectory(p.horizon)};
  }, p);
  CHECK(halted.terminal_event == TerminalEvent::Timeout);
  CHECK(std::abs(halted.route_progress - 0.5) < 1e-6);
  const std::vector<EpisodeLog> both{standing, halted};
  CHECK(std::abs(route_completion(both) - 0.25) < 1e-6);
}

TEST_CASE("route completion is invariant under rigid transformation")
{
  const SimParams p;
  const auto suite = generate_suite(Suite::General, 5, 4);
  Rng rng(5);
  for (const auto & spec : suite) {
    const Pose2D rigid(rng.uniform(-200, 200), rng.uniform(-200, 200), rng.uniform(-3.1, 3.1));
    const auto a = rollout(spec, scripted_expert_policy(p), p);
    const auto b = rollout(transform_spec(spec, rigid), scripted_expert_policy(p), p);
    CHECK(a.terminal_event == b.terminal_event);
    CHECK(std::abs(a.route_progress - b.route_progress) < 1e-6);
  }
}

TEST_CASE("jerk of constant velocity and of pure rotation")
{
  const double dt = 0.5;
  const auto flat = log_with_speeds(std::vector<double>(10, 4.0), std::vector<double>(10, 0.3));
  const auto j = jerk(flat, dt);
  CHECK(j.longitudinal == 0.0);
  CHECK(j.lateral == 0.0);

  std::vector<double> headings;
  for (int k = 0; k < 40; ++k) headings.push_back(0.2 * k);
  const auto turning = jerk(log_with_speeds(std::vector<double>(40, 5.0), headings), dt);
  CHECK(std::abs(turning.longitudinal) < 1e-9);
}

TEST_CASE("jerk of a cubic position profile approaches one")
{
  for (double dt : {0.1, 0.05, 0.01}) {
    std::vector<double> speeds;
    const int n = static_cast<int>(std::round(4.0 / dt));
    for (int k = 0; k <= n; ++k) {
      const double t = k * dt;
      speeds.push_back(t * t / 2.0);  // position t^3 / 6
    }
    const auto j = jerk(log_with_speeds(speeds, std::vector<double>(speeds.size(), 0.0)), dt);
    CHECK(std::abs(j.longitudinal - 1.0) < 2.0 * dt);
    CHECK(j.lateral == 0.0);
  }
  CHECK_THROWS_AS(jerk(log_with_speeds({1, 2, 3}, {0, 0, 0}), 0.5), Error);
}

TEST_CASE("unified metrics examples")
{
  const auto u = unified_metrics(0.528, 0.511, 0.299);
  CHECK(std::abs(100.0 * u.src - 37.0) < 0.05);
  CHECK(std::abs(100.0 * u.jsr - 34.3) < 0.05);
  CHECK(unified_metrics(1.0, 0.0, 0.0).src == 1.0);
  CHECK_THROWS_AS(unified_metrics(1.2, 0.0, 0.0), Error);
  CHECK_THROWS_AS(unified_metrics(0.5, -0.1, 0.0), Error);
  CHECK_THROWS_AS(unified_metrics(0.5, 0.1, std::nan("")), Error);
}

TEST_CASE("always-stop policy is safe and goes nowhere")
{
  const SimParams p;
  const auto vocab = three_action_vocabulary(p);
  const auto ckpt = constant_actor(vocab, 0, p);
  const auto general = generate_suite(Suite::General, 12, 6);
  const auto safety = generate_suite(Suite::SafetyCritical, 6, 7);
  const auto m = evaluate(ckpt, general, safety, vocab, p);
  CHECK(m.cr_general == 0.0);
  CHECK(m.cr_safety == 0.0);
  CHECK(m.rc_general < 0.02);
  CHECK(m.src < 0.02);
  CHECK(m.jsr == 1.0);
}

TEST_CASE("evaluation is deterministic and its report is consistent")
{
  const SimParams p;
  const auto vocab = three_action_vocabulary(p);
  const auto general = generate_suite(Suite::General, 137, 8);
  const auto safety = generate_suite(Suite::SafetyCritical, 20, 9);
  const BehaviorPolicySpec spec{BehaviorKind::NoisyExpert, 0.3, 1.0};
  const auto a = evaluate_policy(behavior_policy(spec, vocab, 10, p), general, safety, p);
  const auto b = evaluate_policy(behavior_policy(spec, vocab, 10, p), general, safety, p);
  CHECK(a.report == b.report);
  CHECK(a.report.summary_csv() == b.report.summary_csv());
  CHECK(a.report.breakdown_csv() == b.report.breakdown_csv());

  const auto & m = a.report;
  CHECK(m.breakdown.size() == 157);
  CHECK(std::abs(m.src - m.rc_general * (1.0 - m.cr_safety)) < 1e-12);
  CHECK(std::abs(m.jsr - (1.0 - m.cr_general) * (1.0 - m.cr_safety)) < 1e-12);
  CHECK(m.src <= m.rc_general);
  CHECK(m.jsr <= 1.0 - m.cr_safety);
  for (double v : {m.cr_general, m.cr_safety, m.rc_general, m.rc_safety}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  std::istringstream rows(m.breakdown_csv());
  std::string line;
  int count = 0;
  while (std::getline(rows, line)) ++count;
  CHECK(count == 158);

  const auto plot = trajectory_plot_data(general, a.general);
  CHECK(plot.at("episodes").size() == 137);
  CHECK(plot["episodes"][0]["ego"].size() == a.general[0].steps.size());
}

TEST_CASE("evaluation rejects empty suites")
{
  const SimParams p;
  const auto general = generate_suite(Suite::General, 2, 1);
  CHECK_THROWS_AS(evaluate_policy(scripted_expert_policy(p), general, {}, p), Error);
}

TEST_CASE("ablation sweep rows, consistency and determinism")
{
  const SimParams p;
  AblationContext ctx;
  ctx.train_scenarios = generate_suite(Suite::General, 4, 11);
  for (const auto & s : ctx.train_scenarios) ctx.logs[s.id] = record_expert_log(s, p);
  const auto corpus = expert_trajectory_corpus(ctx.train_scenarios, p, {}, 0, 1);
  ctx.vocab = kmeans_fit(corpus, 8, 20, 3);
  ctx.mixture = parse_mixture("noisy0.2:1,noisy0.4:1");
  ctx.collect.total_episodes = 4;
  ctx.collect.seed = 5;
  ctx.train.total_iters = 40;
  ctx.train.batch_size = 32;
  ctx.train.hidden = {16};
  ctx.general = generate_suite(Suite::General, 3, 12);
  ctx.safety = generate_suite(Suite::SafetyCritical, 3, 13);

  const std::vector<std::string> alphas{"0.0", "0.1", "0.2", "0.4", "1.0"};
  const auto table = ablation_sweep(AblationAxis::Alpha, alphas, ctx);
  REQUIRE(table.rows.size() == 5);
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    CHECK(table.rows[i].alpha == std::stod(alphas[i]));
  }
  CHECK(table.to_csv().rfind("label,alpha,w_imitation,c_event,mixture,rc_general", 0) == 0);
  CHECK(ablation_sweep(AblationAxis::Alpha, alphas, ctx).to_csv() == table.to_csv());

  const std::vector<std::string> one{"0.1"};
  const auto single = ablation_sweep(AblationAxis::Alpha, one, ctx);
  auto cfg = ctx.train;
  cfg.alpha = 0.1;
  const auto ds = collect(ctx.mixture, ctx.train_scenarios, ctx.vocab, ctx.logs, ctx.collect);
  const auto direct = evaluate(train(ds, ctx.vocab, cfg, p).checkpoint, ctx.general, ctx.safety, ctx.vocab, p);
  CHECK(single.rows.at(0).metrics == direct);

  const std::vector<std::string> rewards{"0.1/-10", "0.2/-20"};
  const auto rt = ablation_sweep(AblationAxis::RewardWeights, rewards, ctx);
  CHECK(rt.rows.at(1).w_imitation == 0.2);
  CHECK(rt.rows.at(1).c_event == -20.0);
  CHECK(rt.scatter_csv().rfind("label,rc_general,one_minus_cr_safety\n", 0) == 0);

  const std::vector<std::string> bad{"0.1-10"};
  CHECK_THROWS_AS(ablation_sweep(AblationAxis::RewardWeights, bad, ctx), Error);
  CHECK_THROWS_AS(ablation_sweep(AblationAxis::Alpha, std::span<const std::string>(), ctx), Error);
  CHECK_THROWS_AS(ablation_axis_from_string("Beta"), Error);
}
