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

#include "odrl/datasets.hpp"

#include "odrl/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace odrl
{

namespace
{

constexpr std::array<std::uint8_t, 4> kDatasetMagic{'O', 'D', 'R', 'L'};
constexpr std::uint32_t kDatasetVersion = 1;

Vec2 route_normal(const Polyline & route, double s)
{
  const double h = route.heading_at(s);
  return {-std::sin(h), std::cos(h)};
}

Vec2 route_tangent(const Polyline & route, double s)
{
  const double h = route.heading_at(s);
  return {std::cos(h), std::sin(h)};
}

/// Arclength of `p` along the route, extended linearly past both ends.
double extended_arclength(const Polyline & route, const Vec2 & p, const Projection & proj)
{
  if (proj.arclength >= route.length() && proj.segment_index + 1 == route.segment_count()) {
    return route.length() + (p - route.points().back()).dot(route_tangent(route, route.length()));
  }
  if (proj.arclength <= 0.0 && proj.segment_index == 0) {
    return (p - route.points().front()).dot(route_tangent(route, 0.0));
  }
  return proj.arclength;
}

struct Constraint
{
  double gap = 0.0;    ///< free distance before the stop point
  double speed = 0.0;  ///< obstacle speed along the route
};

}  // namespace

Trajectory scripted_expert(const ScenarioSpec & spec, const WorldState & world,
                           const SimParams & params, const ExpertConfig & cfg)
{
  const Polyline & route = spec.route;
  const Vec2 ego = world.ego_pose.position();
  const Projection proj = project_onto_polyline(ego, route);
  const double s0 = extended_arclength(route, ego, proj);
  const double lat0 = proj.lateral_offset;
  const double v0 = world.ego_speed;
  const double dt = params.dt;
  const int horizon = params.horizon;
  const double time = world.time(params);

  std::vector<Constraint> constraints;
  for (std::size_t i = 0; i < spec.agents.size() && i < world.agents.size(); ++i) {
    const AgentScript & agent = spec.agents[i];
    const Pose2D & pose = world.agents[i];
    const Projection ap = project_onto_polyline(pose.position(), route);
    const double sa = extended_arclength(route, pose.position(), ap);
    if (sa <= s0) continue;
    const double rel = pose.heading - route.heading_at(sa);
    const double c = std::abs(std::cos(rel));
    const double s = std::abs(std::sin(rel));
    const double along = agent.half_extents.x() * c + agent.half_extents.y() * s;
    const double across = agent.half_extents.x() * s + agent.half_extents.y() * c;
    const double reach = params.ego_half_extents.y() + across + cfg.corridor_margin;
    if (std::min(std::abs(ap.lateral_offset), std::abs(ap.lateral_offset - lat0)) > reach) continue;
    const double gap = sa - s0 - params.ego_half_extents.x() - along - cfg.stop_margin;
    if (gap >= cfg.lookahead) continue;
    const double u = std::max(0.0, agent.velocity_at(time).dot(route_tangent(route, sa)));
    constraints.push_back({gap, u});
  }

  std::vector<double> dist(static_cast<std::size_t>(horizon), 0.0);
  double v = v0;
  double travelled = 0.0;
  for (int k = 0; k < horizon; ++k) {
    const double t = (k + 1) * dt;
    v = v0 > cfg.cruise_speed ? std::max(cfg.cruise_speed, v - cfg.max_decel * dt)
                              : std::min(cfg.cruise_speed, v + cfg.accel * dt);
    double vk = v;
    for (const auto & con : constraints) {
      double vc = 0.0;
      if (con.gap > 0.0) {
        const double closing = v0 - con.speed;
        if (closing > 0.0) {
          const double decel = std::min(closing * closing / (2.0 * con.gap), cfg.max_decel);
          vc = std::max(con.speed, v0 - decel * t);
        } else {
          vc = con.speed;
        }
      } else {
        vc = std::max(0.0, v0 - cfg.max_decel * t);
      }
      vk = std::min(vk, vc);
    }
    travelled += vk * dt;
    dist[static_cast<std::size_t>(k)] = travelled;
  }

  Trajectory out(horizon);
  for (int k = 0; k < horizon; ++k) {
    const double sk = dist[static_cast<std::size_t>(k)];
    if (sk < 1e-6) {
      continue;
    }
    const double lat = lat0 * std::max(0.0, 1.0 - sk / cfg.lateral_convergence);
    const double s = s0 + sk;
    const Vec2 target = route.point_at(s) + lat * route_normal(route, s);
    out.point(k) = to_frame(target, world.ego_pose);
  }
  return out;
}

std::string BehaviorPolicySpec::label() const
{
  if (kind == BehaviorKind::Random) return "random";
  std::ostringstream ss;
  ss << "noisy" << sigma;
  return ss.str();
}

std::vector<BehaviorPolicySpec> parse_mixture(std::string_view text)
{
  std::vector<BehaviorPolicySpec> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    std::string item(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    pos = comma == std::string_view::npos ? text.size() + 1 : comma + 1;
    if (item.empty()) continue;
    BehaviorPolicySpec p;
    const auto colon = item.find(':');
    std::string name = item.substr(0, colon);
    auto number = [](const std::string & t) {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    };
    try {
      p.weight = colon == std::string::npos ? 1.0 : number(item.substr(colon + 1));
      if (name == "random") {
        p.kind = BehaviorKind::Random;
      } else if (name.rfind("noisy", 0) == 0) {
        p.kind = BehaviorKind::NoisyExpert;
        p.sigma = name.size() > 5 ? number(name.substr(5)) : 0.0;
      } else if (name == "expert") {
        p.kind = BehaviorKind::NoisyExpert;
        p.sigma = 0.0;
      } else {
        throw Error(ErrorCode::ConfigError, "unknown behavior policy '" + name + "'");
      }
    } catch (const std::logic_error &) {
      throw Error(ErrorCode::ConfigError, "malformed mixture entry '" + item + "'");
    }
    if (!(p.weight > 0.0) || !(p.sigma >= 0.0) || !std::isfinite(p.weight)) {
      throw Error(ErrorCode::ConfigError, "mixture weights must be positive and sigma >= 0");
    }
    out.push_back(p);
  }
  if (out.empty()) {
    throw Error(ErrorCode::EmptyMixture, "mixture has no entries");
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0,
                                       [](double a, const auto & p) { return a + p.weight; });
  for (auto & p : out) p.weight /= total;
  return out;
}

std::string format_mixture(std::span<const BehaviorPolicySpec> mixture)
{
  std::ostringstream ss;
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    if (i) ss << ',';
    ss << mixture[i].label() << ':' << mixture[i].weight;
  }
  return ss.str();
}

int behavior_action(const BehaviorPolicySpec & policy, const ScenarioSpec & spec,
                    const WorldState & world, const ActionVocabulary & vocab, Rng & rng,
                    const SimParams & params, const ExpertConfig & cfg)
{
  if (policy.kind == BehaviorKind::Random) {
    return static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab.size())));
  }
  Trajectory plan = scripted_expert(spec, world, params, cfg);
  if (policy.sigma > 0.0) {
    for (Eigen::Index t = 0; t < plan.horizon(); ++t) {
      // Draw order x then y keeps the stream layout fixed.
      const double nx = rng.normal();
      const double ny = rng.normal();
      plan.point(t) += policy.sigma * Vec2(nx, ny);
    }
  }
  return nearest_prototype(vocab, plan).index;
}

void RewardConfig::validate() const
{
  if (!std::isfinite(w_imitation) || !std::isfinite(w_event)) {
    throw Error(ErrorCode::ConfigError, "reward weights must be finite");
  }
  if (!(c_collision <= 0.0) || !(c_offroad <= 0.0) || !(c_offroute <= 0.0)) {
    throw Error(ErrorCode::ConfigError, "event penalties must be <= 0");
  }
}

double imitation_reward(const Trajectory & behavior, const Trajectory & reference)
{
  if (behavior.horizon() != reference.horizon() || behavior.horizon() < 1) {
    throw Error(ErrorCode::LengthMismatch, "trajectories must share a positive horizon");
  }
  return -(behavior.points() - reference.points()).colwise().squaredNorm().sum() /
         static_cast<double>(behavior.horizon());
}

double event_penalty(const EventSet & events, const RewardConfig & cfg)
{
  switch (events.primary()) {
    case TerminalEvent::Collision: return cfg.c_collision;
    case TerminalEvent::OffRoad: return cfg.c_offroad;
    case TerminalEvent::OffRoute: return cfg.c_offroute;
    default: return 0.0;
  }
}

nlohmann::json to_json(const DatasetManifest & m)
{
  nlohmann::json mixture = nlohmann::json::array();
  for (const auto & e : m.mixture) {
    mixture.push_back({{"kind", e.policy.kind == BehaviorKind::Random ? "Random" : "NoisyExpert"},
                       {"sigma", e.policy.sigma},
                       {"weight", e.policy.weight},
                       {"label", e.policy.label()},
                       {"episodes", e.episodes},
                       {"transitions", e.transitions}});
  }
  return {{"mixture", mixture},
          {"reward",
           {{"w_imitation", m.reward.w_imitation},
            {"w_event", m.reward.w_event},
            {"c_collision", m.reward.c_collision},
            {"c_offroad", m.reward.c_offroad},
            {"c_offroute", m.reward.c_offroute}}},
          {"seed", m.seed},
          {"suite_seeds", m.suite_seeds},
          {"episodes", m.episodes},
          {"obs_dim", m.obs_dim}};
}

DatasetManifest manifest_from_json(const nlohmann::json & j)
{
  DatasetManifest m;
  for (const auto & e : j.at("mixture")) {
    MixtureEntry entry;
    entry.policy.kind = e.at("kind").get<std::string>() == "Random" ? BehaviorKind::Random
                                                                    : BehaviorKind::NoisyExpert;
    entry.policy.sigma = e.at("sigma").get<double>();
    entry.policy.weight = e.at("weight").get<double>();
    entry.episodes = e.at("episodes").get<std::uint64_t>();
    entry.transitions = e.at("transitions").get<std::uint64_t>();
    m.mixture.push_back(entry);
  }
  const auto & r = j.at("reward");
  m.reward.w_imitation = r.at("w_imitation").get<double>();
  m.reward.w_event = r.at("w_event").get<double>();
  m.reward.c_collision = r.at("c_collision").get<double>();
  m.reward.c_offroad = r.at("c_offroad").get<double>();
  m.reward.c_offroute = r.at("c_offroute").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.suite_seeds = j.at("suite_seeds").get<std::vector<std::uint64_t>>();
  m.episodes = j.at("episodes").get<std::uint64_t>();
  m.obs_dim = j.at("obs_dim").get<int>();
  return m;
}

void require_vocabulary(const OfflineDataset & dataset, const ActionVocabulary & vocab)
{
  const Digest expected = vocab.digest();
  if (dataset.vocabulary_hash != expected) {
    throw Error(ErrorCode::HashMismatch, "dataset vocabulary " + to_hex(dataset.vocabulary_hash) +
                                           " != supplied vocabulary " + to_hex(expected));
  }
}

std::vector<std::uint64_t> allocate_episodes(std::span<const BehaviorPolicySpec> mixture,
                                             std::uint64_t total)
{
  if (mixture.empty()) {
    throw Error(ErrorCode::EmptyMixture, "mixture has no entries");
  }
  const double weight_sum = std::accumulate(
    mixture.begin(), mixture.end(), 0.0, [](double a, const auto & p) { return a + p.weight; });
  if (!(weight_sum > 0.0)) {
    throw Error(ErrorCode::EmptyMixture, "mixture weights sum to zero");
  }
  std::vector<std::uint64_t> counts(mixture.size());
  std::vector<double> remainders(mixture.size());
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    const double exact = static_cast<double>(total) * mixture[i].weight / weight_sum;
    // Nudge before flooring so exact multiples survive rounding of the weights.
    counts[i] = static_cast<std::uint64_t>(std::floor(exact + 1e-9));
    remainders[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(mixture.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

OfflineDataset collect(std::span<const BehaviorPolicySpec> mixture,
                       std::span<const ScenarioSpec> scenarios, const ActionVocabulary & vocab,
                       const std::map<std::string, ExpertLog> & logs, const CollectConfig & cfg)
{
  cfg.reward.validate();
  const auto counts = allocate_episodes(mixture, cfg.total_episodes);
  if (scenarios.empty()) {
    throw Error(ErrorCode::EmptySet, "no scenarios to collect from");
  }
  for (const auto & spec : scenarios) {
    const auto it = logs.find(spec.id);
    if (it == logs.end()) {
      throw Error(ErrorCode::MissingLabel, "no expert log for scenario " + spec.id);
    }
    if (it->second.horizon() != vocab.horizon()) {
      throw Error(ErrorCode::LengthMismatch, "expert log horizon differs from vocabulary");
    }
  }

  OfflineDataset ds;
  ds.vocabulary_hash = vocab.digest();
  ds.manifest.reward = cfg.reward;
  ds.manifest.seed = cfg.seed;
  ds.manifest.obs_dim = cfg.sim.observation_dim();
  for (const auto & spec : scenarios) ds.manifest.suite_seeds.push_back(spec.seed);

  std::uint32_t episode_id = 0;
  for (std::size_t p = 0; p < mixture.size(); ++p) {
    MixtureEntry entry{mixture[p], counts[p], 0};
    for (std::uint64_t e = 0; e < counts[p]; ++e, ++episode_id) {
      const ScenarioSpec & spec = scenarios[e % scenarios.size()];
      const ExpertLog & log = logs.at(spec.id);
      Rng rng(derive_seed(cfg.seed, "episode/" + std::to_string(episode_id)));
      WorldState world = build_world(spec, cfg.sim);
      Eigen::VectorXd obs = observe(spec, world, cfg.sim).flatten();
      std::uint32_t step_index = 0;
      while (!world.done) {
        const auto label = pseudo_expert_action(world.ego_pose, log, vocab);
        const int action =
          behavior_action(mixture[p], spec, world, vocab, rng, cfg.sim, cfg.expert);
        const Trajectory executed = vocab.prototype(action);
        StepResult result = step(spec, world, executed, cfg.sim);
        Transition tr;
        tr.obs = obs;
        tr.action_index = action;
        tr.reward = cfg.reward.w_imitation *
                      imitation_reward(executed, vocab.prototype(label.action_index)) +
                    cfg.reward.w_event * event_penalty(result.events, cfg.reward);
        tr.next_obs = observe(spec, result.world, cfg.sim).flatten();
        tr.done = result.world.done ? 1 : 0;
        tr.pseudo_expert_index = label.action_index;
        tr.episode_id = episode_id;
        tr.step_index = step_index++;
        tr.policy_tag = static_cast<std::uint16_t>(p);
        obs = tr.next_obs;
        ds.transitions.push_back(std::move(tr));
        world = std::move(result.world);
        ++entry.transitions;
      }
    }
    ds.manifest.mixture.push_back(entry);
  }
  ds.manifest.episodes = episode_id;
  return ds;
}

std::vector<std::uint8_t> serialize_dataset(const OfflineDataset & dataset)
{
  BinaryWriter w;
  w.put_bytes(kDatasetMagic);
  w.put(kDatasetVersion);
  w.put_bytes(dataset.vocabulary_hash);
  w.put_string(to_json(dataset.manifest).dump());
  w.put(static_cast<std::uint64_t>(dataset.transitions.size()));
  for (const auto & t : dataset.transitions) {
    if (t.obs.size() != t.next_obs.size()) {
      throw Error(ErrorCode::ShapeMismatch, "transition observation sizes differ");
    }
    BinaryWriter rec;
    rec.put(t.episode_id);
    rec.put(t.step_index);
    rec.put(t.policy_tag);
    rec.put(t.done);
    rec.put(static_cast<std::int32_t>(t.action_index));
    rec.put(static_cast<std::int32_t>(t.pseudo_expert_index));
    rec.put(t.reward);
    rec.put(static_cast<std::uint32_t>(t.obs.size()));
    rec.put_doubles(t.obs.data(), static_cast<std::size_t>(t.obs.size()));
    rec.put_doubles(t.next_obs.data(), static_cast<std::size_t>(t.next_obs.size()));
    w.put(static_cast<std::uint32_t>(rec.size()));
    w.put_bytes(rec.bytes());
  }
  const Digest checksum = sha256(w.bytes());
  w.put_bytes(checksum);
  return std::move(w.bytes());
}

OfflineDataset deserialize_dataset(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < kDatasetMagic.size() + 4 + 32 + 32) {
    throw Error(ErrorCode::CorruptFile, "dataset file too short");
  }
  const auto body = bytes.first(bytes.size() - 32);
  Digest stored{};
  std::copy(bytes.end() - 32, bytes.end(), stored.begin());
  if (sha256(body) != stored) {
    throw Error(ErrorCode::CorruptFile, "dataset checksum mismatch");
  }
  BinaryReader r(body);
  const auto magic = r.get_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kDatasetMagic.begin())) {
    throw Error(ErrorCode::CorruptFile, "bad dataset magic");
  }
  if (r.get<std::uint32_t>() != kDatasetVersion) {
    throw Error(ErrorCode::CorruptFile, "unsupported dataset version");
  }
  OfflineDataset ds;
  const auto hash = r.get_bytes(32);
  std::copy(hash.begin(), hash.end(), ds.vocabulary_hash.begin());
  try {
    ds.manifest = manifest_from_json(nlohmann::json::parse(r.get_string()));
  } catch (const nlohmann::json::exception & e) {
    throw Error(ErrorCode::CorruptFile, std::string("dataset manifest: ") + e.what());
  }
  const auto count = r.get<std::uint64_t>();
  if (count > r.remaining()) {
    throw Error(ErrorCode::CorruptFile, "record count exceeds file size");
  }
  ds.transitions.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = r.get<std::uint32_t>();
    BinaryReader rec(r.get_bytes(len));
    Transition t;
    t.episode_id = rec.get<std::uint32_t>();
    t.step_index = rec.get<std::uint32_t>();
    t.policy_tag = rec.get<std::uint16_t>();
    t.done = rec.get<std::uint8_t>();
    t.action_index = rec.get<std::int32_t>();
    t.pseudo_expert_index = rec.get<std::int32_t>();
    t.reward = rec.get<double>();
    const auto dim = rec.get<std::uint32_t>();
    if (static_cast<std::uint64_t>(dim) * 2 * sizeof(double) != rec.remaining()) {
      throw Error(ErrorCode::CorruptFile, "record length disagrees with observation size");
    }
    t.obs.resize(dim);
    t.next_obs.resize(dim);
    rec.get_doubles(t.obs.data(), dim);
    rec.get_doubles(t.next_obs.data(), dim);
    ds.transitions.push_back(std::move(t));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::CorruptFile, "trailing bytes after records");
  }
  return ds;
}

void write_dataset(const std::filesystem::path & path, const OfflineDataset & dataset)
{
  write_binary_file(path, serialize_dataset(dataset));
}

OfflineDataset read_dataset(const std::filesystem::path & path)
{
  const auto bytes = read_binary_file(path);
  return deserialize_dataset(bytes);
}

std::string dataset_to_jsonl(const OfflineDataset & dataset)
{
  std::string out;
  for (const auto & t : dataset.transitions) {
    nlohmann::json j = {{"episode_id", t.episode_id},
                        {"step_index", t.step_index},
                        {"policy_tag", t.policy_tag},
                        {"action_index", t.action_index},
                        {"pseudo_expert_index", t.pseudo_expert_index},
                        {"reward", t.reward},
                        {"done", t.done},
                        {"obs", std::vector<double>(t.obs.begin(), t.obs.end())},
                        {"next_obs", std::vector<double>(t.next_obs.begin(), t.next_obs.end())}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

ExpertLog record_expert_log(const ScenarioSpec & spec, const SimParams & params,
                            const ExpertConfig & cfg)
{
  const ScenarioSpec clean = spec.without_adversaries();
  WorldState world = build_world(clean, params);
  std::vector<TimedPose> poses{{world.time(params), world.ego_pose}};
  const double length = clean.route.length();
  const double run_out = cfg.cruise_speed * params.dt * params.horizon + 5.0;
  const int limit = clean.max_steps + params.horizon;
  int beyond = 0;
  for (int i = 0; i < limit; ++i) {
    const Trajectory plan = scripted_expert(clean, world, params, cfg);
    // The log keeps driving through terminal events so every waypoint gets a full future.
    world.done = false;
    world.terminal_event = TerminalEvent::None;
    world = step(clean, world, plan, params).world;
    poses.push_back({world.time(params), world.ego_pose});
    const Vec2 p = world.ego_pose.position();
    const double s = extended_arclength(clean.route, p, project_onto_polyline(p, clean.route));
    if (s >= length + run_out && ++beyond > params.horizon) {
      break;
    }
  }
  return make_expert_log(spec.id, poses, params.horizon);
}

std::vector<Trajectory> expert_trajectory_corpus(std::span<const ScenarioSpec> scenarios,
                                                 const SimParams & params,
                                                 const ExpertConfig & cfg, int perturbations,
                                                 std::uint64_t seed)
{
  std::vector<Trajectory> corpus;
  Rng rng(seed);
  for (const auto & spec : scenarios) {
    const ExpertLog log = record_expert_log(spec, params, cfg);
    corpus.insert(corpus.end(), log.futures.begin(), log.futures.end());
    for (int r = 0; r < perturbations; ++r) {
      WorldState world = build_world(spec, params);
      const double lateral = rng.uniform(-1.5, 1.5);
      const double heading = rng.uniform(-0.25, 0.25);
      world.ego_speed = rng.uniform(0.0, 10.0);
      const Vec2 shifted = world.ego_pose.position() + lateral * world.ego_pose.left();
      world.ego_pose = Pose2D(shifted.x(), shifted.y(), world.ego_pose.heading + heading);
      if (!detect_events(spec, world, params).empty()) continue;
      while (!world.done) {
        const Trajectory plan = scripted_expert(spec, world, params, cfg);
        corpus.push_back(plan);
        world = step(spec, world, plan, params).world;
      }
    }
  }
  return corpus;
}

}  // namespace odrl
