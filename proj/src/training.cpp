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

#include "odrl/training.hpp"

#include "odrl/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace odrl
{

namespace
{

constexpr std::array<std::uint8_t, 4> kCheckpointMagic{'O', 'D', 'R', 'C'};
constexpr std::uint32_t kCheckpointVersion = 1;

double grad_norm(const Network & g) { return std::sqrt(g.squared_norm()); }

int sample_categorical(const Eigen::Ref<const Eigen::VectorXd> & probs, Rng & rng)
{
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size() - 1);
}

void check_indices(const Batch & batch, int actions, bool need_labels)
{
  for (int b = 0; b < batch.size(); ++b) {
    const int a = batch.actions[static_cast<std::size_t>(b)];
    if (a < 0 || a >= actions) {
      throw Error(ErrorCode::IndexOutOfRange, "action index " + std::to_string(a));
    }
    if (need_labels) {
      const int e = batch.pseudo_expert[static_cast<std::size_t>(b)];
      if (e < 0) {
        throw Error(ErrorCode::MissingLabel, "transition lacks a pseudo-expert label");
      }
      if (e >= actions) {
        throw Error(ErrorCode::IndexOutOfRange, "pseudo-expert index " + std::to_string(e));
      }
    }
  }
}

void put_optimizer(BinaryWriter & w, const OptimizerState<double> & s)
{
  put_mlp(w, s.m);
  put_mlp(w, s.v);
  w.put(s.step);
  w.put(s.base_lr);
  w.put(s.weight_decay);
  w.put(s.beta1);
  w.put(s.beta2);
  w.put(s.eps);
}

OptimizerState<double> get_optimizer(BinaryReader & r)
{
  OptimizerState<double> s;
  s.m = get_mlp(r);
  s.v = get_mlp(r);
  s.step = r.get<std::int64_t>();
  s.base_lr = r.get<double>();
  s.weight_decay = r.get<double>();
  s.beta1 = r.get<double>();
  s.beta2 = r.get<double>();
  s.eps = r.get<double>();
  return s;
}

}  // namespace

std::string_view to_string(TargetValueMode m)
{
  return m == TargetValueMode::Sampled ? "Sampled" : "Expected";
}

std::string_view to_string(RlObjectiveMode m)
{
  return m == RlObjectiveMode::ExactExpectation ? "ExactExpectation" : "Sampled";
}

TargetValueMode target_value_mode_from_string(std::string_view s)
{
  if (s == "Sampled") return TargetValueMode::Sampled;
  if (s == "Expected") return TargetValueMode::Expected;
  throw Error(ErrorCode::ConfigError, "unknown target value mode '" + std::string(s) + "'");
}

RlObjectiveMode rl_objective_mode_from_string(std::string_view s)
{
  if (s == "ExactExpectation") return RlObjectiveMode::ExactExpectation;
  if (s == "Sampled") return RlObjectiveMode::Sampled;
  throw Error(ErrorCode::ConfigError, "unknown RL objective mode '" + std::string(s) + "'");
}

void TrainConfig::validate() const
{
  if (!(gamma >= 0.0 && gamma < 1.0)) throw Error(ErrorCode::ConfigError, "gamma must be in [0,1)");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::ConfigError, "alpha must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::ConfigError, "batch_size must be >= 1");
  if (total_iters < 0 || pretrain_iters < 0) {
    throw Error(ErrorCode::ConfigError, "iteration counts must be >= 0");
  }
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::ConfigError, "tau must be in (0,1]");
  if (!(base_lr > 0.0) || !(weight_decay >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "learning rate must be > 0 and weight decay >= 0");
  }
  for (int w : hidden) {
    if (w < 1) throw Error(ErrorCode::ConfigError, "hidden widths must be positive");
  }
}

Eigen::VectorXd encode_observation(const Eigen::Ref<const Eigen::VectorXd> & raw,
                                   const SimParams & params)
{
  const int dim = params.observation_dim();
  if (raw.size() != dim) {
    throw Error(ErrorCode::ShapeMismatch, "observation width " + std::to_string(raw.size()) +
                                            " != " + std::to_string(dim));
  }
  Eigen::VectorXd out(dim);
  Eigen::Index i = 0;
  for (int r = 0; r < params.ray_count; ++r, ++i) out[i] = raw[i] / params.ray_max;
  out[i] = raw[i] / 10.0;
  ++i;
  out[i] = raw[i] / 4.0;
  ++i;
  out[i] = raw[i];
  ++i;
  for (int c = 0; c < 3; ++c, ++i) out[i] = raw[i] * 10.0;
  for (int a = 0; a < params.max_agents; ++a) {
    out[i] = raw[i] / params.ray_max;
    out[i + 1] = raw[i + 1] / params.ray_max;
    out[i + 2] = raw[i + 2] / 10.0;
    out[i + 3] = raw[i + 3] / 10.0;
    i += 4;
  }
  return out;
}

EncodedDataset EncodedDataset::from(const OfflineDataset & dataset, const SimParams & params)
{
  EncodedDataset e;
  const auto n = static_cast<Eigen::Index>(dataset.transitions.size());
  const int dim = params.observation_dim();
  e.obs.resize(dim, n);
  e.next_obs.resize(dim, n);
  e.rewards.resize(n);
  e.done.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto & t = dataset.transitions[static_cast<std::size_t>(i)];
    e.obs.col(i) = encode_observation(t.obs, params);
    e.next_obs.col(i) = encode_observation(t.next_obs, params);
    e.actions.push_back(t.action_index);
    e.pseudo_expert.push_back(t.pseudo_expert_index);
    e.rewards[i] = t.reward;
    e.done[i] = t.done;
  }
  return e;
}

Batch EncodedDataset::gather(std::span<const std::size_t> indices) const
{
  Batch b;
  const auto n = static_cast<Eigen::Index>(indices.size());
  b.obs.resize(obs.rows(), n);
  b.next_obs.resize(obs.rows(), n);
  b.rewards.resize(n);
  b.done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto i = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(j)]);
    b.obs.col(j) = obs.col(i);
    b.next_obs.col(j) = next_obs.col(i);
    b.actions.push_back(actions[static_cast<std::size_t>(i)]);
    b.pseudo_expert.push_back(pseudo_expert[static_cast<std::size_t>(i)]);
    b.rewards[j] = rewards[i];
    b.done[j] = done[i];
  }
  return b;
}

Eigen::VectorXd advantage(const Eigen::VectorXd & q_values, const Eigen::VectorXd & probs)
{
  if (q_values.size() != probs.size()) {
    throw Error(ErrorCode::LengthMismatch, "q-values and probabilities differ in length");
  }
  return q_values.array() - probs.dot(q_values);
}

CriticLossResult critic_loss_for_targets(const Batch & batch, const Network & critic,
                                         const Eigen::VectorXd & targets)
{
  if (batch.size() < 1) {
    throw Error(ErrorCode::EmptySet, "empty batch");
  }
  check_indices(batch, critic.output_dim(), false);
  const auto fwd = forward(critic, batch.obs);
  const double n = batch.size();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(fwd.output.rows(), fwd.output.cols());
  CriticLossResult out;
  for (int b = 0; b < batch.size(); ++b) {
    const int a = batch.actions[static_cast<std::size_t>(b)];
    const double e = fwd.output(a, b) - targets[b];
    out.loss += e * e / n;
    grad(a, b) = 2.0 * e / n;
  }
  out.gradients = backward(critic, fwd.tape, grad);
  out.targets = targets;
  return out;
}

Eigen::VectorXd td_targets(const Batch & batch, const Network & actor_target,
                           const Network & critic_target, const TrainConfig & cfg, Rng & rng)
{
  const Eigen::MatrixXd q_next = predict(critic_target, batch.next_obs);
  const Eigen::MatrixXd pi_next = softmax_columns<double>(predict(actor_target, batch.next_obs));
  Eigen::VectorXd y(batch.size());
  for (int b = 0; b < batch.size(); ++b) {
    double bootstrap = 0.0;
    if (cfg.target_value_mode == TargetValueMode::Sampled) {
      bootstrap = q_next(sample_categorical(pi_next.col(b), rng), b);
    } else {
      bootstrap = pi_next.col(b).dot(q_next.col(b));
    }
    y[b] = batch.done[b] != 0.0 ? batch.rewards[b]
                                : batch.rewards[b] + cfg.gamma * bootstrap;
  }
  return y;
}

CriticLossResult critic_loss(const Batch & batch, const Network & actor_target,
                             const Network & critic, const Network & critic_target,
                             const TrainConfig & cfg, Rng & rng)
{
  if (batch.size() < 1) {
    throw Error(ErrorCode::EmptySet, "empty batch");
  }
  check_indices(batch, critic.output_dim(), false);
  return critic_loss_for_targets(batch, critic, td_targets(batch, actor_target, critic_target, cfg, rng));
}

ActorLossResult actor_loss(const Batch & batch, const Network & actor, const Network & critic,
                           const TrainConfig & cfg, Rng & rng)
{
  if (batch.size() < 1) {
    throw Error(ErrorCode::EmptySet, "empty batch");
  }
  check_indices(batch, actor.output_dim(), true);
  const auto fwd = forward(actor, batch.obs);
  const Eigen::MatrixXd probs = softmax_columns<double>(fwd.output);
  const Eigen::MatrixXd log_probs = log_softmax_columns<double>(fwd.output);
  const int k = actor.output_dim();
  const double n = batch.size();

  ActorLossResult out;
  out.rl_weights = Eigen::MatrixXd::Zero(k, batch.size());
  if (cfg.use_rl_objective) {
    const Eigen::MatrixXd q = predict(critic, batch.obs);
    for (int b = 0; b < batch.size(); ++b) {
      const Eigen::VectorXd adv = advantage(q.col(b), probs.col(b));
      out.mean_abs_advantage += adv.cwiseAbs().dot(probs.col(b)) / n;
      out.max_abs_weighted_advantage =
        std::max(out.max_abs_weighted_advantage, std::abs(probs.col(b).dot(adv)));
      if (cfg.rl_objective_mode == RlObjectiveMode::ExactExpectation) {
        out.rl_weights.col(b) = probs.col(b).cwiseProduct(adv);
      } else {
        const int a = sample_categorical(probs.col(b), rng);
        out.rl_weights(a, b) = adv[a];
      }
    }
  }

  Eigen::MatrixXd grad(k, batch.size());
  for (int b = 0; b < batch.size(); ++b) {
    const auto c = out.rl_weights.col(b);
    const int e = batch.pseudo_expert[static_cast<std::size_t>(b)];
    out.rl_term -= c.dot(log_probs.col(b)) / n;
    out.bc_term -= cfg.alpha * log_probs(e, b) / n;
    // d/dz_j of -sum_k c_k log pi_k  =  -c_j + pi_j sum_k c_k
    grad.col(b) = (-c + probs.col(b) * c.sum()) / n;
    grad.col(b) += cfg.alpha * probs.col(b) / n;
    grad(e, b) -= cfg.alpha / n;
  }
  out.loss = out.rl_term + out.bc_term;
  out.gradients = backward(actor, fwd.tape, grad);
  return out;
}

double actor_surrogate(const Batch & batch, const Network & actor,
                       const Eigen::MatrixXd & rl_weights, double alpha)
{
  const Eigen::MatrixXd log_probs = log_softmax_columns<double>(predict(actor, batch.obs));
  double loss = 0.0;
  for (int b = 0; b < batch.size(); ++b) {
    loss -= rl_weights.col(b).dot(log_probs.col(b));
    loss -= alpha * log_probs(batch.pseudo_expert[static_cast<std::size_t>(b)], b);
  }
  return loss / batch.size();
}

NetworkCheckpoint fresh_checkpoint(int obs_dim, int actions, const TrainConfig & cfg,
                                   const Digest & vocabulary_hash)
{
  std::vector<int> widths{obs_dim};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(actions);
  Rng rng(derive_seed(cfg.seed, "init"));
  NetworkCheckpoint c;
  c.actor = Network::he_uniform(widths, rng, 0.1);
  c.critic = Network::he_uniform(widths, rng, 0.1);
  c.actor_target = {c.actor, cfg.tau};
  c.critic_target = {c.critic, cfg.tau};
  c.actor_opt = OptimizerState<double>::for_params(c.actor, cfg.base_lr, cfg.weight_decay);
  c.critic_opt = OptimizerState<double>::for_params(c.critic, cfg.base_lr, cfg.weight_decay);
  c.vocabulary_hash = vocabulary_hash;
  return c;
}

std::vector<std::uint8_t> serialize_checkpoint(const NetworkCheckpoint & ckpt)
{
  BinaryWriter w;
  w.put_bytes(kCheckpointMagic);
  w.put(kCheckpointVersion);
  w.put_bytes(ckpt.vocabulary_hash);
  w.put(ckpt.step);
  put_mlp(w, ckpt.actor);
  put_mlp(w, ckpt.critic);
  put_mlp(w, ckpt.actor_target.params);
  w.put(ckpt.actor_target.tau);
  put_mlp(w, ckpt.critic_target.params);
  w.put(ckpt.critic_target.tau);
  put_optimizer(w, ckpt.actor_opt);
  put_optimizer(w, ckpt.critic_opt);
  const Digest checksum = sha256(w.bytes());
  w.put_bytes(checksum);
  return std::move(w.bytes());
}

NetworkCheckpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < 4 + 4 + 32 + 32) {
    throw Error(ErrorCode::CorruptFile, "checkpoint too short");
  }
  const auto body = bytes.first(bytes.size() - 32);
  Digest stored{};
  std::copy(bytes.end() - 32, bytes.end(), stored.begin());
  if (sha256(body) != stored) {
    throw Error(ErrorCode::CorruptFile, "checkpoint checksum mismatch");
  }
  BinaryReader r(body);
  const auto magic = r.get_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kCheckpointMagic.begin())) {
    throw Error(ErrorCode::CorruptFile, "bad checkpoint magic");
  }
  if (r.get<std::uint32_t>() != kCheckpointVersion) {
    throw Error(ErrorCode::CorruptFile, "unsupported checkpoint version");
  }
  NetworkCheckpoint c;
  const auto hash = r.get_bytes(32);
  std::copy(hash.begin(), hash.end(), c.vocabulary_hash.begin());
  c.step = r.get<std::int64_t>();
  c.actor = get_mlp(r);
  c.critic = get_mlp(r);
  c.actor_target.params = get_mlp(r);
  c.actor_target.tau = r.get<double>();
  c.critic_target.params = get_mlp(r);
  c.critic_target.tau = r.get<double>();
  c.actor_opt = get_optimizer(r);
  c.critic_opt = get_optimizer(r);
  if (r.remaining() != 0) {
    throw Error(ErrorCode::CorruptFile, "trailing bytes in checkpoint");
  }
  if (!c.actor.same_shape(c.actor_target.params) || !c.critic.same_shape(c.critic_target.params)) {
    throw Error(ErrorCode::CorruptFile, "target shapes disagree with online networks");
  }
  return c;
}

void write_checkpoint(const std::filesystem::path & path, const NetworkCheckpoint & ckpt)
{
  write_binary_file(path, serialize_checkpoint(ckpt));
}

NetworkCheckpoint read_checkpoint(const std::filesystem::path & path)
{
  const auto bytes = read_binary_file(path);
  return deserialize_checkpoint(bytes);
}

void require_vocabulary(const NetworkCheckpoint & ckpt, const ActionVocabulary & vocab)
{
  const Digest expected = vocab.digest();
  if (ckpt.vocabulary_hash != expected) {
    throw Error(ErrorCode::HashMismatch, "checkpoint vocabulary " + to_hex(ckpt.vocabulary_hash) +
                                           " != supplied vocabulary " + to_hex(expected));
  }
  if (ckpt.actor.output_dim() != vocab.size()) {
    throw Error(ErrorCode::HashMismatch, "checkpoint action count differs from vocabulary");
  }
}

std::string TrainingLog::to_csv() const
{
  std::ostringstream ss;
  ss.precision(17);
  ss << "iteration,critic_loss,actor_loss,rl_term,bc_term,mean_abs_advantage,lr,"
        "critic_grad_norm,actor_grad_norm\n";
  for (const auto & r : rows) {
    ss << r.iteration << ',' << r.critic_loss << ',' << r.actor_loss << ',' << r.rl_term << ','
       << r.bc_term << ',' << r.mean_abs_advantage << ',' << r.lr << ',' << r.critic_grad_norm
       << ',' << r.actor_grad_norm << '\n';
  }
  return ss.str();
}

double relative_error(double analytic, double numeric)
{
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

namespace
{

/// ReLU on/off pattern of every hidden unit over a batch.
std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> activation_pattern(
  const Network & net, const Eigen::MatrixXd & obs)
{
  std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> out;
  const auto fwd = forward(net, obs);
  for (std::size_t l = 0; l + 1 < fwd.tape.pre.size(); ++l) out.push_back(fwd.tape.pre[l].array() > 0.0);
  return out;
}

bool same_pattern(const Network & a, const Network & b, const Eigen::MatrixXd & obs)
{
  const auto pa = activation_pattern(a, obs);
  const auto pb = activation_pattern(b, obs);
  for (std::size_t l = 0; l < pa.size(); ++l) {
    if ((pa[l] != pb[l]).any()) return false;
  }
  return true;
}

/// Worst relative error over parameters whose +/- h probes keep the ReLU pattern;
/// a probe that flips a unit straddles a kink where the derivative is undefined.
template <typename Loss>
double check_parameters(const Network & net, const Network & grads, const Eigen::MatrixXd & obs,
                        double h, Loss && loss, int & skipped)
{
  Network probe = net;
  std::vector<double> analytic;
  Network g = grads;
  g.for_each_parameter([&](std::size_t, double & v) { analytic.push_back(v); });
  double worst = 0.0;
  probe.for_each_parameter([&](std::size_t i, double & v) {
    const double saved = v;
    v = saved + h;
    const double up = loss(probe);
    const bool up_same = same_pattern(probe, net, obs);
    v = saved - h;
    const double down = loss(probe);
    const bool down_same = same_pattern(probe, net, obs);
    v = saved;
    if (!up_same || !down_same) {
      ++skipped;
      return;
    }
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * h)));
  });
  return worst;
}

}  // namespace

GradientCheck finite_difference_check(const Batch & batch, const NetworkCheckpoint & nets,
                                      const TrainConfig & cfg, std::uint64_t seed, double h)
{
  GradientCheck out;
  Rng rng(seed);
  const auto critic = critic_loss(batch, nets.actor_target.params, nets.critic,
                                  nets.critic_target.params, cfg, rng);
  out.critic_max_rel_error =
    check_parameters(nets.critic, critic.gradients, batch.obs, h, [&](const Network & n) {
      return critic_loss_for_targets(batch, n, critic.targets).loss;
    }, out.skipped);
  const auto actor = actor_loss(batch, nets.actor, nets.critic, cfg, rng);
  out.actor_max_rel_error =
    check_parameters(nets.actor, actor.gradients, batch.obs, h, [&](const Network & n) {
      return actor_surrogate(batch, n, actor.rl_weights, cfg.alpha);
    }, out.skipped);
  return out;
}

namespace
{

void sample_indices(std::vector<std::size_t> & idx, std::size_t n, Rng & rng)
{
  for (auto & i : idx) i = static_cast<std::size_t>(rng.below(n));
}

bool finite(const Network & g) { return g.all_finite(); }

}  // namespace

NetworkCheckpoint pretrain_bc(const EncodedDataset & data, NetworkCheckpoint init,
                              const TrainConfig & cfg)
{
  TrainConfig bc = cfg;
  bc.use_rl_objective = false;
  bc.alpha = 1.0;
  Rng rng(derive_seed(cfg.seed, "pretrain"));
  auto opt = OptimizerState<double>::for_params(init.actor, cfg.pretrain_lr, cfg.weight_decay);
  std::vector<std::size_t> idx(static_cast<std::size_t>(cfg.batch_size));
  for (std::int64_t it = 0; it < cfg.pretrain_iters; ++it) {
    sample_indices(idx, data.size(), rng);
    const Batch batch = data.gather(idx);
    const auto res = actor_loss(batch, init.actor, init.critic, bc, rng);
    if (!std::isfinite(res.loss) || !finite(res.gradients)) {
      throw TrainingAborted("non-finite loss during pretraining", init);
    }
    optimizer_step(init.actor, res.gradients, opt,
                   cosine_lr(it, cfg.pretrain_iters, cfg.pretrain_lr));
  }
  init.actor_target.params = init.actor;
  return init;
}

TrainResult train(const OfflineDataset & dataset, const ActionVocabulary & vocab,
                  const TrainConfig & cfg, const SimParams & params,
                  std::optional<NetworkCheckpoint> init, const CheckpointCallback & on_checkpoint)
{
  cfg.validate();
  require_vocabulary(dataset, vocab);
  if (dataset.transitions.empty()) {
    throw Error(ErrorCode::EmptySet, "dataset has no transitions");
  }
  const EncodedDataset data = EncodedDataset::from(dataset, params);

  TrainResult out;
  if (init) {
    require_vocabulary(*init, vocab);
    out.checkpoint = std::move(*init);
  } else {
    out.checkpoint = fresh_checkpoint(params.observation_dim(), vocab.size(), cfg, vocab.digest());
    if (cfg.pretrain_iters > 0) {
      out.checkpoint = pretrain_bc(data, std::move(out.checkpoint), cfg);
    }
  }
  if (cfg.total_iters == 0) {
    return out;
  }

  NetworkCheckpoint & net = out.checkpoint;
  net.actor_target.tau = cfg.tau;
  net.critic_target.tau = cfg.tau;
  net.actor_opt.base_lr = net.critic_opt.base_lr = cfg.base_lr;
  net.actor_opt.weight_decay = net.critic_opt.weight_decay = cfg.weight_decay;

  Rng rng(derive_seed(cfg.seed, "train"));
  std::vector<std::size_t> idx(static_cast<std::size_t>(cfg.batch_size));
  out.log.rows.reserve(static_cast<std::size_t>(cfg.total_iters));

  for (std::int64_t it = 0; it < cfg.total_iters; ++it) {
    sample_indices(idx, data.size(), rng);
    const Batch batch = data.gather(idx);
    const double lr = cosine_lr(it, cfg.total_iters, cfg.base_lr);

    if (cfg.gradcheck_interval > 0 && it % cfg.gradcheck_interval == 0) {
      const auto check = finite_difference_check(batch, net, cfg, rng.next_u64());
      if (check.critic_max_rel_error >= 1e-5 || check.actor_max_rel_error >= 1e-5) {
        throw Error(ErrorCode::NonFiniteLoss,
                    "gradient check failed at iteration " + std::to_string(it) + " (critic " + std::to_string(check.critic_max_rel_error) + ", actor " + std::to_string(check.actor_max_rel_error) + ")");
      }
    }

    TrainingLogRow row;
    row.iteration = it;
    row.lr = lr;
    if (cfg.use_rl_objective) {
      const auto critic = critic_loss(batch, net.actor_target.params, net.critic,
                                      net.critic_target.params, cfg, rng);
      if (!std::isfinite(critic.loss) || !finite(critic.gradients)) {
        throw TrainingAborted("non-finite critic loss at iteration " + std::to_string(it),
                              net);
      }
      optimizer_step(net.critic, critic.gradients, net.critic_opt, lr);
      row.critic_loss = critic.loss;
      row.critic_grad_norm = grad_norm(critic.gradients);
    }
    const auto actor = actor_loss(batch, net.actor, net.critic, cfg, rng);
    if (!std::isfinite(actor.loss) || !finite(actor.gradients)) {
      throw TrainingAborted("non-finite actor loss at iteration " + std::to_string(it), net);
    }
    optimizer_step(net.actor, actor.gradients, net.actor_opt, lr);
    ema_update(net.actor_target, net.actor);
    ema_update(net.critic_target, net.critic);
    ++net.step;

    row.actor_loss = actor.loss;
    row.rl_term = actor.rl_term;
    row.bc_term = actor.bc_term;
    row.mean_abs_advantage = actor.mean_abs_advantage;
    row.actor_grad_norm = grad_norm(actor.gradients);
    out.log.rows.push_back(row);

    if (cfg.checkpoint_interval > 0 && (it + 1) % cfg.checkpoint_interval == 0 && on_checkpoint) {
      on_checkpoint(net);
    }
  }
  return out;
}

}  // namespace odrl
