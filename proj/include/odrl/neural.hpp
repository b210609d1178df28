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

#ifndef ODRL__NEURAL_HPP_
#define ODRL__NEURAL_HPP_

#include "odrl/common.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace odrl
{

class BinaryWriter;
class BinaryReader;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Layer
{
  MatrixX<Scalar> weight;  ///< out x in
  VectorX<Scalar> bias;

  bool operator==(const Layer & o) const
  {
    return weight.rows() == o.weight.rows() && weight.cols() == o.weight.cols() &&
           weight == o.weight && bias.size() == o.bias.size() && bias == o.bias;
  }
};

/// Fully connected network: ReLU after every layer except the last.
///
/// The same type holds parameters, gradients and optimizer moments.
template <typename Scalar>
struct Mlp
{
  std::vector<Layer<Scalar>> layers;

  static Mlp zeros(std::span<const int> widths)
  {
    if (widths.size() < 2) {
      throw Error(ErrorCode::ShapeMismatch, "an MLP needs at least input and output widths");
    }
    Mlp m;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      if (widths[l] < 1 || widths[l + 1] < 1) {
        throw Error(ErrorCode::ShapeMismatch, "layer widths must be positive");
      }
      m.layers.push_back({MatrixX<Scalar>::Zero(widths[l + 1], widths[l]),
                          VectorX<Scalar>::Zero(widths[l + 1])});
    }
    return m;
  }

  /// He-uniform weights, zero biases; the last layer is scaled by `output_scale`.
  static Mlp he_uniform(std::span<const int> widths, Rng & rng, Scalar output_scale = Scalar(1))
  {
    Mlp m = zeros(widths);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      auto & w = m.layers[l].weight;
      const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
      const Scalar scale = l + 1 == m.layers.size() ? output_scale : Scalar(1);
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          w(r, c) = scale * static_cast<Scalar>(rng.uniform(-bound, bound));
        }
      }
    }
    return m;
  }

  Mlp zeros_like() const
  {
    Mlp m;
    for (const auto & layer : layers) {
      m.layers.push_back({MatrixX<Scalar>::Zero(layer.weight.rows(), layer.weight.cols()),
                          VectorX<Scalar>::Zero(layer.bias.size())});
    }
    return m;
  }

  std::vector<int> widths() const
  {
    std::vector<int> w;
    if (layers.empty()) return w;
    w.push_back(static_cast<int>(layers.front().weight.cols()));
    for (const auto & layer : layers) w.push_back(static_cast<int>(layer.weight.rows()));
    return w;
  }

  int input_dim() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().weight.rows()); }

  std::size_t parameter_count() const
  {
    std::size_t n = 0;
    for (const auto & layer : layers) {
      n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
    }
    return n;
  }

  bool same_shape(const Mlp & o) const
  {
    if (layers.size() != o.layers.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      if (layers[l].weight.rows() != o.layers[l].weight.rows() ||
          layers[l].weight.cols() != o.layers[l].weight.cols() ||
          layers[l].bias.size() != o.layers[l].bias.size()) {
        return false;
      }
    }
    return true;
  }

  bool all_finite() const
  {
    for (const auto & layer : layers) {
      if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
    }
    return true;
  }

  Scalar squared_norm() const
  {
    Scalar s(0);
    for (const auto & layer : layers) s += layer.weight.squaredNorm() + layer.bias.squaredNorm();
    return s;
  }

  /// Visits every scalar parameter with a flat index.
  template <typename F>
  void for_each_parameter(F && f)
  {
    std::size_t idx = 0;
    for (auto & layer : layers) {
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) f(idx++, layer.weight.data()[i]);
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) f(idx++, layer.bias.data()[i]);
    }
  }

  bool operator==(const Mlp & o) const { return layers == o.layers; }
};

template <typename Scalar>
void require_same_shape(const Mlp<Scalar> & a, const Mlp<Scalar> & b, const char * what)
{
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": parameter shapes differ");
  }
}

/// Activations recorded by forward() for the backward pass.
template <typename Scalar>
struct Tape
{
  std::vector<MatrixX<Scalar>> inputs;  ///< input of each layer (post-activation of the previous)
  std::vector<MatrixX<Scalar>> pre;     ///< pre-activation of each layer
};

template <typename Scalar>
struct ForwardResult
{
  MatrixX<Scalar> output;  ///< out x batch
  Tape<Scalar> tape;
};

/// Batched forward pass; columns of `input` are samples.
template <typename Scalar>
ForwardResult<Scalar> forward(const Mlp<Scalar> & params, const MatrixX<Scalar> & input)
{
  if (params.layers.empty() || input.rows() != params.input_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "input width " + std::to_string(input.rows()) +
                                            " does not match the first layer");
  }
  ForwardResult<Scalar> out;
  MatrixX<Scalar> x = input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto & layer = params.layers[l];
    MatrixX<Scalar> z = layer.weight * x;
    z.colwise() += layer.bias;
    out.tape.inputs.push_back(std::move(x));
    if (l + 1 < params.layers.size()) {
      x = z.cwiseMax(Scalar(0));
    } else {
      x = z;
    }
    out.tape.pre.push_back(std::move(z));
  }
  out.output = std::move(x);
  return out;
}

/// Forward pass without keeping the tape.
template <typename Scalar>
MatrixX<Scalar> predict(const Mlp<Scalar> & params, const MatrixX<Scalar> & input)
{
  if (params.layers.empty() || input.rows() != params.input_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "input width does not match the first layer");
  }
  MatrixX<Scalar> x = input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    MatrixX<Scalar> z = params.layers[l].weight * x;
    z.colwise() += params.layers[l].bias;
    x = l + 1 < params.layers.size() ? MatrixX<Scalar>(z.cwiseMax(Scalar(0))) : z;
  }
  return x;
}

/// Gradients of sum(output .* output_gradient) with respect to every parameter.
template <typename Scalar>
Mlp<Scalar> backward(const Mlp<Scalar> & params, const Tape<Scalar> & tape,
                     const MatrixX<Scalar> & output_gradient)
{
  const std::size_t n = params.layers.size();
  if (tape.inputs.size() != n || tape.pre.size() != n ||
      output_gradient.rows() != params.output_dim() ||
      output_gradient.cols() != tape.pre.back().cols()) {
    throw Error(ErrorCode::ShapeMismatch, "tape or output gradient does not match the network");
  }
  Mlp<Scalar> grads;
  grads.layers.resize(n);
  MatrixX<Scalar> delta = output_gradient;
  for (std::size_t l = n; l-- > 0;) {
    grads.layers[l].weight = delta * tape.inputs[l].transpose();
    grads.layers[l].bias = delta.rowwise().sum();
    if (l > 0) {
      delta = (params.layers[l].weight.transpose() * delta)
                .cwiseProduct((tape.pre[l - 1].array() > Scalar(0)).template cast<Scalar>().matrix());
    }
  }
  return grads;
}

template <typename Scalar>
VectorX<Scalar> softmax(const VectorX<Scalar> & logits)
{
  VectorX<Scalar> e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

/// Column-wise softmax.
template <typename Scalar>
MatrixX<Scalar> softmax_columns(const MatrixX<Scalar> & logits)
{
  MatrixX<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    out.col(c) = softmax<Scalar>(logits.col(c));
  }
  return out;
}

/// Column-wise log-softmax.
template <typename Scalar>
MatrixX<Scalar> log_softmax_columns(const MatrixX<Scalar> & logits)
{
  MatrixX<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const Scalar m = logits.col(c).maxCoeff();
    const Scalar lse = m + std::log((logits.col(c).array() - m).exp().sum());
    out.col(c) = logits.col(c).array() - lse;
  }
  return out;
}

/// Decoupled-weight-decay Adam state.
template <typename Scalar>
struct OptimizerState
{
  Mlp<Scalar> m;
  Mlp<Scalar> v;
  std::int64_t step = 0;
  Scalar base_lr = Scalar(3e-5);
  Scalar weight_decay = Scalar(0.01);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  static OptimizerState for_params(const Mlp<Scalar> & params, Scalar base_lr = Scalar(3e-5),
                                   Scalar weight_decay = Scalar(0.01))
  {
    OptimizerState s;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    s.base_lr = base_lr;
    s.weight_decay = weight_decay;
    return s;
  }

  bool operator==(const OptimizerState &) const = default;
};

template <typename Scalar>
void optimizer_step(Mlp<Scalar> & params, const Mlp<Scalar> & grads, OptimizerState<Scalar> & state,
                    Scalar lr)
{
  require_same_shape(params, grads, "optimizer_step");
  require_same_shape(params, state.m, "optimizer_step");
  require_same_shape(params, state.v, "optimizer_step");
  ++state.step;
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, static_cast<Scalar>(state.step));
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, static_cast<Scalar>(state.step));
  const Scalar decay = Scalar(1) - lr * state.weight_decay;
  auto update = [&](auto & p, const auto & g, auto & m, auto & v) {
    p *= decay;
    m = state.beta1 * m + (Scalar(1) - state.beta1) * g;
    v = state.beta2 * v + (Scalar(1) - state.beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, grads.layers[l].weight, state.m.layers[l].weight,
           state.v.layers[l].weight);
    update(params.layers[l].bias, grads.layers[l].bias, state.m.layers[l].bias,
           state.v.layers[l].bias);
  }
}

inline double cosine_lr(std::int64_t step, std::int64_t total_steps, double base_lr)
{
  if (total_steps <= 0) return base_lr;
  return base_lr * 0.5 *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) /
                         static_cast<double>(total_steps)));
}

template <typename Scalar>
struct TargetParams
{
  Mlp<Scalar> params;
  Scalar tau = Scalar(1e-4);

  bool operator==(const TargetParams &) const = default;
};

/// target <- (1 - tau) * target + tau * online
template <typename Scalar>
void ema_update(Mlp<Scalar> & target, const Mlp<Scalar> & online, Scalar tau)
{
  require_same_shape(target, online, "ema_update");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].weight =
      (Scalar(1) - tau) * target.layers[l].weight + tau * online.layers[l].weight;
    target.layers[l].bias = (Scalar(1) - tau) * target.layers[l].bias + tau * online.layers[l].bias;
  }
}

template <typename Scalar>
void ema_update(TargetParams<Scalar> & target, const Mlp<Scalar> & online)
{
  ema_update(target.params, online, target.tau);
}

void put_mlp(BinaryWriter & out, const Mlp<double> & mlp);
Mlp<double> get_mlp(BinaryReader & in);

}  // namespace odrl

#endif  // ODRL__NEURAL_HPP_
