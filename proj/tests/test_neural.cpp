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

#include "odrl/common.hpp"
#include "odrl/io.hpp"
#include "odrl/neural.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>

using namespace odrl;

namespace
{

Eigen::MatrixXd random_input(int rows, int cols, Rng & rng)
{
  Eigen::MatrixXd x(rows, cols);
  for (auto & v : x.reshaped()) v = rng.uniform(-1.0, 1.0);
  return x;
}

/// Random net whose biases are nonzero too.
Mlp<double> random_net(std::vector<int> widths, Rng & rng)
{
  auto net = Mlp<double>::he_uniform(widths, rng);
  for (auto & layer : net.layers) {
    for (auto & b : layer.bias) b = rng.uniform(-0.5, 0.5);
  }
  return net;
}

bool has_kink(const Mlp<double> & net, const Eigen::MatrixXd & x)
{
  const auto fwd = forward(net, x);
  for (std::size_t l = 0; l + 1 < fwd.tape.pre.size(); ++l) {
    if ((fwd.tape.pre[l].array().abs() < 1e-4).any()) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("zero network outputs zeros")
{
  const std::vector<int> widths{5, 7, 3};
  const auto net = Mlp<double>::zeros(widths);
  Rng rng(1);
  const auto out = forward(net, random_input(5, 4, rng)).output;
  CHECK(out.isZero(0.0));
}

TEST_CASE("identity linear layer passes input through")
{
  const std::vector<int> widths{4, 4};
  auto net = Mlp<double>::zeros(widths);
  net.layers[0].weight.setIdentity();
  Rng rng(2);
  const Eigen::MatrixXd x = random_input(4, 3, rng);
  CHECK(forward(net, x).output == x);
}

TEST_CASE("forward matches the independent reimplementation")
{
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_net({9, 16, 12, 5}, rng);
    const Eigen::MatrixXd x = random_input(9, 6, rng);
    const auto out = forward(net, x).output;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const auto want = oracles::mlp_forward(net, std::vector<double>(x.col(c).begin(), x.col(c).end()));
      for (Eigen::Index r = 0; r < out.rows(); ++r) {
        CHECK(std::abs(out(r, c) - want[static_cast<std::size_t>(r)]) < 1e-12);
      }
    }
    CHECK(predict(net, x) == out);
  }
}

TEST_CASE("forward rejects a wrong input width")
{
  const std::vector<int> widths{3, 2};
  const auto net = Mlp<double>::zeros(widths);
  try {
    forward(net, Eigen::MatrixXd(Eigen::MatrixXd::Zero(4, 1)));
    FAIL("expected throw");
  } catch (const Error & e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("linear layer weight gradient is the input outer product")
{
  Rng rng(4);
  const auto net = random_net({4, 3}, rng);
  const Eigen::MatrixXd x = random_input(4, 1, rng);
  const auto fwd = forward(net, x);
  const auto g = backward(net, fwd.tape, Eigen::MatrixXd(Eigen::MatrixXd::Ones(3, 1)));
  for (Eigen::Index r = 0; r < 3; ++r) {
    CHECK((g.layers[0].weight.row(r).transpose() - x.col(0)).isZero(0.0));
  }
  CHECK(g.layers[0].bias.isOnes(0.0));
  const auto z = backward(net, fwd.tape, Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 1)));
  CHECK(z.squared_norm() == 0.0);
}

TEST_CASE("backward matches central finite differences")
{
  Rng rng(5);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    auto net = random_net({6, 10, 8, 4}, rng);
    Eigen::MatrixXd x = random_input(6, 3, rng);
    while (has_kink(net, x)) x = random_input(6, 3, rng);
    const Eigen::MatrixXd w = random_input(4, 3, rng);
    auto objective = [&](const Mlp<double> & m) { return (forward(m, x).output.cwiseProduct(w)).sum(); };
    const auto grads = backward(net, forward(net, x).tape, w);

    std::vector<double> analytic;
    auto gcopy = grads;
    gcopy.for_each_parameter([&](std::size_t, double & v) { analytic.push_back(v); });
    double max_rel = 0.0;
    net.for_each_parameter([&](std::size_t i, double & p) {
      const double saved = p;
      p = saved + h;
      const double up = objective(net);
      p = saved - h;
      const double down = objective(net);
      p = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double rel = std::abs(analytic[i] - numeric) /
                         std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
      max_rel = std::max(max_rel, rel);
    });
    CHECK(max_rel < 1e-6);
  }
}

TEST_CASE("softmax examples and invariants")
{
  Eigen::VectorXd equal = Eigen::VectorXd::Constant(8, 2.5);
  CHECK((softmax<double>(equal).array() - 0.125).abs().maxCoeff() < 1e-15);

  Eigen::VectorXd two(2);
  two << 0.0, std::log(2.0);
  const auto p = softmax<double>(two);
  CHECK(std::abs(p(0) - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(p(1) - 2.0 / 3.0) < 1e-15);

  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd z(16);
    for (auto & v : z) v = rng.uniform(-30.0, 30.0);
    const auto a = softmax<double>(z);
    const auto b = softmax<double>((z.array() + 1000.0).matrix());
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(a.sum() - 1.0) < 1e-12);
    CHECK(a.minCoeff() >= 0.0);
    const Eigen::MatrixXd ls = log_softmax_columns<double>(Eigen::MatrixXd(z));
    CHECK((ls.col(0).array().exp().matrix() - a).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("optimizer leaves parameters alone with zero gradient and decay")
{
  Rng rng(7);
  auto net = random_net({3, 4, 2}, rng);
  const auto before = net;
  auto state = OptimizerState<double>::for_params(net, 1e-3, 0.0);
  for (int i = 0; i < 10; ++i) optimizer_step(net, net.zeros_like(), state, 1e-3);
  CHECK(net == before);
  CHECK(state.step == 10);
}

TEST_CASE("weight decay alone scales parameters geometrically")
{
  Rng rng(8);
  auto net = random_net({3, 4, 2}, rng);
  auto expected = net;
  auto state = OptimizerState<double>::for_params(net, 1e-2, 0.1);
  for (int i = 0; i < 25; ++i) {
    optimizer_step(net, net.zeros_like(), state, 1e-2);
    for (auto & layer : expected.layers) {
      layer.weight *= 1.0 - 1e-2 * 0.1;
      layer.bias *= 1.0 - 1e-2 * 0.1;
    }
  }
  CHECK(net == expected);
}

TEST_CASE("scalar parameter follows the hand-rolled update sequence")
{
  const std::vector<int> widths{1, 1};
  auto net = Mlp<double>::zeros(widths);
  net.layers[0].weight(0, 0) = 0.7;
  auto state = OptimizerState<double>::for_params(net, 3e-3, 0.01);
  Mlp<double> grads = net.zeros_like();
  grads.layers[0].weight(0, 0) = 0.25;
  oracles::ScalarAdam ref;
  double p = 0.7;
  for (int i = 0; i < 100; ++i) {
    const double lr = cosine_lr(i, 100, 3e-3);
    optimizer_step(net, grads, state, lr);
    p = ref.step(p, 0.25, lr, 0.01);
    CHECK(std::abs(net.layers[0].weight(0, 0) - p) < 1e-12);
  }
}

TEST_CASE("optimizer rejects mismatched shapes")
{
  const std::vector<int> a{3, 2};
  const std::vector<int> b{3, 3};
  auto net = Mlp<double>::zeros(a);
  auto state = OptimizerState<double>::for_params(net);
  CHECK_THROWS_AS(optimizer_step(net, Mlp<double>::zeros(b), state, 1e-3), Error);
}

TEST_CASE("cosine schedule endpoints")
{
  CHECK(cosine_lr(0, 1000, 3e-5) == 3e-5);
  CHECK(std::abs(cosine_lr(1000, 1000, 3e-5)) < 1e-20);
  CHECK(cosine_lr(500, 1000, 3e-5) == doctest::Approx(1.5e-5).epsilon(1e-12));
}

TEST_CASE("ema fixed point, full step and geometric decay")
{
  Rng rng(9);
  const auto online = random_net({4, 5, 3}, rng);
  TargetParams<double> same{online, 0.3};
  ema_update(same, online);
  for (std::size_t l = 0; l < online.layers.size(); ++l) {
    CHECK((same.params.layers[l].weight - online.layers[l].weight).cwiseAbs().maxCoeff() < 1e-15);
  }

  TargetParams<double> full{random_net({4, 5, 3}, rng), 1.0};
  ema_update(full, online);
  CHECK(full.params == online);

  const auto start = random_net({4, 5, 3}, rng);
  TargetParams<double> target{start, 1e-2};
  const int n = 300;
  for (int i = 0; i < n; ++i) ema_update(target, online);
  const double factor = std::pow(1.0 - 1e-2, n);
  for (std::size_t l = 0; l < online.layers.size(); ++l) {
    const Eigen::MatrixXd want = factor * (start.layers[l].weight - online.layers[l].weight);
    const Eigen::MatrixXd got = target.params.layers[l].weight - online.layers[l].weight;
    CHECK((got - want).cwiseAbs().maxCoeff() < n * 4.0 * std::numeric_limits<double>::epsilon());
  }
}

TEST_CASE("parameter serialization round trips bitwise")
{
  Rng rng(10);
  const auto net = random_net({7, 9, 4}, rng);
  BinaryWriter w;
  put_mlp(w, net);
  BinaryReader r(w.bytes());
  CHECK(get_mlp(r) == net);
}

TEST_CASE("single precision instantiation agrees with double")
{
  Rng rng(11);
  const auto net = random_net({5, 8, 3}, rng);
  Mlp<float> f;
  for (const auto & layer : net.layers) {
    f.layers.push_back({layer.weight.cast<float>(), layer.bias.cast<float>()});
  }
  const Eigen::MatrixXd x = random_input(5, 4, rng);
  const Eigen::MatrixXf out = forward(f, MatrixX<float>(x.cast<float>())).output;
  CHECK((out.cast<double>() - forward(net, x).output).cwiseAbs().maxCoeff() < 1e-4);
}
