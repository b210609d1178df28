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
#include "odrl/pseudo_expert.hpp"

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <numbers>

using namespace odrl;

namespace
{

constexpr int kHorizon = 6;

std::vector<TimedPose> random_drive(int n, Rng & rng) { return fixtures::random_drive(n, rng); }

ActionVocabulary random_vocab(int k, Rng & rng) { return fixtures::random_vocabulary(k, kHorizon, rng); }

Pose2D transform(const Pose2D & rigid, const Pose2D & p) { return rigid.compose(p); }

ExpertLog transform_log(const Pose2D & rigid, const ExpertLog & log)
{
  ExpertLog out = log;
  for (auto & w : out.waypoints) w.pose = transform(rigid, w.pose);
  return out;
}

}  // namespace

TEST_CASE("ego on a waypoint reproduces that waypoint's future")
{
  Rng rng(1);
  const auto log = make_expert_log("drive", random_drive(30, rng), kHorizon);
  const Pose2D ego = log.waypoints[10].pose;
  const auto ref = interpolate_reference_detailed(ego, log);
  CHECK(ref.lambda == doctest::Approx(ref.first == 10 ? 0.0 : 1.0));
  CHECK((ref.trajectory.points() - log.futures[10].points()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("segment midpoint averages futures in a shared frame")
{
  ExpertLog log;
  log.scenario_id = "mid";
  log.waypoints = {{0.0, Pose2D(0, 0, 0)}, {0.5, Pose2D(2, 0, 0)}, {1.0, Pose2D(8, 0, 0)}};
  Trajectory a(kHorizon);
  Trajectory b(kHorizon);
  for (int k = 0; k < kHorizon; ++k) {
    a.point(k) = Vec2(k + 1.0, 0.1 * k);
    b.point(k) = Vec2(2.0 * (k + 1), -0.2 * k);
  }
  log.futures = {a, b, b};
  const auto ref = interpolate_reference_detailed(Pose2D(1, 0, 0), log);
  CHECK(ref.first == 0);
  CHECK(ref.second == 1);
  CHECK(ref.lambda == doctest::Approx(0.5));
  // Futures become ego-frame points (x - 1) for a and (x + 1) for b; average shifts by zero.
  for (int k = 0; k < kHorizon; ++k) {
    const Vec2 want = 0.5 * (a.point(k) - Vec2(1, 0)) + 0.5 * (b.point(k) + Vec2(1, 0));
    CHECK((ref.trajectory.point(k) - want).norm() < 1e-12);
  }
}

TEST_CASE("straight constant-speed log gives the time-shifted future")
{
  Rng rng(2);
  const double v = 7.0;
  std::vector<TimedPose> poses;
  for (int i = 0; i < 40; ++i) poses.push_back({0.5 * i, Pose2D(v * 0.5 * i, 0, 0)});
  const auto log = make_expert_log("straight", poses, kHorizon);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = rng.uniform(0.0, v * 0.5 * (static_cast<double>(log.waypoints.size()) - 1));
    const auto ref = interpolate_reference(Pose2D(x, 0, 0), log);
    for (int k = 0; k < kHorizon; ++k) {
      CHECK(std::abs(ref.point(k).x() - v * 0.5 * (k + 1)) < 1e-6);
      CHECK(std::abs(ref.point(k).y()) < 1e-6);
    }
  }
}

TEST_CASE("exact reference in the vocabulary is selected with zero distance")
{
  Rng rng(3);
  const auto log = make_expert_log("drive", random_drive(30, rng), kHorizon);
  const Pose2D ego(log.waypoints[12].pose.x + 0.3, log.waypoints[12].pose.y - 0.2, 0.4);
  const auto ref = interpolate_reference(ego, log);
  auto vocab = random_vocab(32, rng);
  Eigen::MatrixXd m = vocab.prototypes();
  m.col(12) = ref.flat();
  vocab = ActionVocabulary(m, 0, {});
  const auto label = pseudo_expert_action(ego, log, vocab);
  CHECK(label.action_index == 12);
  CHECK(label.match_distance == 0.0);
}

TEST_CASE("endpoint labels equal direct matching of the waypoint futures")
{
  Rng rng(4);
  const auto log = make_expert_log("drive", random_drive(30, rng), kHorizon);
  const auto vocab = random_vocab(64, rng);
  for (std::size_t i : {std::size_t{0}, std::size_t{7}, log.waypoints.size() - 1}) {
    const Pose2D ego = log.waypoints[i].pose;
    const auto label = pseudo_expert_action(ego, log, vocab);
    CHECK(label.action_index == nearest_prototype(vocab, log.futures[i]).index);
  }
}

TEST_CASE("labels match the brute-force oracle")
{
  Rng rng(5);
  int agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto log = make_expert_log("drive", random_drive(20 + trial % 15, rng), kHorizon);
    const auto vocab = random_vocab(48, rng);
    const auto & w = log.waypoints[rng.below(log.waypoints.size())].pose;
    const Pose2D ego(w.x + rng.uniform(-4, 4), w.y + rng.uniform(-4, 4),
                     w.heading + rng.uniform(-0.5, 0.5));
    const auto label = pseudo_expert_action(ego, log, vocab);
    const auto want = oracles::pseudo_expert(ego, log, vocab);
    agree += label.action_index == want.index;
    CHECK(label.action_index == want.index);
    CHECK(label.match_distance == doctest::Approx(want.squared_distance).epsilon(1e-9));
  }
  CHECK(agree == 1000);
}

TEST_CASE("reference varies continuously along a segment")
{
  Rng rng(6);
  const auto log = make_expert_log("drive", random_drive(30, rng), kHorizon);
  const std::size_t i = 14;
  const Vec2 a = log.waypoints[i].pose.position();
  const Vec2 b = log.waypoints[i + 1].pose.position();
  const double heading = 0.2;
  // Compare in a fixed frame so only the blend weight moves.
  const Pose2D fixed(a.x(), a.y(), heading);
  double max_gap = 0.0;
  const Trajectory ta = change_frame(log.futures[i], log.waypoints[i].pose, fixed);
  const Trajectory tb = change_frame(log.futures[i + 1], log.waypoints[i + 1].pose, fixed);
  for (int k = 0; k < kHorizon; ++k) max_gap = std::max(max_gap, (ta.point(k) - tb.point(k)).norm());
  const double lipschitz = max_gap / (b - a).norm();
  const double eps = 1e-4;
  for (int j = 1; j < 50; ++j) {
    const Vec2 p0 = a + (j / 50.0) * (b - a);
    const Vec2 p1 = p0 + eps * (b - a).normalized();
    const Pose2D e0(p0.x(), p0.y(), heading);
    const Pose2D e1(p1.x(), p1.y(), heading);
    const auto r0 = change_frame(interpolate_reference(e0, log), e0, fixed);
    const auto r1 = change_frame(interpolate_reference(e1, log), e1, fixed);
    for (int k = 0; k < kHorizon; ++k) {
      CHECK((r0.point(k) - r1.point(k)).norm() <= lipschitz * eps * (1.0 + 1e-6) + 1e-12);
    }
  }
}

TEST_CASE("labels are invariant under rigid transformation")
{
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto log = make_expert_log("drive", random_drive(25, rng), kHorizon);
    const auto vocab = random_vocab(48, rng);
    const auto & w = log.waypoints[rng.below(log.waypoints.size())].pose;
    const Pose2D ego(w.x + rng.uniform(-3, 3), w.y + rng.uniform(-3, 3), w.heading + 0.1);
    const Pose2D rigid(rng.uniform(-100, 100), rng.uniform(-100, 100),
                       rng.uniform(-std::numbers::pi, std::numbers::pi));
    const auto a = pseudo_expert_action(ego, log, vocab);
    const auto b = pseudo_expert_action(transform(rigid, ego), transform_log(rigid, log), vocab);
    CHECK(a.action_index == b.action_index);
    CHECK(std::abs(a.match_distance - b.match_distance) < 1e-9);
  }
}

TEST_CASE("looping log uses the nearer log neighbour")
{
  // Out along y = 0, back along y = 1: the two nearest waypoints are not adjacent.
  std::vector<TimedPose> poses;
  for (int i = 0; i < 10; ++i) poses.push_back({0.5 * i, Pose2D(2.0 * i, 0, 0)});
  for (int i = 0; i < 10; ++i) {
    poses.push_back({5.0 + 0.5 * i, Pose2D(18.0 - 2.0 * i, 1.0, std::numbers::pi)});
  }
  const auto log = make_expert_log("loop", poses, kHorizon);
  const auto ref = interpolate_reference_detailed(Pose2D(8.5, 0.2, 0), log);
  CHECK(ref.second == ref.first + 1);
  CHECK(ref.first == 4);
  CHECK(ref.lambda == doctest::Approx(0.25));
}

TEST_CASE("coincident waypoints fall back to the nearest future")
{
  ExpertLog log;
  log.scenario_id = "stopped";
  log.waypoints = {{0.0, Pose2D(0, 0, 0)}, {0.5, Pose2D(0, 0, 0)}, {1.0, Pose2D(3, 0, 0)}};
  Trajectory f(kHorizon);
  for (int k = 0; k < kHorizon; ++k) f.point(k) = Vec2(k + 1.0, 0.0);
  log.futures = {f, f, f};
  const auto ref = interpolate_reference_detailed(Pose2D(0, 0, 0), log);
  CHECK(ref.degenerate);
  CHECK(ref.trajectory.all_finite());
  CHECK(ref.trajectory == f);
}

TEST_CASE("horizon mismatch and malformed logs are rejected")
{
  Rng rng(8);
  const auto log = make_expert_log("drive", random_drive(20, rng), 4);
  const auto vocab = random_vocab(8, rng);
  try {
    pseudo_expert_action(log.waypoints[0].pose, log, vocab);
    FAIL("expected throw");
  } catch (const Error & e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
  ExpertLog bad;
  bad.waypoints = {{0.0, Pose2D()}};
  bad.futures = {Trajectory(kHorizon)};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("expert log file round trip")
{
  Rng rng(9);
  const auto log = make_expert_log("drive", random_drive(20, rng), kHorizon);
  const auto path = std::filesystem::temp_directory_path() / "odrl_test_log.json";
  write_expert_log(path, log);
  CHECK(read_expert_log(path) == log);
  std::filesystem::remove(path);
}
