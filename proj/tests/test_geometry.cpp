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

#include "doctest.h"
#include "oracles.hpp"

#include "odrl/common.hpp"
#include "odrl/geometry.hpp"

#include <cmath>
#include <numbers>

using namespace odrl;
using std::numbers::pi;

TEST_CASE("normalize_angle maps into (-pi, pi]")
{
  CHECK(normalize_angle(pi) == doctest::Approx(pi));
  CHECK(normalize_angle(-pi) == doctest::Approx(pi));
  CHECK(normalize_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double a = normalize_angle(rng.uniform(-50.0, 50.0));
    CHECK(a > -pi);
    CHECK(a <= pi);
  }
}

TEST_CASE("pose composition keeps heading normalized")
{
  Pose2D p(1.0, 2.0, 3.0);
  const Pose2D q(0.5, 0.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    p = p.compose(q);
    CHECK(p.heading > -pi);
    CHECK(p.heading <= pi);
  }
  const Pose2D a(3.0, -1.0, 0.7);
  const Pose2D b(-2.0, 4.0, -2.5);
  const Pose2D back = a.compose(a.relative(b));
  CHECK(back.x == doctest::Approx(b.x));
  CHECK(back.y == doctest::Approx(b.y));
  CHECK(back.heading == doctest::Approx(b.heading));
}

TEST_CASE("to_frame examples")
{
  const Vec2 p(1.0, 0.0);
  CHECK(to_frame(p, Pose2D()) == p);
  const Vec2 q = to_frame(p, Pose2D(0.0, 0.0, pi / 2));
  CHECK(q.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(q.y() == doctest::Approx(-1.0));
}

TEST_CASE("to_frame round trip and distance preservation")
{
  Rng rng(2);
  double worst = 0.0;
  double worst_dist = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Pose2D f(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-pi, pi));
    const Vec2 a(rng.uniform(-100, 100), rng.uniform(-100, 100));
    const Vec2 b(rng.uniform(-100, 100), rng.uniform(-100, 100));
    worst = std::max(worst, (from_frame(to_frame(a, f), f) - a).norm());
    worst_dist =
      std::max(worst_dist, std::abs((to_frame(a, f) - to_frame(b, f)).norm() - (a - b).norm()));
  }
  CHECK(worst < 1e-9);
  CHECK(worst_dist < 1e-9);
}

TEST_CASE("polyline invariants")
{
  CHECK_THROWS_AS(Polyline({Vec2(0, 0)}), Error);
  CHECK_THROWS_AS(Polyline({Vec2(0, 0), Vec2(0, 0)}), Error);
  const Polyline line({Vec2(0, 0), Vec2(3, 4), Vec2(3, 10)});
  CHECK(line.cumulative_arclength().front() == 0.0);
  CHECK(line.length() == doctest::Approx(11.0));
  CHECK(line.point_at(5.0).isApprox(Vec2(3, 4)));
  CHECK(line.point_at(8.0).isApprox(Vec2(3, 7)));
  CHECK(line.heading_at(9.0) == doctest::Approx(pi / 2));
}

TEST_CASE("project_onto_polyline examples")
{
  const Polyline line({Vec2(0, 0), Vec2(10, 0)});
  auto p0 = project_onto_polyline(Vec2(0, 0), line);
  CHECK(p0.arclength == 0.0);
  CHECK(p0.lateral_offset == 0.0);
  auto p1 = project_onto_polyline(Vec2(5, 2), line);
  CHECK(p1.arclength == doctest::Approx(5.0));
  CHECK(p1.lateral_offset == doctest::Approx(2.0));
  auto p2 = project_onto_polyline(Vec2(5, -2), line);
  CHECK(p2.lateral_offset == doctest::Approx(-2.0));
}

TEST_CASE("projection ties go to the lower segment")
{
  // Point equidistant from both segments of a symmetric corner.
  const Polyline line({Vec2(0, 0), Vec2(10, 0), Vec2(10, 10)});
  const auto p = project_onto_polyline(Vec2(5, 5), line);
  CHECK(p.segment_index == 0);
  CHECK(p.arclength == doctest::Approx(5.0));
}

TEST_CASE("projection matches dense sampling oracle")
{
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec2> pts{Vec2::Zero()};
    double h = rng.uniform(-pi, pi);
    for (int i = 1; i < 20; ++i) {
      h += rng.uniform(-0.6, 0.6);
      pts.push_back(pts.back() + rng.uniform(1.0, 6.0) * Vec2(std::cos(h), std::sin(h)));
    }
    const Polyline line(pts);
    const Vec2 p(rng.uniform(-40, 40), rng.uniform(-40, 40));
    const auto proj = project_onto_polyline(p, line);
    const auto oracle = oracles::dense_projection(p, line, 100000);
    CHECK(std::abs(proj.arclength - oracle.arclength) < 1e-3);
    CHECK(std::abs((p - proj.foot).norm() - oracle.distance) < 1e-3);
    CHECK(std::abs(proj.lateral_offset) <= (p - proj.foot).norm() + 1e-12);
    CHECK(proj.arclength >= 0.0);
    CHECK(proj.arclength <= line.length());
  }
}

TEST_CASE("projection arclength is monotone along a straight line")
{
  const Polyline line({Vec2(0, 0), Vec2(10, 0), Vec2(20, 5), Vec2(30, 5)});
  double last = -1.0;
  for (double x = -5.0; x <= 35.0; x += 0.1) {
    const double s = project_onto_polyline(Vec2(x, 2.0), line).arclength;
    CHECK(s >= last - 1e-12);
    last = s;
  }
}

TEST_CASE("obb_intersects examples")
{
  const OrientedBox a(Vec2(0, 0), Vec2(1, 1), 0.3);
  CHECK(obb_intersects(a, a));
  const OrientedBox far(Vec2(100, 0), Vec2(1, 1), 0.0);
  CHECK_FALSE(obb_intersects(a, far));
  // Touching faces count as intersecting.
  const OrientedBox l(Vec2(0, 0), Vec2(1, 1), 0.0);
  const OrientedBox r(Vec2(2, 0), Vec2(1, 1), 0.0);
  CHECK(obb_intersects(l, r));
  CHECK_THROWS_AS(OrientedBox(Vec2(0, 0), Vec2(0, 1), 0.0), Error);
}

TEST_CASE("obb_intersects matches point sampling away from tangency")
{
  Rng rng(4);
  int disagreements_far_from_tangency = 0;
  for (int i = 0; i < 500; ++i) {
    const OrientedBox a(Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1)),
                        Vec2(rng.uniform(0.3, 2.0), rng.uniform(0.3, 1.5)), rng.uniform(-pi, pi));
    const OrientedBox b(Vec2(rng.uniform(-4, 4), rng.uniform(-4, 4)),
                        Vec2(rng.uniform(0.3, 2.0), rng.uniform(0.3, 1.5)), rng.uniform(-pi, pi));
    const bool sat = obb_intersects(a, b);
    CHECK(sat == obb_intersects(b, a));
    const bool sampled = oracles::sampled_overlap(a, b, 0.01);
    if (sat != sampled && oracles::box_gap(a, b) > 0.02) {
      ++disagreements_far_from_tangency;
    }
  }
  CHECK(disagreements_far_from_tangency == 0);
}

TEST_CASE("ray helpers")
{
  const OrientedBox box(Vec2(10, 0), Vec2(2, 1), 0.0);
  auto d = ray_box_distance(Vec2(0, 0), Vec2(1, 0), box);
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(8.0));
  CHECK_FALSE(ray_box_distance(Vec2(0, 0), Vec2(-1, 0), box).has_value());
  CHECK(*ray_box_distance(Vec2(10, 0), Vec2(0, 1), box) == 0.0);
  auto s = ray_segment_distance(Vec2(0, 0), Vec2(0, 1), Vec2(-5, 3), Vec2(5, 3));
  REQUIRE(s.has_value());
  CHECK(*s == doctest::Approx(3.0));
  CHECK(box_exit_distance(Vec2(2.25, 1.0), Vec2(1, 0)) == doctest::Approx(2.25));
  CHECK(box_exit_distance(Vec2(2.25, 1.0), Vec2(0, 1)) == doctest::Approx(1.0));
}
