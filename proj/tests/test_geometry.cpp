#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gvpr/geometry.hpp"

namespace {

using gvpr::Polygon;
using gvpr::Vec2;

Polygon square(double x0, double y0, double side) {
  return Polygon({{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}});
}

TEST(PolygonArea, UnitSquare) { EXPECT_DOUBLE_EQ(gvpr::polygon_area(square(0, 0, 1)), 1.0); }

TEST(PolygonArea, CollinearTriangleIsZero) {
  EXPECT_DOUBLE_EQ(gvpr::polygon_area(Polygon({{0, 0}, {1, 1}, {2, 2}})), 0.0);
}

TEST(PolygonArea, ClockwiseInputIsReoriented) {
  const Polygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  EXPECT_GT(gvpr::signed_area(cw.vertices()), 0.0);
  EXPECT_DOUBLE_EQ(gvpr::polygon_area(cw), 1.0);
}

TEST(Polygon, RejectsTooFewVertices) {
  EXPECT_THROW(Polygon({{0, 0}, {1, 0}}), std::invalid_argument);
}

TEST(ConvexIntersection, IdentityKeepsArea) {
  const auto s = square(2, 3, 1.5);
  const auto r = gvpr::convex_intersection(s, s);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(gvpr::polygon_area(*r), 2.25, 1e-12);
}

TEST(ConvexIntersection, HalfOffsetSquares) {
  const auto r = gvpr::convex_intersection(square(0, 0, 1), square(0.5, 0, 1));
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(gvpr::polygon_area(*r), 0.5, 1e-12);
}

TEST(ConvexIntersection, DisjointIsEmpty) {
  EXPECT_FALSE(gvpr::convex_intersection(square(0, 0, 1), square(3, 0, 1)).has_value());
}

TEST(ConvexIntersection, TouchingEdgeIsEmpty) {
  EXPECT_FALSE(gvpr::convex_intersection(square(0, 0, 1), square(1, 0, 1)).has_value());
}

TEST(ConvexIntersection, RejectsNonConvex) {
  const Polygon dart({{0, 0}, {2, 0}, {1, 0.5}, {1, 2}});
  EXPECT_FALSE(gvpr::is_convex(dart));
  EXPECT_THROW(gvpr::convex_intersection(dart, square(0, 0, 1)), std::invalid_argument);
}

TEST(ConvexIntersection, AreaBoundedByOperandsOnRandomQuads) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    // Random convex polygons: points on an ellipse at sorted angles.
    auto make = [&] {
      std::vector<double> angles(6);
      for (double& a : angles) a = std::numbers::pi * (u(rng) + 1.0);
      std::sort(angles.begin(), angles.end());
      const Vec2 c{u(rng), u(rng)};
      const double rx = 0.5 + std::abs(u(rng));
      const double ry = 0.5 + std::abs(u(rng));
      std::vector<Vec2> pts;
      for (double a : angles) pts.push_back({c.x + rx * std::cos(a), c.y + ry * std::sin(a)});
      return Polygon(pts);
    };
    const Polygon a = make();
    const Polygon b = make();
    const auto r = gvpr::convex_intersection(a, b);
    const double area = r ? gvpr::polygon_area(*r) : 0.0;
    EXPECT_LE(area, std::min(gvpr::polygon_area(a), gvpr::polygon_area(b)) + 1e-12);
    const auto r2 = gvpr::convex_intersection(b, a);
    EXPECT_NEAR(area, r2 ? gvpr::polygon_area(*r2) : 0.0, 1e-9);
  }
}

TEST(Angles, WrapAndDistance) {
  EXPECT_NEAR(gvpr::wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(gvpr::wrap_angle(-0.5), gvpr::kTwoPi - 0.5, 1e-12);
  EXPECT_LT(gvpr::wrap_angle(-1e-18), gvpr::kTwoPi);
  EXPECT_NEAR(gvpr::angular_distance(gvpr::deg_to_rad(350), gvpr::deg_to_rad(10)),
              gvpr::deg_to_rad(20), 1e-12);
  EXPECT_NEAR(gvpr::angular_distance(0.0, std::numbers::pi), std::numbers::pi, 1e-12);
}

}  // namespace
