#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gvpr {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Intersection areas below this are treated as empty (m^2).
constexpr double kEmptyAreaEpsilon = 1e-12;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Wraps an angle into [0, 2pi).
inline double wrap_angle(double radians) {
  double a = std::fmod(radians, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of values just below a multiple of 2pi can round back up to 2pi.
  if (a >= kTwoPi) a = 0.0;
  return a;
}

/// Wrapped angular distance min(|a-b|, 2pi-|a-b|), in [0, pi].
inline double angular_distance(double a, double b) {
  const double d = wrap_angle(a - b);
  return std::min(d, kTwoPi - d);
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline double signed_area(const std::vector<Vec2>& pts) {
  double twice = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(pts[i], pts[(i + 1) % n]);
  }
  return 0.5 * twice;
}

/// Simple polygon with counter-clockwise vertex order. Clockwise input is
/// reversed on construction.
class Polygon {
 public:
  explicit Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) {
      throw std::invalid_argument("polygon needs at least 3 vertices, got " +
                                  std::to_string(vertices_.size()));
    }
    for (const Vec2& v : vertices_) {
      if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
        throw std::invalid_argument("polygon vertex is not finite");
      }
    }
    if (signed_area(vertices_) < 0.0) {
      std::reverse(vertices_.begin(), vertices_.end());
    }
  }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Vec2& operator[](std::size_t i) const { return vertices_[i]; }

 private:
  std::vector<Vec2> vertices_;
};

/// Shoelace area.
inline double polygon_area(const Polygon& p) {
  return std::abs(signed_area(p.vertices()));
}

/// True when every turn is left or straight. The tolerance scales with the
/// adjacent edge lengths and with the polygon extent, so finely discretized
/// arcs whose turns are below rounding noise still pass.
inline bool is_convex(const Polygon& p) {
  const auto& v = p.vertices();
  const std::size_t n = v.size();
  double extent = 0.0;
  for (const Vec2& q : v) extent = std::max({extent, std::abs(q.x), std::abs(q.y)});
  const double noise = 1e-12 * extent * extent;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e1 = v[(i + 1) % n] - v[i];
    const Vec2 e2 = v[(i + 2) % n] - v[(i + 1) % n];
    if (cross(e1, e2) < -(1e-9 * norm(e1) * norm(e2) + noise)) return false;
  }
  return true;
}

namespace detail {

inline Vec2 line_intersection(Vec2 p, Vec2 q, Vec2 a, Vec2 b) {
  // Intersection of segment p->q with the infinite line a->b.
  const Vec2 r = q - p;
  const Vec2 s = b - a;
  const double denom = cross(r, s);
  if (denom == 0.0) return p;
  const double t = cross(a - p, s) / denom;
  return p + t * r;
}

inline std::vector<Vec2> drop_duplicates(const std::vector<Vec2>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const Vec2& p : pts) {
    if (out.empty() || norm(p - out.back()) > 1e-12) out.push_back(p);
  }
  while (out.size() > 1 && norm(out.front() - out.back()) <= 1e-12) {
    out.pop_back();
  }
  return out;
}

}  // namespace detail

/// Intersection of two convex polygons (Sutherland-Hodgman, clipping `a`
/// against every edge of `b`). Returns nullopt when the interiors do not
/// overlap. Throws std::invalid_argument on non-convex input.
inline std::optional<Polygon> convex_intersection(const Polygon& a,
                                                  const Polygon& b) {
  if (!is_convex(a) || !is_convex(b)) {
    throw std::invalid_argument("convex_intersection: input is not convex");
  }
  std::vector<Vec2> output = a.vertices();
  const auto& clip = b.vertices();
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Vec2 c1 = clip[e];
    const Vec2 c2 = clip[(e + 1) % m];
    const Vec2 edge = c2 - c1;
    std::vector<Vec2> input = std::move(output);
    output.clear();
    output.reserve(input.size() + 1);
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 cur = input[i];
      const Vec2 prev = input[(i + n - 1) % n];
      const bool cur_in = cross(edge, cur - c1) >= 0.0;
      const bool prev_in = cross(edge, prev - c1) >= 0.0;
      if (cur_in) {
        if (!prev_in) output.push_back(detail::line_intersection(prev, cur, c1, c2));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(detail::line_intersection(prev, cur, c1, c2));
      }
    }
  }
  output = detail::drop_duplicates(output);
  if (output.size() < 3) return std::nullopt;
  if (std::abs(signed_area(output)) < kEmptyAreaEpsilon) return std::nullopt;
  return Polygon(std::move(output));
}

}  // namespace gvpr
