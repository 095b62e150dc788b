#pragma once

// Planar field-of-view model: each camera sees a circular sector of radius r
// and opening angle theta centered on its compass heading. The overlap of two
// sectors is the graded similarity of the corresponding images.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

#include "gvpr/geometry.hpp"

namespace gvpr {

/// Camera position (easting t0, northing t1, meters) and compass heading
/// alpha (radians clockwise from north, wrapped to [0, 2pi)).
class CameraPose2D {
 public:
  CameraPose2D() = default;
  CameraPose2D(double t0, double t1, double alpha)
      : t0_(t0), t1_(t1), alpha_(wrap_angle(alpha)) {
    if (!std::isfinite(t0) || !std::isfinite(t1) || !std::isfinite(alpha)) {
      throw std::invalid_argument("CameraPose2D: non-finite component");
    }
  }
  static CameraPose2D from_degrees(double t0, double t1, double alpha_deg) {
    return {t0, t1, deg_to_rad(alpha_deg)};
  }

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  double alpha() const { return alpha_; }
  Vec2 position() const { return {t0_, t1_}; }

  friend bool operator==(const CameraPose2D&, const CameraPose2D&) = default;

 private:
  double t0_ = 0.0;
  double t1_ = 0.0;
  double alpha_ = 0.0;
};

/// Unit vector of a compass bearing (0 = north = +t1, pi/2 = east = +t0).
inline Vec2 bearing_vector(double bearing) {
  return {std::sin(bearing), std::cos(bearing)};
}

inline double translation_distance(const CameraPose2D& a, const CameraPose2D& b) {
  return norm(a.position() - b.position());
}

inline double rotation_distance(const CameraPose2D& a, const CameraPose2D& b) {
  return angular_distance(a.alpha(), b.alpha());
}

class FovParams {
 public:
  FovParams(double theta, double r) : theta_(theta), r_(r) {
    if (!(theta > 0.0) || theta > std::numbers::pi) {
      throw std::invalid_argument("FovParams: theta must lie in (0, pi], got " +
                                  std::to_string(theta));
    }
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("FovParams: radius must be positive, got " +
                                  std::to_string(r));
    }
  }
  static FovParams from_degrees(double theta_deg, double r) {
    return {deg_to_rad(theta_deg), r};
  }

  double theta() const { return theta_; }
  double r() const { return r_; }

 private:
  double theta_;
  double r_;
};

/// Calibrated settings.
inline FovParams msls_fov() { return FovParams::from_degrees(90.0, 50.0); }
inline FovParams tb_places_fov() { return FovParams::from_degrees(90.0, 3.5); }

constexpr int kDefaultArcSegments = 256;

/// Sector polygon: the apex followed by arc_segments + 1 arc points spanning
/// bearings [alpha - theta/2, alpha + theta/2], counter-clockwise.
inline Polygon sector_polygon(const CameraPose2D& pose, const FovParams& fov,
                              int arc_segments = kDefaultArcSegments) {
  if (arc_segments < 2) {
    throw std::invalid_argument("sector_polygon: arc_segments must be >= 2");
  }
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(arc_segments) + 2);
  const Vec2 apex = pose.position();
  pts.push_back(apex);
  // Compass bearings grow clockwise, so walk from the right edge to the left.
  const double start = pose.alpha() + 0.5 * fov.theta();
  for (int i = 0; i <= arc_segments; ++i) {
    const double b = start - fov.theta() * i / arc_segments;
    pts.push_back(apex + fov.r() * bearing_vector(b));
  }
  return Polygon(std::move(pts));
}

/// How an intersection area is turned into a similarity.
enum class OverlapMeasure {
  /// |A∩B| / ((|A|+|B|)/2). All sectors share one FovParams, so this is the
  /// fraction of one camera's field of view seen by the other. Reproduces the
  /// MSLS calibration (55.63% at 0 m/40 deg, 45.01% at 25 m/0 deg, r=50 m).
  kMeanArea,
  /// |A∩B| / |A∪B|.
  kIoU,
};

inline double overlap_ratio(double inter, double area_a, double area_b,
                            OverlapMeasure measure) {
  double psi = 0.0;
  switch (measure) {
    case OverlapMeasure::kMeanArea:
      psi = 2.0 * inter / (area_a + area_b);
      break;
    case OverlapMeasure::kIoU:
      psi = inter / (area_a + area_b - inter);
      break;
  }
  return std::clamp(psi, 0.0, 1.0);
}

/// Graded similarity of two cameras from the overlap of their sectors.
/// Symmetric in (a, b) bit for bit: the pair is put in a canonical order
/// before clipping, and geometry is evaluated relative to the first apex.
inline double fov_overlap(const CameraPose2D& a, const CameraPose2D& b,
                          const FovParams& fov,
                          int arc_segments = kDefaultArcSegments,
                          OverlapMeasure measure = OverlapMeasure::kMeanArea) {
  if (a == b) return 1.0;
  if (translation_distance(a, b) > 2.0 * fov.r()) return 0.0;

  const auto key = [](const CameraPose2D& p) {
    return std::make_tuple(p.t0(), p.t1(), p.alpha());
  };
  const CameraPose2D& first = key(a) <= key(b) ? a : b;
  const CameraPose2D& second = key(a) <= key(b) ? b : a;

  const CameraPose2D local_first(0.0, 0.0, first.alpha());
  const CameraPose2D local_second(second.t0() - first.t0(),
                                  second.t1() - first.t1(), second.alpha());
  const Polygon pa = sector_polygon(local_first, fov, arc_segments);
  const Polygon pb = sector_polygon(local_second, fov, arc_segments);
  const auto inter = convex_intersection(pa, pb);
  if (!inter) return 0.0;
  return overlap_ratio(polygon_area(*inter), polygon_area(pa), polygon_area(pb),
                       measure);
}

/// Exact analytic membership of a point in a camera's sector.
inline bool in_sector(Vec2 p, const CameraPose2D& pose, const FovParams& fov) {
  const Vec2 d = p - pose.position();
  const double dist2 = d.x * d.x + d.y * d.y;
  if (dist2 > fov.r() * fov.r()) return false;
  if (dist2 == 0.0) return true;
  const double bearing = std::atan2(d.x, d.y);
  return angular_distance(bearing, pose.alpha()) <= 0.5 * fov.theta();
}

struct BoundingBox {
  Vec2 lo;
  Vec2 hi;
};

/// Tight axis-aligned box of a sector: apex, arc ends, and any compass
/// extreme that falls inside the arc.
inline BoundingBox sector_bounds(const CameraPose2D& pose, const FovParams& fov) {
  const Vec2 apex = pose.position();
  BoundingBox box{apex, apex};
  const auto grow = [&box](Vec2 p) {
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
  };
  const double half = 0.5 * fov.theta();
  grow(apex + fov.r() * bearing_vector(pose.alpha() - half));
  grow(apex + fov.r() * bearing_vector(pose.alpha() + half));
  for (int k = 0; k < 4; ++k) {
    const double cardinal = k * 0.5 * std::numbers::pi;
    if (angular_distance(cardinal, pose.alpha()) <= half) {
      grow(apex + fov.r() * bearing_vector(cardinal));
    }
  }
  return box;
}

struct MonteCarloOverlap {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t in_union = 0;
  std::uint64_t in_both = 0;
};

/// Monte-Carlo estimate of fov_overlap, independent of the polygon route.
/// Points are drawn uniformly in the joint bounding box and classified with
/// in_sector(). Among union hits the IoU q = n_both/n_union is binomial; the
/// mean-area measure is 2q/(1+q) and its error follows by the delta method.
/// The variance uses (n_both+1)/(n_union+2) so q at 0 or 1 still reports a
/// nonzero error.
inline MonteCarloOverlap fov_overlap_mc(
    const CameraPose2D& a, const CameraPose2D& b, const FovParams& fov,
    std::uint64_t samples, std::uint64_t seed,
    OverlapMeasure measure = OverlapMeasure::kMeanArea) {
  if (samples < 1000) {
    throw std::invalid_argument("fov_overlap_mc: need at least 1000 samples");
  }
  // Work relative to a's apex to keep coordinates small.
  const CameraPose2D la(0.0, 0.0, a.alpha());
  const CameraPose2D lb(b.t0() - a.t0(), b.t1() - a.t1(), b.alpha());
  const BoundingBox ba = sector_bounds(la, fov);
  const BoundingBox bb = sector_bounds(lb, fov);
  const Vec2 lo{std::min(ba.lo.x, bb.lo.x), std::min(ba.lo.y, bb.lo.y)};
  const Vec2 hi{std::max(ba.hi.x, bb.hi.x), std::max(ba.hi.y, bb.hi.y)};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x, hi.x);
  std::uniform_real_distribution<double> uy(lo.y, hi.y);
  MonteCarloOverlap out;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Vec2 p{ux(rng), uy(rng)};
    const bool ia = in_sector(p, la, fov);
    const bool ib = in_sector(p, lb, fov);
    out.in_union += (ia || ib) ? 1 : 0;
    out.in_both += (ia && ib) ? 1 : 0;
  }
  if (out.in_union == 0) return out;

  const double n = static_cast<double>(out.in_union);
  const double q = static_cast<double>(out.in_both) / n;
  const double q_var = (static_cast<double>(out.in_both) + 1.0) / (n + 2.0);
  const double se_q = std::sqrt(q_var * (1.0 - q_var) / n);
  switch (measure) {
    case OverlapMeasure::kMeanArea:
      out.estimate = 2.0 * q / (1.0 + q);
      out.std_error = 2.0 / ((1.0 + q) * (1.0 + q)) * se_q;
      break;
    case OverlapMeasure::kIoU:
      out.estimate = q;
      out.std_error = se_q;
      break;
  }
  return out;
}

/// Places camera b relative to a for calibration: b sits delta_t meters to
/// the right of a (perpendicular to a's heading, a facing north) and is
/// rotated by delta_alpha.
inline std::pair<CameraPose2D, CameraPose2D> calibration_pair(double delta_t,
                                                              double delta_alpha) {
  return {CameraPose2D(0.0, 0.0, 0.0), CameraPose2D(delta_t, 0.0, delta_alpha)};
}

/// Bisection on theta in (0, pi] so that the overlap of the calibration pair
/// hits target_psi within 1e-3. The overlap must be monotone in theta on the
/// bracket. When the target holds at both ends the midpoint is returned.
inline double calibrate_theta(double target_psi, double delta_t,
                              double delta_alpha, double r,
                              int arc_segments = 1024,
                              OverlapMeasure measure = OverlapMeasure::kMeanArea) {
  constexpr double kTolerance = 1e-3;
  const auto [a, b] = calibration_pair(delta_t, delta_alpha);
  const auto f = [&](double theta) {
    return fov_overlap(a, b, FovParams(theta, r), arc_segments, measure) -
           target_psi;
  };
  double lo = deg_to_rad(0.1);
  double hi = std::numbers::pi;
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (std::abs(f_lo) <= kTolerance && std::abs(f_hi) <= kTolerance) {
    return 0.5 * (lo + hi);
  }
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw std::domain_error(
        "calibrate_theta: target overlap not bracketed on (0, 180] deg");
  }
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const double theta = 0.5 * (lo + hi);
  if (std::abs(f(theta)) > kTolerance) {
    throw std::domain_error("calibrate_theta: overlap is discontinuous at the root");
  }
  return theta;
}

}  // namespace gvpr
