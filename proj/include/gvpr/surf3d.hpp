#pragma once

// 3D surface overlap: the visible subset of a scene point cloud per camera,
// and the IoU of two such subsets.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gvpr/csv.hpp"
#include "gvpr/relabel.hpp"

namespace gvpr {

/// World-to-camera rigid transform: x_cam = R x_world + t.
class Pose6DOF {
 public:
  Pose6DOF() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  Pose6DOF(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {
    if (!rotation.allFinite() || !translation.allFinite()) {
      throw std::invalid_argument("Pose6DOF: non-finite entry");
    }
    const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                             .cwiseAbs()
                             .maxCoeff();
    if (ortho > 1e-6) throw std::invalid_argument("Pose6DOF: rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-6) {
      throw std::invalid_argument("Pose6DOF: rotation determinant is not +1");
    }
  }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
    return rotation_ * world + translation_;
  }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("Intrinsics: fx, fy must be > 0");
    if (!(width >= 1.0) || !(height >= 1.0)) {
      throw std::invalid_argument("Intrinsics: width, height must be >= 1");
    }
    if (!std::isfinite(cx) || !std::isfinite(cy)) {
      throw std::invalid_argument("Intrinsics: non-finite principal point");
    }
  }
};

class PointCloud {
 public:
  explicit PointCloud(std::vector<Eigen::Vector3d> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("PointCloud: no points");
    for (const auto& p : points_) {
      if (!p.allFinite()) throw std::invalid_argument("PointCloud: non-finite point");
    }
  }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<Eigen::Vector3d> points_;
};

struct VisibleSet {
  std::string image_id;
  std::vector<std::size_t> indices;  // strictly increasing
};

constexpr double kNearPlane = 1e-6;

/// Indices of points in front of the camera (z > 1e-6 m) whose pinhole
/// projection falls in [0, width) x [0, height). No occlusion test.
inline VisibleSet project_points(const PointCloud& cloud, const Pose6DOF& pose,
                                 const Intrinsics& k, std::string image_id = {}) {
  k.validate();
  VisibleSet out{std::move(image_id), {}};
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d c = pose.to_camera(cloud.points()[i]);
    if (!(c.z() > kNearPlane)) continue;
    const double u = k.fx * c.x() / c.z() + k.cx;
    const double v = k.fy * c.y() / c.z() + k.cy;
    if (u >= 0.0 && u < k.width && v >= 0.0 && v < k.height) out.indices.push_back(i);
  }
  return out;
}

/// Both visible sets empty: similarity is undefined.
class UndefinedSimilarity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline double surface_overlap(const VisibleSet& a, const VisibleSet& b) {
  if (a.indices.empty() && b.indices.empty()) {
    throw UndefinedSimilarity("surface_overlap: both visible sets are empty ('" + a.image_id +
                              "', '" + b.image_id + "')");
  }
  std::size_t common = 0;
  auto ia = a.indices.begin();
  auto ib = b.indices.begin();
  while (ia != a.indices.end() && ib != b.indices.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.indices.size() + b.indices.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

struct Overlap3dResult {
  std::vector<SimilarityLabel> labels;  // canonical and sorted
  std::size_t skipped_empty = 0;
};

/// Pairwise surface overlap over every unordered pair of images of one scene.
inline Overlap3dResult pairwise_surface_overlap(const std::vector<VisibleSet>& sets) {
  Overlap3dResult out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      if (sets[i].indices.empty() && sets[j].indices.empty()) {
        ++out.skipped_empty;
        continue;
      }
      out.labels.push_back(detail::canonical_label(sets[i].image_id, sets[j].image_id,
                                                   surface_overlap(sets[i], sets[j])));
    }
  }
  detail::sort_labels(out.labels);
  return out;
}

// ---- file formats -----------------------------------------------------------

/// Plain-text XYZ: one "x y z" triple per line; blank lines and '#' comments
/// are skipped.
inline PointCloud parse_xyz(std::istream& in, const std::string& source = "<cloud>") {
  std::vector<Eigen::Vector3d> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = csv::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<std::string> f;
    for (const auto& tok : csv::split(body, ' ')) {
      if (!tok.empty()) f.push_back(tok);
    }
    if (f.size() != 3) throw ParseError(source, lineno, "expected 'x y z'");
    pts.emplace_back(csv::parse_double(f[0], source, lineno, "x"),
                     csv::parse_double(f[1], source, lineno, "y"),
                     csv::parse_double(f[2], source, lineno, "z"));
  }
  if (pts.empty()) throw ParseError(source, lineno, "point cloud is empty");
  return PointCloud(std::move(pts));
}

inline PointCloud load_xyz(const std::string& path) {
  auto in = csv::open_input(path);
  return parse_xyz(in, path);
}

struct NamedPose6DOF {
  std::string id;
  Pose6DOF pose;
};

inline std::vector<std::string> pose6dof_header() {
  return {"id", "r00", "r01", "r02", "r10", "r11", "r12", "r20", "r21", "r22", "t0", "t1", "t2"};
}

/// CSV "id,r00..r22,t0,t1,t2" (row-major rotation, world to camera).
inline std::vector<NamedPose6DOF> parse_poses6dof(std::istream& in,
                                                  const std::string& source = "<poses6dof>") {
  const auto header = pose6dof_header();
  csv::expect_header(in, source, header);
  std::vector<NamedPose6DOF> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != header.size()) {
      throw ParseError(source, lineno, "expected 13 fields, got " + std::to_string(f.size()));
    }
    if (f[0].empty() || !seen.insert(f[0]).second) {
      throw ParseError(source, lineno, "empty or duplicate id '" + f[0] + "'");
    }
    Eigen::Matrix3d r;
    for (int i = 0; i < 9; ++i) {
      r(i / 3, i % 3) = csv::parse_double(f[1 + i], source, lineno, header[1 + i]);
    }
    Eigen::Vector3d t;
    for (int i = 0; i < 3; ++i) t[i] = csv::parse_double(f[10 + i], source, lineno, header[10 + i]);
    try {
      out.push_back({f[0], Pose6DOF(r, t)});
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return out;
}

inline std::vector<NamedPose6DOF> load_poses6dof(const std::string& path) {
  auto in = csv::open_input(path);
  return parse_poses6dof(in, path);
}

/// Flat "key = value" file with fx, fy, cx, cy, width, height. '#' starts a
/// comment; unknown or missing keys are errors.
inline Intrinsics parse_intrinsics(std::istream& in, const std::string& source = "<intrinsics>") {
  std::map<std::string, double> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = csv::trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, lineno, "expected 'key = value'");
    const std::string key(csv::trim(body.substr(0, eq)));
    const double value = csv::parse_double(csv::trim(body.substr(eq + 1)), source, lineno, key);
    if (key != "fx" && key != "fy" && key != "cx" && key != "cy" && key != "width" &&
        key != "height") {
      throw ParseError(source, lineno, "unknown key '" + key + "'");
    }
    if (!kv.emplace(key, value).second) throw ParseError(source, lineno, "duplicate key '" + key + "'");
  }
  for (const char* key : {"fx", "fy", "cx", "cy", "width", "height"}) {
    if (!kv.count(key)) throw ParseError(source, lineno, std::string("missing key '") + key + "'");
  }
  Intrinsics k{kv["fx"], kv["fy"], kv["cx"], kv["cy"], kv["width"], kv["height"]};
  k.validate();
  return k;
}

inline Intrinsics load_intrinsics(const std::string& path) {
  auto in = csv::open_input(path);
  return parse_intrinsics(in, path);
}

}  // namespace gvpr
