#pragma once

// Re-annotation of a pose table with graded similarity labels.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gvpr/csv.hpp"
#include "gvpr/fov2d.hpp"
#include "gvpr/parallel.hpp"

namespace gvpr {

struct PoseRecord {
  std::string image_id;
  CameraPose2D pose;
  std::string scene;
};

/// Pose records with unique ids and nonempty scene names.
class PoseTable {
 public:
  PoseTable() = default;
  explicit PoseTable(std::vector<PoseRecord> records) {
    for (auto& r : records) add(std::move(r));
  }

  void add(PoseRecord record) {
    if (record.image_id.empty()) throw std::invalid_argument("PoseTable: empty image id");
    if (record.scene.empty()) {
      throw std::invalid_argument("PoseTable: empty scene for '" + record.image_id + "'");
    }
    if (!index_.emplace(record.image_id, records_.size()).second) {
      throw std::invalid_argument("PoseTable: duplicate image id '" + record.image_id + "'");
    }
    records_.push_back(std::move(record));
  }

  const std::vector<PoseRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const PoseRecord& operator[](std::size_t i) const { return records_[i]; }

  const PoseRecord* find(const std::string& id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  std::map<std::string, CameraPose2D> pose_map() const {
    std::map<std::string, CameraPose2D> out;
    for (const auto& r : records_) out.emplace(r.image_id, r.pose);
    return out;
  }

 private:
  std::vector<PoseRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct SimilarityLabel {
  std::string query_id;
  std::string map_id;
  double psi = 0.0;

  friend bool operator==(const SimilarityLabel&, const SimilarityLabel&) = default;
};

enum class SimilarityClass { kPositive, kSoftNegative, kHardNegative };

inline const char* to_string(SimilarityClass c) {
  switch (c) {
    case SimilarityClass::kPositive: return "positive";
    case SimilarityClass::kSoftNegative: return "soft_negative";
    case SimilarityClass::kHardNegative: return "hard_negative";
  }
  return "?";
}

/// psi >= 0.5 positive, 0 < psi < 0.5 soft negative, psi == 0 hard negative.
inline SimilarityClass classify(double psi) {
  if (!(psi >= 0.0 && psi <= 1.0)) {
    throw std::invalid_argument("classify: psi outside [0,1]: " + std::to_string(psi));
  }
  if (psi >= 0.5) return SimilarityClass::kPositive;
  if (psi > 0.0) return SimilarityClass::kSoftNegative;
  return SimilarityClass::kHardNegative;
}

// ---- poses CSV: id,scene,t0,t1,alpha_deg --------------------------------

inline PoseTable parse_poses(std::istream& in, const std::string& source = "<poses>") {
  csv::expect_header(in, source, {"id", "scene", "t0", "t1", "alpha_deg"});
  PoseTable table;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 5) {
      throw ParseError(source, lineno, "expected 5 fields, got " + std::to_string(f.size()));
    }
    if (f[0].empty()) throw ParseError(source, lineno, "empty id");
    if (f[1].empty()) throw ParseError(source, lineno, "empty scene");
    const double t0 = csv::parse_double(f[2], source, lineno, "t0");
    const double t1 = csv::parse_double(f[3], source, lineno, "t1");
    const double alpha = csv::parse_double(f[4], source, lineno, "alpha_deg");
    if (!std::isfinite(t0) || !std::isfinite(t1) || !std::isfinite(alpha)) {
      throw ParseError(source, lineno, "non-finite pose value");
    }
    if (table.find(f[0]) != nullptr) {
      throw ParseError(source, lineno, "duplicate id '" + f[0] + "'");
    }
    table.add({f[0], CameraPose2D::from_degrees(t0, t1, alpha), f[1]});
  }
  return table;
}

inline PoseTable load_poses(const std::string& path) {
  auto in = csv::open_input(path);
  return parse_poses(in, path);
}

inline void write_poses(std::ostream& out, const PoseTable& table) {
  out << "id,scene,t0,t1,alpha_deg\n";
  char buf[128];
  for (const auto& r : table.records()) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f", r.pose.t0(), r.pose.t1(),
                  rad_to_deg(r.pose.alpha()));
    out << r.image_id << ',' << r.scene << ',' << buf << '\n';
  }
}

// ---- labels CSV: query_id,map_id,psi --------------------------------------

inline void write_labels(std::ostream& out, const std::vector<SimilarityLabel>& labels) {
  out << "query_id,map_id,psi\n";
  char buf[32];
  for (const auto& l : labels) {
    std::snprintf(buf, sizeof buf, "%.6f", l.psi);
    out << l.query_id << ',' << l.map_id << ',' << buf << '\n';
  }
}

inline std::vector<SimilarityLabel> parse_labels(std::istream& in,
                                                 const std::string& source = "<labels>") {
  csv::expect_header(in, source, {"query_id", "map_id", "psi"});
  std::vector<SimilarityLabel> labels;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 3) {
      throw ParseError(source, lineno, "expected 3 fields, got " + std::to_string(f.size()));
    }
    const double psi = csv::parse_double(f[2], source, lineno, "psi");
    if (!(psi >= 0.0 && psi <= 1.0)) throw ParseError(source, lineno, "psi outside [0,1]");
    labels.push_back({f[0], f[1], psi});
  }
  return labels;
}

inline std::vector<SimilarityLabel> load_labels(const std::string& path) {
  auto in = csv::open_input(path);
  return parse_labels(in, path);
}

// ---- pair enumeration -----------------------------------------------------

struct RelabelOptions {
  /// Pairs whose centers are further apart are not emitted. Must be >= 2r.
  double candidate_radius = std::numeric_limits<double>::infinity();
  int arc_segments = kDefaultArcSegments;
  OverlapMeasure measure = OverlapMeasure::kMeanArea;
  unsigned threads = 0;
};

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> scene_pairs(
    const PoseTable& t, double max_distance) {
  std::map<std::string, std::vector<std::size_t>> by_scene;
  for (std::size_t i = 0; i < t.size(); ++i) by_scene[t[i].scene].push_back(i);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [scene, members] : by_scene) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const auto i = members[a];
        const auto j = members[b];
        if (translation_distance(t[i].pose, t[j].pose) <= max_distance) {
          pairs.emplace_back(i, j);
        }
      }
    }
  }
  return pairs;
}

inline SimilarityLabel canonical_label(const std::string& a, const std::string& b,
                                       double psi) {
  return a < b ? SimilarityLabel{a, b, psi} : SimilarityLabel{b, a, psi};
}

inline void sort_labels(std::vector<SimilarityLabel>& labels) {
  std::sort(labels.begin(), labels.end(), [](const auto& x, const auto& y) {
    return std::tie(x.query_id, x.map_id) < std::tie(y.query_id, y.map_id);
  });
}

}  // namespace detail

/// Graded labels for every unordered same-scene pair within
/// candidate_radius. Pairs further apart than 2r get psi = 0 without
/// clipping. Output is canonical (query_id < map_id) and sorted.
inline std::vector<SimilarityLabel> pairwise_similarity(const PoseTable& t,
                                                        const FovParams& fov,
                                                        const RelabelOptions& opt = {}) {
  if (opt.candidate_radius < 2.0 * fov.r()) {
    throw std::invalid_argument("pairwise_similarity: candidate radius must be >= 2r");
  }
  const auto pairs = detail::scene_pairs(t, opt.candidate_radius);
  std::vector<SimilarityLabel> labels(pairs.size());
  parallel_for(
      pairs.size(),
      [&](std::size_t k) {
        const auto& a = t[pairs[k].first];
        const auto& b = t[pairs[k].second];
        const double psi = translation_distance(a.pose, b.pose) > 2.0 * fov.r()
                               ? 0.0
                               : fov_overlap(a.pose, b.pose, fov, opt.arc_segments,
                                             opt.measure);
        labels[k] = detail::canonical_label(a.image_id, b.image_id, psi);
      },
      opt.threads);
  detail::sort_labels(labels);
  return labels;
}

struct ClassCounts {
  std::size_t positive = 0;
  std::size_t soft_negative = 0;
  std::size_t hard_negative = 0;
};

inline ClassCounts count_classes(const std::vector<SimilarityLabel>& labels) {
  ClassCounts c;
  for (const auto& l : labels) {
    switch (classify(l.psi)) {
      case SimilarityClass::kPositive: ++c.positive; break;
      case SimilarityClass::kSoftNegative: ++c.soft_negative; break;
      case SimilarityClass::kHardNegative: ++c.hard_negative; break;
    }
  }
  return c;
}

// ---- overlap vs distance profile ------------------------------------------

struct ProfileRecord {
  std::string query_id;
  std::string map_id;
  double translation_m = 0.0;
  double rotation_rad = 0.0;
  double psi = 0.0;
};

/// One record per same-scene pair within 2r (further pairs are all psi = 0
/// and are left out unless include_disjoint is set).
inline std::vector<ProfileRecord> fov_distance_profile(const PoseTable& t,
                                                       const FovParams& fov,
                                                       bool include_disjoint = false,
                                                       int arc_segments = kDefaultArcSegments,
                                                       unsigned threads = 0) {
  if (t.size() < 2) throw std::invalid_argument("fov_distance_profile: need >= 2 poses");
  const double reach = include_disjoint ? std::numeric_limits<double>::infinity()
                                        : 2.0 * fov.r();
  const auto pairs = detail::scene_pairs(t, reach);
  std::vector<ProfileRecord> out(pairs.size());
  parallel_for(
      pairs.size(),
      [&](std::size_t k) {
        const auto& a = t[pairs[k].first];
        const auto& b = t[pairs[k].second];
        const bool swap = b.image_id < a.image_id;
        out[k] = {swap ? b.image_id : a.image_id, swap ? a.image_id : b.image_id,
                  translation_distance(a.pose, b.pose), rotation_distance(a.pose, b.pose),
                  fov_overlap(a.pose, b.pose, fov, arc_segments)};
      },
      threads);
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.query_id, x.map_id) < std::tie(y.query_id, y.map_id);
  });
  return out;
}

struct ProfileCell {
  std::size_t translation_bin = 0;
  std::size_t rotation_bin = 0;
  std::size_t count = 0;
  double mean_psi = 0.0;
};

/// Mean psi per (translation, rotation) cell, for heatmaps. Empty cells are
/// omitted; cells are ordered by (translation_bin, rotation_bin).
inline std::vector<ProfileCell> bin_profile(const std::vector<ProfileRecord>& records,
                                            double translation_step_m,
                                            double rotation_step_rad) {
  if (!(translation_step_m > 0.0) || !(rotation_step_rad > 0.0)) {
    throw std::invalid_argument("bin_profile: bin sizes must be positive");
  }
  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, double>> acc;
  for (const auto& r : records) {
    const auto key = std::make_pair(
        static_cast<std::size_t>(r.translation_m / translation_step_m),
        static_cast<std::size_t>(r.rotation_rad / rotation_step_rad));
    auto& [n, sum] = acc[key];
    ++n;
    sum += r.psi;
  }
  std::vector<ProfileCell> cells;
  for (const auto& [key, v] : acc) {
    cells.push_back({key.first, key.second, v.first, v.second / static_cast<double>(v.first)});
  }
  return cells;
}

}  // namespace gvpr
