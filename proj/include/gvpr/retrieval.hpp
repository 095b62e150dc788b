#pragma once

// Evaluation stack: exact nearest-neighbor retrieval, Recall@k, pose-threshold
// localization, and PCA whitening.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gvpr/csv.hpp"
#include "gvpr/descriptors.hpp"
#include "gvpr/fov2d.hpp"
#include "gvpr/parallel.hpp"

namespace gvpr {

struct Neighbor {
  std::string map_id;
  double distance = 0.0;
};

struct Ranking {
  std::string query_id;
  std::vector<Neighbor> neighbors;  // ascending distance, ties by map id
};

/// Exact top-k by L2 distance for every query. Ties are broken by map id,
/// so rankings do not depend on the row order of the map.
inline std::vector<Ranking> nn_search(const DescriptorSet& queries, const DescriptorSet& map,
                                      std::size_t k, unsigned threads = 0) {
  if (queries.dim() != map.dim()) {
    throw std::invalid_argument("nn_search: query dimension " + std::to_string(queries.dim()) +
                                " != map dimension " + std::to_string(map.dim()));
  }
  if (k > map.size()) {
    throw std::invalid_argument("nn_search: k = " + std::to_string(k) + " exceeds map size " +
                                std::to_string(map.size()));
  }
  const auto& q = queries.matrix();
  const auto& m = map.matrix();
  std::vector<Ranking> out(queries.size());
  parallel_for(
      queries.size(),
      [&](std::size_t i) {
        std::vector<std::pair<double, std::size_t>> dist(map.size());
        for (std::size_t j = 0; j < map.size(); ++j) {
          const auto row = static_cast<Eigen::Index>(j);
          dist[j] = {(q.row(static_cast<Eigen::Index>(i)) - m.row(row)).norm(), j};
        }
        const auto less = [&](const auto& a, const auto& b) {
          return std::tie(a.first, map.ids()[a.second]) < std::tie(b.first, map.ids()[b.second]);
        };
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end(),
                          less);
        Ranking r{queries.ids()[i], {}};
        r.neighbors.reserve(k);
        for (std::size_t n = 0; n < k; ++n) {
          r.neighbors.push_back({map.ids()[dist[n].second], dist[n].first});
        }
        out[i] = std::move(r);
      },
      threads);
  return out;
}

using Positives = std::map<std::string, std::set<std::string>>;

struct RecallResult {
  std::map<std::size_t, double> recall;  // k -> percentage
  std::size_t evaluated = 0;
  std::size_t excluded = 0;              // queries without any positive
};

/// Percentage of queries with at least one positive among the first k
/// neighbors. Queries with an empty positive set are excluded and counted.
inline RecallResult recall_at_k(const std::vector<Ranking>& rankings, const Positives& positives,
                                const std::vector<std::size_t>& ks) {
  RecallResult out;
  std::map<std::size_t, std::size_t> hits;
  for (std::size_t k : ks) {
    if (k == 0) throw std::invalid_argument("recall_at_k: k must be >= 1");
    hits[k] = 0;
  }
  for (const auto& r : rankings) {
    const auto it = positives.find(r.query_id);
    if (it == positives.end()) {
      throw std::invalid_argument("recall_at_k: no ground-truth entry for query '" +
                                  r.query_id + "'");
    }
    if (it->second.empty()) {
      ++out.excluded;
      continue;
    }
    ++out.evaluated;
    std::size_t first_hit = std::numeric_limits<std::size_t>::max();
    for (std::size_t n = 0; n < r.neighbors.size(); ++n) {
      if (it->second.count(r.neighbors[n].map_id)) {
        first_hit = n;
        break;
      }
    }
    for (auto& [k, h] : hits) {
      if (k > r.neighbors.size()) {
        throw std::invalid_argument("recall_at_k: ranking for '" + r.query_id +
                                    "' is shorter than k = " + std::to_string(k));
      }
      if (first_hit < k) ++h;
    }
  }
  for (const auto& [k, h] : hits) {
    out.recall[k] = out.evaluated == 0 ? 0.0
                                       : 100.0 * static_cast<double>(h) /
                                             static_cast<double>(out.evaluated);
  }
  return out;
}

struct PoseThreshold {
  double meters;
  double degrees;
};

inline std::vector<PoseThreshold> default_pose_thresholds() {
  return {{0.25, 2.0}, {0.5, 5.0}, {5.0, 10.0}};
}

/// Percentage of queries whose top-1 match lies within both the translation
/// and rotation threshold of the query pose (inclusive), per threshold.
inline std::vector<double> localization_accuracy(
    const std::vector<Ranking>& rankings, const std::map<std::string, CameraPose2D>& query_poses,
    const std::map<std::string, CameraPose2D>& map_poses,
    const std::vector<PoseThreshold>& thresholds) {
  std::vector<std::size_t> correct(thresholds.size(), 0);
  for (const auto& r : rankings) {
    if (r.neighbors.empty()) {
      throw std::invalid_argument("localization_accuracy: empty ranking for '" + r.query_id + "'");
    }
    const auto qp = query_poses.find(r.query_id);
    if (qp == query_poses.end()) {
      throw std::invalid_argument("localization_accuracy: no pose for query '" + r.query_id + "'");
    }
    const auto mp = map_poses.find(r.neighbors.front().map_id);
    if (mp == map_poses.end()) {
      throw std::invalid_argument("localization_accuracy: no pose for map image '" +
                                  r.neighbors.front().map_id + "'");
    }
    const double dt = translation_distance(qp->second, mp->second);
    const double da = rad_to_deg(rotation_distance(qp->second, mp->second));
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      if (dt <= thresholds[t].meters && da <= thresholds[t].degrees) ++correct[t];
    }
  }
  std::vector<double> out;
  for (std::size_t c : correct) {
    out.push_back(rankings.empty() ? 0.0
                                   : 100.0 * static_cast<double>(c) /
                                         static_cast<double>(rankings.size()));
  }
  return out;
}

/// Positives by the pose criterion: within max_m meters and strictly less
/// than max_deg degrees of heading difference.
inline Positives pose_positives(const std::map<std::string, CameraPose2D>& query_poses,
                                const std::map<std::string, CameraPose2D>& map_poses,
                                double max_m = 25.0, double max_deg = 40.0) {
  Positives out;
  for (const auto& [qid, qp] : query_poses) {
    auto& set = out[qid];
    for (const auto& [mid, mp] : map_poses) {
      if (translation_distance(qp, mp) <= max_m &&
          rad_to_deg(rotation_distance(qp, mp)) < max_deg) {
        set.insert(mid);
      }
    }
  }
  return out;
}

// ---- ground truth CSV: query_id,map_id --------------------------------------

inline std::vector<std::pair<std::string, std::string>> parse_ground_truth(
    std::istream& in, const std::string& source = "<ground-truth>") {
  csv::expect_header(in, source, {"query_id", "map_id"});
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw ParseError(source, lineno, "expected 'query_id,map_id'");
    }
    out.emplace_back(f[0], f[1]);
  }
  return out;
}

inline void write_ground_truth(std::ostream& out, const Positives& positives) {
  out << "query_id,map_id\n";
  for (const auto& [q, set] : positives) {
    for (const auto& m : set) out << q << ',' << m << '\n';
  }
}

/// Positive sets for every query in `queries`, checked against both sets.
inline Positives build_positives(const std::vector<std::pair<std::string, std::string>>& gt,
                                 const DescriptorSet& queries, const DescriptorSet& map) {
  Positives out;
  for (const auto& id : queries.ids()) out[id];
  for (const auto& [q, m] : gt) {
    if (!queries.contains(q)) throw std::invalid_argument("ground truth: unknown query '" + q + "'");
    if (!map.contains(m)) throw std::invalid_argument("ground truth: unknown map image '" + m + "'");
    out[q].insert(m);
  }
  return out;
}

// ---- PCA whitening ----------------------------------------------------------

struct WhitenTransform {
  Eigen::VectorXd mean;
  /// d_pca x d; row i is eigenvector i scaled by (lambda_i + epsilon)^(-1/2).
  Eigen::MatrixXd projection;
  Eigen::VectorXd eigenvalues;  // descending
  double epsilon = 1e-9;

  Eigen::Index input_dim() const { return projection.cols(); }
  Eigen::Index output_dim() const { return projection.rows(); }

  static WhitenTransform identity(Eigen::Index d) {
    return {Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d),
            Eigen::VectorXd::Ones(d), 0.0};
  }
};

/// Fit on training descriptors, never on the evaluation sets. Covariance uses the 1/(n-1)
/// normalization; eigenvectors are signed so their first nonzero entry is
/// positive.
inline WhitenTransform fit_pca_whitening(const DescriptorSet& train, Eigen::Index d_pca,
                                         double epsilon = 1e-9) {
  const auto n = static_cast<Eigen::Index>(train.size());
  if (d_pca < 1 || d_pca > train.dim()) {
    throw std::invalid_argument("fit_pca_whitening: d_pca must lie in [1, " +
                                std::to_string(train.dim()) + "]");
  }
  if (n <= d_pca) {
    throw std::invalid_argument("fit_pca_whitening: need more samples (" + std::to_string(n) +
                                ") than output dimensions (" + std::to_string(d_pca) + ")");
  }
  const Eigen::MatrixXd& x = train.matrix();
  WhitenTransform t;
  t.epsilon = epsilon;
  t.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - t.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("fit_pca_whitening: eigen decomposition failed");
  }
  const Eigen::Index d = x.cols();
  t.projection.resize(d_pca, d);
  t.eigenvalues.resize(d_pca);
  // Eigen returns ascending eigenvalues.
  for (Eigen::Index i = 0; i < d_pca; ++i) {
    const Eigen::Index src = d - 1 - i;
    const double lambda = std::max(solver.eigenvalues()[src], 0.0);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    for (Eigen::Index k = 0; k < d; ++k) {
      if (std::abs(v[k]) > 1e-12) {
        if (v[k] < 0.0) v = -v;
        break;
      }
    }
    t.eigenvalues[i] = lambda;
    t.projection.row(i) = v.transpose() / std::sqrt(lambda + epsilon);
  }
  return t;
}

inline DescriptorSet apply_whitening(const WhitenTransform& t, const DescriptorSet& s,
                                     bool renormalize = true) {
  if (s.dim() != t.input_dim()) {
    throw std::invalid_argument("apply_whitening: descriptor dimension " +
                                std::to_string(s.dim()) + " != transform input " +
                                std::to_string(t.input_dim()));
  }
  Eigen::MatrixXd out = (s.matrix().rowwise() - t.mean.transpose()) * t.projection.transpose();
  DescriptorSet projected(s.ids(), std::move(out));
  return renormalize ? projected.l2_normalized() : projected;
}

}  // namespace gvpr
