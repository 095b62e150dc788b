#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gvpr/relabel.hpp"

namespace {

using gvpr::CameraPose2D;
using gvpr::PoseTable;

PoseTable parse(const std::string& text) {
  std::istringstream in(text);
  return gvpr::parse_poses(in, "test.csv");
}

TEST(LoadPoses, WellFormed) {
  const auto t = parse(
      "id,scene,t0,t1,alpha_deg\n"
      "a,cph,0,0,0\n"
      "b,cph,1.5,-2,90\n"
      "c,sf,3,4,540\n");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[1].scene, "cph");
  EXPECT_DOUBLE_EQ(t[1].pose.t0(), 1.5);
  EXPECT_NEAR(gvpr::rad_to_deg(t[2].pose.alpha()), 180.0, 1e-9);
}

TEST(LoadPoses, DuplicateIdReportsLine) {
  try {
    parse("id,scene,t0,t1,alpha_deg\na,s,0,0,0\nb,s,0,0,0\na,s,1,1,1\n");
    FAIL() << "expected ParseError";
  } catch (const gvpr::ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(LoadPoses, MalformedRowsReportLine) {
  try {
    parse("id,scene,t0,t1,alpha_deg\na,s,0,0,0\nb,s,zero,0,0\n");
    FAIL() << "expected ParseError";
  } catch (const gvpr::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("id,scene,t0,t1,alpha_deg\na,s,0,0\n"), gvpr::ParseError);
  EXPECT_THROW(parse("id,scene,t0,t1,alpha_deg\na,,0,0,0\n"), gvpr::ParseError);
  EXPECT_THROW(parse("id,scene,x,y,alpha_deg\n"), gvpr::ParseError);
  EXPECT_THROW(parse(""), gvpr::ParseError);
  EXPECT_THROW(gvpr::load_poses("/nonexistent/poses.csv"), std::runtime_error);
}

TEST(Classify, Boundaries) {
  using gvpr::SimilarityClass;
  EXPECT_EQ(gvpr::classify(0.5563), SimilarityClass::kPositive);
  EXPECT_EQ(gvpr::classify(0.5), SimilarityClass::kPositive);
  EXPECT_EQ(gvpr::classify(std::nextafter(0.5, 0.0)), SimilarityClass::kSoftNegative);
  EXPECT_EQ(gvpr::classify(0.1678), SimilarityClass::kSoftNegative);
  EXPECT_EQ(gvpr::classify(std::nextafter(0.0, 1.0)), SimilarityClass::kSoftNegative);
  EXPECT_EQ(gvpr::classify(0.0), SimilarityClass::kHardNegative);
  EXPECT_THROW(gvpr::classify(1.5), std::invalid_argument);
}

TEST(PairwiseSimilarity, IdenticalPoses) {
  const PoseTable t({{"b", CameraPose2D(1, 1, 0.3), "s"}, {"a", CameraPose2D(1, 1, 0.3), "s"}});
  const auto labels = gvpr::pairwise_similarity(t, gvpr::msls_fov());
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0], (gvpr::SimilarityLabel{"a", "b", 1.0}));
}

TEST(PairwiseSimilarity, FarPairsShortCircuitToZero) {
  const PoseTable t({{"a", CameraPose2D(0, 0, 0), "s"}, {"b", CameraPose2D(0, 200, 0), "s"}});
  const auto labels = gvpr::pairwise_similarity(t, gvpr::msls_fov());
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].psi, 0.0);
}

TEST(PairwiseSimilarity, MslsAnchorPair) {
  const PoseTable t({{"q", CameraPose2D::from_degrees(0, 0, 0), "s"},
                     {"m", CameraPose2D::from_degrees(25, 0, 0), "s"}});
  const auto labels = gvpr::pairwise_similarity(t, gvpr::msls_fov());
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].query_id, "m");
  EXPECT_NEAR(labels[0].psi, 0.4501, 0.002);
}

TEST(PairwiseSimilarity, PerSceneCanonicalAndRadiusLimited) {
  PoseTable t;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0, 150), ang(0, 6.28);
  for (int i = 0; i < 40; ++i) {
    t.add({"img" + std::to_string(100 - i), CameraPose2D(pos(rng), pos(rng), ang(rng)),
           i % 3 == 0 ? "x" : "y"});
  }
  gvpr::RelabelOptions opt;
  opt.candidate_radius = 120.0;
  const auto labels = gvpr::pairwise_similarity(t, gvpr::msls_fov(), opt);
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& l = labels[k];
    EXPECT_LT(l.query_id, l.map_id);
    EXPECT_TRUE(seen.emplace(l.query_id, l.map_id).second);
    const auto* a = t.find(l.query_id);
    const auto* b = t.find(l.map_id);
    EXPECT_EQ(a->scene, b->scene);
    EXPECT_LE(gvpr::translation_distance(a->pose, b->pose), 120.0);
    EXPECT_EQ(l.psi, gvpr::fov_overlap(a->pose, b->pose, gvpr::msls_fov()));
    if (k > 0) {
      EXPECT_LT(std::tie(labels[k - 1].query_id, labels[k - 1].map_id),
                std::tie(l.query_id, l.map_id));
    }
  }
  // Same result single-threaded.
  opt.threads = 1;
  EXPECT_EQ(gvpr::pairwise_similarity(t, gvpr::msls_fov(), opt), labels);
  opt.candidate_radius = 99.0;
  EXPECT_THROW(gvpr::pairwise_similarity(t, gvpr::msls_fov(), opt), std::invalid_argument);
}

TEST(PairwiseSimilarity, ShortCircuitAgreesWithClipping) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ang(0, gvpr::kTwoPi), extra(0, 50);
  const auto fov = gvpr::msls_fov();
  for (int i = 0; i < 200; ++i) {
    const double dir = ang(rng);
    const double dist = 2 * fov.r() + 1e-6 + extra(rng);
    const CameraPose2D a(0, 0, ang(rng));
    const CameraPose2D b(dist * std::sin(dir), dist * std::cos(dir), ang(rng));
    const auto inter = gvpr::convex_intersection(gvpr::sector_polygon(a, fov),
                                                 gvpr::sector_polygon(b, fov));
    EXPECT_FALSE(inter.has_value());
  }
}

TEST(Labels, CsvRoundTripAndFormat) {
  const std::vector<gvpr::SimilarityLabel> labels{{"a", "b", 0.5563}, {"a", "c", 1.0 / 3.0}};
  std::ostringstream out;
  gvpr::write_labels(out, labels);
  EXPECT_EQ(out.str(), "query_id,map_id,psi\na,b,0.556300\na,c,0.333333\n");
  std::istringstream in(out.str());
  const auto back = gvpr::parse_labels(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_NEAR(back[1].psi, 1.0 / 3.0, 1e-6);
  std::istringstream bad("query_id,map_id,psi\na,b,1.2\n");
  EXPECT_THROW(gvpr::parse_labels(bad), gvpr::ParseError);
}

TEST(Profile, SinglePairOneRecord) {
  const PoseTable t({{"a", CameraPose2D(0, 0, 0), "s"}, {"b", CameraPose2D(3, 4, 0.5), "s"}});
  const auto rec = gvpr::fov_distance_profile(t, gvpr::msls_fov());
  ASSERT_EQ(rec.size(), 1u);
  EXPECT_DOUBLE_EQ(rec[0].translation_m, 5.0);
  EXPECT_DOUBLE_EQ(rec[0].rotation_rad, 0.5);
  EXPECT_THROW(gvpr::fov_distance_profile(PoseTable({{"a", {}, "s"}}), gvpr::msls_fov()),
               std::invalid_argument);
}

TEST(Profile, EqualOrientationGridIsMonotone) {
  PoseTable t;
  for (int i = 0; i <= 40; ++i) {
    t.add({"p" + std::to_string(100 + i), CameraPose2D::from_degrees(2.5 * i, 0, 0), "s"});
  }
  auto rec = gvpr::fov_distance_profile(t, gvpr::msls_fov());
  std::sort(rec.begin(), rec.end(),
            [](const auto& a, const auto& b) { return a.translation_m < b.translation_m; });
  for (std::size_t k = 1; k < rec.size(); ++k) {
    if (rec[k].translation_m > rec[k - 1].translation_m + 1e-9) {
      EXPECT_LE(rec[k].psi, rec[k - 1].psi + 1e-12);
    }
  }
}

TEST(Profile, MslsLikePosesClusterAtHalfNear25m) {
  // Pairs side by side with equal heading, as in MSLS borderline positives.
  PoseTable t;
  for (int i = 0; i < 8; ++i) {
    t.add({"a" + std::to_string(i), CameraPose2D::from_degrees(100.0 * i, 0, 0), "s"});
    t.add({"b" + std::to_string(i), CameraPose2D::from_degrees(100.0 * i + 25.0, 0, 0), "s"});
  }
  const auto rec = gvpr::fov_distance_profile(t, gvpr::msls_fov());
  int near25 = 0;
  for (const auto& r : rec) {
    if (std::abs(r.translation_m - 25.0) < 1e-9) {
      ++near25;
      EXPECT_NEAR(r.psi, 0.4501, 0.002);
    }
  }
  EXPECT_EQ(near25, 8);
  const auto cells = gvpr::bin_profile(rec, 5.0, gvpr::deg_to_rad(10));
  ASSERT_FALSE(cells.empty());
  EXPECT_EQ(cells.front().translation_bin, 5u);
  EXPECT_EQ(cells.front().count, 8u);
}

}  // namespace
