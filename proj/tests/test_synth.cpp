#include <gtest/gtest.h>

#include "gvpr/synth.hpp"

namespace {

gvpr::SynthConfig small() {
  gvpr::SynthConfig cfg;
  cfg.places = 10;
  cfg.train_places = 5;
  cfg.images_per_place = 6;
  cfg.channels = 8;
  cfg.signal_channels = 4;
  cfg.locations = 3;
  return cfg;
}

TEST(Synth, CountsAndSplits) {
  const auto w = gvpr::make_synthetic_world(small());
  EXPECT_EQ(w.poses.size(), 60u);
  EXPECT_EQ(w.features.size(), 60u);
  EXPECT_EQ(w.train_ids.size(), 30u);
  EXPECT_EQ(w.query_ids.size(), 15u);
  EXPECT_EQ(w.map_ids.size(), 15u);
  EXPECT_EQ(w.features[7].id(), "p001_i001");
  EXPECT_EQ(w.poses.find("p001_i001")->scene, "train");
  EXPECT_EQ(w.poses.find(w.query_ids.front())->scene, "test");
  std::size_t with_positive = 0;
  for (const auto& [q, set] : w.ground_truth) with_positive += !set.empty();
  EXPECT_GT(with_positive, w.query_ids.size() / 2);
}

TEST(Synth, DeterministicPerSeed) {
  const auto a = gvpr::make_synthetic_world(small());
  const auto b = gvpr::make_synthetic_world(small());
  auto cfg = small();
  cfg.seed = 7;
  const auto c = gvpr::make_synthetic_world(cfg);
  bool differs = false;
  for (std::size_t i = 0; i < a.features.size(); ++i) {
    EXPECT_EQ(a.features[i].values(), b.features[i].values());
    EXPECT_EQ(a.poses[i].pose, b.poses[i].pose);
    differs |= a.features[i].values() != c.features[i].values();
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.ground_truth, b.ground_truth);
}

TEST(Synth, Validation) {
  auto cfg = small();
  cfg.train_places = cfg.places;
  EXPECT_THROW(gvpr::make_synthetic_world(cfg), std::invalid_argument);
  cfg = small();
  cfg.signal_channels = cfg.channels + 1;
  EXPECT_THROW(gvpr::make_synthetic_world(cfg), std::invalid_argument);
}

}  // namespace
