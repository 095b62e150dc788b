#include <gtest/gtest.h>

#include <array>
#include <map>

#include "gvpr/sampler.hpp"

namespace {

using gvpr::Band;
using gvpr::BatchStrategy;

std::vector<gvpr::SimilarityLabel> mixed_labels() {
  std::vector<gvpr::SimilarityLabel> labels;
  const double values[] = {1.0, 0.9, 0.75, 0.7, 0.5, 0.49, 0.2, 1e-6, 0.0, 0.0, 0.0};
  int k = 0;
  for (double v : values) {
    labels.push_back({"q" + std::to_string(k), "m" + std::to_string(k), v});
    ++k;
  }
  return labels;
}

std::array<std::size_t, 4> band_counts(const gvpr::Batch& b) {
  std::array<std::size_t, 4> c{};
  for (const auto& l : b) ++c[static_cast<std::size_t>(gvpr::band_of(l.psi))];
  return c;
}

TEST(IndexLabels, Bands) {
  EXPECT_EQ(gvpr::band_of(0.8), Band::kHigh);
  EXPECT_EQ(gvpr::band_of(0.75), Band::kHigh);
  EXPECT_EQ(gvpr::band_of(0.5), Band::kMid);
  EXPECT_EQ(gvpr::band_of(0.3), Band::kSoft);
  EXPECT_EQ(gvpr::band_of(0.0), Band::kHard);
  const auto idx = gvpr::index_labels(mixed_labels());
  EXPECT_EQ(idx.bucket(Band::kHigh).size(), 3u);
  EXPECT_EQ(idx.bucket(Band::kMid).size(), 2u);
  EXPECT_EQ(idx.bucket(Band::kSoft).size(), 3u);
  EXPECT_EQ(idx.bucket(Band::kHard).size(), 3u);
  EXPECT_THROW(gvpr::index_labels({}), std::invalid_argument);
}

TEST(ComposeBatch, StrategyQuotasAtSize64) {
  const auto idx = gvpr::index_labels(mixed_labels());
  const auto a = band_counts(gvpr::compose_batch(idx, BatchStrategy::kA, 64, 1));
  EXPECT_EQ(a[0] + a[1], 32u);
  EXPECT_EQ(a[2], 16u);
  EXPECT_EQ(a[3], 16u);
  EXPECT_EQ(band_counts(gvpr::compose_batch(idx, BatchStrategy::kB, 64, 1)),
            (std::array<std::size_t, 4>{16, 16, 16, 16}));
  const auto c = band_counts(gvpr::compose_batch(idx, BatchStrategy::kC, 63, 1));
  EXPECT_EQ(c[0] + c[1], 21u);
  EXPECT_EQ(c[2], 21u);
  EXPECT_EQ(c[3], 21u);
  const auto d = band_counts(gvpr::compose_batch(idx, BatchStrategy::kD, 64, 1));
  EXPECT_EQ(d[0] + d[1], 32u);
  EXPECT_EQ(d[2] + d[3], 32u);
}

TEST(ComposeBatch, EveryBatchMeetsQuota) {
  const auto idx = gvpr::index_labels(mixed_labels());
  gvpr::BatchSampler sampler(idx, BatchStrategy::kB, 32, 3);
  std::array<std::size_t, 4> total{};
  for (int i = 0; i < 500; ++i) {
    const auto c = band_counts(sampler.next());
    EXPECT_EQ(c, (std::array<std::size_t, 4>{8, 8, 8, 8}));
    for (std::size_t k = 0; k < 4; ++k) total[k] += c[k];
  }
  EXPECT_EQ(total, (std::array<std::size_t, 4>{4000, 4000, 4000, 4000}));
}

TEST(ComposeBatch, DeterministicForSeed) {
  const auto idx = gvpr::index_labels(mixed_labels());
  gvpr::BatchSampler s1(idx, BatchStrategy::kA, 16, 99);
  gvpr::BatchSampler s2(idx, BatchStrategy::kA, 16, 99);
  gvpr::BatchSampler s3(idx, BatchStrategy::kA, 16, 100);
  bool differs = false;
  for (int i = 0; i < 20; ++i) {
    const auto b1 = s1.next();
    EXPECT_EQ(b1, s2.next());
    differs |= b1 != s3.next();
  }
  EXPECT_TRUE(differs);
}

TEST(ComposeBatch, EmptyBandIsNamed) {
  std::vector<gvpr::SimilarityLabel> no_soft{{"a", "b", 0.9}, {"a", "c", 0.0}};
  const auto idx = gvpr::index_labels(no_soft);
  try {
    gvpr::compose_batch(idx, BatchStrategy::kA, 64, 1);
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("(0,0.5)"), std::string::npos) << e.what();
  }
  // Strategy D only needs both halves, so it works without soft negatives.
  EXPECT_NO_THROW(gvpr::compose_batch(idx, BatchStrategy::kD, 64, 1));
}

TEST(ComposeBatch, BatchSizeDivisibility) {
  const auto idx = gvpr::index_labels(mixed_labels());
  EXPECT_THROW(gvpr::compose_batch(idx, BatchStrategy::kA, 62, 1), std::invalid_argument);
  EXPECT_THROW(gvpr::compose_batch(idx, BatchStrategy::kC, 64, 1), std::invalid_argument);
  EXPECT_THROW(gvpr::compose_batch(idx, BatchStrategy::kB, 0, 1), std::invalid_argument);
  EXPECT_NO_THROW(gvpr::compose_batch(idx, BatchStrategy::kD, 6, 1));
}

TEST(Strategy, Parse) {
  EXPECT_EQ(gvpr::parse_strategy("C"), BatchStrategy::kC);
  EXPECT_THROW(gvpr::parse_strategy("E"), std::invalid_argument);
  for (auto s : {BatchStrategy::kA, BatchStrategy::kB, BatchStrategy::kC, BatchStrategy::kD}) {
    double sum = 0.0;
    for (const auto& q : gvpr::strategy_quotas(s)) {
      sum += static_cast<double>(q.numerator) / static_cast<double>(q.denominator);
    }
    EXPECT_DOUBLE_EQ(sum, 1.0);
  }
}

}  // namespace
