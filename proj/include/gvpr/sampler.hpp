#pragma once

// Mining-free batch composition: every batch holds fixed quotas of pairs per
// similarity band, drawn uniformly with replacement inside each band.

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gvpr/relabel.hpp"

namespace gvpr {

enum class Band : std::size_t {
  kHigh = 0,  // [0.75, 1]
  kMid = 1,   // [0.5, 0.75)
  kSoft = 2,  // (0, 0.5)
  kHard = 3,  // {0}
};
constexpr std::size_t kBandCount = 4;

inline Band band_of(double psi) {
  if (psi >= 0.75) return Band::kHigh;
  if (psi >= 0.5) return Band::kMid;
  if (psi > 0.0) return Band::kSoft;
  return Band::kHard;
}

inline const char* band_name(Band b) {
  switch (b) {
    case Band::kHigh: return "[0.75,1]";
    case Band::kMid: return "[0.5,0.75)";
    case Band::kSoft: return "(0,0.5)";
    case Band::kHard: return "{0}";
  }
  return "?";
}

class PairIndex {
 public:
  explicit PairIndex(std::vector<SimilarityLabel> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("PairIndex: no labels");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      buckets_[static_cast<std::size_t>(band_of(labels_[i].psi))].push_back(i);
    }
  }

  const std::vector<SimilarityLabel>& labels() const { return labels_; }
  const std::vector<std::size_t>& bucket(Band b) const {
    return buckets_[static_cast<std::size_t>(b)];
  }

 private:
  std::vector<SimilarityLabel> labels_;
  std::array<std::vector<std::size_t>, kBandCount> buckets_;
};

inline PairIndex index_labels(std::vector<SimilarityLabel> labels) {
  return PairIndex(std::move(labels));
}

enum class BatchStrategy { kA, kB, kC, kD };

inline BatchStrategy parse_strategy(const std::string& s) {
  if (s == "A") return BatchStrategy::kA;
  if (s == "B") return BatchStrategy::kB;
  if (s == "C") return BatchStrategy::kC;
  if (s == "D") return BatchStrategy::kD;
  throw std::invalid_argument("unknown batch strategy '" + s + "' (expected A|B|C|D)");
}

/// A group of bands drawn from as one pool, with its share of the batch.
struct Quota {
  std::vector<Band> bands;
  std::size_t numerator;
  std::size_t denominator;
};

inline std::vector<Quota> strategy_quotas(BatchStrategy s) {
  using B = Band;
  switch (s) {
    case BatchStrategy::kA:
      return {{{B::kHigh, B::kMid}, 1, 2}, {{B::kSoft}, 1, 4}, {{B::kHard}, 1, 4}};
    case BatchStrategy::kB:
      return {{{B::kHigh}, 1, 4}, {{B::kMid}, 1, 4}, {{B::kSoft}, 1, 4}, {{B::kHard}, 1, 4}};
    case BatchStrategy::kC:
      return {{{B::kHigh, B::kMid}, 1, 3}, {{B::kSoft}, 1, 3}, {{B::kHard}, 1, 3}};
    case BatchStrategy::kD:
      return {{{B::kHigh, B::kMid}, 1, 2}, {{B::kSoft, B::kHard}, 1, 2}};
  }
  return {};
}

/// Batch size must be a multiple of this.
inline std::size_t strategy_divisor(BatchStrategy s) {
  switch (s) {
    case BatchStrategy::kA:
    case BatchStrategy::kB: return 4;
    case BatchStrategy::kC: return 3;
    case BatchStrategy::kD: return 2;
  }
  return 1;
}

using Batch = std::vector<SimilarityLabel>;

/// Owns its RNG stream; successive next() calls give a deterministic batch
/// sequence for a given (labels, strategy, batch_size, seed).
class BatchSampler {
 public:
  BatchSampler(const PairIndex& index, BatchStrategy strategy, std::size_t batch_size,
               std::uint64_t seed)
      : index_(&index), batch_size_(batch_size), rng_(seed) {
    const std::size_t div = strategy_divisor(strategy);
    if (batch_size == 0 || batch_size % div != 0) {
      throw std::invalid_argument("batch size " + std::to_string(batch_size) +
                                  " must be a positive multiple of " + std::to_string(div));
    }
    for (const Quota& q : strategy_quotas(strategy)) {
      Pool pool;
      pool.count = batch_size * q.numerator / q.denominator;
      std::string names;
      for (Band b : q.bands) {
        const auto& bucket = index.bucket(b);
        pool.members.insert(pool.members.end(), bucket.begin(), bucket.end());
        names += (names.empty() ? "" : " U ") + std::string(band_name(b));
      }
      if (pool.members.empty()) {
        throw std::invalid_argument("similarity band " + names + " has no pairs");
      }
      pools_.push_back(std::move(pool));
    }
  }

  Batch next() {
    Batch batch;
    batch.reserve(batch_size_);
    for (const Pool& p : pools_) {
      std::uniform_int_distribution<std::size_t> pick(0, p.members.size() - 1);
      for (std::size_t k = 0; k < p.count; ++k) {
        batch.push_back(index_->labels()[p.members[pick(rng_)]]);
      }
    }
    std::shuffle(batch.begin(), batch.end(), rng_);
    return batch;
  }

  std::size_t batch_size() const { return batch_size_; }

 private:
  struct Pool {
    std::vector<std::size_t> members;
    std::size_t count = 0;
  };
  const PairIndex* index_;
  std::size_t batch_size_;
  std::mt19937_64 rng_;
  std::vector<Pool> pools_;
};

inline Batch compose_batch(const PairIndex& index, BatchStrategy strategy,
                           std::size_t batch_size, std::uint64_t seed) {
  return BatchSampler(index, strategy, batch_size, seed).next();
}

}  // namespace gvpr
