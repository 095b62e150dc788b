#pragma once

// Desk-scale descriptor model: GeM pooling over a (channels x locations)
// feature map, a linear projection, and L2 normalization. Only the
// projection is trained, by SGD on contrastive pairs.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gvpr/descriptors.hpp"
#include "gvpr/gcl.hpp"
#include "gvpr/relabel.hpp"
#include "gvpr/sampler.hpp"

namespace gvpr {

/// Feature map standing in for the last convolutional layer. Values are
/// stored row-major (channel-major); negatives are clamped to 0 on ingest.
class FeatureMap {
 public:
  FeatureMap(std::string id, std::size_t channels, std::size_t locations,
             std::vector<double> values)
      : id_(std::move(id)), channels_(channels), locations_(locations),
        values_(std::move(values)) {
    if (channels == 0 || locations == 0) {
      throw std::invalid_argument("FeatureMap: channels and locations must be >= 1");
    }
    if (values_.size() != channels * locations) {
      throw std::invalid_argument("FeatureMap '" + id_ + "': expected " +
                                  std::to_string(channels * locations) + " values, got " +
                                  std::to_string(values_.size()));
    }
    for (double& v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("FeatureMap '" + id_ + "': non-finite value");
      v = std::max(v, 0.0);
    }
  }

  const std::string& id() const { return id_; }
  std::size_t channels() const { return channels_; }
  std::size_t locations() const { return locations_; }
  double at(std::size_t c, std::size_t l) const { return values_[c * locations_ + l]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::string id_;
  std::size_t channels_;
  std::size_t locations_;
  std::vector<double> values_;
};

/// Generalized mean over locations, per channel: ((1/L) sum v^p)^(1/p).
inline Eigen::VectorXd gem_pool(const FeatureMap& fm, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("gem_pool: p must be positive");
  Eigen::VectorXd out(static_cast<Eigen::Index>(fm.channels()));
  const double inv_l = 1.0 / static_cast<double>(fm.locations());
  for (std::size_t c = 0; c < fm.channels(); ++c) {
    double sum = 0.0;
    for (std::size_t l = 0; l < fm.locations(); ++l) sum += std::pow(fm.at(c, l), p);
    out[static_cast<Eigen::Index>(c)] = std::pow(sum * inv_l, 1.0 / p);
  }
  return out;
}

struct Normalized {
  Eigen::VectorXd unit;
  double norm = 0.0;
};

inline Normalized l2_normalize(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (!(n > 1e-12)) throw std::domain_error("l2_normalize: vector norm is near zero");
  if (!std::isfinite(n)) throw std::domain_error("l2_normalize: vector norm is not finite");
  return {v / n, n};
}

/// Jacobian of v -> v/|v| applied to dv: (I - u u^T) dv / |v|. The Jacobian
/// is symmetric, so this is also the vector-Jacobian product.
inline Eigen::VectorXd l2_normalize_jvp(const Normalized& n, const Eigen::VectorXd& dv) {
  return (dv - n.unit * n.unit.dot(dv)) / n.norm;
}

/// GeM pooling followed by a linear map; the exponent is fixed.
struct EmbedModel {
  double gem_p = 3.0;
  Eigen::MatrixXd weights;  // d_out x channels
  bool trained = false;

  Eigen::Index d_out() const { return weights.rows(); }
  Eigen::Index channels() const { return weights.cols(); }

  /// W with i.i.d. N(0, 1/channels) entries.
  static EmbedModel random(std::size_t d_out, std::size_t channels, std::uint64_t seed,
                           double gem_p = 3.0) {
    if (d_out == 0 || channels == 0) {
      throw std::invalid_argument("EmbedModel: d_out and channels must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(channels)));
    EmbedModel m;
    m.gem_p = gem_p;
    m.weights.resize(static_cast<Eigen::Index>(d_out), static_cast<Eigen::Index>(channels));
    for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.weights.cols(); ++c) m.weights(r, c) = normal(rng);
    }
    return m;
  }
};

inline Eigen::VectorXd embed_pooled(const EmbedModel& m, const Eigen::VectorXd& pooled) {
  if (pooled.size() != m.channels()) {
    throw std::invalid_argument("forward: model expects " + std::to_string(m.channels()) +
                                " channels, got " + std::to_string(pooled.size()));
  }
  return l2_normalize(m.weights * pooled).unit;
}

inline Eigen::VectorXd forward(const EmbedModel& m, const FeatureMap& fm) {
  if (static_cast<Eigen::Index>(fm.channels()) != m.channels()) {
    throw std::invalid_argument("forward: model expects " + std::to_string(m.channels()) +
                                " channels, feature map '" + fm.id() + "' has " +
                                std::to_string(fm.channels()));
  }
  return embed_pooled(m, gem_pool(fm, m.gem_p));
}

inline DescriptorSet embed_all(const EmbedModel& m, const std::vector<FeatureMap>& features) {
  std::vector<std::string> ids;
  Eigen::MatrixXd mat(static_cast<Eigen::Index>(features.size()), m.d_out());
  for (std::size_t i = 0; i < features.size(); ++i) {
    ids.push_back(features[i].id());
    mat.row(static_cast<Eigen::Index>(i)) = forward(m, features[i]).transpose();
  }
  return DescriptorSet(std::move(ids), std::move(mat), true);
}

// ---- training -------------------------------------------------------------

enum class LossKind { kCL, kGCL };

inline LossKind parse_loss_kind(const std::string& s) {
  if (s == "cl") return LossKind::kCL;
  if (s == "gcl") return LossKind::kGCL;
  throw std::invalid_argument("unknown loss '" + s + "' (expected cl|gcl)");
}

/// Default initial learning rates: 0.1 for GCL, 0.01 for CL.
inline double default_learning_rate(LossKind k) { return k == LossKind::kGCL ? 0.1 : 0.01; }

struct TrainConfig {
  LossKind loss = LossKind::kGCL;
  double tau = 1.0;
  double lr0 = 0.1;
  /// The learning rate is multiplied by lr_decay_factor every this many pairs.
  std::size_t lr_decay_after = 250000;
  double lr_decay_factor = 0.1;
  std::size_t epochs = 1;
  std::size_t batch_size = 64;
  /// 0 means ceil(labels / batch_size).
  std::size_t steps_per_epoch = 0;
  BatchStrategy strategy = BatchStrategy::kA;
  std::uint64_t seed = 42;

  void validate() const {
    if (!(lr0 >= 0.0) || !std::isfinite(lr0)) throw std::invalid_argument("TrainConfig: lr0 must be >= 0");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (lr_decay_after == 0) throw std::invalid_argument("TrainConfig: lr_decay_after must be >= 1");
    (void)LossConfig(tau);
  }
};

/// Label used for a pair: CL sees psi >= 0.5 as y = 1.
inline PairLabel training_label(LossKind k, double psi) {
  return k == LossKind::kCL ? PairLabel::binary(psi >= 0.5 ? 1 : 0) : PairLabel::graded(psi);
}

struct BatchGradient {
  double loss = 0.0;              // mean over pairs
  Eigen::MatrixXd d_loss_d_weights;  // mean over pairs
};

/// Mean pair loss of a batch and its gradient w.r.t. the projection, with
/// pooled features held fixed.
inline BatchGradient batch_loss_and_grad(
    const EmbedModel& m, const std::unordered_map<std::string, Eigen::VectorXd>& pooled,
    const std::vector<SimilarityLabel>& batch, LossKind kind, const LossConfig& cfg) {
  BatchGradient out;
  out.d_loss_d_weights = Eigen::MatrixXd::Zero(m.d_out(), m.channels());
  if (batch.empty()) return out;
  for (const auto& pair : batch) {
    const Eigen::VectorXd& gi = pooled.at(pair.query_id);
    const Eigen::VectorXd& gj = pooled.at(pair.map_id);
    const Normalized ni = l2_normalize(m.weights * gi);
    const Normalized nj = l2_normalize(m.weights * gj);
    const GradResult g = pair_grad(std::span<const double>(ni.unit.data(), ni.unit.size()),
                                   std::span<const double>(nj.unit.data(), nj.unit.size()),
                                   training_label(kind, pair.psi), cfg);
    out.loss += g.loss;
    const Eigen::Map<const Eigen::VectorXd> gfi(g.grad_fi.data(), ni.unit.size());
    const Eigen::Map<const Eigen::VectorXd> gfj(g.grad_fj.data(), nj.unit.size());
    out.d_loss_d_weights += l2_normalize_jvp(ni, gfi) * gi.transpose();
    out.d_loss_d_weights += l2_normalize_jvp(nj, gfj) * gj.transpose();
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  out.d_loss_d_weights *= inv;
  return out;
}

/// Non-finite loss or weights during training.
class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(std::size_t step)
      : std::runtime_error("training diverged: non-finite value at step " + std::to_string(step)),
        step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct TrainResult {
  EmbedModel model;
  std::vector<double> loss_trace;  // mean batch loss before each update
};

inline std::unordered_map<std::string, Eigen::VectorXd> pool_features(
    const std::vector<FeatureMap>& features, double gem_p) {
  std::unordered_map<std::string, Eigen::VectorXd> pooled;
  for (const auto& fm : features) pooled.emplace(fm.id(), gem_pool(fm, gem_p));
  return pooled;
}

inline TrainResult train(EmbedModel model, const std::vector<SimilarityLabel>& labels,
                         const std::vector<FeatureMap>& features, const TrainConfig& cfg) {
  cfg.validate();
  const LossConfig loss_cfg(cfg.tau);
  const auto pooled = pool_features(features, model.gem_p);
  for (const auto& l : labels) {
    for (const auto* id : {&l.query_id, &l.map_id}) {
      if (!pooled.count(*id)) throw std::invalid_argument("train: no features for '" + *id + "'");
    }
  }
  const PairIndex index(labels);
  BatchSampler sampler(index, cfg.strategy, cfg.batch_size, cfg.seed);
  const std::size_t steps_per_epoch =
      cfg.steps_per_epoch > 0 ? cfg.steps_per_epoch
                              : (labels.size() + cfg.batch_size - 1) / cfg.batch_size;

  TrainResult result;
  result.loss_trace.reserve(steps_per_epoch * cfg.epochs);
  std::size_t pairs_seen = 0;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
      const Batch batch = sampler.next();
      BatchGradient g;
      try {
        g = batch_loss_and_grad(model, pooled, batch, cfg.loss, loss_cfg);
      } catch (const std::domain_error&) {
        throw TrainingDiverged(step);
      }
      if (!std::isfinite(g.loss) || !g.d_loss_d_weights.allFinite()) throw TrainingDiverged(step);
      result.loss_trace.push_back(g.loss);
      const double lr = cfg.lr0 * std::pow(cfg.lr_decay_factor,
                                           static_cast<double>(pairs_seen / cfg.lr_decay_after));
      if (lr != 0.0) model.weights -= lr * g.d_loss_d_weights;
      if (!model.weights.allFinite()) throw TrainingDiverged(step);
      pairs_seen += batch.size();
    }
  }
  model.trained = true;
  result.model = std::move(model);
  return result;
}

// ---- binary formats -------------------------------------------------------
//
// Features: "GVPR", u32 version, u32 count, u32 channels, u32 locations, then
// per record u16 id length, UTF-8 id, channels*locations f32 row-major.
// Model: "GVPM", u32 version, u32 d_out, u32 channels, f32 gem_p, then
// d_out*channels f32 row-major. All little-endian.

constexpr std::uint32_t kFormatVersion = 1;

namespace binio {

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& source) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw std::runtime_error(source + ": unexpected end of file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const std::string& source) {
  char got[4] = {};
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
    throw std::runtime_error(source + ": bad magic, expected '" + magic + "'");
  }
  const auto version = get<std::uint32_t>(in, source);
  if (version != kFormatVersion) {
    throw std::runtime_error(source + ": unsupported version " + std::to_string(version));
  }
}

}  // namespace binio

/// Contents of a features/descriptor file before interpretation.
struct RecordFile {
  std::size_t channels = 1;
  std::size_t locations = 1;
  std::vector<std::string> ids;
  std::vector<double> values;  // ids.size() * channels * locations

  std::size_t record_size() const { return channels * locations; }
};

inline void write_records(std::ostream& out, const RecordFile& f) {
  if (f.values.size() != f.ids.size() * f.record_size()) {
    throw std::invalid_argument("write_records: value count does not match shape");
  }
  out.write("GVPR", 4);
  binio::put<std::uint32_t>(out, kFormatVersion);
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(f.ids.size()));
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(f.channels));
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(f.locations));
  auto it = f.values.begin();
  for (const auto& id : f.ids) {
    if (id.size() > 0xFFFF) throw std::invalid_argument("write_records: id too long");
    binio::put<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (std::size_t k = 0; k < f.record_size(); ++k, ++it) {
      binio::put<float>(out, static_cast<float>(*it));
    }
  }
}

inline RecordFile read_records(std::istream& in, const std::string& source = "<features>") {
  binio::expect_magic(in, "GVPR", source);
  RecordFile f;
  const auto count = binio::get<std::uint32_t>(in, source);
  f.channels = binio::get<std::uint32_t>(in, source);
  f.locations = binio::get<std::uint32_t>(in, source);
  if (f.channels == 0 || f.locations == 0) {
    throw std::runtime_error(source + ": zero-sized record shape");
  }
  f.ids.reserve(count);
  f.values.reserve(static_cast<std::size_t>(count) * f.record_size());
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = binio::get<std::uint16_t>(in, source);
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw std::runtime_error(source + ": unexpected end of file");
    f.ids.push_back(std::move(id));
    for (std::size_t k = 0; k < f.record_size(); ++k) {
      f.values.push_back(binio::get<float>(in, source));
    }
  }
  return f;
}

inline RecordFile load_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_records(in, path);
}

inline void save_records(const std::string& path, const RecordFile& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_records(out, f);
}

inline RecordFile to_records(const std::vector<FeatureMap>& features) {
  RecordFile f;
  if (!features.empty()) {
    f.channels = features.front().channels();
    f.locations = features.front().locations();
  }
  for (const auto& fm : features) {
    if (fm.channels() != f.channels || fm.locations() != f.locations) {
      throw std::invalid_argument("inconsistent feature shape for '" + fm.id() + "'");
    }
    f.ids.push_back(fm.id());
    f.values.insert(f.values.end(), fm.values().begin(), fm.values().end());
  }
  return f;
}

inline std::vector<FeatureMap> to_feature_maps(const RecordFile& f) {
  std::vector<FeatureMap> out;
  out.reserve(f.ids.size());
  for (std::size_t i = 0; i < f.ids.size(); ++i) {
    const auto first = f.values.begin() + static_cast<std::ptrdiff_t>(i * f.record_size());
    out.emplace_back(f.ids[i], f.channels, f.locations,
                     std::vector<double>(first, first + static_cast<std::ptrdiff_t>(f.record_size())));
  }
  return out;
}

/// Descriptor files are record files with one location per record.
inline RecordFile to_records(const DescriptorSet& s) {
  RecordFile f;
  f.channels = static_cast<std::size_t>(s.dim());
  f.locations = 1;
  f.ids = s.ids();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (Eigen::Index k = 0; k < s.dim(); ++k) {
      f.values.push_back(s.matrix()(static_cast<Eigen::Index>(i), k));
    }
  }
  return f;
}

inline DescriptorSet to_descriptor_set(const RecordFile& f) {
  if (f.locations != 1) {
    throw std::invalid_argument("descriptor file must have one location per record, got " +
                                std::to_string(f.locations));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(f.ids.size()), static_cast<Eigen::Index>(f.channels));
  for (std::size_t i = 0; i < f.ids.size(); ++i) {
    for (std::size_t k = 0; k < f.channels; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = f.values[i * f.channels + k];
    }
  }
  return DescriptorSet(f.ids, std::move(m));
}

inline std::vector<FeatureMap> load_features(const std::string& path) {
  return to_feature_maps(load_records(path));
}

inline void save_features(const std::string& path, const std::vector<FeatureMap>& features) {
  save_records(path, to_records(features));
}

inline void write_model(std::ostream& out, const EmbedModel& m) {
  out.write("GVPM", 4);
  binio::put<std::uint32_t>(out, kFormatVersion);
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.d_out()));
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.channels()));
  binio::put<float>(out, static_cast<float>(m.gem_p));
  for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.weights.cols(); ++c) {
      binio::put<float>(out, static_cast<float>(m.weights(r, c)));
    }
  }
}

inline EmbedModel read_model(std::istream& in, const std::string& source = "<model>") {
  binio::expect_magic(in, "GVPM", source);
  const auto d_out = binio::get<std::uint32_t>(in, source);
  const auto channels = binio::get<std::uint32_t>(in, source);
  EmbedModel m;
  m.gem_p = binio::get<float>(in, source);
  if (d_out == 0 || channels == 0 || !(m.gem_p > 0.0)) {
    throw std::runtime_error(source + ": invalid model header");
  }
  m.weights.resize(d_out, channels);
  for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.weights.cols(); ++c) {
      m.weights(r, c) = binio::get<float>(in, source);
    }
  }
  if (!m.weights.allFinite()) throw std::runtime_error(source + ": non-finite weights");
  m.trained = true;
  return m;
}

inline void save_model(const std::string& path, const EmbedModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_model(out, m);
}

inline EmbedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_model(in, path);
}

}  // namespace gvpr
