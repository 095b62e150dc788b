#pragma once

// Synthetic place-recognition world for self-contained runs.
//
// Generative model:
//   * Places sit on a street grid of each scene with spacing `place_spacing_m`
//     and a heading drawn from the four street directions.
//   * Every place owns a nonnegative feature prototype over the first
//     `signal_channels` channels.
//   * An image of place p has pose = place pose + Gaussian jitter in position
//     and heading. Its signal is the mix of all place prototypes of the scene
//     weighted by the FoV overlap between the image pose and each place, so
//     images that see the same area share content.
//   * Per image nuisance: the remaining channels carry a random gain
//     (appearance changes unrelated to place), and every value gets Gaussian
//     noise. Values are spread over `locations` with multiplicative jitter.
//
// The first `train_places` places form scene "train"; the rest form scene
// "test", whose images alternate between the query and map sets.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gvpr/embed.hpp"
#include "gvpr/fov2d.hpp"
#include "gvpr/relabel.hpp"
#include "gvpr/retrieval.hpp"

namespace gvpr {

struct SynthConfig {
  std::size_t places = 40;
  std::size_t images_per_place = 20;
  std::size_t train_places = 20;
  std::size_t channels = 32;
  std::size_t signal_channels = 16;
  std::size_t locations = 8;
  double place_spacing_m = 20.0;
  std::size_t grid_columns = 5;
  double position_jitter_m = 6.0;
  double heading_jitter_deg = 15.0;
  double noise_sigma = 0.05;
  double nuisance_scale = 1.5;
  std::uint64_t seed = 42;

  void validate() const {
    if (places < 2 || images_per_place < 2) {
      throw std::invalid_argument("synth: need >= 2 places and >= 2 images per place");
    }
    if (train_places == 0 || train_places >= places) {
      throw std::invalid_argument("synth: train_places must lie in [1, places)");
    }
    if (signal_channels == 0 || signal_channels > channels || locations == 0) {
      throw std::invalid_argument("synth: invalid channel layout");
    }
    if (grid_columns == 0 || !(place_spacing_m > 0.0)) {
      throw std::invalid_argument("synth: invalid grid");
    }
  }
};

struct SyntheticWorld {
  PoseTable poses;
  std::vector<FeatureMap> features;  // same order as poses
  std::vector<std::string> train_ids;
  std::vector<std::string> query_ids;
  std::vector<std::string> map_ids;
  Positives ground_truth;  // 25 m / 40 deg criterion, test scene only

  std::vector<FeatureMap> select(const std::vector<std::string>& ids) const {
    std::map<std::string, const FeatureMap*> by_id;
    for (const auto& f : features) by_id.emplace(f.id(), &f);
    std::vector<FeatureMap> out;
    for (const auto& id : ids) out.push_back(*by_id.at(id));
    return out;
  }

  std::map<std::string, CameraPose2D> pose_map(const std::vector<std::string>& ids) const {
    std::map<std::string, CameraPose2D> out;
    for (const auto& id : ids) out.emplace(id, poses.find(id)->pose);
    return out;
  }
};

inline SyntheticWorld make_synthetic_world(const SynthConfig& cfg,
                                           const FovParams& fov = msls_fov()) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<int> street_dir(0, 3);

  struct Place {
    CameraPose2D pose;
    std::string scene;
    std::vector<double> prototype;
  };
  std::vector<Place> places;
  for (std::size_t p = 0; p < cfg.places; ++p) {
    const bool train = p < cfg.train_places;
    const std::size_t local = train ? p : p - cfg.train_places;
    const double x = static_cast<double>(local % cfg.grid_columns) * cfg.place_spacing_m;
    const double y = static_cast<double>(local / cfg.grid_columns) * cfg.place_spacing_m;
    Place place{CameraPose2D::from_degrees(x, y, 90.0 * street_dir(rng)),
                train ? "train" : "test", {}};
    place.prototype.resize(cfg.signal_channels);
    for (double& v : place.prototype) v = std::abs(normal(rng));
    places.push_back(std::move(place));
  }

  SyntheticWorld world;
  std::size_t test_counter = 0;
  for (std::size_t p = 0; p < cfg.places; ++p) {
    for (std::size_t n = 0; n < cfg.images_per_place; ++n) {
      const Place& place = places[p];
      const CameraPose2D pose(
          place.pose.t0() + cfg.position_jitter_m * normal(rng),
          place.pose.t1() + cfg.position_jitter_m * normal(rng),
          place.pose.alpha() + deg_to_rad(cfg.heading_jitter_deg) * normal(rng));
      char buf[32];
      std::snprintf(buf, sizeof buf, "p%03zu_i%03zu", p, n);
      const std::string id = buf;
      world.poses.add({id, pose, place.scene});

      std::vector<double> signal(cfg.signal_channels, 0.0);
      double weight_sum = 0.0;
      for (const Place& other : places) {
        if (other.scene != place.scene) continue;
        const double w = fov_overlap(pose, other.pose, fov, 64);
        if (w <= 0.0) continue;
        weight_sum += w;
        for (std::size_t c = 0; c < cfg.signal_channels; ++c) signal[c] += w * other.prototype[c];
      }
      if (weight_sum > 0.0) {
        for (double& v : signal) v /= weight_sum;
      }

      std::vector<double> values(cfg.channels * cfg.locations);
      for (std::size_t c = 0; c < cfg.channels; ++c) {
        const double base = c < cfg.signal_channels
                                ? signal[c]
                                : cfg.nuisance_scale * uniform(rng) * uniform(rng);
        for (std::size_t l = 0; l < cfg.locations; ++l) {
          values[c * cfg.locations + l] =
              base * (0.75 + 0.5 * uniform(rng)) + cfg.noise_sigma * normal(rng);
        }
      }
      world.features.emplace_back(id, cfg.channels, cfg.locations, std::move(values));

      if (place.scene == "train") {
        world.train_ids.push_back(id);
      } else {
        (test_counter++ % 2 == 0 ? world.query_ids : world.map_ids).push_back(id);
      }
    }
  }
  world.ground_truth = pose_positives(world.pose_map(world.query_ids),
                                      world.pose_map(world.map_ids));
  return world;
}

}  // namespace gvpr
