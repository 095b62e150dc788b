// gvpr: relabel, overlap3d, train, eval, synth, profile, calibrate-theta.
//
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gvpr/gvpr.hpp"

namespace {

using namespace gvpr;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::map<std::string, OverlapMeasure> kMeasures{{"mean-area", OverlapMeasure::kMeanArea},
                                                      {"iou", OverlapMeasure::kIoU}};

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

FovParams fov_from(double theta_deg, double radius_m) {
  if (!(theta_deg > 0.0 && theta_deg <= 180.0)) {
    throw UsageError("--theta-deg must lie in (0, 180]");
  }
  if (!(radius_m > 0.0)) throw UsageError("--radius-m must be > 0");
  return FovParams::from_degrees(theta_deg, radius_m);
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  auto out = csv::open_output(path);
  fn(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---- relabel ----------------------------------------------------------------

struct RelabelArgs {
  std::string poses, out, scene, measure = "mean-area";
  double theta_deg = 90.0, radius_m = 50.0;
  double candidate_radius_m = std::numeric_limits<double>::infinity();
  int arc_segments = kDefaultArcSegments;
  unsigned threads = 0;
};

void add_fov_flags(CLI::App* c, double& theta, double& radius) {
  c->add_option("--theta-deg", theta, "Horizontal field of view (degrees)")->capture_default_str();
  c->add_option("--radius-m", radius, "Sector radius, i.e. visibility distance (meters)")
      ->capture_default_str();
}

void add_threads_flag(CLI::App* c, unsigned& threads) {
  c->add_option("--threads", threads, "Worker threads, 0 = hardware concurrency (count)")
      ->capture_default_str();
}

int run_relabel(const RelabelArgs& a) {
  const FovParams fov = fov_from(a.theta_deg, a.radius_m);
  if (a.arc_segments < 2) throw UsageError("--arc-segments must be >= 2");
  PoseTable table = load_poses(a.poses);
  if (!a.scene.empty()) {
    PoseTable filtered;
    for (const auto& r : table.records()) {
      if (r.scene == a.scene) filtered.add(r);
    }
    table = std::move(filtered);
  }
  if (table.size() < 2) throw std::runtime_error("relabel: need at least 2 poses");
  RelabelOptions opt;
  opt.candidate_radius = a.candidate_radius_m;
  opt.arc_segments = a.arc_segments;
  opt.measure = kMeasures.at(a.measure);
  opt.threads = a.threads;
  const auto labels = pairwise_similarity(table, fov, opt);
  write_file(a.out, [&](std::ostream& o) { write_labels(o, labels); });
  const auto c = count_classes(labels);
  std::cout << "poses " << table.size() << ", pairs " << labels.size() << "\n"
            << "  positive (psi >= 0.5)       " << c.positive << "\n"
            << "  soft negative (0 < psi < 0.5) " << c.soft_negative << "\n"
            << "  hard negative (psi = 0)     " << c.hard_negative << "\n";
  return 0;
}

// ---- overlap3d --------------------------------------------------------------

struct Overlap3dArgs {
  std::string cloud, poses, intrinsics, out;
};

int run_overlap3d(const Overlap3dArgs& a) {
  const auto cloud = load_xyz(a.cloud);
  const auto poses = load_poses6dof(a.poses);
  const auto k = load_intrinsics(a.intrinsics);
  if (poses.size() < 2) throw std::runtime_error("overlap3d: need at least 2 poses");
  std::vector<VisibleSet> sets;
  for (const auto& p : poses) sets.push_back(project_points(cloud, p.pose, k, p.id));
  const auto r = pairwise_surface_overlap(sets);
  write_file(a.out, [&](std::ostream& o) { write_labels(o, r.labels); });
  std::cout << "images " << poses.size() << ", points " << cloud.size() << ", pairs "
            << r.labels.size() << ", skipped (both views empty) " << r.skipped_empty << "\n";
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string labels, features, model_out, trace_out, loss = "gcl", strategy = "A";
  double tau = 1.0, lr_decay_factor = 0.1;
  std::optional<double> lr;
  std::size_t lr_decay_after = 250000, epochs = 1, batch_size = 64, steps_per_epoch = 0,
              d_out = 64;
  std::uint64_t seed = 42;
};

int run_train(const TrainArgs& a) {
  TrainConfig cfg;
  cfg.loss = parse_loss_kind(a.loss);
  cfg.tau = a.tau;
  cfg.lr0 = a.lr.value_or(default_learning_rate(cfg.loss));
  cfg.lr_decay_after = a.lr_decay_after;
  cfg.lr_decay_factor = a.lr_decay_factor;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch_size;
  cfg.steps_per_epoch = a.steps_per_epoch;
  cfg.strategy = parse_strategy(a.strategy);
  cfg.seed = a.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.batch_size == 0 || a.batch_size % strategy_divisor(cfg.strategy) != 0) {
    throw UsageError("--batch-size must be a positive multiple of " +
                     std::to_string(strategy_divisor(cfg.strategy)) + " for strategy " + a.strategy);
  }
  if (a.d_out == 0) throw UsageError("--d-out must be >= 1");

  const auto labels = load_labels(a.labels);
  if (labels.empty()) throw std::runtime_error("train: no labels in '" + a.labels + "'");
  const auto features = load_features(a.features);
  if (features.empty()) throw std::runtime_error("train: no features in '" + a.features + "'");
  const auto init = EmbedModel::random(a.d_out, features.front().channels(), a.seed);
  const auto result = train(init, labels, features, cfg);
  save_model(a.model_out, result.model);
  if (!a.trace_out.empty()) {
    write_file(a.trace_out, [&](std::ostream& o) {
      o << "step,loss\n";
      for (std::size_t s = 0; s < result.loss_trace.size(); ++s) {
        o << s << ',' << fixed(result.loss_trace[s], 9) << '\n';
      }
    });
  }
  const auto& t = result.loss_trace;
  std::cout << "steps " << t.size() << ", loss first " << fixed(t.front()) << ", last "
            << fixed(t.back()) << "\n";
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string queries, map, model, ground_truth, poses, out, pca_train;
  std::vector<std::size_t> ks{1, 5, 10};
  std::vector<std::string> thresholds;
  Eigen::Index pca_dim = 0;
  bool whiten = false;
  unsigned threads = 0;
};

DescriptorSet load_descriptors(const std::string& path, const std::optional<EmbedModel>& model) {
  if (model) return embed_all(*model, load_features(path));
  return to_descriptor_set(load_records(path)).l2_normalized();
}

std::vector<PoseThreshold> parse_thresholds(const std::vector<std::string>& specs) {
  if (specs.empty()) return default_pose_thresholds();
  std::vector<PoseThreshold> out;
  for (const auto& s : specs) {
    const auto f = csv::split(s, ':');
    if (f.size() != 2) throw UsageError("--thresholds expects METERS:DEGREES, got '" + s + "'");
    try {
      out.push_back({csv::parse_double(f[0], "--thresholds", 0, "meters"),
                     csv::parse_double(f[1], "--thresholds", 0, "degrees")});
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
    if (!(out.back().meters >= 0.0) || !(out.back().degrees >= 0.0)) {
      throw UsageError("--thresholds values must be >= 0");
    }
  }
  return out;
}

int run_eval(const EvalArgs& a) {
  const auto thresholds = parse_thresholds(a.thresholds);
  for (std::size_t k : a.ks) {
    if (k == 0) throw UsageError("--ks entries must be >= 1");
  }
  if (a.pca_dim < 0) throw UsageError("--pca-dim must be >= 1");
  std::optional<EmbedModel> model;
  if (!a.model.empty()) model = load_model(a.model);
  auto queries = load_descriptors(a.queries, model);
  auto map = load_descriptors(a.map, model);

  std::string post = "none";
  if (a.pca_dim > 0 || a.whiten) {
    const DescriptorSet fit_on = load_descriptors(a.pca_train, model);
    const Eigen::Index d = a.pca_dim > 0 ? a.pca_dim : fit_on.dim();
    WhitenTransform t = fit_pca_whitening(fit_on, d);
    if (!a.whiten) {
      for (Eigen::Index i = 0; i < t.output_dim(); ++i) {
        t.projection.row(i) *= std::sqrt(t.eigenvalues[i] + t.epsilon);
      }
    }
    queries = apply_whitening(t, queries);
    map = apply_whitening(t, map);
    post = std::string(a.whiten ? "whiten" : "pca") + " d=" + std::to_string(d);
  }

  std::size_t kmax = 1;
  for (std::size_t k : a.ks) kmax = std::max(kmax, k);
  if (kmax > map.size()) {
    throw std::runtime_error("eval: k = " + std::to_string(kmax) + " exceeds map size " +
                             std::to_string(map.size()));
  }
  const auto rankings = nn_search(queries, map, kmax, a.threads);
  auto in = csv::open_input(a.ground_truth);
  const auto positives = build_positives(parse_ground_truth(in, a.ground_truth), queries, map);
  const auto recall = recall_at_k(rankings, positives, a.ks);

  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("queries", std::to_string(queries.size()));
  rows.emplace_back("map", std::to_string(map.size()));
  rows.emplace_back("evaluated", std::to_string(recall.evaluated));
  rows.emplace_back("excluded_no_positive", std::to_string(recall.excluded));
  rows.emplace_back("postprocess", post);
  for (const auto& [k, v] : recall.recall) rows.emplace_back("recall@" + std::to_string(k), fixed(v, 4));
  if (!a.poses.empty()) {
    const auto poses = load_poses(a.poses).pose_map();
    const auto acc = localization_accuracy(rankings, poses, poses, thresholds);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      rows.emplace_back("localization@" + fixed(thresholds[t].meters, 2) + "m_" +
                            fixed(thresholds[t].degrees, 1) + "deg",
                        fixed(acc[t], 4));
    }
  }
  for (const auto& [name, value] : rows) std::printf("%-28s %s\n", name.c_str(), value.c_str());
  if (!a.out.empty()) {
    write_file(a.out, [&](std::ostream& o) {
      o << "metric,value\n";
      for (const auto& [name, value] : rows) o << name << ',' << value << '\n';
    });
  }
  return 0;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  SynthConfig cfg;
  double theta_deg = 90.0, radius_m = 50.0;
};

int run_synth(const SynthArgs& a) {
  const FovParams fov = fov_from(a.theta_deg, a.radius_m);
  try {
    a.cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto world = make_synthetic_world(a.cfg, fov);
  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  write_file((dir / "poses.csv").string(), [&](std::ostream& o) { write_poses(o, world.poses); });
  save_features((dir / "train.gvpr").string(), world.select(world.train_ids));
  save_features((dir / "query.gvpr").string(), world.select(world.query_ids));
  save_features((dir / "map.gvpr").string(), world.select(world.map_ids));
  write_file((dir / "gt.csv").string(),
             [&](std::ostream& o) { write_ground_truth(o, world.ground_truth); });
  std::cout << "images " << world.poses.size() << " (train " << world.train_ids.size()
            << ", query " << world.query_ids.size() << ", map " << world.map_ids.size()
            << ") written to " << dir.string() << "\n";
  return 0;
}

// ---- profile ----------------------------------------------------------------

struct ProfileArgs {
  std::string poses, out, bins_out;
  double theta_deg = 90.0, radius_m = 50.0, bin_m = 5.0, bin_deg = 10.0;
  bool include_disjoint = false;
  unsigned threads = 0;
};

int run_profile(const ProfileArgs& a) {
  const FovParams fov = fov_from(a.theta_deg, a.radius_m);
  if (!(a.bin_m > 0.0) || !(a.bin_deg > 0.0)) throw UsageError("bin sizes must be > 0");
  const auto records =
      fov_distance_profile(load_poses(a.poses), fov, a.include_disjoint, kDefaultArcSegments, a.threads);
  write_file(a.out, [&](std::ostream& o) {
    o << "query_id,map_id,translation_m,rotation_deg,psi\n";
    for (const auto& r : records) {
      o << r.query_id << ',' << r.map_id << ',' << fixed(r.translation_m) << ','
        << fixed(rad_to_deg(r.rotation_rad)) << ',' << fixed(r.psi) << '\n';
    }
  });
  if (!a.bins_out.empty()) {
    const auto cells = bin_profile(records, a.bin_m, deg_to_rad(a.bin_deg));
    write_file(a.bins_out, [&](std::ostream& o) {
      o << "translation_lo_m,rotation_lo_deg,count,mean_psi\n";
      for (const auto& c : cells) {
        o << fixed(static_cast<double>(c.translation_bin) * a.bin_m, 3) << ','
          << fixed(static_cast<double>(c.rotation_bin) * a.bin_deg, 3) << ',' << c.count << ','
          << fixed(c.mean_psi) << '\n';
      }
    });
  }
  std::cout << "pairs " << records.size() << "\n";
  return 0;
}

// ---- calibrate-theta ----------------------------------------------------------

struct CalibrateArgs {
  double target = 0.5, delta_t_m = 0.0, delta_alpha_deg = 40.0, radius_m = 50.0;
  std::string measure = "mean-area";
};

int run_calibrate(const CalibrateArgs& a) {
  if (!(a.target >= 0.0 && a.target <= 1.0)) throw UsageError("--target must lie in [0, 1]");
  if (!(a.radius_m > 0.0)) throw UsageError("--radius-m must be > 0");
  if (!(a.delta_t_m >= 0.0)) throw UsageError("--delta-t-m must be >= 0");
  const double theta = calibrate_theta(a.target, a.delta_t_m, deg_to_rad(a.delta_alpha_deg),
                                       a.radius_m, 1024, kMeasures.at(a.measure));
  std::cout << "theta_deg " << fixed(rad_to_deg(theta), 4) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graded-similarity relabeling, contrastive training and retrieval evaluation"};
  app.require_subcommand(1);

  RelabelArgs rl;
  auto* relabel = app.add_subcommand("relabel", "Label every same-scene pair by 2D FoV overlap");
  relabel->add_option("--poses", rl.poses, "Pose CSV: id,scene,t0,t1,alpha_deg (meters, degrees)")
      ->required()->check(CLI::ExistingFile);
  relabel->add_option("--out", rl.out, "Output labels CSV: query_id,map_id,psi")->required();
  add_fov_flags(relabel, rl.theta_deg, rl.radius_m);
  relabel->add_option("--scene", rl.scene, "Only label poses of this scene (name)");
  relabel->add_option("--candidate-radius-m", rl.candidate_radius_m,
                      "Skip pairs farther apart than this; must be >= 2 x radius (meters)")
      ->check(CLI::PositiveNumber);
  relabel->add_option("--arc-segments", rl.arc_segments, "Polygon segments per sector arc (count)")
      ->capture_default_str();
  relabel->add_option("--measure", rl.measure, "Overlap normalization: mean-area or iou (unitless)")
      ->check(CLI::IsMember({"mean-area", "iou"}))->capture_default_str();
  add_threads_flag(relabel, rl.threads);

  Overlap3dArgs o3;
  auto* overlap3d = app.add_subcommand("overlap3d", "Label every image pair by 3D surface overlap");
  overlap3d->add_option("--cloud", o3.cloud, "Point cloud, one 'x y z' per line (meters)")
      ->required()->check(CLI::ExistingFile);
  overlap3d->add_option("--poses", o3.poses,
                        "6DOF pose CSV: id,r00..r22,t0,t1,t2, world to camera (meters)")
      ->required()->check(CLI::ExistingFile);
  overlap3d->add_option("--intrinsics", o3.intrinsics,
                        "key = value file with fx, fy, cx, cy, width, height (pixels)")
      ->required()->check(CLI::ExistingFile);
  overlap3d->add_option("--out", o3.out, "Output labels CSV: query_id,map_id,psi")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the linear GeM embedder on graded labels");
  train_cmd->add_option("--labels", tr.labels, "Labels CSV: query_id,map_id,psi")
      ->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--features", tr.features, "Binary feature file (GVPR)")
      ->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--model-out", tr.model_out, "Output model file (GVPM)")->required();
  train_cmd->add_option("--trace-out", tr.trace_out, "Optional per-step loss CSV: step,loss");
  train_cmd->add_option("--loss", tr.loss, "Loss: gcl (graded) or cl (binary at psi >= 0.5)")
      ->check(CLI::IsMember({"gcl", "cl"}))->capture_default_str();
  train_cmd->add_option("--tau", tr.tau, "Margin on descriptor distance (unitless, L2 units)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr,
                        "Initial learning rate (unitless); default 0.1 for gcl, 0.01 for cl")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--lr-decay-after", tr.lr_decay_after,
                        "Multiply the learning rate by --lr-decay-factor every N pairs (pairs)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--lr-decay-factor", tr.lr_decay_factor, "Learning-rate decay (unitless)")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs, "Passes over the labels (count)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--steps-per-epoch", tr.steps_per_epoch,
                        "Batches per epoch, 0 = ceil(labels / batch size) (count)")
      ->capture_default_str();
  train_cmd->add_option("--batch-size", tr.batch_size, "Pairs per batch (pairs)")
      ->capture_default_str();
  train_cmd->add_option("--batch-strategy", tr.strategy,
                        "Band quotas: A 1/2 pos + 1/4 soft + 1/4 hard; B quarters of four "
                        "bands; C thirds; D 1/2 pos + 1/2 neg")
      ->check(CLI::IsMember({"A", "B", "C", "D"}))->capture_default_str();
  train_cmd->add_option("--d-out", tr.d_out, "Descriptor dimension (count)")
      ->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Random seed for init and sampling (integer)")
      ->capture_default_str();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Recall@k and localization accuracy");
  eval->add_option("--queries", ev.queries,
                   "Query features (with --model) or descriptors (GVPR, 1 location)")
      ->required()->check(CLI::ExistingFile);
  eval->add_option("--map", ev.map, "Map features (with --model) or descriptors (GVPR)")
      ->required()->check(CLI::ExistingFile);
  eval->add_option("--ground-truth", ev.ground_truth, "Ground-truth CSV: query_id,map_id")
      ->required()->check(CLI::ExistingFile);
  eval->add_option("--model", ev.model, "Model file (GVPM); inputs are then feature files")
      ->check(CLI::ExistingFile);
  eval->add_option("--poses", ev.poses,
                   "Pose CSV covering queries and map; enables localization (meters, degrees)")
      ->check(CLI::ExistingFile);
  eval->add_option("--ks", ev.ks, "Recall cutoffs (count)")->delimiter(',')->capture_default_str();
  eval->add_option("--thresholds", ev.thresholds,
                   "Localization thresholds METERS:DEGREES, default 0.25:2,0.5:5,5:10 "
                   "(meters:degrees)")
      ->delimiter(',');
  auto* pca_train = eval->add_option("--pca-train", ev.pca_train,
                                     "Training set the PCA is fit on (same kind as --map)")
                        ->check(CLI::ExistingFile);
  eval->add_option("--pca-dim", ev.pca_dim, "Project onto the top D principal components (count)")
      ->check(CLI::PositiveNumber)->needs(pca_train);
  eval->add_flag("--whiten", ev.whiten, "Scale components to unit variance")->needs(pca_train);
  eval->add_option("--out", ev.out, "Optional metrics CSV: metric,value");
  add_threads_flag(eval, ev.threads);

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic world for desk-scale runs");
  synth->add_option("--out-dir", sy.out_dir,
                    "Directory for poses.csv, train/query/map.gvpr and gt.csv")
      ->required();
  synth->add_option("--places", sy.cfg.places, "Places in total (count)")->capture_default_str();
  synth->add_option("--train-places", sy.cfg.train_places, "Places in the train scene (count)")
      ->capture_default_str();
  synth->add_option("--images-per-place", sy.cfg.images_per_place, "Images per place (count)")
      ->capture_default_str();
  synth->add_option("--channels", sy.cfg.channels, "Feature channels (count)")
      ->capture_default_str();
  synth->add_option("--signal-channels", sy.cfg.signal_channels,
                    "Channels carrying place signal (count)")
      ->capture_default_str();
  synth->add_option("--locations", sy.cfg.locations, "Spatial locations per feature map (count)")
      ->capture_default_str();
  synth->add_option("--spacing-m", sy.cfg.place_spacing_m, "Place grid spacing (meters)")
      ->capture_default_str();
  synth->add_option("--grid-columns", sy.cfg.grid_columns, "Place grid width (count)")
      ->capture_default_str();
  synth->add_option("--position-jitter-m", sy.cfg.position_jitter_m,
                    "Image position noise, std dev (meters)")
      ->capture_default_str();
  synth->add_option("--heading-jitter-deg", sy.cfg.heading_jitter_deg,
                    "Image heading noise, std dev (degrees)")
      ->capture_default_str();
  synth->add_option("--noise-sigma", sy.cfg.noise_sigma, "Feature noise, std dev (feature units)")
      ->capture_default_str();
  synth->add_option("--nuisance-scale", sy.cfg.nuisance_scale,
                    "Nuisance channel amplitude (feature units)")
      ->capture_default_str();
  add_fov_flags(synth, sy.theta_deg, sy.radius_m);
  synth->add_option("--seed", sy.cfg.seed, "Random seed (integer)")->capture_default_str();

  ProfileArgs pr;
  auto* profile = app.add_subcommand("profile", "FoV overlap against translation and rotation");
  profile->add_option("--poses", pr.poses, "Pose CSV: id,scene,t0,t1,alpha_deg (meters, degrees)")
      ->required()->check(CLI::ExistingFile);
  profile->add_option("--out", pr.out,
                      "Scatter CSV: query_id,map_id,translation_m,rotation_deg,psi")
      ->required();
  add_fov_flags(profile, pr.theta_deg, pr.radius_m);
  profile->add_flag("--include-disjoint", pr.include_disjoint,
                    "Also emit pairs farther apart than 2 x radius (psi = 0)");
  profile->add_option("--bins-out", pr.bins_out,
                      "Optional binned CSV: translation_lo_m,rotation_lo_deg,count,mean_psi");
  profile->add_option("--bin-m", pr.bin_m, "Translation bin width (meters)")->capture_default_str();
  profile->add_option("--bin-deg", pr.bin_deg, "Rotation bin width (degrees)")
      ->capture_default_str();
  add_threads_flag(profile, pr.threads);

  CalibrateArgs ca;
  auto* calibrate =
      app.add_subcommand("calibrate-theta", "Field of view that gives a target overlap for a pair");
  calibrate->add_option("--target", ca.target, "Target overlap psi in [0, 1] (unitless)")
      ->capture_default_str();
  calibrate->add_option("--delta-t-m", ca.delta_t_m,
                        "Lateral offset between the cameras, same heading axis (meters)")
      ->capture_default_str();
  calibrate->add_option("--delta-alpha-deg", ca.delta_alpha_deg, "Heading difference (degrees)")
      ->capture_default_str();
  calibrate->add_option("--radius-m", ca.radius_m, "Sector radius (meters)")->capture_default_str();
  calibrate->add_option("--measure", ca.measure, "Overlap normalization: mean-area or iou (unitless)")
      ->check(CLI::IsMember({"mean-area", "iou"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*relabel) return run_relabel(rl);
    if (*overlap3d) return run_overlap3d(o3);
    if (*train_cmd) return run_train(tr);
    if (*eval) return run_eval(ev);
    if (*synth) return run_synth(sy);
    if (*profile) return run_profile(pr);
    if (*calibrate) return run_calibrate(ca);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
