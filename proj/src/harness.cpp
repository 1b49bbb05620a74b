#include "hgr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hgr/features.hpp"

namespace hgr {

bool is_gesture_label(std::string_view name) {
  return std::find(kGestureLabels.begin(), kGestureLabels.end(), name) != kGestureLabels.end();
}

int class_for_label(std::string_view name) {
  if (auto c = class_index(name)) return *c;
  if (is_gesture_label(name)) return kNegativeClass;
  throw Error(Errc::UnknownLabel, "unknown gesture label '" + std::string(name) + "'");
}

std::vector<std::string> negative_gesture_labels() {
  std::vector<std::string> out;
  for (auto name : kGestureLabels) {
    if (name != "Negative" && class_for_label(name) == kNegativeClass) out.emplace_back(name);
  }
  return out;
}

std::vector<std::string> target_gesture_labels() {
  return {kClassNames.begin(), kClassNames.begin() + kNegativeClass};
}

namespace {

constexpr double deg(double d) { return d * std::numbers::pi / 180.0; }

using Thumb = std::array<double, 5>;   // CMC flex, CMC abd, MCP flex, IP flex, roll
using Digit = std::array<double, 4>;   // MCP flex, MCP abd, PIP flex, DIP flex

constexpr Thumb kThumbOpen = {0, 8, 0, 0, 0};
constexpr Thumb kThumbUp = {0, 15, 0, 0, 0};
constexpr Thumb kThumbFolded = {40, -25, 45, 40, 0};
constexpr Thumb kThumbHalf = {15, -10, 20, 15, 0};

constexpr Digit straight(double abd) { return {0, abd, 0, 0}; }
constexpr Digit kBent = {85, 0, 100, 60};
constexpr Digit kHalf = {25, 0, 25, 10};

GestureTemplate make(const Thumb& t, const Digit& i, const Digit& m, const Digit& r, const Digit& p,
                     Eigen::Vector3d euler = Eigen::Vector3d::Zero()) {
  GestureTemplate g;
  std::copy(t.begin(), t.end(), g.joints_deg.begin());
  int at = 5;
  for (const Digit* d : {&i, &m, &r, &p}) {
    std::copy(d->begin(), d->end(), g.joints_deg.begin() + at);
    at += 4;
  }
  g.euler_deg = euler;
  return g;
}

}  // namespace

std::map<std::string, std::vector<GestureTemplate>> default_templates() {
  const Eigen::Vector3d thumb_up(45, 0, 30), thumb_down(-135, 0, 30), index_up(-10, 0, 0);
  std::map<std::string, std::vector<GestureTemplate>> t;
  t["OpenPalm"] = {make(kThumbOpen, straight(8), straight(0), straight(-4), straight(-9))};
  t["Victory"] = {make(kThumbFolded, straight(8), straight(-8), kBent, kBent)};
  t["ClosedFist"] = {make(kThumbFolded, kBent, kBent, kBent, kBent)};
  t["PointingUp"] = {make(kThumbFolded, straight(0), kBent, kBent, kBent, index_up)};
  t["ThumbUp"] = {make(kThumbUp, kBent, kBent, kBent, kBent, thumb_up)};
  t["ThumbDown"] = {make(kThumbUp, kBent, kBent, kBent, kBent, thumb_down)};

  t["OK"] = {make({30, -15, 30, 20, 0}, {45, 0, 50, 30}, straight(0), straight(-4), straight(-10))};
  t["CallMe"] = {make(kThumbUp, kBent, kBent, kBent, straight(-10))};
  t["IndexMiddlePointingUp"] = {make(kThumbHalf, straight(-5), straight(5), kBent, kBent)};
  t["Three"] = {make(kThumbOpen, straight(8), straight(-8), kBent, kBent)};
  t["Four"] = {make(kThumbFolded, straight(8), straight(0), straight(-4), straight(-10))};
  t["ILoveYou"] = {make(kThumbUp, straight(8), kBent, kBent, straight(-10))};
  t["FingerHeart"] = {make({15, -20, 20, 15, 0}, {45, -5, 25, 10}, kBent, kBent, kBent, {-30, 0, 0})};
  t["HandHeart"] = {make(kThumbHalf, kHalf, kHalf, kHalf, kHalf, {-60, 0, 0})};
  t["IndexMiddlePointingUpWithClosedThumb"] = {make(kThumbFolded, straight(-5), straight(5), kBent, kBent)};
  t["IndexMiddlePointingUpWithOpenThumb"] = {make(kThumbOpen, straight(-5), straight(5), kBent, kBent)};
  t["IndexPointingToCamera"] = {make(kThumbFolded, straight(0), kBent, kBent, kBent, {-10, 0, 90})};
  t["Loser"] = {make(kThumbUp, straight(0), kBent, kBent, kBent)};
  t["PinchedFingers"] = {make({20, -15, 20, 15, 0}, {30, -5, 30, 15}, {30, 0, 30, 15}, {30, 5, 30, 15},
                              {30, 10, 30, 15}, {0, 60, 0})};
  t["VulcanSalute"] = {make(kThumbOpen, straight(-6), straight(6), straight(-6), straight(6))};
  t["SignOfTheHorns"] = {make(kThumbFolded, straight(8), kBent, kBent, straight(-10))};

  // Near misses of the targets.
  t["Negative"] = {
      make(kThumbFolded, straight(-6), straight(6), kBent, kBent),       // Victory, fingers crossed
      make(kThumbUp, kHalf, kBent, kBent, kBent, thumb_up),              // ThumbUp, index half out
      make(kThumbFolded, straight(0), kHalf, kBent, kBent, index_up),    // PointingUp, middle half out
      make(kThumbHalf, kBent, kBent, kBent, kBent),                      // fist, thumb half out
      make(kThumbOpen, straight(8), straight(0), straight(-4), kHalf),   // OpenPalm, pinky half bent
  };
  return t;
}

void validate_config(const SynthConfig& cfg) {
  auto bad = [](const std::string& msg) { throw Error(Errc::BadConfig, msg); };
  if (!(cfg.jitter_deg >= 0)) bad("jitter_deg must be >= 0");
  if (!(cfg.finger_coupling >= 0 && cfg.finger_coupling <= 1)) bad("finger_coupling must lie in [0,1]");
  if (!(cfg.rotation_range_deg >= 0)) bad("rotation_range_deg must be >= 0");
  if (!(cfg.tz_min > kDepthMin && cfg.tz_min <= cfg.tz_max && cfg.tz_max < kDepthMax)) {
    bad("depth range must satisfy 0.05 < tz_min <= tz_max < 3");
  }
  if (cfg.image_w <= 0 || cfg.image_h <= 0) bad("image dimensions must be positive");
  if (!(cfg.pixel_noise_px >= 0 && cfg.metric_noise_m >= 0)) bad("noise stds must be >= 0");
  if (!(cfg.left_fraction >= 0 && cfg.left_fraction <= 1)) bad("left_fraction must lie in [0,1]");
  if (!(cfg.score_min >= 0 && cfg.score_min <= 1)) bad("score_min must lie in [0,1]");
  if (cfg.frame_period_us <= 0) bad("frame_period_us must be positive");
  for (auto label : kGestureLabels) {
    if (!cfg.templates.count(std::string(label))) bad("no template for label '" + std::string(label) + "'");
  }
  for (const auto& [label, variants] : cfg.templates) {
    if (!is_gesture_label(label)) throw Error(Errc::UnknownLabel, "template for unknown label '" + label + "'");
    if (variants.empty()) bad("label '" + label + "' has no template");
  }
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

SynthSample synth_pose(const std::string& label, const SynthConfig& cfg, std::mt19937_64& rng,
                       const HandModel& model) {
  const auto it = cfg.templates.find(label);
  if (it == cfg.templates.end() || it->second.empty()) {
    throw Error(Errc::UnknownLabel, "no template for label '" + label + "'");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const auto& variants = it->second;
  const auto& tmpl = variants[std::min(variants.size() - 1, static_cast<std::size_t>(unit(rng) * variants.size()))];

  // Joint jitter; index..pinky share a common component per joint type.
  PoseParams params;
  const double sigma = deg(cfg.jitter_deg);
  const double shared = std::sqrt(cfg.finger_coupling), own = std::sqrt(1.0 - cfg.finger_coupling);
  std::array<double, 4> common;
  for (double& c : common) c = normal(rng);
  for (int j = 0; j < kNumJointAngles; ++j) {
    double noise = normal(rng);
    if (j >= 5) noise = shared * common[(j - 5) % 4] + own * noise;
    const auto [lo, hi] = joint_box(j);
    params.joint_angles[j] = std::clamp(deg(tmpl.joints_deg[j]) + sigma * noise, lo, hi);
  }

  Eigen::Vector3d euler = deg(1.0) * tmpl.euler_deg;
  const double spread = deg(cfg.rotation_range_deg);
  for (int a = 0; a < 3; ++a) euler[a] += uniform(-spread, spread);
  if (cfg.frontal) {
    euler[0] = uniform(-std::numbers::pi, std::numbers::pi);
    euler[2] = deg(90) + uniform(deg(-15), deg(15));
  }
  const Eigen::Matrix3d world_rot = rotation_from_euler(euler[0], euler[1], euler[2]);
  const Eigen::Matrix3d cam_rot = Eigen::Vector3d(1, -1, -1).asDiagonal() * world_rot;
  params.global_rot = axis_angle_from_rotation(cam_rot);
  params.handedness = unit(rng) < cfg.left_fraction ? Handedness::Left : Handedness::Right;

  // Put the middle knuckle at a random pixel near the image center.
  const CameraIntrinsics k = default_intrinsics(cfg.image_w, cfg.image_h);
  const double depth = uniform(cfg.tz_min, cfg.tz_max);
  const double u = uniform(0.35, 0.65) * cfg.image_w, v = uniform(0.35, 0.65) * cfg.image_h;
  const Eigen::Vector3d target((u - k.cx) * depth / k.f, (v - k.cy) * depth / k.f, depth);
  const Eigen::Vector3d offset = cam_rot * local_keypoints(model, params.joint_angles).col(kp::MiddleMcp);
  params.global_t = target - offset;
  if (params.handedness == Handedness::Left) params.global_t.x() = -target.x() - offset.x();

  SynthSample s;
  s.label = label;
  s.params = params;
  s.intrinsics = k;
  s.camera_points = forward_kinematics(model, params);

  HandSkeleton hand;
  hand.handedness = params.handedness;
  hand.kp2d = project(s.camera_points, k);
  for (int i = 0; i < kNumKeypoints; ++i) {
    for (int d = 0; d < 2; ++d) hand.kp2d(d, i) += cfg.pixel_noise_px * normal(rng);
  }
  Keypoints3d world = normalize_world(camera_to_world(s.camera_points));
  for (int i = 0; i < kNumKeypoints; ++i) {
    for (int d = 0; d < 3; ++d) world(d, i) += cfg.metric_noise_m * normal(rng);
  }
  hand.kp3d = world;
  hand.score = uniform(cfg.score_min, 1.0);

  s.frame.image_w = cfg.image_w;
  s.frame.image_h = cfg.image_h;
  s.frame.hand = hand;
  return s;
}

std::vector<SynthSample> synth_corpus(const std::vector<std::string>& labels, int per_label, const SynthConfig& cfg,
                                      const HandModel& model) {
  validate_config(cfg);
  std::vector<SynthSample> out;
  out.reserve(labels.size() * static_cast<std::size_t>(std::max(per_label, 0)));
  std::uint64_t index = 0;
  for (const auto& label : labels) {
    for (int n = 0; n < per_label; ++n, ++index) {
      auto rng = sample_rng(cfg.seed, index);
      SynthSample s = synth_pose(label, cfg, rng, model);
      s.frame.timestamp_us = static_cast<std::int64_t>(index) * cfg.frame_period_us;
      out.push_back(std::move(s));
    }
  }
  return out;
}

EvalReport eval_classifier(const std::vector<std::string>& predictions, const std::vector<std::string>& truths) {
  if (predictions.size() != truths.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                          std::to_string(truths.size()) + " labels");
  }
  if (truths.empty()) throw Error(Errc::EmptyInput, "nothing to evaluate");

  EvalReport r;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = class_for_label(truths[i]);
    const int p = class_for_label(predictions[i]);
    ++r.confusion[t][p];
    ++r.counts[t];
  }
  double sum = 0;
  int present = 0;
  for (int c = 0; c < kNegativeClass; ++c) {
    if (r.counts[c] == 0) continue;
    r.recall[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(r.counts[c]);
    sum += *r.recall[c];
    ++present;
  }
  if (present > 0) r.average_recall = sum / present;
  if (const auto n = r.counts[kNegativeClass]; n > 0) {
    r.false_positive_rate = static_cast<double>(n - r.confusion[kNegativeClass][kNegativeClass]) /
                            static_cast<double>(n);
  }
  return r;
}

double keypoint_error(const Keypoints3d& pred, const Keypoints3d& gt) {
  const Keypoints3d d = normalize_world(pred) - normalize_world(gt);
  return 100.0 * d.colwise().norm().mean();
}

}  // namespace hgr
