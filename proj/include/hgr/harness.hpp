#pragma once

// Synthetic labelled hand poses, label vocabulary and evaluation metrics.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hgr/lifting.hpp"
#include "hgr/nn.hpp"
#include "hgr/skeleton.hpp"

namespace hgr {

inline constexpr int kNumGestureLabels = 22;

// The 21 dataset code names followed by the background label.
inline constexpr std::array<std::string_view, kNumGestureLabels> kGestureLabels = {
    "OpenPalm",
    "Victory",
    "ClosedFist",
    "PointingUp",
    "ThumbUp",
    "ThumbDown",
    "OK",
    "CallMe",
    "IndexMiddlePointingUp",
    "Three",
    "Four",
    "ILoveYou",
    "FingerHeart",
    "HandHeart",
    "IndexMiddlePointingUpWithClosedThumb",
    "IndexMiddlePointingUpWithOpenThumb",
    "IndexPointingToCamera",
    "Loser",
    "PinchedFingers",
    "VulcanSalute",
    "SignOfTheHorns",
    "Negative",
};

bool is_gesture_label(std::string_view name);

// Classifier class of a label: one of the six targets, or Negative for every
// other known label. Throws UnknownLabel.
int class_for_label(std::string_view name);

// The 15 dataset gestures that are not classifier targets.
std::vector<std::string> negative_gesture_labels();
std::vector<std::string> target_gesture_labels();

struct GestureTemplate {
  // Joint angles in degrees, layout as PoseParams::joint_angles.
  std::array<double, kNumJointAngles> joints_deg{};
  // Palm orientation (yaw, pitch, roll) in degrees, y-up world frame.
  Eigen::Vector3d euler_deg = Eigen::Vector3d::Zero();
};

// Built-in templates for every label; Negative holds several hard negatives.
std::map<std::string, std::vector<GestureTemplate>> default_templates();

struct SynthConfig {
  std::uint64_t seed = 0;
  double jitter_deg = 5.0;            // per-joint std
  double finger_coupling = 0.8;       // correlation of jitter across index..pinky
  double rotation_range_deg = 20.0;   // uniform +- around the template orientation
  bool frontal = false;               // roll 90 +- 15, any yaw: fingers toward the camera
  double tz_min = 0.3;
  double tz_max = 0.7;
  int image_w = 640;
  int image_h = 480;
  double pixel_noise_px = 0.5;
  double metric_noise_m = 0.0005;
  double left_fraction = 0.5;
  double score_min = 0.8;
  std::int64_t frame_period_us = 33333;
  std::map<std::string, std::vector<GestureTemplate>> templates = default_templates();
};

void validate_config(const SynthConfig& cfg);

struct SynthSample {
  std::string label;
  HandFrame frame;              // kp2d with pixel noise, kp3d world frame with metric noise
  Keypoints3d camera_points;    // noiseless, camera space
  PoseParams params;
  CameraIntrinsics intrinsics;
};

// Generator for sample `index`; independent of how many samples precede it.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

// Throws UnknownLabel if the label has no template.
SynthSample synth_pose(const std::string& label, const SynthConfig& cfg, std::mt19937_64& rng,
                       const HandModel& model = default_hand_model());

// per_label samples of each label in turn; sample i uses sample_rng(seed, i)
// and timestamp i * frame_period_us.
std::vector<SynthSample> synth_corpus(const std::vector<std::string>& labels, int per_label, const SynthConfig& cfg,
                                      const HandModel& model = default_hand_model());

struct EvalReport {
  std::array<std::optional<double>, kNegativeClass> recall;  // nullopt when a class has no samples
  std::optional<double> average_recall;                      // mean over classes with samples
  std::optional<double> false_positive_rate;                 // nullopt without Negative samples
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> confusion{};  // [truth][prediction]
  std::array<std::int64_t, kNumClasses> counts{};
  std::optional<double> keypoint_error_cm;
};

// Labels may be any known gesture label; non-targets count as Negative.
// Throws LengthMismatch, EmptyInput, UnknownLabel.
EvalReport eval_classifier(const std::vector<std::string>& predictions, const std::vector<std::string>& truths);

// Mean per-keypoint distance in cm after moving both sets to the middle knuckle.
double keypoint_error(const Keypoints3d& pred, const Keypoints3d& gt);

}  // namespace hgr
