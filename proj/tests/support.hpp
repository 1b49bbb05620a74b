#pragma once

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hgr/harness.hpp"
#include "hgr/skeleton.hpp"

namespace hgr::test {

inline constexpr double kPi = std::numbers::pi;

inline double deg(double d) { return d * kPi / 180.0; }

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Eigen::Vector3d random_vector(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

// Generator sample drawn from a label chosen by the caller's rng.
inline SynthSample random_sample(std::mt19937_64& rng, const SynthConfig& cfg = {}) {
  std::uniform_int_distribution<int> pick(0, kNumGestureLabels - 1);
  return synth_pose(std::string(kGestureLabels[pick(rng)]), cfg, rng);
}

inline Keypoints3d random_skeleton3d(std::mt19937_64& rng) { return *random_sample(rng).frame.hand->kp3d; }

inline Keypoints2d random_keypoints2d(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 640.0);
  Keypoints2d kp;
  for (int i = 0; i < kNumKeypoints; ++i) kp.col(i) = Point2d(u(rng), u(rng));
  return kp;
}

inline Eigen::Matrix<double, kNumKeypoints, kNumKeypoints> distance_matrix(const Keypoints3d& p) {
  Eigen::Matrix<double, kNumKeypoints, kNumKeypoints> d;
  for (int i = 0; i < kNumKeypoints; ++i)
    for (int j = 0; j < kNumKeypoints; ++j) d(i, j) = (p.col(i) - p.col(j)).norm();
  return d;
}

inline SynthConfig quiet_config() {
  SynthConfig cfg;
  cfg.jitter_deg = 0;
  cfg.rotation_range_deg = 0;
  cfg.pixel_noise_px = 0;
  cfg.metric_noise_m = 0;
  return cfg;
}

}  // namespace hgr::test
