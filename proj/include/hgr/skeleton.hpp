#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hgr/error.hpp"

namespace hgr {

inline constexpr int kNumKeypoints = 21;
inline constexpr int kNumFingers = 5;
inline constexpr int kNumPairs = 4;

// Keypoints are stored column-wise: column i is keypoint i.
template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Point3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Keypoints2 = Eigen::Matrix<Scalar, 2, kNumKeypoints>;
template <typename Scalar>
using Keypoints3 = Eigen::Matrix<Scalar, 3, kNumKeypoints>;

using Point2d = Point2<double>;
using Point3d = Point3<double>;
using Keypoints2d = Keypoints2<double>;
using Keypoints3d = Keypoints3<double>;

// 21-point topology: 0 wrist, then four joints per finger ordered base to tip.
enum class Finger : int { Thumb = 0, Index = 1, Middle = 2, Ring = 3, Pinky = 4 };

// Adjacent finger pairs, ordered thumb side to pinky side.
enum class FingerPair : int { ThumbIndex = 0, IndexMiddle = 1, MiddleRing = 2, RingPinky = 3 };

namespace kp {
inline constexpr int Wrist = 0;
inline constexpr int ThumbCmc = 1;
inline constexpr int ThumbMcp = 2;
inline constexpr int ThumbIp = 3;
inline constexpr int ThumbTip = 4;
inline constexpr int IndexMcp = 5;
inline constexpr int IndexPip = 6;
inline constexpr int IndexDip = 7;
inline constexpr int IndexTip = 8;
inline constexpr int MiddleMcp = 9;
inline constexpr int MiddlePip = 10;
inline constexpr int MiddleDip = 11;
inline constexpr int MiddleTip = 12;
inline constexpr int RingMcp = 13;
inline constexpr int RingPip = 14;
inline constexpr int RingDip = 15;
inline constexpr int RingTip = 16;
inline constexpr int PinkyMcp = 17;
inline constexpr int PinkyPip = 18;
inline constexpr int PinkyDip = 19;
inline constexpr int PinkyTip = 20;
}  // namespace kp

inline constexpr std::array<Finger, kNumFingers> kAllFingers = {
    Finger::Thumb, Finger::Index, Finger::Middle, Finger::Ring, Finger::Pinky};
inline constexpr std::array<FingerPair, kNumPairs> kAllPairs = {
    FingerPair::ThumbIndex, FingerPair::IndexMiddle, FingerPair::MiddleRing, FingerPair::RingPinky};

constexpr int finger_ordinal(Finger f) { return static_cast<int>(f); }
constexpr int pair_ordinal(FingerPair p) { return static_cast<int>(p); }

// Index of joint `j` (0 = base, 3 = tip) of finger `f`.
constexpr int joint_index(Finger f, int j) { return 4 * finger_ordinal(f) + 1 + j; }

// [wrist, base, intermediate1, intermediate2, tip] for a finger.
constexpr std::array<int, 5> finger_chain_indices(Finger f) {
  const int b = joint_index(f, 0);
  return {kp::Wrist, b, b + 1, b + 2, b + 3};
}

constexpr std::array<Finger, 2> pair_fingers(FingerPair p) {
  return {static_cast<Finger>(pair_ordinal(p)), static_cast<Finger>(pair_ordinal(p) + 1)};
}

// Parent of every non-wrist keypoint; the wrist has parent -1.
constexpr int parent_index(int i) {
  if (i == kp::Wrist) return -1;
  return ((i - 1) % 4 == 0) ? kp::Wrist : i - 1;
}

std::string_view finger_name(Finger f);
std::string_view pair_name(FingerPair p);
std::optional<Finger> finger_from_name(std::string_view name);
std::optional<FingerPair> pair_from_name(std::string_view name);

enum class Handedness { Left, Right };

std::string_view handedness_name(Handedness h);
std::optional<Handedness> handedness_from_name(std::string_view name);

struct HandSkeleton {
  Keypoints2d kp2d = Keypoints2d::Zero();   // pixels, x right, y down
  std::optional<Keypoints3d> kp3d;          // meters, x right, y up, z toward the viewer
  Handedness handedness = Handedness::Right;
  double score = 1.0;
};

struct HandFrame {
  std::int64_t timestamp_us = 0;
  int image_w = 0;
  int image_h = 0;
  std::optional<HandSkeleton> hand;
};

// Unvalidated frame as it arrives from ingestion, with dynamically sized keypoint arrays.
struct RawHandSkeleton {
  std::vector<std::array<double, 2>> kp2d;
  std::optional<std::vector<std::array<double, 3>>> kp3d;
  Handedness handedness = Handedness::Right;
  double score = 1.0;
};

struct RawHandFrame {
  std::int64_t timestamp_us = 0;
  int image_w = 0;
  int image_h = 0;
  std::optional<RawHandSkeleton> hand;
};

// Throws Error(MalformedFrame) unless every type invariant holds.
HandFrame validate_frame(const RawHandFrame& raw);
HandFrame validate_frame(const HandFrame& frame);

// Throws Error(Missing3D) if the skeleton has no metric keypoints.
const Keypoints3d& require_kp3d(const HandSkeleton& skel);

// The five chain points of a finger as a 3x5 matrix. Throws Error(Missing3D).
Eigen::Matrix<double, 3, 5> finger_chain(const HandSkeleton& skel, Finger finger);

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 5> finger_chain(const Eigen::MatrixBase<Derived>& kp3d,
                                                           Finger finger) {
  Eigen::Matrix<typename Derived::Scalar, 3, 5> chain;
  const auto idx = finger_chain_indices(finger);
  for (int k = 0; k < 5; ++k) chain.col(k) = kp3d.col(idx[k]);
  return chain;
}

}  // namespace hgr
