#pragma once

// Virtual-keypoint hand alignment: center, rotation angle and scale of a 2D
// skeleton, plus roll normalization of the matching 3D keypoints.
//
// Pixel coordinates are y-down. A rotation angle of 0 means the rotation
// vector already points toward the top of the image; rotating the image by
// -angle about the center brings any other hand into that orientation.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <numbers>

#include "hgr/error.hpp"
#include "hgr/skeleton.hpp"

namespace hgr {

inline constexpr double kEpsRotationPx = 1e-6;
inline constexpr double kEpsScalePx = 1e-6;

// Non-tip, non-wrist joints.
inline constexpr std::array<int, 15> kKnuckles = {1, 2, 3, 5, 6, 7, 9, 10, 11, 13, 14, 15, 17, 18, 19};

template <typename Scalar>
struct AlignmentFrame {
  Point2<Scalar> center;
  Scalar rotation_rad;  // in (-pi, pi]
  Scalar scale_px;      // > 0
};

// Mean of the index, middle and pinky base knuckles.
template <typename Derived>
Point2<typename Derived::Scalar> center_keypoint(const Eigen::MatrixBase<Derived>& kp) {
  using Scalar = typename Derived::Scalar;
  return (kp.col(kp::IndexMcp) + kp.col(kp::MiddleMcp) + kp.col(kp::PinkyMcp)) / Scalar(3);
}

// (wrist - middle MCP) + (pinky MCP - index MCP). Not checked for degeneracy.
template <typename Derived>
Point2<typename Derived::Scalar> rotation_vector(const Eigen::MatrixBase<Derived>& kp) {
  return (kp.col(kp::Wrist) - kp.col(kp::MiddleMcp)) + (kp.col(kp::PinkyMcp) - kp.col(kp::IndexMcp));
}

template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  a = std::remainder(a, Scalar(2) * kPi);
  if (a <= -kPi) a += Scalar(2) * kPi;
  return a;
}

// atan2(v.x, -v.y) of the rotation vector. Throws DegenerateRotation if the
// vector is shorter than kEpsRotationPx.
template <typename Derived>
typename Derived::Scalar rotation_angle(const Eigen::MatrixBase<Derived>& kp) {
  const auto v = rotation_vector(kp);
  if (!(v.norm() >= kEpsRotationPx)) {
    throw Error(Errc::DegenerateRotation, "rotation vector has near-zero length");
  }
  return wrap_angle(std::atan2(v.x(), -v.y()));
}

// Distance from the center keypoint to the farthest knuckle.
template <typename Derived>
typename Derived::Scalar alignment_scale(const Eigen::MatrixBase<Derived>& kp) {
  using Scalar = typename Derived::Scalar;
  const Point2<Scalar> c = center_keypoint(kp);
  Scalar best(0);
  for (int i : kKnuckles) best = std::max(best, (kp.col(i) - c).norm());
  if (!(best >= kEpsScalePx)) throw Error(Errc::DegenerateScale, "all knuckles coincide with the center");
  return best;
}

template <typename Derived>
AlignmentFrame<typename Derived::Scalar> alignment_frame(const Eigen::MatrixBase<Derived>& kp) {
  return {center_keypoint(kp), rotation_angle(kp), alignment_scale(kp)};
}

// Image-plane rotation by `angle` in y-down pixel coordinates.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> image_rotation(Scalar angle) {
  Eigen::Matrix<Scalar, 2, 2> r;
  const Scalar c = std::cos(angle), s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

// The same physical rotation expressed in the y-up metric frame: a rotation
// about the viewing axis, which flips sense because y is mirrored.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> roll_rotation_3d(Scalar image_angle) {
  Eigen::Matrix<Scalar, 3, 3> r = Eigen::Matrix<Scalar, 3, 3>::Identity();
  const Scalar c = std::cos(image_angle), s = std::sin(image_angle);
  r(0, 0) = c;
  r(0, 1) = s;
  r(1, 0) = -s;
  r(1, 1) = c;
  return r;
}

// Rotates 2D keypoints about the center keypoint by -rotation_angle, so the
// rotation vector of the result points up.
template <typename Derived>
Keypoints2<typename Derived::Scalar> roll_normalize_2d(const Eigen::MatrixBase<Derived>& kp) {
  using Scalar = typename Derived::Scalar;
  const Point2<Scalar> c = center_keypoint(kp);
  const Eigen::Matrix<Scalar, 2, 2> r = image_rotation(-rotation_angle(kp));
  return (r * (kp.colwise() - c)).colwise() + c;
}

// Rolls metric keypoints about the viewing axis by the same rotation that
// roll_normalize_2d applies to their 2D projection.
template <typename Derived3, typename Derived2>
Keypoints3<typename Derived3::Scalar> roll_normalize_3d(const Eigen::MatrixBase<Derived3>& kp3d,
                                                        const Eigen::MatrixBase<Derived2>& kp2d) {
  return roll_rotation_3d(-rotation_angle(kp2d)) * kp3d;
}

}  // namespace hgr
