#pragma once

// Extrinsic/intrinsic decomposition of metric hand keypoints into the
// 12-dimensional feature vector used by both gesture classifiers.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "hgr/alignment.hpp"
#include "hgr/error.hpp"
#include "hgr/skeleton.hpp"

namespace hgr {

inline constexpr double kMinPalmCross = 1e-9;   // m^2
inline constexpr double kMinPalmScale = 1e-6;   // m
inline constexpr double kMinSegment = 1e-9;     // m
inline constexpr double kGimbalCos = 1e-7;

template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar>
struct PalmPose {
  Matrix3<Scalar> rotation;     // columns: lateral, forward, normal
  Point3<Scalar> translation;   // wrist
  Scalar scale;                 // |middle MCP - wrist|
};

// Intrinsic Z-Y-X Tait-Bryan angles: R = Rz(yaw) * Ry(pitch) * Rx(roll).
template <typename Scalar>
struct EulerAngles {
  Scalar yaw = 0;
  Scalar pitch = 0;
  Scalar roll = 0;
  bool gimbal_lock = false;
};

template <typename Scalar>
struct FeatureVector {
  EulerAngles<Scalar> euler;
  std::array<Scalar, kNumFingers> finger_angles{};
  std::array<Scalar, kNumPairs> pair_angles{};
};

using PalmPosed = PalmPose<double>;
using EulerAnglesd = EulerAngles<double>;
using FeatureVectord = FeatureVector<double>;

template <typename Scalar>
Matrix3<Scalar> rotation_from_euler(Scalar yaw, Scalar pitch, Scalar roll) {
  using AA = Eigen::AngleAxis<Scalar>;
  return (AA(yaw, Point3<Scalar>::UnitZ()) * AA(pitch, Point3<Scalar>::UnitY()) *
          AA(roll, Point3<Scalar>::UnitX()))
      .toRotationMatrix();
}

template <typename Scalar>
Matrix3<Scalar> rotation_from_euler(const EulerAngles<Scalar>& e) {
  return rotation_from_euler(e.yaw, e.pitch, e.roll);
}

// Z-Y-X extraction. When |cos(pitch)| < kGimbalCos the yaw is fixed to zero
// and roll absorbs the remaining rotation about the locked axis.
template <typename Derived>
EulerAngles<typename Derived::Scalar> euler_from_rotation(const Eigen::MatrixBase<Derived>& r) {
  using Scalar = typename Derived::Scalar;
  EulerAngles<Scalar> e;
  const Scalar cos_pitch = std::hypot(r(0, 0), r(1, 0));
  e.pitch = std::atan2(-r(2, 0), cos_pitch);
  if (cos_pitch < kGimbalCos) {
    e.gimbal_lock = true;
    e.yaw = 0;
    e.roll = wrap_angle(std::atan2(-r(1, 2), r(1, 1)));
  } else {
    e.yaw = wrap_angle(std::atan2(r(1, 0), r(0, 0)));
    e.roll = wrap_angle(std::atan2(r(2, 1), r(2, 2)));
  }
  return e;
}

// Palm frame from the wrist and the index/pinky base knuckles. The normal is
// oriented out of the palm for either hand.
template <typename Derived>
PalmPose<typename Derived::Scalar> palm_pose(const Eigen::MatrixBase<Derived>& kp3d, Handedness handedness) {
  using Scalar = typename Derived::Scalar;
  const Point3<Scalar> wrist = kp3d.col(kp::Wrist);
  const Point3<Scalar> v1 = kp3d.col(kp::IndexMcp) - wrist;
  const Point3<Scalar> v2 = kp3d.col(kp::PinkyMcp) - wrist;
  Point3<Scalar> n = handedness == Handedness::Right ? v1.cross(v2) : v2.cross(v1);
  const Scalar scale = (kp3d.col(kp::MiddleMcp) - wrist).norm();
  if (!(n.norm() >= kMinPalmCross)) throw Error(Errc::DegeneratePalm, "wrist and index/pinky knuckles are collinear");
  if (!(scale >= kMinPalmScale)) throw Error(Errc::DegeneratePalm, "wrist coincides with the middle knuckle");
  n.normalize();
  Point3<Scalar> f = v1 + v2;
  f -= f.dot(n) * n;
  if (!(f.norm() >= kMinPalmScale)) throw Error(Errc::DegeneratePalm, "palm forward direction is undefined");
  f.normalize();
  const Point3<Scalar> l = f.cross(n);

  PalmPose<Scalar> pose;
  pose.rotation.col(0) = l;
  pose.rotation.col(1) = f;
  pose.rotation.col(2) = n;
  pose.translation = wrist;
  pose.scale = scale;
  return pose;
}

// Keypoints expressed in the palm frame, wrist at the origin and unit
// wrist-to-middle-knuckle distance.
template <typename Derived>
Keypoints3<typename Derived::Scalar> intrinsic_keypoints(const Eigen::MatrixBase<Derived>& kp3d,
                                                         const PalmPose<typename Derived::Scalar>& pose) {
  return pose.rotation.transpose() * (kp3d.colwise() - pose.translation) / pose.scale;
}

template <typename Scalar>
Scalar vector_angle(const Point3<Scalar>& a, const Point3<Scalar>& b) {
  const Scalar c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, Scalar(-1), Scalar(1)));
}

namespace detail {
template <typename Scalar>
void require_segment(const Point3<Scalar>& s) {
  if (!(s.norm() >= Scalar(kMinSegment))) throw Error(Errc::ZeroSegment, "chain segment has near-zero length");
}
}  // namespace detail

// Largest angle between the wrist-to-base segment and any later segment of
// the finger's polygonal chain.
template <typename Derived>
typename Derived::Scalar finger_feature_angle(const Eigen::MatrixBase<Derived>& kp3d, Finger finger) {
  using Scalar = typename Derived::Scalar;
  const auto chain = finger_chain(kp3d, finger);
  const Point3<Scalar> s0 = chain.col(1) - chain.col(0);
  detail::require_segment(s0);
  Scalar best(0);
  for (int k = 1; k < 4; ++k) {
    const Point3<Scalar> sk = chain.col(k + 1) - chain.col(k);
    detail::require_segment(sk);
    best = std::max(best, vector_angle(s0, sk));
  }
  return best;
}

// Unsigned angle between the proximal phalanges (base -> first intermediate
// joint) of two adjacent fingers.
template <typename Derived>
typename Derived::Scalar pair_feature_angle(const Eigen::MatrixBase<Derived>& kp3d, FingerPair pair) {
  using Scalar = typename Derived::Scalar;
  const auto [a, b] = pair_fingers(pair);
  const Point3<Scalar> pa = kp3d.col(joint_index(a, 1)) - kp3d.col(joint_index(a, 0));
  const Point3<Scalar> pb = kp3d.col(joint_index(b, 1)) - kp3d.col(joint_index(b, 0));
  detail::require_segment(pa);
  detail::require_segment(pb);
  return vector_angle(pa, pb);
}

// Euler angles of the palm frame, reported in the right-hand convention: a
// left hand yields the angles of its mirror image (yaw and pitch negated), so
// orientation predicates do not depend on handedness.
template <typename Scalar>
EulerAngles<Scalar> canonical_euler(const Matrix3<Scalar>& rotation, Handedness handedness) {
  EulerAngles<Scalar> e = euler_from_rotation(rotation);
  if (handedness == Handedness::Left) {
    e.yaw = wrap_angle(-e.yaw);
    e.pitch = -e.pitch;
  }
  return e;
}

template <typename Derived>
FeatureVector<typename Derived::Scalar> feature_vector(const Eigen::MatrixBase<Derived>& kp3d,
                                                       Handedness handedness) {
  using Scalar = typename Derived::Scalar;
  const PalmPose<Scalar> pose = palm_pose(kp3d, handedness);
  const Keypoints3<Scalar> local = intrinsic_keypoints(kp3d, pose);

  FeatureVector<Scalar> fv;
  fv.euler = canonical_euler(pose.rotation, handedness);
  for (Finger f : kAllFingers) fv.finger_angles[finger_ordinal(f)] = finger_feature_angle(local, f);
  for (FingerPair p : kAllPairs) fv.pair_angles[pair_ordinal(p)] = pair_feature_angle(local, p);
  return fv;
}

inline FeatureVectord feature_vector(const HandSkeleton& skel) {
  return feature_vector(require_kp3d(skel), skel.handedness);
}

// Flat [yaw, pitch, roll, 5 finger angles, 4 pair angles].
template <typename Scalar>
Eigen::Matrix<Scalar, 12, 1> to_array(const FeatureVector<Scalar>& fv) {
  Eigen::Matrix<Scalar, 12, 1> x;
  x << fv.euler.yaw, fv.euler.pitch, fv.euler.roll, fv.finger_angles[0], fv.finger_angles[1],
      fv.finger_angles[2], fv.finger_angles[3], fv.finger_angles[4], fv.pair_angles[0], fv.pair_angles[1],
      fv.pair_angles[2], fv.pair_angles[3];
  return x;
}

template <typename Derived>
FeatureVector<typename Derived::Scalar> from_array(const Eigen::MatrixBase<Derived>& x) {
  FeatureVector<typename Derived::Scalar> fv;
  fv.euler.yaw = x(0);
  fv.euler.pitch = x(1);
  fv.euler.roll = x(2);
  for (int i = 0; i < kNumFingers; ++i) fv.finger_angles[i] = x(3 + i);
  for (int i = 0; i < kNumPairs; ++i) fv.pair_angles[i] = x(8 + i);
  return fv;
}

}  // namespace hgr
