#pragma once

// Fixed-shape kinematic hand model and 2D -> 3D pose fitting under a pinhole
// camera. Camera space is x right, y down, z forward (meters).

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

#include "hgr/error.hpp"
#include "hgr/skeleton.hpp"

namespace hgr {

struct CameraIntrinsics {
  double f = 1;
  double cx = 0;
  double cy = 0;
};

// Focal length max(w, h), principal point at the image center.
CameraIntrinsics default_intrinsics(int w, int h);

// Pinhole projection of camera-space points. Throws BehindCamera if any z <= 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, Derived::ColsAtCompileTime> project(
    const Eigen::MatrixBase<Derived>& points, const CameraIntrinsics& k) {
  static_assert(Derived::RowsAtCompileTime == 3, "project expects 3xN points");
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, 2, Derived::ColsAtCompileTime> uv(2, points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const Scalar z = points(2, i);
    if (!(z > 0)) throw Error(Errc::BehindCamera, "point " + std::to_string(i) + " has z <= 0");
    uv(0, i) = Scalar(k.f) * points(0, i) / z + Scalar(k.cx);
    uv(1, i) = Scalar(k.f) * points(1, i) / z + Scalar(k.cy);
  }
  return uv;
}

// Camera space <-> the y-up metric frame used for HandSkeleton::kp3d
// (x right, y up, z toward the viewer). The map is its own inverse.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, Derived::ColsAtCompileTime> camera_to_world(
    const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  return Eigen::Matrix<Scalar, 3, 1>(1, -1, -1).asDiagonal() * p;
}

template <typename Derived>
auto world_to_camera(const Eigen::MatrixBase<Derived>& p) {
  return camera_to_world(p);
}

// Translates keypoints so the middle-finger base knuckle is the origin.
template <typename Derived>
Keypoints3<typename Derived::Scalar> normalize_world(const Eigen::MatrixBase<Derived>& kp3d) {
  return kp3d.colwise() - kp3d.col(kp::MiddleMcp).eval();
}

inline constexpr int kNumBones = 20;
inline constexpr int kNumJointAngles = 21;
inline constexpr int kNumPoseParams = 6 + kNumJointAngles;

// Bone b (0-based) connects parent_index(b + 1) to keypoint b + 1.
constexpr std::array<int, 2> bone_endpoints(int b) { return {parent_index(b + 1), b + 1}; }

// Rest geometry in the palm frame: x toward the thumb side (right hand),
// y along the fingers, z out of the palm.
struct HandModel {
  std::array<double, kNumBones> bone_lengths{};
  // Unit wrist -> base-joint direction per finger (thumb: wrist -> CMC).
  std::array<Eigen::Vector3d, kNumFingers> base_directions;
};

HandModel default_hand_model();

// Throws Error(BadConfig) unless all lengths lie in (0.005, 0.12) m and
// directions are unit length.
void validate_model(const HandModel& model);

// Joint angle layout: thumb [CMC flexion, CMC abduction, MCP flexion,
// IP flexion, roll], then for index..pinky [MCP flexion, MCP abduction,
// PIP flexion, DIP flexion].
namespace joint {
inline constexpr int ThumbCmcFlex = 0;
inline constexpr int ThumbCmcAbd = 1;
inline constexpr int ThumbMcpFlex = 2;
inline constexpr int ThumbIpFlex = 3;
inline constexpr int ThumbRoll = 4;
constexpr int finger_base(Finger f) { return 5 + 4 * (finger_ordinal(f) - 1); }
inline constexpr int McpFlex = 0;
inline constexpr int McpAbd = 1;
inline constexpr int PipFlex = 2;
inline constexpr int DipFlex = 3;
}  // namespace joint

inline constexpr double kFlexMin = -0.3, kFlexMax = 2.0;
inline constexpr double kAbdMin = -0.6, kAbdMax = 0.6;
inline constexpr double kDepthMin = 0.05, kDepthMax = 3.0;

// Lower/upper bound of joint angle i.
std::array<double, 2> joint_box(int i);

struct PoseParams {
  Eigen::Vector3d global_rot = Eigen::Vector3d::Zero();       // axis-angle, palm frame -> camera
  Eigen::Vector3d global_t = Eigen::Vector3d(0, 0, 0.5);      // wrist position (m)
  Eigen::Matrix<double, kNumJointAngles, 1> joint_angles = Eigen::Matrix<double, kNumJointAngles, 1>::Zero();
  Handedness handedness = Handedness::Right;  // left hands are mirrored in camera x

  Eigen::Matrix<double, kNumPoseParams, 1> to_vector() const;
  static PoseParams from_vector(const Eigen::Matrix<double, kNumPoseParams, 1>& x, Handedness h);
};

bool within_box(const PoseParams& p);

Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& w);
Eigen::Vector3d axis_angle_from_rotation(const Eigen::Matrix3d& r);

// Keypoints in the hand's own palm frame (no global pose, right-hand geometry).
Keypoints3d local_keypoints(const HandModel& model, const Eigen::Matrix<double, kNumJointAngles, 1>& joints);

// Camera-space keypoints. Throws OutOfBox if params leave the anatomical box.
Keypoints3d forward_kinematics(const HandModel& model, const PoseParams& params);
Keypoints3d forward_kinematics_unchecked(const HandModel& model, const PoseParams& params);

struct FitOptions {
  double jacobian_step = 1e-6;
  double lambda_init = 1e-3;
  double lambda_min = 1e-12;
  double lambda_max = 1e8;
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  double rms_ceiling_px = 25.0;
  double box_weight = 1e3;  // px per rad (or per m) of box violation
};

struct FitResult {
  PoseParams params;
  Keypoints3d points;  // camera space
  double rms_px = 0;
  int iterations = 0;
  std::vector<double> accepted_costs;  // cost after init and after every accepted step
  std::vector<double> lambdas;         // damping used at every trial
};

// Sum of squared reprojection errors plus squared, weighted box violations.
double fit_cost(const Keypoints2d& kp2d, const HandModel& model, const CameraIntrinsics& k,
                const PoseParams& params, const FitOptions& opts = {});

double reprojection_rms(const Keypoints2d& kp2d, const Keypoints3d& camera_points, const CameraIntrinsics& k);

// Levenberg-Marquardt with a central-difference Jacobian. Throws DivergedFit
// if the final reprojection RMS exceeds opts.rms_ceiling_px.
FitResult fit_pose(const Keypoints2d& kp2d, const HandModel& model, const CameraIntrinsics& k,
                   const PoseParams& init, const FitOptions& opts = {});

// Pose prior from the 2D alignment frame: in-plane rotation from the
// alignment angle, depth from the alignment scale, zero joint angles.
PoseParams initial_guess(const Keypoints2d& kp2d, const HandModel& model, const CameraIntrinsics& k,
                         Handedness handedness);

}  // namespace hgr
