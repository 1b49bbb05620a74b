#include "hgr/lifting.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hgr/alignment.hpp"

namespace hgr {

CameraIntrinsics default_intrinsics(int w, int h) {
  return {static_cast<double>(std::max(w, h)), w / 2.0, h / 2.0};
}

HandModel default_hand_model() {
  // Average adult hand, palm frame in meters.
  const Eigen::Vector3d thumb_cmc(0.035 * std::cos(std::numbers::pi / 4), 0.035 * std::sin(std::numbers::pi / 4), 0.0);
  const Eigen::Vector3d index_mcp(0.028, 0.088, 0.0);
  const Eigen::Vector3d middle_mcp(0.008, 0.091, 0.0);
  const Eigen::Vector3d ring_mcp(-0.011, 0.086, 0.0);
  const Eigen::Vector3d pinky_mcp(-0.028, 0.075, 0.0);

  HandModel m;
  m.bone_lengths = {
      thumb_cmc.norm(),  0.040, 0.032, 0.028,  // thumb
      index_mcp.norm(),  0.040, 0.024, 0.021,  // index
      middle_mcp.norm(), 0.045, 0.028, 0.023,  // middle
      ring_mcp.norm(),   0.042, 0.027, 0.023,  // ring
      pinky_mcp.norm(),  0.033, 0.019, 0.020,  // pinky
  };
  m.base_directions = {thumb_cmc.normalized(), index_mcp.normalized(), middle_mcp.normalized(),
                       ring_mcp.normalized(), pinky_mcp.normalized()};
  return m;
}

void validate_model(const HandModel& model) {
  for (int b = 0; b < kNumBones; ++b) {
    const double len = model.bone_lengths[b];
    if (!(len > 0.005 && len < 0.12)) {
      throw Error(Errc::BadConfig, "bone " + std::to_string(b) + " length " + std::to_string(len) +
                                       " m outside (0.005, 0.12)");
    }
  }
  for (const auto& d : model.base_directions) {
    if (!d.allFinite() || std::abs(d.norm() - 1.0) > 1e-9) {
      throw Error(Errc::BadConfig, "base directions must be unit vectors");
    }
  }
}

std::array<double, 2> joint_box(int i) {
  if (i == joint::ThumbCmcAbd || i == joint::ThumbRoll) return {kAbdMin, kAbdMax};
  if (i >= 5 && (i - 5) % 4 == joint::McpAbd) return {kAbdMin, kAbdMax};
  return {kFlexMin, kFlexMax};
}

Eigen::Matrix<double, kNumPoseParams, 1> PoseParams::to_vector() const {
  Eigen::Matrix<double, kNumPoseParams, 1> x;
  x << global_rot, global_t, joint_angles;
  return x;
}

PoseParams PoseParams::from_vector(const Eigen::Matrix<double, kNumPoseParams, 1>& x, Handedness h) {
  PoseParams p;
  p.global_rot = x.segment<3>(0);
  p.global_t = x.segment<3>(3);
  p.joint_angles = x.segment<kNumJointAngles>(6);
  p.handedness = h;
  return p;
}

bool within_box(const PoseParams& p) {
  if (!(p.global_t.z() > kDepthMin && p.global_t.z() < kDepthMax)) return false;
  for (int i = 0; i < kNumJointAngles; ++i) {
    const auto [lo, hi] = joint_box(i);
    if (!(p.joint_angles[i] >= lo && p.joint_angles[i] <= hi)) return false;
  }
  return p.global_rot.allFinite() && p.global_t.allFinite();
}

Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    Eigen::Matrix3d k;
    k << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return Eigen::Matrix3d::Identity() + k;
  }
  return Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
}

Eigen::Vector3d axis_angle_from_rotation(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

namespace {

Eigen::Matrix3d rot_x(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix(); }
Eigen::Matrix3d rot_y(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix(); }
Eigen::Matrix3d rot_z(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix(); }

// Frame whose y axis is `dir`, x axis in the palm plane toward the thumb side.
Eigen::Matrix3d base_frame(const Eigen::Vector3d& dir) {
  const Eigen::Vector3d y = dir.normalized();
  const Eigen::Vector3d x = y.cross(Eigen::Vector3d::UnitZ()).normalized();
  Eigen::Matrix3d f;
  f.col(0) = x;
  f.col(1) = y;
  f.col(2) = x.cross(y);
  return f;
}

}  // namespace

Keypoints3d local_keypoints(const HandModel& model, const Eigen::Matrix<double, kNumJointAngles, 1>& q) {
  Keypoints3d p;
  p.col(kp::Wrist).setZero();
  const auto& len = model.bone_lengths;

  // Positive abduction turns the finger toward its local +x (thumb side),
  // positive flexion curls it toward the palm (+z).
  {
    const Eigen::Matrix3d t0 = base_frame(model.base_directions[0]);
    p.col(kp::ThumbCmc) = len[0] * t0.col(1);
    Eigen::Matrix3d t = t0 * rot_z(-q[joint::ThumbCmcAbd]) * rot_x(q[joint::ThumbCmcFlex]) * rot_y(q[joint::ThumbRoll]);
    p.col(kp::ThumbMcp) = p.col(kp::ThumbCmc) + len[1] * t.col(1);
    t = t * rot_x(q[joint::ThumbMcpFlex]);
    p.col(kp::ThumbIp) = p.col(kp::ThumbMcp) + len[2] * t.col(1);
    t = t * rot_x(q[joint::ThumbIpFlex]);
    p.col(kp::ThumbTip) = p.col(kp::ThumbIp) + len[3] * t.col(1);
  }
  for (Finger f : {Finger::Index, Finger::Middle, Finger::Ring, Finger::Pinky}) {
    const int fo = finger_ordinal(f);
    const int qb = joint::finger_base(f);
    const int b0 = 4 * fo;  // bone index of wrist -> base
    const Eigen::Matrix3d f0 = base_frame(model.base_directions[fo]);
    const int mcp = joint_index(f, 0);
    p.col(mcp) = len[b0] * f0.col(1);
    Eigen::Matrix3d t = f0 * rot_z(-q[qb + joint::McpAbd]) * rot_x(q[qb + joint::McpFlex]);
    p.col(mcp + 1) = p.col(mcp) + len[b0 + 1] * t.col(1);
    t = t * rot_x(q[qb + joint::PipFlex]);
    p.col(mcp + 2) = p.col(mcp + 1) + len[b0 + 2] * t.col(1);
    t = t * rot_x(q[qb + joint::DipFlex]);
    p.col(mcp + 3) = p.col(mcp + 2) + len[b0 + 3] * t.col(1);
  }
  return p;
}

Keypoints3d forward_kinematics_unchecked(const HandModel& model, const PoseParams& params) {
  const Eigen::Matrix3d r = rotation_from_axis_angle(params.global_rot);
  Keypoints3d p = (r * local_keypoints(model, params.joint_angles)).colwise() + params.global_t;
  if (params.handedness == Handedness::Left) p.row(0) *= -1.0;
  return p;
}

Keypoints3d forward_kinematics(const HandModel& model, const PoseParams& params) {
  if (!within_box(params)) throw Error(Errc::OutOfBox, "pose parameters outside the anatomical box");
  return forward_kinematics_unchecked(model, params);
}

namespace {

constexpr int kNumResiduals = 2 * kNumKeypoints + kNumPoseParams;
using ParamVec = Eigen::Matrix<double, kNumPoseParams, 1>;
using ResidualVec = Eigen::Matrix<double, kNumResiduals, 1>;

// False if any keypoint falls behind the camera.
bool residuals(const Keypoints2d& kp2d, const HandModel& model, const CameraIntrinsics& k, const ParamVec& x,
               Handedness h, double box_weight, ResidualVec& r) {
  const Keypoints3d pts = forward_kinematics_unchecked(model, PoseParams::from_vector(x, h));
  if (!((pts.row(2).array() > 0).all())) return false;
  for (int i = 0; i < kNumKeypoints; ++i) {
    r(2 * i) = k.f * pts(0, i) / pts(2, i) + k.cx - kp2d(0, i);
    r(2 * i + 1) = k.f * pts(1, i) / pts(2, i) + k.cy - kp2d(1, i);
  }
  auto violation = [](double v, double lo, double hi) { return v < lo ? v - lo : v > hi ? v - hi : 0.0; };
  const int off = 2 * kNumKeypoints;
  for (int i = 0; i < 6; ++i) r(off + i) = 0.0;
  r(off + 5) = box_weight * violation(x[5], kDepthMin, kDepthMax);
  for (int i = 0; i < kNumJointAngles; ++i) {
    const auto [lo, hi] = joint_box(i);
    r(off + 6 + i) = box_weight * violation(x[6 + i], lo, hi);
  }
  return true;
}

}  // namespace

double reprojection_rms(const Keypoints2d& kp2d, const Keypoints3d& camera_points, const CameraIntrinsics& k) {
  return std::sqrt((project(camera_points, k) - kp2d).colwise().squaredNorm().sum() / kNumKeypoints);
}

double fit_cost(const Keypoints2d& kp2d, const HandModel& model, const CameraIntrinsics& k,
                const PoseParams& params, const FitOptions& opts) {
  ResidualVec r;
  if (!residuals(kp2d, model, k, params.to_vector(), params.handedness, opts.box_weight, r)) {
    throw Error(Errc::BehindCamera, "hand model projects from behind the camera");
  }
  return r.squaredNorm();
}

FitResult fit_pose(const Keypoints2d& kp2d, const HandModel& model, const CameraIntrinsics& k,
                   const PoseParams& init, const FitOptions& opts) {
  const Handedness h = init.handedness;
  ParamVec x = init.to_vector();
  ResidualVec r;
  if (!residuals(kp2d, model, k, x, h, opts.box_weight, r)) {
    throw Error(Errc::BehindCamera, "initial pose places keypoints behind the camera");
  }
  double cost = r.squaredNorm();

  FitResult out;
  out.accepted_costs.push_back(cost);
  double lambda = std::clamp(opts.lambda_init, opts.lambda_min, opts.lambda_max);

  Eigen::Matrix<double, kNumResiduals, kNumPoseParams> jac;
  ResidualVec rp, rm, rt;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (cost <= 1e-24) break;
    out.iterations = iter + 1;

    bool jac_ok = true;
    for (int j = 0; j < kNumPoseParams && jac_ok; ++j) {
      ParamVec xp = x, xm = x;
      xp[j] += opts.jacobian_step;
      xm[j] -= opts.jacobian_step;
      jac_ok = residuals(kp2d, model, k, xp, h, opts.box_weight, rp) &&
               residuals(kp2d, model, k, xm, h, opts.box_weight, rm);
      jac.col(j) = (rp - rm) / (2 * opts.jacobian_step);
    }
    if (!jac_ok) break;

    const Eigen::Matrix<double, kNumPoseParams, kNumPoseParams> jtj = jac.transpose() * jac;
    const ParamVec g = jac.transpose() * r;
    const ParamVec diag = jtj.diagonal().cwiseMax(1e-9);

    bool accepted = false;
    bool converged = false;
    while (!accepted) {
      Eigen::Matrix<double, kNumPoseParams, kNumPoseParams> a = jtj;
      a.diagonal() += lambda * diag;
      const ParamVec step = -a.ldlt().solve(g);
      const ParamVec xt = x + step;
      out.lambdas.push_back(lambda);
      if (step.allFinite() && residuals(kp2d, model, k, xt, h, opts.box_weight, rt) && rt.squaredNorm() < cost) {
        const double new_cost = rt.squaredNorm();
        converged = (cost - new_cost) / cost < opts.relative_tolerance;
        x = xt;
        r = rt;
        cost = new_cost;
        out.accepted_costs.push_back(cost);
        lambda = std::max(lambda * 0.5, opts.lambda_min);
        accepted = true;
      } else {
        if (lambda >= opts.lambda_max) break;
        lambda = std::min(lambda * 10.0, opts.lambda_max);
      }
    }
    if (!accepted || converged) break;
  }

  out.params = PoseParams::from_vector(x, h);
  out.points = forward_kinematics_unchecked(model, out.params);
  out.rms_px = reprojection_rms(kp2d, out.points, k);
  if (!(out.rms_px <= opts.rms_ceiling_px)) {
    throw Error(Errc::DivergedFit, "reprojection RMS " + std::to_string(out.rms_px) + " px exceeds ceiling " +
                                       std::to_string(opts.rms_ceiling_px));
  }
  return out;
}

PoseParams initial_guess(const Keypoints2d& kp2d, const HandModel& model, const CameraIntrinsics& k,
                         Handedness handedness) {
  // Canonical orientation: palm toward the camera, fingers up in the image.
  const Eigen::Matrix3d canonical = Eigen::Vector3d(1, -1, -1).asDiagonal();
  PoseParams ref;
  ref.handedness = handedness;
  ref.global_rot = axis_angle_from_rotation(canonical);
  ref.global_t = Eigen::Vector3d(0, 0, 1);
  const Keypoints2d ref_uv = project(forward_kinematics_unchecked(model, ref), k);

  const double phi = wrap_angle(rotation_angle(kp2d) - rotation_angle(ref_uv));
  const double depth = std::clamp(alignment_scale(ref_uv) / alignment_scale(kp2d), 1.1 * kDepthMin, 0.9 * kDepthMax);

  const double in_plane = handedness == Handedness::Right ? phi : -phi;
  const Eigen::Matrix3d r = rot_z(in_plane) * canonical;

  PoseParams p;
  p.handedness = handedness;
  p.global_rot = axis_angle_from_rotation(r);
  // Place the wrist so the center keypoint back-projects onto the observed one.
  const Keypoints3d local = local_keypoints(model, p.joint_angles);
  Eigen::Vector3d center_local = (local.col(kp::IndexMcp) + local.col(kp::MiddleMcp) + local.col(kp::PinkyMcp)) / 3.0;
  Eigen::Vector3d center_offset = r * center_local;
  if (handedness == Handedness::Left) center_offset.x() *= -1.0;
  const Point2d c = center_keypoint(kp2d);
  const Eigen::Vector3d center_cam((c.x() - k.cx) * depth / k.f, (c.y() - k.cy) * depth / k.f, depth);
  Eigen::Vector3d wrist_cam = center_cam - center_offset;
  if (handedness == Handedness::Left) wrist_cam.x() *= -1.0;
  p.global_t = wrist_cam;
  p.global_t.z() = std::clamp(p.global_t.z(), 1.1 * kDepthMin, 0.9 * kDepthMax);
  return p;
}

}  // namespace hgr
