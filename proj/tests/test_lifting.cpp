#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hgr/features.hpp"
#include "hgr/lifting.hpp"
#include "support.hpp"

using namespace hgr;
using hgr::test::kPi;

namespace {

template <typename F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::BadConfig;
}

double bone_length(const Keypoints3d& p, int b) {
  const auto [from, to] = bone_endpoints(b);
  return (p.col(to) - p.col(from)).norm();
}

PoseParams random_params(std::mt19937_64& rng) {
  PoseParams p;
  for (int i = 0; i < kNumJointAngles; ++i) {
    const auto [lo, hi] = joint_box(i);
    p.joint_angles[i] = std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  p.global_rot = axis_angle_from_rotation(test::random_rotation(rng));
  p.global_t = test::random_vector(rng, -0.1, 0.1);
  p.global_t.z() = std::uniform_real_distribution<double>(0.3, 0.8)(rng);
  p.handedness = rng() % 2 ? Handedness::Left : Handedness::Right;
  return p;
}

// Generator pose and a nearby starting point.
struct Problem {
  PoseParams truth;
  PoseParams init;
  Keypoints3d points;
  Keypoints2d observed;
  CameraIntrinsics k;
};

Problem near_problem(std::mt19937_64& rng, double noise_px, double init_sd_rad = 0.005) {
  SynthConfig cfg;
  const SynthSample s = test::random_sample(rng, cfg);
  Problem pr;
  pr.truth = s.params;
  pr.k = s.intrinsics;
  pr.points = forward_kinematics(default_hand_model(), s.params);
  pr.observed = project(pr.points, pr.k);
  std::normal_distribution<double> n(0.0, noise_px);
  if (noise_px > 0) {
    for (int i = 0; i < kNumKeypoints; ++i) pr.observed.col(i) += Point2d(n(rng), n(rng));
  }
  std::normal_distribution<double> jr(0.0, init_sd_rad), jt(0.0, init_sd_rad / 5);
  pr.init = pr.truth;
  for (int i = 0; i < 3; ++i) {
    pr.init.global_rot[i] += jr(rng);
    pr.init.global_t[i] += jt(rng);
  }
  for (int i = 0; i < kNumJointAngles; ++i) pr.init.joint_angles[i] += jr(rng);
  return pr;
}

}  // namespace

TEST(Intrinsics, FocalIsLongerSide) {
  CameraIntrinsics k = default_intrinsics(640, 480);
  EXPECT_EQ(k.f, 640);
  EXPECT_EQ(k.cx, 320);
  EXPECT_EQ(k.cy, 240);
  k = default_intrinsics(480, 640);
  EXPECT_EQ(k.f, 640);
  EXPECT_EQ(k.cx, 240);
  EXPECT_EQ(k.cy, 320);
  k = default_intrinsics(100, 100);
  EXPECT_EQ(k.f, 100);
  EXPECT_EQ(k.cx, 50);
  EXPECT_EQ(k.cy, 50);
  k = default_intrinsics(101, 33);
  EXPECT_EQ(k.cx, 50.5);
  EXPECT_EQ(k.cy, 16.5);
}

TEST(Project, OpticalAxis) {
  const CameraIntrinsics k{100, 50, 50};
  Eigen::Matrix<double, 3, 1> p(0, 0, 1);
  EXPECT_EQ(project(p, k), Point2d(50, 50));
}

TEST(Project, ScaleAmbiguity) {
  const CameraIntrinsics k{640, 320, 240};
  Eigen::Matrix<double, 3, 2> p;
  p.col(0) = Point3d(0.1, 0, 1);
  p.col(1) = Point3d(0.2, 0, 2);
  const auto uv = project(p, k);
  EXPECT_NEAR((uv.col(0) - uv.col(1)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(uv(0, 0), 384.0, 1e-12);
}

TEST(Project, BehindCamera) {
  const CameraIntrinsics k{100, 50, 50};
  Eigen::Matrix<double, 3, 1> p(0, 0, -1);
  EXPECT_EQ(error_of([&] { project(p, k); }), Errc::BehindCamera);
  p.z() = 0;
  EXPECT_EQ(error_of([&] { project(p, k); }), Errc::BehindCamera);
}

TEST(HandModel, DefaultIsValid) {
  const HandModel m = default_hand_model();
  EXPECT_NO_THROW(validate_model(m));
  HandModel bad = m;
  bad.bone_lengths[7] = 0.2;
  EXPECT_EQ(error_of([&] { validate_model(bad); }), Errc::BadConfig);
  bad = m;
  bad.base_directions[2] *= 2.0;
  EXPECT_EQ(error_of([&] { validate_model(bad); }), Errc::BadConfig);
}

TEST(ForwardKinematics, RestPoseAtTranslation) {
  const HandModel m = default_hand_model();
  PoseParams p;
  p.global_t = Eigen::Vector3d(0.01, -0.02, 0.6);
  const Keypoints3d pts = forward_kinematics(m, p);
  const Keypoints3d rest = local_keypoints(m, p.joint_angles);
  EXPECT_LT(((rest.colwise() + p.global_t) - pts).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(pts.col(kp::Wrist), p.global_t);
  // rest pose: every finger straight along its base direction, in the palm plane
  for (Finger f : kAllFingers) {
    const auto idx = finger_chain_indices(f);
    const Point3d dir = m.base_directions[finger_ordinal(f)];
    if (f != Finger::Thumb) {
      for (int j = 1; j < 5; ++j) EXPECT_LT((rest.col(idx[j]).normalized() - dir).norm(), 1e-12);
    }
    EXPECT_LT((rest.col(idx[1]).normalized() - dir).norm(), 1e-12);
  }
}

TEST(ForwardKinematics, IndexPipFlexionMovesOnlyDistalIndexJoints) {
  const HandModel m = default_hand_model();
  PoseParams p;
  const Keypoints3d before = forward_kinematics(m, p);
  p.joint_angles[joint::finger_base(Finger::Index) + joint::PipFlex] = kPi / 2;
  const Keypoints3d after = forward_kinematics(m, p);
  for (int i = 0; i < kNumKeypoints; ++i) {
    const double moved = (after.col(i) - before.col(i)).norm();
    if (i == kp::IndexDip || i == kp::IndexTip) {
      EXPECT_GT(moved, 0.01) << i;
    } else {
      EXPECT_EQ(moved, 0.0) << i;
    }
  }
  for (int b = 0; b < kNumBones; ++b) EXPECT_NEAR(bone_length(after, b), m.bone_lengths[b], 1e-12);
  // a quarter turn at the PIP: middle phalanx perpendicular to the proximal one
  const Point3d prox = after.col(kp::IndexPip) - after.col(kp::IndexMcp);
  const Point3d mid = after.col(kp::IndexDip) - after.col(kp::IndexPip);
  EXPECT_NEAR(prox.dot(mid), 0.0, 1e-15);
  // and it curls toward the palm side (+z in the palm frame)
  EXPECT_GT(mid.z(), 0.0);
}

TEST(ForwardKinematics, PreservesBoneLengths) {
  const HandModel m = default_hand_model();
  std::mt19937_64 rng(60);
  for (int trial = 0; trial < 1000; ++trial) {
    const Keypoints3d pts = forward_kinematics(m, random_params(rng));
    for (int b = 0; b < kNumBones; ++b) EXPECT_NEAR(bone_length(pts, b), m.bone_lengths[b], 1e-12);
  }
}

TEST(ForwardKinematics, GlobalRotationIsRigidAboutWrist) {
  const HandModel m = default_hand_model();
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    PoseParams p = random_params(rng);
    p.handedness = Handedness::Right;
    const Eigen::Matrix3d r0 = rotation_from_axis_angle(p.global_rot);
    const Keypoints3d base = forward_kinematics(m, p);
    const Eigen::Matrix3d r = test::random_rotation(rng);
    p.global_rot = axis_angle_from_rotation(r * r0);
    const Keypoints3d turned = forward_kinematics(m, p);
    const Keypoints3d expected = (r * (base.colwise() - p.global_t)).colwise() + p.global_t;
    EXPECT_LT((turned - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ForwardKinematics, LeftHandIsMirrored) {
  const HandModel m = default_hand_model();
  std::mt19937_64 rng(62);
  PoseParams p = random_params(rng);
  p.handedness = Handedness::Right;
  const Keypoints3d right = forward_kinematics(m, p);
  p.handedness = Handedness::Left;
  const Keypoints3d left = forward_kinematics(m, p);
  EXPECT_EQ(left.row(0), -right.row(0));
  EXPECT_EQ(left.bottomRows(2), right.bottomRows(2));
}

TEST(ForwardKinematics, OutOfBox) {
  const HandModel m = default_hand_model();
  PoseParams p;
  p.joint_angles[joint::ThumbCmcAbd] = kAbdMax + 0.01;
  EXPECT_EQ(error_of([&] { forward_kinematics(m, p); }), Errc::OutOfBox);
  p = {};
  p.joint_angles[joint::finger_base(Finger::Ring) + joint::DipFlex] = kFlexMin - 0.01;
  EXPECT_EQ(error_of([&] { forward_kinematics(m, p); }), Errc::OutOfBox);
  p = {};
  p.global_t.z() = 3.5;
  EXPECT_EQ(error_of([&] { forward_kinematics(m, p); }), Errc::OutOfBox);
  EXPECT_NO_THROW(forward_kinematics_unchecked(m, p));
}

TEST(AxisAngle, RoundTrip) {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Matrix3d r = test::random_rotation(rng);
    EXPECT_LT((rotation_from_axis_angle(axis_angle_from_rotation(r)) - r).norm(), 1e-12);
  }
  EXPECT_EQ(rotation_from_axis_angle(Eigen::Vector3d::Zero()), Eigen::Matrix3d::Identity());
}

TEST(Fit, RecoversNearbyPose) {
  const HandModel m = default_hand_model();
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 40; ++trial) {
    const Problem pr = near_problem(rng, 0.0);
    const FitResult fit = fit_pose(pr.observed, m, pr.k, pr.init);
    const double mean_err = (fit.points - pr.points).colwise().norm().mean();
    EXPECT_LE(mean_err, 0.005);
    EXPECT_LE(fit.rms_px, 1e-3);
  }
}

TEST(Fit, FartherStartStaysWithinFiveMillimetres) {
  // About 1% of these starts settle in a near-ambiguous flexion minimum
  // (a few hundredths of a pixel); the 3D error stays small regardless.
  const HandModel m = default_hand_model();
  std::mt19937_64 rng(74);
  int exact = 0;
  const int n = 100;
  for (int trial = 0; trial < n; ++trial) {
    const Problem pr = near_problem(rng, 0.0, 0.03);
    const FitResult fit = fit_pose(pr.observed, m, pr.k, pr.init);
    EXPECT_LE((fit.points - pr.points).colwise().norm().mean(), 0.005);
    EXPECT_LE(fit.rms_px, 0.1);
    exact += fit.rms_px <= 1e-3;
  }
  EXPECT_GE(exact, 95);
}

TEST(Fit, NoisyObservations) {
  const HandModel m = default_hand_model();
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 20; ++trial) {
    const Problem pr = near_problem(rng, 1.0);
    const FitResult fit = fit_pose(pr.observed, m, pr.k, pr.init);
    EXPECT_LE(fit.rms_px, 2.0);
  }
}

TEST(Fit, StartingAtOptimum) {
  const HandModel m = default_hand_model();
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    const Problem pr = near_problem(rng, 0.0);
    const FitResult fit = fit_pose(pr.observed, m, pr.k, pr.truth);
    EXPECT_LE(fit.iterations, 2);
    EXPECT_LE(fit.rms_px, 1e-6);
  }
}

TEST(Fit, AcceptedCostsNeverIncrease) {
  const HandModel m = default_hand_model();
  const FitOptions opts;
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const Problem pr = near_problem(rng, trial % 2 ? 1.0 : 0.0);
    const FitResult fit = fit_pose(pr.observed, m, pr.k, pr.init, opts);
    ASSERT_FALSE(fit.accepted_costs.empty());
    for (size_t i = 1; i < fit.accepted_costs.size(); ++i) {
      EXPECT_LE(fit.accepted_costs[i], fit.accepted_costs[i - 1]);
    }
    for (double l : fit.lambdas) {
      EXPECT_GE(l, opts.lambda_min);
      EXPECT_LE(l, opts.lambda_max);
    }
    EXPECT_NEAR(fit.accepted_costs.back(), fit_cost(pr.observed, m, pr.k, fit.params, opts),
                1e-9 * (1 + fit.accepted_costs.back()));
  }
}

TEST(Fit, ScaledModelTradesSizeForDepth) {
  const HandModel m = default_hand_model();
  HandModel big = m;
  for (double& len : big.bone_lengths) len *= 1.2;
  std::mt19937_64 rng(68);
  for (int trial = 0; trial < 10; ++trial) {
    const Problem pr = near_problem(rng, 0.0);
    const FitResult a = fit_pose(pr.observed, m, pr.k, pr.init);
    PoseParams init = pr.init;
    init.global_t *= 1.2;
    const FitResult b = fit_pose(pr.observed, big, pr.k, init);
    EXPECT_NEAR(b.params.global_t.z() / a.params.global_t.z(), 1.2, 0.01);
    EXPECT_NEAR(b.rms_px, a.rms_px, 1e-3);
  }
}

TEST(Fit, DivergedFitAboveCeiling) {
  const HandModel m = default_hand_model();
  std::mt19937_64 rng(69);
  const Problem pr = near_problem(rng, 3.0, 0.03);
  FitOptions opts;
  opts.rms_ceiling_px = 0.01;
  EXPECT_EQ(error_of([&] { fit_pose(pr.observed, m, pr.k, pr.init, opts); }), Errc::DivergedFit);
}

TEST(Fit, InitialGuessFromAlignment) {
  // From scratch the guess must at least put the hand in front of the camera
  // with roughly the right image footprint.
  const HandModel m = default_hand_model();
  std::mt19937_64 rng(70);
  for (int trial = 0; trial < 50; ++trial) {
    const Problem pr = near_problem(rng, 0.0);
    const PoseParams g = initial_guess(pr.observed, m, pr.k, pr.truth.handedness);
    EXPECT_TRUE(within_box(g));
    const Keypoints2d uv = project(forward_kinematics(m, g), pr.k);
    EXPECT_LT((center_keypoint(uv) - center_keypoint(pr.observed)).norm(), 0.5 * alignment_scale(pr.observed));
  }
}

TEST(NormalizeWorld, MovesMiddleKnuckleToOrigin) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const Keypoints3d kp = (test::random_skeleton3d(rng).colwise() + test::random_vector(rng, -1, 1)).eval();
    const Keypoints3d n = normalize_world(kp);
    EXPECT_EQ(n.col(kp::MiddleMcp), Point3d::Zero());
    EXPECT_LT((test::distance_matrix(n) - test::distance_matrix(kp)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(normalize_world(n), n);
  }
}

TEST(NormalizeWorld, FeaturesUnchanged) {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 100; ++trial) {
    const SynthSample s = test::random_sample(rng);
    const Keypoints3d kp = camera_to_world(s.camera_points);
    const Handedness h = s.frame.hand->handedness;
    const auto a = to_array(feature_vector(kp, h));
    const auto b = to_array(feature_vector(normalize_world(kp), h));
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(CameraWorld, Involution) {
  std::mt19937_64 rng(73);
  const Keypoints3d kp = test::random_skeleton3d(rng);
  EXPECT_EQ(world_to_camera(camera_to_world(kp)), kp);
  EXPECT_EQ(camera_to_world(kp).row(1), -kp.row(1));
}
