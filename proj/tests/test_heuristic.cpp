#include <gtest/gtest.h>

#include <random>
#include <set>

#include "hgr/heuristic.hpp"
#include "support.hpp"

using namespace hgr;
using hgr::test::deg;
using hgr::test::kPi;

namespace {

FeatureVectord make_fv(std::array<double, 5> fingers_deg, std::array<double, 4> pairs_deg, double yaw_deg = 0,
                       double pitch_deg = 0, double roll_deg = 0) {
  FeatureVectord fv;
  for (int i = 0; i < 5; ++i) fv.finger_angles[i] = deg(fingers_deg[i]);
  for (int i = 0; i < 4; ++i) fv.pair_angles[i] = deg(pairs_deg[i]);
  fv.euler.yaw = deg(yaw_deg);
  fv.euler.pitch = deg(pitch_deg);
  fv.euler.roll = deg(roll_deg);
  return fv;
}

const GestureDefinition& find(const GestureConfig& cfg, const std::string& name) {
  for (const auto& g : cfg.gestures) {
    if (g.name == name) return g;
  }
  throw std::runtime_error("no gesture " + name);
}

Errc config_error(const GestureConfig& cfg) {
  try {
    validate_config(cfg);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return Errc::EmptyInput;
}

}  // namespace

TEST(Discretize, StraightBelowThreshold) {
  StateThresholds th = default_thresholds();
  th.straight_max[1] = 0.52;
  const HandStates s = discretize(make_fv({0, 0, 0, 0, 0}, {0, 0, 0, 0}), th);
  EXPECT_EQ(s.fingers[1], FingerState::FullyStraight);
}

TEST(Discretize, BoundariesAreInclusive) {
  StateThresholds th = default_thresholds();
  FeatureVectord fv = make_fv({0, 0, 0, 0, 0}, {0, 0, 0, 0});
  for (int i = 0; i < kNumFingers; ++i) {
    fv.finger_angles[i] = th.straight_max[i];
    EXPECT_EQ(discretize(fv, th).fingers[i], FingerState::FullyStraight);
    fv.finger_angles[i] = std::nextafter(th.straight_max[i], 10.0);
    EXPECT_EQ(discretize(fv, th).fingers[i], FingerState::Neither);
    fv.finger_angles[i] = th.bent_min[i];
    EXPECT_EQ(discretize(fv, th).fingers[i], FingerState::FullyBent);
    fv.finger_angles[i] = std::nextafter(th.bent_min[i], 0.0);
    EXPECT_EQ(discretize(fv, th).fingers[i], FingerState::Neither);
  }
  for (int i = 0; i < kNumPairs; ++i) {
    fv.pair_angles[i] = th.crossed_max[i];
    EXPECT_EQ(discretize(fv, th).pairs[i], PairState::Crossed);
    fv.pair_angles[i] = th.apart_min[i];
    EXPECT_EQ(discretize(fv, th).pairs[i], PairState::Apart);
    fv.pair_angles[i] = 0.5 * (th.crossed_max[i] + th.apart_min[i]);
    EXPECT_EQ(discretize(fv, th).pairs[i], PairState::Neither);
  }
}

TEST(Discretize, PiIsBent) {
  StateThresholds th = default_thresholds();
  th.bent_min[2] = 1.57;
  const HandStates s = discretize(make_fv({0, 0, 180, 0, 0}, {0, 0, 0, 0}), th);
  EXPECT_EQ(s.fingers[2], FingerState::FullyBent);
}

TEST(Evaluate, OpenPalmOnStraightHand) {
  const GestureConfig cfg = default_gesture_config();
  const auto& palm = find(cfg, "OpenPalm");
  const FeatureVectord fv = make_fv({5, 5, 5, 5, 5}, {20, 12, 12, 12});
  EXPECT_TRUE(evaluate(palm, discretize(fv, cfg.thresholds), fv.euler));

  HandStates s = discretize(fv, cfg.thresholds);
  s.fingers[finger_ordinal(Finger::Pinky)] = FingerState::Neither;
  EXPECT_FALSE(evaluate(palm, s, fv.euler));
}

TEST(Evaluate, WrappedEulerInterval) {
  const GestureExpr e = GestureExpr::euler_in(EulerAxis::Roll, deg(170), deg(-170));
  HandStates s;
  EulerAnglesd euler;
  euler.roll = kPi;
  EXPECT_TRUE(evaluate(e, s, euler));
  euler.roll = deg(-175);
  EXPECT_TRUE(evaluate(e, s, euler));
  euler.roll = deg(-170);
  EXPECT_FALSE(evaluate(e, s, euler));
  euler.roll = 0;
  EXPECT_FALSE(evaluate(e, s, euler));
  // other axes are untouched
  euler.roll = kPi;
  euler.yaw = 0;
  EXPECT_FALSE(evaluate(GestureExpr::euler_in(EulerAxis::Yaw, deg(170), deg(-170)), s, euler));
}

TEST(Evaluate, BooleanCombinators) {
  HandStates s;
  s.fingers.fill(FingerState::FullyBent);
  s.pairs.fill(PairState::Neither);
  const EulerAnglesd e;
  const auto t = GestureExpr::finger_is(Finger::Ring, FingerState::FullyBent);
  const auto f = GestureExpr::pair_is(FingerPair::MiddleRing, PairState::Apart);
  EXPECT_TRUE(evaluate(GestureExpr::all({}), s, e));
  EXPECT_FALSE(evaluate(GestureExpr::any({}), s, e));
  EXPECT_FALSE(evaluate(GestureExpr::all({t, f}), s, e));
  EXPECT_TRUE(evaluate(GestureExpr::any({f, t}), s, e));
  EXPECT_TRUE(evaluate(GestureExpr::negate(f), s, e));
  EXPECT_FALSE(evaluate(GestureExpr::negate(GestureExpr::negate(f)), s, e));
}

TEST(AngleInterval, MatchesIntegerWalk) {
  // Oracle: walk the circle one degree at a time from lo until hi.
  for (int lo = -179; lo <= 180; lo += 7) {
    for (int hi = -179; hi <= 180; hi += 11) {
      std::set<int> members;
      for (int d = lo; ((d - hi) % 360 + 360) % 360 != 0; ++d) members.insert(((d + 179) % 360 + 360) % 360 - 179);
      for (int a = -179; a <= 180; ++a) {
        EXPECT_EQ(angle_in_interval(deg(a), deg(lo), deg(hi)), members.count(a) == 1)
            << "angle " << a << " in [" << lo << ", " << hi << ")";
      }
    }
  }
}

TEST(Classify, SyntheticOpenPalm) {
  const GestureConfig cfg = default_gesture_config();
  const SynthConfig scfg = test::quiet_config();
  std::mt19937_64 rng(30);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(classify_heuristic(feature_vector(*synth_pose("OpenPalm", scfg, rng).frame.hand), cfg), "OpenPalm");
  }
}

TEST(Classify, SyntheticCallMeIsNegative) {
  const GestureConfig cfg = default_gesture_config();
  const SynthConfig scfg = test::quiet_config();
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(classify_heuristic(feature_vector(*synth_pose("CallMe", scfg, rng).frame.hand), cfg), "Negative");
  }
}

TEST(Classify, HigherPriorityWins) {
  GestureConfig cfg = default_gesture_config();
  // Broader than ThumbUp: any hand with the four fingers bent.
  GestureDefinition broad{"FourBent",
                          GestureExpr::all({GestureExpr::finger_is(Finger::Index, FingerState::FullyBent),
                                            GestureExpr::finger_is(Finger::Middle, FingerState::FullyBent),
                                            GestureExpr::finger_is(Finger::Ring, FingerState::FullyBent),
                                            GestureExpr::finger_is(Finger::Pinky, FingerState::FullyBent)}),
                          100};
  const FeatureVectord thumb_up = make_fv({5, 120, 120, 120, 120}, {30, 10, 10, 10}, 45, 0, 30);
  ASSERT_EQ(classify_heuristic(thumb_up, cfg), "ThumbUp");
  cfg.gestures.push_back(broad);
  EXPECT_EQ(classify_heuristic(thumb_up, cfg), "FourBent");
  cfg.gestures.back().priority = 5;
  EXPECT_EQ(classify_heuristic(thumb_up, cfg), "ThumbUp");
}

TEST(Classify, NoMatchIsNegative) {
  const GestureConfig cfg = default_gesture_config();
  EXPECT_EQ(classify_heuristic(make_fv({50, 50, 50, 50, 50}, {10, 10, 10, 10}), cfg), "Negative");
}

TEST(Classify, Deterministic) {
  const GestureConfig cfg = default_gesture_config();
  std::mt19937_64 rng(32);
  for (int i = 0; i < 200; ++i) {
    const FeatureVectord fv = feature_vector(*test::random_sample(rng).frame.hand);
    EXPECT_EQ(classify_heuristic(fv, cfg), classify_heuristic(fv, cfg));
  }
}

TEST(Classify, RelaxingStraightThresholdOnlyGrowsOpenPalm) {
  SynthConfig scfg;
  scfg.jitter_deg = 8;
  std::vector<std::string> labels(kGestureLabels.begin(), kGestureLabels.end());
  const auto corpus = synth_corpus(labels, 40, scfg);
  std::vector<FeatureVectord> fvs;
  for (const auto& s : corpus) fvs.push_back(feature_vector(*s.frame.hand));

  GestureConfig cfg = default_gesture_config();
  std::set<size_t> prev;
  for (int step = 0; step <= 6; ++step) {
    GestureConfig relaxed = cfg;
    for (auto& v : relaxed.thresholds.straight_max) v += deg(3.0 * step);
    validate_config(relaxed);
    std::set<size_t> palms;
    for (size_t i = 0; i < fvs.size(); ++i) {
      if (classify_heuristic(fvs[i], relaxed) == "OpenPalm") palms.insert(i);
    }
    EXPECT_TRUE(std::includes(palms.begin(), palms.end(), prev.begin(), prev.end())) << "step " << step;
    EXPECT_GE(palms.size(), prev.size());
    prev = palms;
  }
  EXPECT_GT(prev.size(), 40u);
}

TEST(Classify, OrientationFreeGesturesSurviveRotation) {
  const GestureConfig cfg = default_gesture_config();
  std::mt19937_64 rng(33);
  int checked = 0;
  for (const char* label : {"OpenPalm", "ClosedFist", "Victory"}) {
    for (int i = 0; i < 60; ++i) {
      const SynthSample s = synth_pose(label, SynthConfig{}, rng);
      const Keypoints3d& kp = *s.frame.hand->kp3d;
      const Handedness h = s.frame.hand->handedness;
      const std::string before = classify_heuristic(feature_vector(kp, h), cfg);
      if (before != label) continue;
      ++checked;
      for (int k = 0; k < 5; ++k) {
        const Keypoints3d moved = test::random_rotation(rng) * kp;
        EXPECT_EQ(classify_heuristic(feature_vector(moved, h), cfg), before);
      }
    }
  }
  EXPECT_GT(checked, 150);
}

TEST(Classify, ThumbUpDropsWhenRolledOutOfBand) {
  const GestureConfig cfg = default_gesture_config();
  const FeatureVectord up = make_fv({5, 120, 120, 120, 120}, {30, 10, 10, 10}, 45, 0, 30);
  ASSERT_EQ(classify_heuristic(up, cfg), "ThumbUp");
  FeatureVectord down = up;
  down.euler.yaw = deg(-135);
  EXPECT_EQ(classify_heuristic(down, cfg), "ThumbDown");
  FeatureVectord sideways = up;
  sideways.euler.yaw = deg(-45);
  EXPECT_EQ(classify_heuristic(sideways, cfg), "Negative");
}

TEST(Classify, ThumbUpAndThumbDownAreExclusive) {
  const GestureConfig cfg = default_gesture_config();
  const auto& up = find(cfg, "ThumbUp");
  const auto& down = find(cfg, "ThumbDown");
  HandStates s;
  const FingerState states[] = {FingerState::FullyStraight, FingerState::FullyBent, FingerState::Neither};
  const PairState pstates[] = {PairState::Crossed, PairState::Apart, PairState::Neither};
  std::mt19937_64 rng(34);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> ang(-kPi, kPi), half(-kPi / 2, kPi / 2);
  for (int trial = 0; trial < 20000; ++trial) {
    for (auto& f : s.fingers) f = states[pick(rng)];
    for (auto& p : s.pairs) p = pstates[pick(rng)];
    if (trial % 2 == 0) {
      s.fingers = {FingerState::FullyStraight, FingerState::FullyBent, FingerState::FullyBent, FingerState::FullyBent,
                   FingerState::FullyBent};
    }
    EulerAnglesd e;
    e.yaw = trial % 10 == 0 ? deg(trial % 360 - 179) : ang(rng);
    e.pitch = half(rng);
    e.roll = ang(rng);
    EXPECT_FALSE(evaluate(up, s, e) && evaluate(down, s, e));
  }
}

TEST(Config, DefaultIsValid) {
  const GestureConfig cfg = default_gesture_config();
  EXPECT_NO_THROW(validate_config(cfg));
  ASSERT_EQ(cfg.gestures.size(), 6u);
  std::set<std::string> names;
  for (const auto& g : cfg.gestures) names.insert(g.name);
  EXPECT_EQ(names, (std::set<std::string>{"OpenPalm", "Victory", "ClosedFist", "PointingUp", "ThumbUp", "ThumbDown"}));
}

TEST(Config, RejectsBadThresholds) {
  GestureConfig cfg = default_gesture_config();
  cfg.thresholds.straight_max[2] = cfg.thresholds.bent_min[2];
  EXPECT_EQ(config_error(cfg), Errc::BadConfig);

  cfg = default_gesture_config();
  cfg.thresholds.bent_min[0] = 4.0;
  EXPECT_EQ(config_error(cfg), Errc::BadConfig);

  cfg = default_gesture_config();
  cfg.thresholds.crossed_max[1] = -0.1;
  EXPECT_EQ(config_error(cfg), Errc::BadConfig);

  cfg = default_gesture_config();
  cfg.thresholds.apart_min[3] = cfg.thresholds.crossed_max[3];
  EXPECT_EQ(config_error(cfg), Errc::BadConfig);
}

TEST(Config, RejectsDuplicatesAndReservedName) {
  GestureConfig cfg = default_gesture_config();
  cfg.gestures.push_back(cfg.gestures.front());
  cfg.gestures.back().priority = 1000;
  EXPECT_EQ(config_error(cfg), Errc::UnknownReference);

  cfg = default_gesture_config();
  cfg.gestures.back().name = "Negative";
  EXPECT_EQ(config_error(cfg), Errc::UnknownReference);

  cfg = default_gesture_config();
  cfg.gestures[1].priority = cfg.gestures[0].priority;
  EXPECT_EQ(config_error(cfg), Errc::BadConfig);
}
