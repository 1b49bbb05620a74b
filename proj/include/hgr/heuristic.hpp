#pragma once

// Threshold-and-logic gesture classifier over the feature vector.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "hgr/features.hpp"

namespace hgr {

inline constexpr std::string_view kNegativeLabel = "Negative";

enum class FingerState { FullyStraight, FullyBent, Neither };
enum class PairState { Crossed, Apart, Neither };
enum class EulerAxis { Yaw, Pitch, Roll };

std::string_view finger_state_name(FingerState s);
std::string_view pair_state_name(PairState s);
std::string_view euler_axis_name(EulerAxis a);

// Radians. Invariants: 0 <= straight_max < bent_min <= pi and
// 0 <= crossed_max < apart_min <= pi, per finger and per pair.
struct StateThresholds {
  std::array<double, kNumFingers> straight_max{};
  std::array<double, kNumFingers> bent_min{};
  std::array<double, kNumPairs> crossed_max{};
  std::array<double, kNumPairs> apart_min{};
};

struct HandStates {
  std::array<FingerState, kNumFingers> fingers{};
  std::array<PairState, kNumPairs> pairs{};
};

// Boolean expression over finger/pair states and Euler-angle intervals.
struct GestureExpr {
  enum class Kind { All, Any, Not, FingerIs, PairIs, EulerIn };

  Kind kind = Kind::All;
  std::vector<GestureExpr> children;
  Finger finger = Finger::Thumb;
  FingerState finger_state = FingerState::Neither;
  FingerPair pair = FingerPair::ThumbIndex;
  PairState pair_state = PairState::Neither;
  EulerAxis axis = EulerAxis::Yaw;
  double lo_rad = 0;
  double hi_rad = 0;

  static GestureExpr all(std::vector<GestureExpr> c);
  static GestureExpr any(std::vector<GestureExpr> c);
  static GestureExpr negate(GestureExpr c);
  static GestureExpr finger_is(Finger f, FingerState s);
  static GestureExpr pair_is(FingerPair p, PairState s);
  static GestureExpr euler_in(EulerAxis a, double lo_rad, double hi_rad);

  bool operator==(const GestureExpr&) const = default;
};

struct GestureDefinition {
  std::string name;
  GestureExpr expr;
  int priority = 0;

  bool operator==(const GestureDefinition&) const = default;
};

struct GestureConfig {
  StateThresholds thresholds;
  std::vector<GestureDefinition> gestures;
};

StateThresholds default_thresholds();
GestureConfig default_gesture_config();

// Throws Error(BadConfig) on threshold or priority violations and
// Error(UnknownReference) for duplicate names.
void validate_config(const GestureConfig& cfg);

HandStates discretize(const FeatureVectord& fv, const StateThresholds& th);

// Membership of `angle` in the wrapped interval [lo, hi) on the circle,
// walking counterclockwise from lo. lo == hi denotes the empty interval.
bool angle_in_interval(double angle, double lo_rad, double hi_rad);

bool evaluate(const GestureExpr& expr, const HandStates& states, const EulerAnglesd& euler);

inline bool evaluate(const GestureDefinition& def, const HandStates& states, const EulerAnglesd& euler) {
  return evaluate(def.expr, states, euler);
}

// Highest-priority matching gesture name, or "Negative".
std::string classify_heuristic(const FeatureVectord& fv, const GestureConfig& cfg);

}  // namespace hgr
