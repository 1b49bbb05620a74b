#include "hgr/heuristic.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace hgr {

namespace {

constexpr double deg(double d) { return d * std::numbers::pi / 180.0; }

using E = GestureExpr;

E straight(Finger f) { return E::finger_is(f, FingerState::FullyStraight); }
E bent(Finger f) { return E::finger_is(f, FingerState::FullyBent); }

}  // namespace

std::string_view finger_state_name(FingerState s) {
  switch (s) {
    case FingerState::FullyStraight: return "FullyStraight";
    case FingerState::FullyBent: return "FullyBent";
    case FingerState::Neither: return "Neither";
  }
  return "Neither";
}

std::string_view pair_state_name(PairState s) {
  switch (s) {
    case PairState::Crossed: return "Crossed";
    case PairState::Apart: return "Apart";
    case PairState::Neither: return "Neither";
  }
  return "Neither";
}

std::string_view euler_axis_name(EulerAxis a) {
  switch (a) {
    case EulerAxis::Yaw: return "yaw";
    case EulerAxis::Pitch: return "pitch";
    case EulerAxis::Roll: return "roll";
  }
  return "yaw";
}

GestureExpr GestureExpr::all(std::vector<GestureExpr> c) {
  GestureExpr e;
  e.kind = Kind::All;
  e.children = std::move(c);
  return e;
}

GestureExpr GestureExpr::any(std::vector<GestureExpr> c) {
  GestureExpr e;
  e.kind = Kind::Any;
  e.children = std::move(c);
  return e;
}

GestureExpr GestureExpr::negate(GestureExpr c) {
  GestureExpr e;
  e.kind = Kind::Not;
  e.children.push_back(std::move(c));
  return e;
}

GestureExpr GestureExpr::finger_is(Finger f, FingerState s) {
  GestureExpr e;
  e.kind = Kind::FingerIs;
  e.finger = f;
  e.finger_state = s;
  return e;
}

GestureExpr GestureExpr::pair_is(FingerPair p, PairState s) {
  GestureExpr e;
  e.kind = Kind::PairIs;
  e.pair = p;
  e.pair_state = s;
  return e;
}

GestureExpr GestureExpr::euler_in(EulerAxis a, double lo_rad, double hi_rad) {
  GestureExpr e;
  e.kind = Kind::EulerIn;
  e.axis = a;
  e.lo_rad = lo_rad;
  e.hi_rad = hi_rad;
  return e;
}

StateThresholds default_thresholds() {
  StateThresholds th;
  th.straight_max = {deg(35), deg(30), deg(30), deg(30), deg(30)};
  th.bent_min = {deg(70), deg(90), deg(90), deg(90), deg(90)};
  th.crossed_max = {deg(8), deg(8), deg(8), deg(8)};
  th.apart_min = {deg(15), deg(15), deg(15), deg(15)};
  return th;
}

GestureConfig default_gesture_config() {
  using enum Finger;
  GestureConfig cfg;
  cfg.thresholds = default_thresholds();

  cfg.gestures.push_back(
      {"OpenPalm",
       E::all({straight(Thumb), straight(Index), straight(Middle), straight(Ring), straight(Pinky),
               E::negate(E::pair_is(FingerPair::IndexMiddle, PairState::Crossed)),
               E::negate(E::pair_is(FingerPair::RingPinky, PairState::Crossed))}),
       60});
  cfg.gestures.push_back(
      {"Victory",
       E::all({E::negate(straight(Thumb)), straight(Index), straight(Middle),
               E::pair_is(FingerPair::IndexMiddle, PairState::Apart), bent(Ring), bent(Pinky)}),
       50});
  cfg.gestures.push_back({"ClosedFist",
                          E::all({bent(Thumb), bent(Index), bent(Middle), bent(Ring), bent(Pinky)}), 40});
  cfg.gestures.push_back(
      {"PointingUp",
       E::all({E::negate(straight(Thumb)), straight(Index), bent(Middle), bent(Ring), bent(Pinky),
               E::euler_in(EulerAxis::Yaw, deg(-45), deg(45)), E::euler_in(EulerAxis::Roll, deg(-45), deg(45))}),
       30});
  cfg.gestures.push_back(
      {"ThumbUp",
       E::all({straight(Thumb), bent(Index), bent(Middle), bent(Ring), bent(Pinky),
               E::euler_in(EulerAxis::Yaw, deg(0), deg(90))}),
       20});
  cfg.gestures.push_back(
      {"ThumbDown",
       E::all({straight(Thumb), bent(Index), bent(Middle), bent(Ring), bent(Pinky),
               E::euler_in(EulerAxis::Yaw, deg(-180), deg(-90))}),
       10});
  return cfg;
}

void validate_config(const GestureConfig& cfg) {
  const auto& th = cfg.thresholds;
  const double pi = std::numbers::pi;
  for (int i = 0; i < kNumFingers; ++i) {
    if (!(0 <= th.straight_max[i] && th.straight_max[i] < th.bent_min[i] && th.bent_min[i] <= pi)) {
      throw Error(Errc::BadConfig, "finger thresholds must satisfy 0 <= straight_max < bent_min <= pi for " +
                                       std::string(finger_name(static_cast<Finger>(i))));
    }
  }
  for (int i = 0; i < kNumPairs; ++i) {
    if (!(0 <= th.crossed_max[i] && th.crossed_max[i] < th.apart_min[i] && th.apart_min[i] <= pi)) {
      throw Error(Errc::BadConfig, "pair thresholds must satisfy 0 <= crossed_max < apart_min <= pi for " +
                                       std::string(pair_name(static_cast<FingerPair>(i))));
    }
  }
  std::set<std::string> names;
  std::set<int> priorities;
  for (const auto& g : cfg.gestures) {
    if (g.name == kNegativeLabel) throw Error(Errc::UnknownReference, "'Negative' is reserved");
    if (!names.insert(g.name).second) throw Error(Errc::UnknownReference, "duplicate gesture name " + g.name);
    if (!priorities.insert(g.priority).second) {
      throw Error(Errc::BadConfig, "gesture priorities must be distinct, " + g.name + " repeats " +
                                       std::to_string(g.priority));
    }
  }
}

HandStates discretize(const FeatureVectord& fv, const StateThresholds& th) {
  HandStates s;
  for (int i = 0; i < kNumFingers; ++i) {
    const double a = fv.finger_angles[i];
    s.fingers[i] = a <= th.straight_max[i] ? FingerState::FullyStraight
                   : a >= th.bent_min[i]   ? FingerState::FullyBent
                                           : FingerState::Neither;
  }
  for (int i = 0; i < kNumPairs; ++i) {
    const double a = fv.pair_angles[i];
    s.pairs[i] = a <= th.crossed_max[i] ? PairState::Crossed
                 : a >= th.apart_min[i] ? PairState::Apart
                                        : PairState::Neither;
  }
  return s;
}

bool angle_in_interval(double angle, double lo_rad, double hi_rad) {
  const double two_pi = 2 * std::numbers::pi;
  auto ccw = [two_pi](double from, double to) {
    double d = std::fmod(to - from, two_pi);
    if (d < 0) d += two_pi;
    return d;
  };
  return ccw(lo_rad, angle) < ccw(lo_rad, hi_rad);
}

bool evaluate(const GestureExpr& expr, const HandStates& states, const EulerAnglesd& euler) {
  using K = GestureExpr::Kind;
  switch (expr.kind) {
    case K::All:
      for (const auto& c : expr.children) {
        if (!evaluate(c, states, euler)) return false;
      }
      return true;
    case K::Any:
      for (const auto& c : expr.children) {
        if (evaluate(c, states, euler)) return true;
      }
      return false;
    case K::Not:
      return !evaluate(expr.children.at(0), states, euler);
    case K::FingerIs:
      return states.fingers[finger_ordinal(expr.finger)] == expr.finger_state;
    case K::PairIs:
      return states.pairs[pair_ordinal(expr.pair)] == expr.pair_state;
    case K::EulerIn: {
      const double a = expr.axis == EulerAxis::Yaw ? euler.yaw : expr.axis == EulerAxis::Pitch ? euler.pitch : euler.roll;
      return angle_in_interval(a, expr.lo_rad, expr.hi_rad);
    }
  }
  return false;
}

std::string classify_heuristic(const FeatureVectord& fv, const GestureConfig& cfg) {
  const HandStates states = discretize(fv, cfg.thresholds);
  const GestureDefinition* best = nullptr;
  for (const auto& g : cfg.gestures) {
    if ((best == nullptr || g.priority > best->priority) && evaluate(g, states, fv.euler)) best = &g;
  }
  return best ? best->name : std::string(kNegativeLabel);
}

}  // namespace hgr
