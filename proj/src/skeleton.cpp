#include "hgr/skeleton.hpp"

#include <cmath>
#include <string>

namespace hgr {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MalformedFrame: return "MalformedFrame";
    case Errc::Missing3D: return "Missing3D";
    case Errc::UnknownReference: return "UnknownReference";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::SingleClassDataset: return "SingleClassDataset";
    case Errc::EmptyNegatives: return "EmptyNegatives";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case Errc::OutOfBox: return "OutOfBox";
    case Errc::BadConfig: return "BadConfig";
    case Errc::DegenerateRotation: return "DegenerateRotation";
    case Errc::DegenerateScale: return "DegenerateScale";
    case Errc::DegeneratePalm: return "DegeneratePalm";
    case Errc::ZeroSegment: return "ZeroSegment";
    case Errc::BehindCamera: return "BehindCamera";
    case Errc::DivergedFit: return "DivergedFit";
  }
  return "Unknown";
}

namespace {

constexpr std::array<std::string_view, kNumFingers> kFingerNames = {"thumb", "index", "middle", "ring",
                                                                     "pinky"};
constexpr std::array<std::string_view, kNumPairs> kPairNames = {"thumb_index", "index_middle",
                                                                "middle_ring", "ring_pinky"};

[[noreturn]] void malformed(const std::string& msg) { throw Error(Errc::MalformedFrame, msg); }

void check_dims(int w, int h) {
  if (w <= 0 || h <= 0) {
    malformed("image dimensions must be positive, got " + std::to_string(w) + "x" + std::to_string(h));
  }
}

void check_score(double score) {
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    malformed("score must lie in [0,1], got " + std::to_string(score));
  }
}

}  // namespace

std::string_view finger_name(Finger f) { return kFingerNames[finger_ordinal(f)]; }
std::string_view pair_name(FingerPair p) { return kPairNames[pair_ordinal(p)]; }

std::optional<Finger> finger_from_name(std::string_view name) {
  for (int i = 0; i < kNumFingers; ++i) {
    if (kFingerNames[i] == name) return static_cast<Finger>(i);
  }
  return std::nullopt;
}

std::optional<FingerPair> pair_from_name(std::string_view name) {
  for (int i = 0; i < kNumPairs; ++i) {
    if (kPairNames[i] == name) return static_cast<FingerPair>(i);
  }
  return std::nullopt;
}

std::string_view handedness_name(Handedness h) { return h == Handedness::Left ? "Left" : "Right"; }

std::optional<Handedness> handedness_from_name(std::string_view name) {
  if (name == "Left") return Handedness::Left;
  if (name == "Right") return Handedness::Right;
  return std::nullopt;
}

HandFrame validate_frame(const RawHandFrame& raw) {
  check_dims(raw.image_w, raw.image_h);
  HandFrame frame;
  frame.timestamp_us = raw.timestamp_us;
  frame.image_w = raw.image_w;
  frame.image_h = raw.image_h;
  if (!raw.hand) return frame;

  const RawHandSkeleton& rh = *raw.hand;
  if (rh.kp2d.size() != kNumKeypoints) {
    malformed("expected 21 kp2d entries, got " + std::to_string(rh.kp2d.size()));
  }
  check_score(rh.score);

  HandSkeleton skel;
  skel.handedness = rh.handedness;
  skel.score = rh.score;
  for (int i = 0; i < kNumKeypoints; ++i) {
    for (int d = 0; d < 2; ++d) {
      const double v = rh.kp2d[i][d];
      if (!std::isfinite(v)) malformed("non-finite kp2d value at keypoint " + std::to_string(i));
      skel.kp2d(d, i) = v;
    }
  }
  if (rh.kp3d) {
    if (rh.kp3d->size() != kNumKeypoints) {
      malformed("expected 21 kp3d entries, got " + std::to_string(rh.kp3d->size()));
    }
    Keypoints3d kp3d;
    for (int i = 0; i < kNumKeypoints; ++i) {
      for (int d = 0; d < 3; ++d) {
        const double v = (*rh.kp3d)[i][d];
        if (!std::isfinite(v)) malformed("non-finite kp3d value at keypoint " + std::to_string(i));
        kp3d(d, i) = v;
      }
    }
    skel.kp3d = kp3d;
  }
  frame.hand = skel;
  return frame;
}

HandFrame validate_frame(const HandFrame& frame) {
  check_dims(frame.image_w, frame.image_h);
  if (frame.hand) {
    check_score(frame.hand->score);
    if (!frame.hand->kp2d.allFinite()) malformed("non-finite kp2d value");
    if (frame.hand->kp3d && !frame.hand->kp3d->allFinite()) malformed("non-finite kp3d value");
  }
  return frame;
}

const Keypoints3d& require_kp3d(const HandSkeleton& skel) {
  if (!skel.kp3d) throw Error(Errc::Missing3D, "skeleton has no 3D keypoints");
  return *skel.kp3d;
}

Eigen::Matrix<double, 3, 5> finger_chain(const HandSkeleton& skel, Finger finger) {
  return finger_chain(require_kp3d(skel), finger);
}

}  // namespace hgr
