#pragma once

// Timestamp-driven scheduler: throttled detection while no hand is tracked,
// per-frame classification once one is.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hgr/heuristic.hpp"
#include "hgr/nn.hpp"
#include "hgr/skeleton.hpp"

namespace hgr {

enum class TrackMode { Untracked, Tracked };

std::string_view track_mode_name(TrackMode m);

// Either classifier behind one call. Frames without usable 3D keypoints, or
// whose features are degenerate, classify as Negative.
class GestureClassifier {
 public:
  explicit GestureClassifier(GestureConfig cfg);
  explicit GestureClassifier(MlpModel model);

  std::string classify(const FeatureVectord& fv) const;
  std::string classify(const HandSkeleton& hand) const;

 private:
  std::variant<GestureConfig, MlpModel> impl_;
};

struct PipelineConfig {
  double max_detect_hz = 5.0;
  int track_loss_frames = 3;
  double min_track_score = 0.5;
};

void validate_config(const PipelineConfig& cfg);

struct PipelineStats {
  std::int64_t frames = 0;
  std::int64_t detect_invocations = 0;
  std::int64_t classify_invocations = 0;
  std::int64_t untracked_frames = 0;  // mode on entry to the step
  std::int64_t tracked_frames = 0;

  bool operator==(const PipelineStats&) const = default;
};

struct PipelineState {
  TrackMode mode = TrackMode::Untracked;
  std::optional<std::int64_t> last_detect_us;
  std::optional<std::int64_t> last_timestamp_us;
  int consecutive_misses = 0;
  PipelineStats stats;

  bool operator==(const PipelineState&) const = default;
};

struct FrameOutput {
  std::int64_t timestamp_us = 0;
  TrackMode mode = TrackMode::Untracked;  // after the step
  std::optional<std::string> label;       // nullopt when no classification ran
  bool detected = false;                  // detection stage ran
  bool classified = false;

  bool operator==(const FrameOutput&) const = default;
};

using ClassifyFn = std::function<std::string(const HandSkeleton&)>;

// Throws NonMonotonicTimestamp unless frame.timestamp_us exceeds the previous one.
FrameOutput step(PipelineState& state, const HandFrame& frame, const PipelineConfig& cfg, const ClassifyFn& classify);

struct StreamResult {
  std::vector<FrameOutput> outputs;
  PipelineStats stats;
};

StreamResult run_stream(const std::vector<HandFrame>& frames, const PipelineConfig& cfg, const ClassifyFn& classify);

}  // namespace hgr
