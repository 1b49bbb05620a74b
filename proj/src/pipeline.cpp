#include "hgr/pipeline.hpp"

#include <cmath>

#include "hgr/features.hpp"

namespace hgr {

std::string_view track_mode_name(TrackMode m) { return m == TrackMode::Tracked ? "Tracked" : "Untracked"; }

GestureClassifier::GestureClassifier(GestureConfig cfg) : impl_(std::move(cfg)) {
  validate_config(std::get<GestureConfig>(impl_));
}

GestureClassifier::GestureClassifier(MlpModel model) : impl_(std::move(model)) {
  validate_model(std::get<MlpModel>(impl_));
}

std::string GestureClassifier::classify(const FeatureVectord& fv) const {
  if (const auto* cfg = std::get_if<GestureConfig>(&impl_)) return classify_heuristic(fv, *cfg);
  return classify_nn(std::get<MlpModel>(impl_), fv);
}

std::string GestureClassifier::classify(const HandSkeleton& hand) const {
  if (!hand.kp3d) return std::string(kNegativeLabel);
  try {
    return classify(feature_vector(*hand.kp3d, hand.handedness));
  } catch (const Error& e) {
    if (!is_numerical(e.code())) throw;
    return std::string(kNegativeLabel);
  }
}

void validate_config(const PipelineConfig& cfg) {
  if (!(cfg.max_detect_hz > 0 && std::isfinite(cfg.max_detect_hz))) {
    throw Error(Errc::BadConfig, "max_detect_hz must be positive");
  }
  if (cfg.track_loss_frames < 1) throw Error(Errc::BadConfig, "track_loss_frames must be >= 1");
  if (!(cfg.min_track_score >= 0 && cfg.min_track_score <= 1)) {
    throw Error(Errc::BadConfig, "min_track_score must lie in [0,1]");
  }
}

FrameOutput step(PipelineState& state, const HandFrame& frame, const PipelineConfig& cfg, const ClassifyFn& classify) {
  const std::int64_t t = frame.timestamp_us;
  if (state.last_timestamp_us && t <= *state.last_timestamp_us) {
    throw Error(Errc::NonMonotonicTimestamp, "timestamp " + std::to_string(t) + " does not follow " +
                                                 std::to_string(*state.last_timestamp_us));
  }
  state.last_timestamp_us = t;
  ++state.stats.frames;
  ++(state.mode == TrackMode::Tracked ? state.stats.tracked_frames : state.stats.untracked_frames);

  FrameOutput out;
  out.timestamp_us = t;
  const bool good_hand = frame.hand && frame.hand->score >= cfg.min_track_score;
  const bool was_tracked = state.mode == TrackMode::Tracked;

  if (state.mode == TrackMode::Untracked) {
    const double period_us = 1e6 / cfg.max_detect_hz;
    if (!state.last_detect_us || static_cast<double>(t - *state.last_detect_us) >= period_us) {
      out.detected = true;
      state.last_detect_us = t;
      ++state.stats.detect_invocations;
      if (good_hand) {
        state.mode = TrackMode::Tracked;
        state.consecutive_misses = 0;
      }
    }
  } else if (!good_hand) {
    if (++state.consecutive_misses >= cfg.track_loss_frames) {
      state.mode = TrackMode::Untracked;
      state.consecutive_misses = 0;
    }
  } else {
    state.consecutive_misses = 0;
  }

  // Tracked frames classify whatever hand is present, including the one on
  // which tracking is lost; untracked frames only after a successful detect.
  if (frame.hand && (was_tracked || (out.detected && good_hand))) {
    out.classified = true;
    out.label = classify(*frame.hand);
    ++state.stats.classify_invocations;
  }
  out.mode = state.mode;
  return out;
}

StreamResult run_stream(const std::vector<HandFrame>& frames, const PipelineConfig& cfg, const ClassifyFn& classify) {
  validate_config(cfg);
  PipelineState state;
  StreamResult r;
  r.outputs.reserve(frames.size());
  for (const auto& f : frames) r.outputs.push_back(step(state, f, cfg, classify));
  r.stats = state.stats;
  return r;
}

}  // namespace hgr
