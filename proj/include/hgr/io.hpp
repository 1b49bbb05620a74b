#pragma once

// JSON / JSONL encodings of frames, features, configs, models and reports.
// Every document carries a "schema" tag; a tag that is present but different
// from the expected one is rejected.

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hgr/alignment.hpp"
#include "hgr/features.hpp"
#include "hgr/harness.hpp"
#include "hgr/heuristic.hpp"
#include "hgr/lifting.hpp"
#include "hgr/nn.hpp"
#include "hgr/pipeline.hpp"
#include "hgr/skeleton.hpp"

namespace hgr::io {

using Json = nlohmann::ordered_json;

namespace schema {
inline constexpr std::string_view kFrame = "hgr.frame/1";
inline constexpr std::string_view kFeatures = "hgr.features/1";
inline constexpr std::string_view kLabel = "hgr.label/1";
inline constexpr std::string_view kGestures = "hgr.gestures/1";
inline constexpr std::string_view kModel = "hgr.mlp/1";
inline constexpr std::string_view kHandModel = "hgr.hand_model/1";
inline constexpr std::string_view kPipeline = "hgr.pipeline/1";
inline constexpr std::string_view kTrain = "hgr.train/1";
inline constexpr std::string_view kSynth = "hgr.synth/1";
inline constexpr std::string_view kFit = "hgr.fit/1";
inline constexpr std::string_view kReport = "hgr.eval/1";
inline constexpr std::string_view kStreamOutput = "hgr.stream_output/1";
inline constexpr std::string_view kStreamStats = "hgr.stream_stats/1";
}  // namespace schema

inline constexpr int kModelFormatVersion = 1;

// Whole-file and line-oriented readers. Parse errors raise `code`.
Json read_json_file(const std::string& path, Errc code = Errc::BadConfig);
std::vector<Json> read_jsonl(std::istream& in, Errc code = Errc::MalformedFrame);
std::vector<Json> read_jsonl_file(const std::string& path, Errc code = Errc::MalformedFrame);
void write_json_file(const std::string& path, const Json& j);

// {"t_us","w","h","hand":null|{"handedness","score","kp2d","kp3d"|null}}
// plus an optional "label". kp2d in pixels (y down), kp3d in meters (y up).
RawHandFrame raw_frame_from_json(const Json& j);
HandFrame frame_from_json(const Json& j);
Json frame_to_json(const HandFrame& frame, const std::optional<std::string>& label = std::nullopt);

struct LabeledFrame {
  HandFrame frame;
  std::optional<std::string> label;
};

LabeledFrame labeled_frame_from_json(const Json& j);
std::vector<LabeledFrame> read_frames(const std::string& path);

// {"t_us","euler":[yaw,pitch,roll],"fingers":[5],"pairs":[4]} in radians, with
// an optional "alignment":{"center":[x,y],"rotation_rad","scale_px"}.
Json features_to_json(std::int64_t t_us, const FeatureVectord& fv,
                      const std::optional<AlignmentFrame<double>>& alignment = std::nullopt);
FeatureVectord features_from_json(const Json& j);

// Thresholds and euler bounds are written in degrees.
Json gesture_config_to_json(const GestureConfig& cfg);
GestureConfig gesture_config_from_json(const Json& j);
Json expr_to_json(const GestureExpr& e);
GestureExpr expr_from_json(const Json& j);

Json model_to_json(const MlpModel& m);
MlpModel model_from_json(const Json& j);

Json hand_model_to_json(const HandModel& m);
HandModel hand_model_from_json(const Json& j);

Json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);

Json synth_config_to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const Json& j);

Json fit_options_to_json(const FitOptions& o);
FitOptions fit_options_from_json(const Json& j);

struct ClassifierRef {
  enum class Kind { Heuristic, Nn } kind = Kind::Heuristic;
  std::optional<std::string> path;  // gesture config or model; heuristic defaults when absent
};

struct PipelineFile {
  PipelineConfig config;
  ClassifierRef classifier;
};

Json pipeline_to_json(const PipelineFile& p);
PipelineFile pipeline_from_json(const Json& j);

Json report_to_json(const EvalReport& r);
Json frame_output_to_json(const FrameOutput& o);
Json stream_stats_to_json(const PipelineStats& s);

}  // namespace hgr::io
