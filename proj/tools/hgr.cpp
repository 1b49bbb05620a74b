// hgr: command-line front end. Exit codes: 0 ok, 2 invalid input or config,
// 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hgr/alignment.hpp"
#include "hgr/features.hpp"
#include "hgr/harness.hpp"
#include "hgr/heuristic.hpp"
#include "hgr/io.hpp"
#include "hgr/lifting.hpp"
#include "hgr/nn.hpp"
#include "hgr/pipeline.hpp"

namespace fs = std::filesystem;
using hgr::io::Json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
};

// Writes to a file, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw hgr::Error(hgr::Errc::BadConfig, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void line(const Json& j) { stream() << j.dump() << '\n'; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

// A dataset record is either a frame (has "hand") or a feature record.
std::optional<hgr::FeatureVectord> record_features(const Json& j) {
  if (j.contains("hand")) {
    const hgr::HandFrame f = hgr::io::frame_from_json(j);
    if (!f.hand) return std::nullopt;
    return hgr::feature_vector(*f.hand);
  }
  return hgr::io::features_from_json(j);
}

std::int64_t record_time(const Json& j) { return j.value("t_us", std::int64_t{0}); }

std::optional<std::string> record_label(const Json& j) {
  auto it = j.find("label");
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw hgr::Error(hgr::Errc::UnknownLabel, "label must be a string");
  return it->get<std::string>();
}

std::vector<hgr::LabeledExample> read_examples(const std::string& path) {
  std::vector<hgr::LabeledExample> out;
  int n = 0;
  for (const auto& j : hgr::io::read_jsonl_file(path)) {
    ++n;
    const auto label = record_label(j);
    if (!label) throw hgr::Error(hgr::Errc::UnknownLabel, path + " record " + std::to_string(n) + " has no label");
    const auto fv = record_features(j);
    if (!fv) continue;
    out.push_back({hgr::to_array(*fv), hgr::class_for_label(*label)});
  }
  return out;
}

hgr::GestureClassifier load_classifier(const std::string& model_path, const std::string& gestures_path) {
  if (!model_path.empty()) return hgr::GestureClassifier(hgr::io::model_from_json(hgr::io::read_json_file(model_path)));
  if (!gestures_path.empty()) {
    return hgr::GestureClassifier(hgr::io::gesture_config_from_json(hgr::io::read_json_file(gestures_path)));
  }
  return hgr::GestureClassifier(hgr::default_gesture_config());
}

std::vector<std::string> expand_labels(const std::vector<std::string>& requested) {
  std::vector<std::string> out;
  for (const auto& r : requested) {
    if (r == "all") {
      out.insert(out.end(), hgr::kGestureLabels.begin(), hgr::kGestureLabels.end());
    } else if (r == "targets") {
      for (auto& l : hgr::target_gesture_labels()) out.push_back(l);
    } else if (r == "negatives") {
      for (auto& l : hgr::negative_gesture_labels()) out.push_back(l);
    } else {
      if (!hgr::is_gesture_label(r)) throw hgr::Error(hgr::Errc::UnknownLabel, "unknown label '" + r + "'");
      out.push_back(r);
    }
  }
  return out;
}

// ---- subcommands ----

void cmd_synth(const Globals& g, const std::vector<std::string>& labels, int count, bool frontal,
               const std::string& out_path) {
  hgr::SynthConfig cfg;
  if (!g.config.empty()) cfg = hgr::io::synth_config_from_json(hgr::io::read_json_file(g.config));
  if (g.seed) cfg.seed = *g.seed;
  if (frontal) cfg.frontal = true;
  if (count < 0) throw hgr::Error(hgr::Errc::BadConfig, "--count must be >= 0");
  Output out(out_path);
  for (const auto& s : hgr::synth_corpus(expand_labels(labels), count, cfg)) out.line(hgr::io::frame_to_json(s.frame, s.label));
}

void cmd_features(const std::string& frames_path, bool with_alignment, const std::string& out_path) {
  Output out(out_path);
  for (const auto& lf : hgr::io::read_frames(frames_path)) {
    if (!lf.frame.hand) continue;
    const auto& hand = *lf.frame.hand;
    std::optional<hgr::AlignmentFrame<double>> align;
    if (with_alignment) align = hgr::alignment_frame(hand.kp2d);
    Json j = hgr::io::features_to_json(lf.frame.timestamp_us, hgr::feature_vector(hand), align);
    if (lf.label) j["label"] = *lf.label;
    out.line(j);
  }
}

void cmd_classify(const Globals& g, const std::string& in_path, const std::string& model_path,
                  const std::string& out_path) {
  const auto classifier = load_classifier(model_path, g.config);
  Output out(out_path);
  for (const auto& j : hgr::io::read_jsonl_file(in_path)) {
    const auto fv = record_features(j);
    Json o = {{"schema", hgr::io::schema::kLabel}, {"t_us", record_time(j)}};
    o["label"] = fv ? Json(classifier.classify(*fv)) : Json(nullptr);
    out.line(o);
  }
}

void cmd_train(const Globals& g, const std::string& data, const std::string& out_path) {
  hgr::TrainConfig cfg;
  if (!g.config.empty()) cfg = hgr::io::train_config_from_json(hgr::io::read_json_file(g.config));
  if (g.seed) cfg.seed = *g.seed;
  const hgr::MlpModel model = hgr::train(read_examples(data), cfg);
  Output out(out_path);
  out.stream() << hgr::io::model_to_json(model).dump(1) << '\n';
}

void cmd_calibrate(const std::string& model_path, const std::string& negatives, double fpr, std::string out_path) {
  hgr::MlpModel model = hgr::io::model_from_json(hgr::io::read_json_file(model_path));
  std::vector<hgr::LabeledExample> neg;
  for (const auto& ex : read_examples(negatives)) {
    if (ex.label == hgr::kNegativeClass) neg.push_back(ex);
  }
  model.tau = hgr::calibrate_threshold(model, neg, fpr);
  if (out_path.empty()) out_path = model_path;
  Output out(out_path);
  out.stream() << hgr::io::model_to_json(model).dump(1) << '\n';
  std::cerr << "tau = " << model.tau << " from " << neg.size() << " negatives\n";
}

void cmd_lift(const Globals& g, const std::string& frames_path, const std::string& model_path, bool strict,
              const std::string& out_path) {
  const hgr::HandModel model =
      model_path.empty() ? hgr::default_hand_model() : hgr::io::hand_model_from_json(hgr::io::read_json_file(model_path));
  hgr::FitOptions opts;
  if (!g.config.empty()) opts = hgr::io::fit_options_from_json(hgr::io::read_json_file(g.config));
  Output out(out_path);
  int failed = 0;
  for (auto lf : hgr::io::read_frames(frames_path)) {
    if (lf.frame.hand) {
      auto& hand = *lf.frame.hand;
      const auto k = hgr::default_intrinsics(lf.frame.image_w, lf.frame.image_h);
      try {
        const auto init = hgr::initial_guess(hand.kp2d, model, k, hand.handedness);
        const auto fit = hgr::fit_pose(hand.kp2d, model, k, init, opts);
        hand.kp3d = hgr::normalize_world(hgr::camera_to_world(fit.points));
      } catch (const hgr::Error& e) {
        if (strict || !hgr::is_numerical(e.code())) throw;
        std::cerr << "t_us " << lf.frame.timestamp_us << ": " << e.what() << '\n';
        hand.kp3d.reset();
        ++failed;
      }
    }
    out.line(hgr::io::frame_to_json(lf.frame, lf.label));
  }
  if (failed > 0) std::cerr << failed << " frame(s) left without kp3d\n";
}

void cmd_stream(const std::string& frames_path, const std::string& pipeline_path, const std::string& out_path,
                const std::string& stats_path) {
  hgr::io::PipelineFile pf;
  fs::path base = ".";
  if (!pipeline_path.empty()) {
    pf = hgr::io::pipeline_from_json(hgr::io::read_json_file(pipeline_path));
    base = fs::path(pipeline_path).parent_path();
  }
  auto resolve = [&](const std::optional<std::string>& p) {
    if (!p) return std::string();
    const fs::path q(*p);
    return (q.is_absolute() ? q : base / q).string();
  };
  const bool nn = pf.classifier.kind == hgr::io::ClassifierRef::Kind::Nn;
  const auto classifier = load_classifier(nn ? resolve(pf.classifier.path) : "", nn ? "" : resolve(pf.classifier.path));

  std::vector<hgr::HandFrame> frames;
  for (auto& lf : hgr::io::read_frames(frames_path)) frames.push_back(std::move(lf.frame));
  const auto result = hgr::run_stream(frames, pf.config, [&](const hgr::HandSkeleton& h) { return classifier.classify(h); });

  Output out(out_path);
  for (const auto& o : result.outputs) out.line(hgr::io::frame_output_to_json(o));
  if (!stats_path.empty()) hgr::io::write_json_file(stats_path, hgr::io::stream_stats_to_json(result.stats));
}

void cmd_eval(const Globals& g, const std::string& data, const std::string& predictions, const std::string& model_path,
              const std::string& lifted, const std::string& out_path) {
  const auto records = hgr::io::read_jsonl_file(data);
  std::vector<std::string> truths, preds;
  if (!predictions.empty()) {
    const auto pred_records = hgr::io::read_jsonl_file(predictions);
    if (pred_records.size() != records.size()) {
      throw hgr::Error(hgr::Errc::LengthMismatch, std::to_string(pred_records.size()) + " predictions for " +
                                                      std::to_string(records.size()) + " records");
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto t = record_label(records[i]);
      const auto p = record_label(pred_records[i]);
      if (!t) throw hgr::Error(hgr::Errc::UnknownLabel, "record " + std::to_string(i + 1) + " has no label");
      truths.push_back(*t);
      preds.push_back(p ? *p : std::string(hgr::kNegativeLabel));
    }
  } else {
    const auto classifier = load_classifier(model_path, g.config);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto t = record_label(records[i]);
      if (!t) throw hgr::Error(hgr::Errc::UnknownLabel, "record " + std::to_string(i + 1) + " has no label");
      const auto fv = record_features(records[i]);
      truths.push_back(*t);
      preds.push_back(fv ? classifier.classify(*fv) : std::string(hgr::kNegativeLabel));
    }
  }
  hgr::EvalReport report = hgr::eval_classifier(preds, truths);

  if (!lifted.empty()) {
    const auto gt = hgr::io::read_frames(data);
    const auto est = hgr::io::read_frames(lifted);
    if (gt.size() != est.size()) throw hgr::Error(hgr::Errc::LengthMismatch, "lifted file has a different length");
    double sum = 0;
    int n = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const auto& a = gt[i].frame.hand;
      const auto& b = est[i].frame.hand;
      if (!a || !b || !a->kp3d || !b->kp3d) continue;
      sum += hgr::keypoint_error(*b->kp3d, *a->kp3d);
      ++n;
    }
    if (n > 0) report.keypoint_error_cm = sum / n;
  }
  Output out(out_path);
  out.stream() << hgr::io::report_to_json(report).dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hand gesture recognition from 21-keypoint skeletons"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed (overrides the config)");
  app.add_option("--config", g.config, "Subcommand config: synth, train, fit options, or gesture definitions");

  std::string frames, out = "-", model, data, stats, pipeline, negatives, predictions, lifted;
  std::vector<std::string> labels{"all"};
  int count = 100;
  bool frontal = false, alignment = false, strict = false;
  double fpr = 0.01;

  auto* synth = app.add_subcommand("synth", "Generate labelled synthetic frames (JSONL)");
  synth->add_option("--labels", labels, "Labels, or all / targets / negatives")->delimiter(',');
  synth->add_option("--count", count, "Samples per label");
  synth->add_flag("--frontal", frontal, "Fingers toward the camera, any in-plane angle");
  synth->add_option("--out", out);

  auto* features = app.add_subcommand("features", "Compute the 12 features per frame");
  features->add_option("--frames", frames)->required();
  features->add_flag("--alignment", alignment, "Include the 2D alignment frame");
  features->add_option("--out", out);

  auto* classify = app.add_subcommand("classify", "Label feature records or frames");
  classify->add_option("--features", data, "Feature records or frames (JSONL)")->required();
  classify->add_option("--model", model, "Trained model; heuristic rules otherwise");
  classify->add_option("--out", out);

  auto* train = app.add_subcommand("train", "Train the MLP classifier");
  train->add_option("--data", data, "Labelled frames or feature records (JSONL)")->required();
  train->add_option("--out", out)->required();

  auto* calibrate = app.add_subcommand("calibrate", "Set the acceptance threshold for a target FPR");
  calibrate->add_option("--model", model)->required();
  calibrate->add_option("--negatives", negatives, "Records labelled as non-target gestures")->required();
  calibrate->add_option("--fpr", fpr, "Target false-positive rate");
  std::string calibrated_out;
  calibrate->add_option("--out", calibrated_out, "Defaults to rewriting --model");

  auto* lift = app.add_subcommand("lift", "Fit 3D keypoints to 2D keypoints");
  lift->add_option("--frames", frames)->required();
  lift->add_option("--model", model, "Hand model JSON");
  lift->add_flag("--strict", strict, "Fail on the first frame that does not fit");
  lift->add_option("--out", out);

  auto* stream = app.add_subcommand("stream", "Run the flow-controlled pipeline over a frame stream");
  stream->add_option("--frames", frames)->required();
  stream->add_option("--pipeline", pipeline, "Pipeline config JSON");
  stream->add_option("--out", out);
  stream->add_option("--stats", stats);

  auto* eval = app.add_subcommand("eval", "Evaluate a classifier on labelled data");
  eval->add_option("--data", data, "Labelled frames or feature records")->required();
  eval->add_option("--predictions", predictions, "Precomputed labels aligned with --data");
  eval->add_option("--model", model, "Trained model; heuristic rules otherwise");
  eval->add_option("--lifted", lifted, "Lifted frames aligned with --data, for keypoint error");
  eval->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) cmd_synth(g, labels, count, frontal, out);
    if (*features) cmd_features(frames, alignment, out);
    if (*classify) cmd_classify(g, data, model, out);
    if (*train) cmd_train(g, data, out);
    if (*calibrate) cmd_calibrate(model, negatives, fpr, calibrated_out);
    if (*lift) cmd_lift(g, frames, model, strict, out);
    if (*stream) cmd_stream(frames, pipeline, out, stats);
    if (*eval) cmd_eval(g, data, predictions, model, lifted, out);
  } catch (const hgr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hgr::is_numerical(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
