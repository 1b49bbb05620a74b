#include "hgr/io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hgr::io {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Degrees for config files, rounded so 30 deg is written as 30.
double to_deg(double rad) { return std::round(rad / kDeg * 1e9) / 1e9; }

// Runs f, turning JSON access errors into Error(code).
template <typename F>
auto guarded(Errc code, std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(code, std::string(what) + ": " + e.what());
  }
}

void check_schema(const Json& j, std::string_view expected, Errc code) {
  if (!j.is_object()) throw Error(code, "expected a JSON object for " + std::string(expected));
  if (auto it = j.find("schema"); it != j.end() && !(it->is_string() && it->get<std::string>() == expected)) {
    throw Error(code, "schema " + it->dump() + " where '" + std::string(expected) + "' was expected");
  }
}

template <typename T>
T value_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

template <std::size_t N>
std::array<double, N> fixed_array(const Json& j, Errc code, std::string_view what) {
  if (!j.is_array() || j.size() != N) {
    throw Error(code, std::string(what) + " must be an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> a{};
  for (std::size_t i = 0; i < N; ++i) a[i] = j[i].get<double>();
  return a;
}

Json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <std::size_t N>
Json array_json(const std::array<double, N>& a, double scale = 1.0) {
  Json out = Json::array();
  for (double v : a) out.push_back(v * scale);
  return out;
}

}  // namespace

Json read_json_file(const std::string& path, Errc code) {
  std::ifstream in(path);
  if (!in) throw Error(code, "cannot open " + path);
  return guarded(code, path, [&] { return Json::parse(in); });
}

std::vector<Json> read_jsonl(std::istream& in, Errc code) {
  std::vector<Json> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(guarded(code, "line " + std::to_string(n), [&] { return Json::parse(line); }));
  }
  return out;
}

std::vector<Json> read_jsonl_file(const std::string& path, Errc code) {
  std::ifstream in(path);
  if (!in) throw Error(code, "cannot open " + path);
  return read_jsonl(in, code);
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::BadConfig, "cannot write " + path);
  out << j.dump(2) << '\n';
}

// ---- frames ----

RawHandFrame raw_frame_from_json(const Json& j) {
  check_schema(j, schema::kFrame, Errc::MalformedFrame);
  return guarded(Errc::MalformedFrame, "frame", [&] {
    RawHandFrame f;
    f.timestamp_us = j.at("t_us").get<std::int64_t>();
    f.image_w = j.at("w").get<int>();
    f.image_h = j.at("h").get<int>();
    const Json& h = j.at("hand");
    if (h.is_null()) return f;
    RawHandSkeleton s;
    const auto name = h.at("handedness").get<std::string>();
    const auto hd = handedness_from_name(name);
    if (!hd) throw Error(Errc::MalformedFrame, "handedness must be Left or Right, got '" + name + "'");
    s.handedness = *hd;
    s.score = h.at("score").get<double>();
    for (const auto& p : h.at("kp2d")) s.kp2d.push_back(fixed_array<2>(p, Errc::MalformedFrame, "kp2d entry"));
    if (auto it = h.find("kp3d"); it != h.end() && !it->is_null()) {
      s.kp3d.emplace();
      for (const auto& p : *it) s.kp3d->push_back(fixed_array<3>(p, Errc::MalformedFrame, "kp3d entry"));
    }
    f.hand = std::move(s);
    return f;
  });
}

HandFrame frame_from_json(const Json& j) { return validate_frame(raw_frame_from_json(j)); }

Json frame_to_json(const HandFrame& frame, const std::optional<std::string>& label) {
  Json j;
  j["schema"] = schema::kFrame;
  j["t_us"] = frame.timestamp_us;
  j["w"] = frame.image_w;
  j["h"] = frame.image_h;
  if (!frame.hand) {
    j["hand"] = nullptr;
  } else {
    const auto& s = *frame.hand;
    Json h;
    h["handedness"] = handedness_name(s.handedness);
    h["score"] = s.score;
    Json kp2 = Json::array();
    for (int i = 0; i < kNumKeypoints; ++i) kp2.push_back({s.kp2d(0, i), s.kp2d(1, i)});
    h["kp2d"] = std::move(kp2);
    if (s.kp3d) {
      Json kp3 = Json::array();
      for (int i = 0; i < kNumKeypoints; ++i) kp3.push_back({(*s.kp3d)(0, i), (*s.kp3d)(1, i), (*s.kp3d)(2, i)});
      h["kp3d"] = std::move(kp3);
    } else {
      h["kp3d"] = nullptr;
    }
    j["hand"] = std::move(h);
  }
  if (label) j["label"] = *label;
  return j;
}

LabeledFrame labeled_frame_from_json(const Json& j) {
  LabeledFrame lf;
  lf.frame = frame_from_json(j);
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    lf.label = guarded(Errc::MalformedFrame, "label", [&] { return it->get<std::string>(); });
  }
  return lf;
}

std::vector<LabeledFrame> read_frames(const std::string& path) {
  std::vector<LabeledFrame> out;
  int line = 0;
  for (const auto& j : read_jsonl_file(path)) {
    ++line;
    try {
      out.push_back(labeled_frame_from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), path + " record " + std::to_string(line) + ": " + e.message());
    }
  }
  return out;
}

// ---- features ----

Json features_to_json(std::int64_t t_us, const FeatureVectord& fv,
                      const std::optional<AlignmentFrame<double>>& alignment) {
  Json j;
  j["schema"] = schema::kFeatures;
  j["t_us"] = t_us;
  j["euler"] = {fv.euler.yaw, fv.euler.pitch, fv.euler.roll};
  j["fingers"] = array_json(fv.finger_angles);
  j["pairs"] = array_json(fv.pair_angles);
  if (alignment) {
    j["alignment"] = {{"center", {alignment->center.x(), alignment->center.y()}},
                      {"rotation_rad", alignment->rotation_rad},
                      {"scale_px", alignment->scale_px}};
  }
  return j;
}

FeatureVectord features_from_json(const Json& j) {
  check_schema(j, schema::kFeatures, Errc::ShapeMismatch);
  return guarded(Errc::ShapeMismatch, "features", [&] {
    FeatureVectord fv;
    const auto e = fixed_array<3>(j.at("euler"), Errc::ShapeMismatch, "euler");
    fv.euler.yaw = e[0];
    fv.euler.pitch = e[1];
    fv.euler.roll = e[2];
    fv.finger_angles = fixed_array<kNumFingers>(j.at("fingers"), Errc::ShapeMismatch, "fingers");
    fv.pair_angles = fixed_array<kNumPairs>(j.at("pairs"), Errc::ShapeMismatch, "pairs");
    return fv;
  });
}

// ---- gesture config ----

namespace {

template <typename Enum, std::size_t N>
Enum enum_from_name(const std::string& name, const std::array<Enum, N>& values, std::string_view (*namer)(Enum),
                    std::string_view what) {
  for (Enum v : values) {
    if (namer(v) == name) return v;
  }
  throw Error(Errc::UnknownReference, "unknown " + std::string(what) + " '" + name + "'");
}

constexpr std::array kFingerStates = {FingerState::FullyStraight, FingerState::FullyBent, FingerState::Neither};
constexpr std::array kPairStates = {PairState::Crossed, PairState::Apart, PairState::Neither};
constexpr std::array kAxes = {EulerAxis::Yaw, EulerAxis::Pitch, EulerAxis::Roll};

std::string_view finger_name_fn(Finger f) { return finger_name(f); }
std::string_view pair_name_fn(FingerPair p) { return pair_name(p); }

template <std::size_t N, typename Key>
Json per_key_deg(const std::array<double, N>& values, const std::array<Key, N>& keys,
                 std::string_view (*namer)(Key)) {
  Json j = Json::object();
  for (std::size_t i = 0; i < N; ++i) j[std::string(namer(keys[i]))] = to_deg(values[i]);
  return j;
}

// Either one number for all entries or an object keyed by finger/pair name.
template <std::size_t N, typename Key>
std::array<double, N> per_key_rad(const Json& j, const std::array<Key, N>& keys, std::string_view (*namer)(Key),
                                  std::string_view what) {
  std::array<double, N> out{};
  if (j.is_number()) {
    out.fill(j.get<double>() * kDeg);
    return out;
  }
  if (!j.is_object()) throw Error(Errc::BadConfig, std::string(what) + " must be a number or an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    for (std::size_t i = 0; i < N; ++i) found |= namer(keys[i]) == it.key();
    if (!found) throw Error(Errc::UnknownReference, std::string(what) + " names unknown key '" + it.key() + "'");
  }
  for (std::size_t i = 0; i < N; ++i) {
    const std::string key(namer(keys[i]));
    if (!j.contains(key)) throw Error(Errc::BadConfig, std::string(what) + " is missing '" + key + "'");
    out[i] = j.at(key).get<double>() * kDeg;
  }
  return out;
}

}  // namespace

Json expr_to_json(const GestureExpr& e) {
  using K = GestureExpr::Kind;
  switch (e.kind) {
    case K::All:
    case K::Any: {
      Json children = Json::array();
      for (const auto& c : e.children) children.push_back(expr_to_json(c));
      return {{e.kind == K::All ? "all" : "any", std::move(children)}};
    }
    case K::Not:
      return {{"not", expr_to_json(e.children.at(0))}};
    case K::FingerIs:
      return {{"finger", finger_name(e.finger)}, {"state", finger_state_name(e.finger_state)}};
    case K::PairIs:
      return {{"pair", pair_name(e.pair)}, {"state", pair_state_name(e.pair_state)}};
    case K::EulerIn:
      return {{"euler", euler_axis_name(e.axis)}, {"min_deg", to_deg(e.lo_rad)}, {"max_deg", to_deg(e.hi_rad)}};
  }
  return {};
}

GestureExpr expr_from_json(const Json& j) {
  if (!j.is_object() || j.empty()) throw Error(Errc::BadConfig, "gesture expression must be a non-empty object");
  if (j.contains("all") || j.contains("any")) {
    const bool all = j.contains("all");
    const Json& list = j.at(all ? "all" : "any");
    if (!list.is_array()) throw Error(Errc::BadConfig, "'all'/'any' take an array");
    std::vector<GestureExpr> children;
    for (const auto& c : list) children.push_back(expr_from_json(c));
    return all ? GestureExpr::all(std::move(children)) : GestureExpr::any(std::move(children));
  }
  if (j.contains("not")) return GestureExpr::negate(expr_from_json(j.at("not")));
  if (j.contains("finger")) {
    const auto name = j.at("finger").get<std::string>();
    const auto f = finger_from_name(name);
    if (!f) throw Error(Errc::UnknownReference, "unknown finger '" + name + "'");
    return GestureExpr::finger_is(
        *f, enum_from_name(j.at("state").get<std::string>(), kFingerStates, finger_state_name, "finger state"));
  }
  if (j.contains("pair")) {
    const auto name = j.at("pair").get<std::string>();
    const auto p = pair_from_name(name);
    if (!p) throw Error(Errc::UnknownReference, "unknown finger pair '" + name + "'");
    return GestureExpr::pair_is(
        *p, enum_from_name(j.at("state").get<std::string>(), kPairStates, pair_state_name, "pair state"));
  }
  if (j.contains("euler")) {
    const EulerAxis axis = enum_from_name(j.at("euler").get<std::string>(), kAxes, euler_axis_name, "euler axis");
    return GestureExpr::euler_in(axis, j.at("min_deg").get<double>() * kDeg, j.at("max_deg").get<double>() * kDeg);
  }
  throw Error(Errc::UnknownReference, "unrecognised gesture expression " + j.dump());
}

Json gesture_config_to_json(const GestureConfig& cfg) {
  const auto& th = cfg.thresholds;
  Json j;
  j["schema"] = schema::kGestures;
  j["thresholds"] = {{"straight_max_deg", per_key_deg(th.straight_max, kAllFingers, finger_name_fn)},
                     {"bent_min_deg", per_key_deg(th.bent_min, kAllFingers, finger_name_fn)},
                     {"crossed_max_deg", per_key_deg(th.crossed_max, kAllPairs, pair_name_fn)},
                     {"apart_min_deg", per_key_deg(th.apart_min, kAllPairs, pair_name_fn)}};
  Json gestures = Json::array();
  for (const auto& g : cfg.gestures) {
    gestures.push_back({{"name", g.name}, {"priority", g.priority}, {"expr", expr_to_json(g.expr)}});
  }
  j["gestures"] = std::move(gestures);
  return j;
}

GestureConfig gesture_config_from_json(const Json& j) {
  check_schema(j, schema::kGestures, Errc::BadConfig);
  GestureConfig cfg = guarded(Errc::BadConfig, "gesture config", [&] {
    GestureConfig c;
    const Json& th = j.at("thresholds");
    c.thresholds.straight_max = per_key_rad(th.at("straight_max_deg"), kAllFingers, finger_name_fn, "straight_max_deg");
    c.thresholds.bent_min = per_key_rad(th.at("bent_min_deg"), kAllFingers, finger_name_fn, "bent_min_deg");
    c.thresholds.crossed_max = per_key_rad(th.at("crossed_max_deg"), kAllPairs, pair_name_fn, "crossed_max_deg");
    c.thresholds.apart_min = per_key_rad(th.at("apart_min_deg"), kAllPairs, pair_name_fn, "apart_min_deg");
    for (const auto& g : j.at("gestures")) {
      c.gestures.push_back({g.at("name").get<std::string>(), expr_from_json(g.at("expr")), g.at("priority").get<int>()});
    }
    return c;
  });
  validate_config(cfg);
  return cfg;
}

// ---- MLP model ----

Json model_to_json(const MlpModel& m) {
  Json j;
  j["schema"] = schema::kModel;
  j["format_version"] = kModelFormatVersion;
  j["classes"] = kClassNames;
  j["activation"] = "relu";
  j["output"] = "softmax";
  Json layers = Json::array();
  for (const auto& l : m.layers) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) rows.push_back(vec_json(l.weights.row(r).transpose()));
    layers.push_back({{"in", l.weights.cols()}, {"out", l.weights.rows()}, {"weights", rows}, {"bias", vec_json(l.bias)}});
  }
  j["layers"] = std::move(layers);
  j["feat_mean"] = vec_json(m.feat_mean);
  j["feat_std"] = vec_json(m.feat_std);
  j["tau"] = m.tau;
  j["history"] = {{"train_loss", m.train_loss}, {"val_loss", m.val_loss}};
  return j;
}

MlpModel model_from_json(const Json& j) {
  check_schema(j, schema::kModel, Errc::ShapeMismatch);
  MlpModel m = guarded(Errc::ShapeMismatch, "model", [&] {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(Errc::ShapeMismatch, "unsupported model format_version " + j.at("format_version").dump());
    }
    if (j.contains("classes") && j.at("classes") != Json(kClassNames)) {
      throw Error(Errc::ShapeMismatch, "model classes differ from " + Json(kClassNames).dump());
    }
    MlpModel out;
    for (const auto& l : j.at("layers")) {
      const auto& rows = l.at("weights");
      const auto n_out = static_cast<Eigen::Index>(rows.size());
      const auto n_in = n_out > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
      DenseLayer d{Eigen::MatrixXd(n_out, n_in), Eigen::VectorXd(static_cast<Eigen::Index>(l.at("bias").size()))};
      for (Eigen::Index r = 0; r < n_out; ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != n_in) throw Error(Errc::ShapeMismatch, "ragged weight rows");
        for (Eigen::Index c = 0; c < n_in; ++c) d.weights(r, c) = rows[r][c].get<double>();
      }
      for (Eigen::Index r = 0; r < d.bias.size(); ++r) d.bias[r] = l.at("bias")[r].get<double>();
      out.layers.push_back(std::move(d));
    }
    const auto mean = fixed_array<kNumFeatures>(j.at("feat_mean"), Errc::ShapeMismatch, "feat_mean");
    const auto sd = fixed_array<kNumFeatures>(j.at("feat_std"), Errc::ShapeMismatch, "feat_std");
    for (int i = 0; i < kNumFeatures; ++i) {
      out.feat_mean[i] = mean[i];
      out.feat_std[i] = sd[i];
    }
    out.tau = j.at("tau").get<double>();
    if (auto it = j.find("history"); it != j.end()) {
      out.train_loss = value_or(*it, "train_loss", std::vector<double>{});
      out.val_loss = value_or(*it, "val_loss", std::vector<double>{});
    }
    return out;
  });
  validate_model(m);
  return m;
}

// ---- hand model ----

Json hand_model_to_json(const HandModel& m) {
  Json j;
  j["schema"] = schema::kHandModel;
  j["frame"] = "palm frame: x toward the thumb, y along the fingers, z out of the palm; meters";
  Json bones = Json::array();
  for (int b = 0; b < kNumBones; ++b) {
    const auto [from, to] = bone_endpoints(b);
    bones.push_back({{"from", from}, {"to", to}, {"length_m", m.bone_lengths[b]}});
  }
  j["bones"] = std::move(bones);
  Json dirs = Json::object();
  for (Finger f : kAllFingers) {
    const auto& d = m.base_directions[finger_ordinal(f)];
    dirs[std::string(finger_name(f))] = {d.x(), d.y(), d.z()};
  }
  j["base_directions"] = std::move(dirs);
  return j;
}

HandModel hand_model_from_json(const Json& j) {
  check_schema(j, schema::kHandModel, Errc::BadConfig);
  HandModel m = guarded(Errc::BadConfig, "hand model", [&] {
    HandModel out;
    const Json& bones = j.at("bones");
    if (!bones.is_array() || bones.size() != kNumBones) throw Error(Errc::BadConfig, "expected 20 bones");
    for (int b = 0; b < kNumBones; ++b) {
      const auto [from, to] = bone_endpoints(b);
      if (bones[b].at("from").get<int>() != from || bones[b].at("to").get<int>() != to) {
        throw Error(Errc::BadConfig, "bone " + std::to_string(b) + " must connect " + std::to_string(from) + " -> " +
                                         std::to_string(to));
      }
      out.bone_lengths[b] = bones[b].at("length_m").get<double>();
    }
    for (Finger f : kAllFingers) {
      const auto d = fixed_array<3>(j.at("base_directions").at(std::string(finger_name(f))), Errc::BadConfig,
                                    "base direction");
      out.base_directions[finger_ordinal(f)] = Eigen::Vector3d(d[0], d[1], d[2]);
    }
    return out;
  });
  validate_model(m);
  return m;
}

// ---- training / synthesis / fitting configs ----

Json train_config_to_json(const TrainConfig& c) {
  return {{"schema", schema::kTrain}, {"gamma", c.gamma},
          {"alpha", c.alpha},         {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size}, {"epochs", c.epochs},
          {"seed", c.seed},           {"validation_fraction", c.validation_fraction}};
}

TrainConfig train_config_from_json(const Json& j) {
  check_schema(j, schema::kTrain, Errc::BadConfig);
  TrainConfig c = guarded(Errc::BadConfig, "train config", [&] {
    TrainConfig out;
    out.gamma = value_or(j, "gamma", out.gamma);
    if (auto it = j.find("alpha"); it != j.end()) {
      if (it->is_number()) {
        out.alpha.fill(it->get<double>());
      } else {
        out.alpha = fixed_array<kNumClasses>(*it, Errc::BadConfig, "alpha");
      }
    }
    out.learning_rate = value_or(j, "learning_rate", out.learning_rate);
    out.batch_size = value_or(j, "batch_size", out.batch_size);
    out.epochs = value_or(j, "epochs", out.epochs);
    out.seed = value_or(j, "seed", out.seed);
    out.validation_fraction = value_or(j, "validation_fraction", out.validation_fraction);
    return out;
  });
  validate_config(c);
  return c;
}

Json synth_config_to_json(const SynthConfig& c) {
  Json templates = Json::object();
  for (const auto& [label, variants] : c.templates) {
    Json list = Json::array();
    for (const auto& t : variants) {
      list.push_back({{"joints_deg", t.joints_deg}, {"euler_deg", {t.euler_deg[0], t.euler_deg[1], t.euler_deg[2]}}});
    }
    templates[label] = std::move(list);
  }
  return {{"schema", schema::kSynth},
          {"seed", c.seed},
          {"jitter_deg", c.jitter_deg},
          {"finger_coupling", c.finger_coupling},
          {"rotation_range_deg", c.rotation_range_deg},
          {"frontal", c.frontal},
          {"tz_min", c.tz_min},
          {"tz_max", c.tz_max},
          {"image_w", c.image_w},
          {"image_h", c.image_h},
          {"pixel_noise_px", c.pixel_noise_px},
          {"metric_noise_m", c.metric_noise_m},
          {"left_fraction", c.left_fraction},
          {"score_min", c.score_min},
          {"frame_period_us", c.frame_period_us},
          {"templates", std::move(templates)}};
}

SynthConfig synth_config_from_json(const Json& j) {
  check_schema(j, schema::kSynth, Errc::BadConfig);
  SynthConfig c = guarded(Errc::BadConfig, "synth config", [&] {
    SynthConfig out;
    out.seed = value_or(j, "seed", out.seed);
    out.jitter_deg = value_or(j, "jitter_deg", out.jitter_deg);
    out.finger_coupling = value_or(j, "finger_coupling", out.finger_coupling);
    out.rotation_range_deg = value_or(j, "rotation_range_deg", out.rotation_range_deg);
    out.frontal = value_or(j, "frontal", out.frontal);
    out.tz_min = value_or(j, "tz_min", out.tz_min);
    out.tz_max = value_or(j, "tz_max", out.tz_max);
    out.image_w = value_or(j, "image_w", out.image_w);
    out.image_h = value_or(j, "image_h", out.image_h);
    out.pixel_noise_px = value_or(j, "pixel_noise_px", out.pixel_noise_px);
    out.metric_noise_m = value_or(j, "metric_noise_m", out.metric_noise_m);
    out.left_fraction = value_or(j, "left_fraction", out.left_fraction);
    out.score_min = value_or(j, "score_min", out.score_min);
    out.frame_period_us = value_or(j, "frame_period_us", out.frame_period_us);
    // Listed labels replace the built-in variants; others keep theirs.
    if (auto it = j.find("templates"); it != j.end()) {
      for (auto t = it->begin(); t != it->end(); ++t) {
        std::vector<GestureTemplate> variants;
        for (const auto& v : *t) {
          GestureTemplate g;
          g.joints_deg = fixed_array<kNumJointAngles>(v.at("joints_deg"), Errc::BadConfig, "joints_deg");
          const auto e = fixed_array<3>(v.at("euler_deg"), Errc::BadConfig, "euler_deg");
          g.euler_deg = Eigen::Vector3d(e[0], e[1], e[2]);
          variants.push_back(g);
        }
        out.templates[t.key()] = std::move(variants);
      }
    }
    return out;
  });
  validate_config(c);
  return c;
}

Json fit_options_to_json(const FitOptions& o) {
  return {{"schema", schema::kFit},
          {"jacobian_step", o.jacobian_step},
          {"lambda_init", o.lambda_init},
          {"lambda_min", o.lambda_min},
          {"lambda_max", o.lambda_max},
          {"max_iterations", o.max_iterations},
          {"relative_tolerance", o.relative_tolerance},
          {"rms_ceiling_px", o.rms_ceiling_px},
          {"box_weight", o.box_weight}};
}

FitOptions fit_options_from_json(const Json& j) {
  check_schema(j, schema::kFit, Errc::BadConfig);
  return guarded(Errc::BadConfig, "fit options", [&] {
    FitOptions o;
    o.jacobian_step = value_or(j, "jacobian_step", o.jacobian_step);
    o.lambda_init = value_or(j, "lambda_init", o.lambda_init);
    o.lambda_min = value_or(j, "lambda_min", o.lambda_min);
    o.lambda_max = value_or(j, "lambda_max", o.lambda_max);
    o.max_iterations = value_or(j, "max_iterations", o.max_iterations);
    o.relative_tolerance = value_or(j, "relative_tolerance", o.relative_tolerance);
    o.rms_ceiling_px = value_or(j, "rms_ceiling_px", o.rms_ceiling_px);
    o.box_weight = value_or(j, "box_weight", o.box_weight);
    if (!(o.jacobian_step > 0 && o.lambda_min > 0 && o.lambda_min <= o.lambda_max && o.max_iterations >= 0 &&
          o.rms_ceiling_px > 0 && o.box_weight >= 0)) {
      throw Error(Errc::BadConfig, "fit options out of range");
    }
    return o;
  });
}

// ---- pipeline ----

Json pipeline_to_json(const PipelineFile& p) {
  Json cls = {{"kind", p.classifier.kind == ClassifierRef::Kind::Nn ? "nn" : "heuristic"}};
  if (p.classifier.path) cls[p.classifier.kind == ClassifierRef::Kind::Nn ? "model" : "gestures"] = *p.classifier.path;
  return {{"schema", schema::kPipeline},
          {"max_detect_hz", p.config.max_detect_hz},
          {"track_loss_frames", p.config.track_loss_frames},
          {"min_track_score", p.config.min_track_score},
          {"classifier", std::move(cls)}};
}

PipelineFile pipeline_from_json(const Json& j) {
  check_schema(j, schema::kPipeline, Errc::BadConfig);
  PipelineFile p = guarded(Errc::BadConfig, "pipeline config", [&] {
    PipelineFile out;
    out.config.max_detect_hz = value_or(j, "max_detect_hz", out.config.max_detect_hz);
    out.config.track_loss_frames = value_or(j, "track_loss_frames", out.config.track_loss_frames);
    out.config.min_track_score = value_or(j, "min_track_score", out.config.min_track_score);
    if (auto it = j.find("classifier"); it != j.end()) {
      const auto kind = it->at("kind").get<std::string>();
      if (kind == "nn") {
        out.classifier.kind = ClassifierRef::Kind::Nn;
        out.classifier.path = it->at("model").get<std::string>();
      } else if (kind == "heuristic") {
        if (it->contains("gestures")) out.classifier.path = it->at("gestures").get<std::string>();
      } else {
        throw Error(Errc::BadConfig, "classifier kind must be 'heuristic' or 'nn', got '" + kind + "'");
      }
    }
    return out;
  });
  validate_config(p.config);
  return p;
}

// ---- outputs ----

Json report_to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json recall = Json::object();
  for (int c = 0; c < kNegativeClass; ++c) recall[std::string(kClassNames[c])] = opt(r.recall[c]);
  Json confusion = Json::array();
  for (const auto& row : r.confusion) confusion.push_back(row);
  Json j = {{"schema", schema::kReport},
            {"classes", kClassNames},
            {"recall", std::move(recall)},
            {"average_recall", opt(r.average_recall)},
            {"false_positive_rate", opt(r.false_positive_rate)},
            {"counts", r.counts},
            {"confusion", std::move(confusion)}};
  if (r.keypoint_error_cm) j["keypoint_error_cm"] = *r.keypoint_error_cm;
  return j;
}

Json frame_output_to_json(const FrameOutput& o) {
  return {{"schema", schema::kStreamOutput},
          {"t_us", o.timestamp_us},
          {"mode", track_mode_name(o.mode)},
          {"label", o.label ? Json(*o.label) : Json(nullptr)},
          {"detected", o.detected},
          {"classified", o.classified}};
}

Json stream_stats_to_json(const PipelineStats& s) {
  return {{"schema", schema::kStreamStats},
          {"frames", s.frames},
          {"detect_invocations", s.detect_invocations},
          {"classify_invocations", s.classify_invocations},
          {"untracked_frames", s.untracked_frames},
          {"tracked_frames", s.tracked_frames}};
}

}  // namespace hgr::io
