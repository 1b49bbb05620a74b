#pragma once

// 12 -> 50 -> 50 -> 50 -> 7 perceptron over the feature vector, trained with
// focal loss and gated by a false-positive-rate calibrated threshold.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hgr/features.hpp"

namespace hgr {

inline constexpr int kNumFeatures = 12;
inline constexpr int kHiddenWidth = 50;
inline constexpr int kNumHiddenLayers = 3;
inline constexpr int kNumClasses = 7;
inline constexpr int kNegativeClass = 6;

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "OpenPalm", "ClosedFist", "PointingUp", "Victory", "ThumbUp", "ThumbDown", "Negative"};

std::optional<int> class_index(std::string_view name);

using FeatureArray = Eigen::Matrix<double, kNumFeatures, 1>;
using ClassProbs = Eigen::Matrix<double, kNumClasses, 1>;

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct MlpModel {
  std::vector<DenseLayer> layers;  // ReLU between layers, softmax on the last
  FeatureArray feat_mean = FeatureArray::Zero();
  FeatureArray feat_std = FeatureArray::Ones();
  double tau = 0.0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

// Expected layer shapes: 12->50, 50->50, 50->50, 50->7.
std::array<std::array<int, 2>, kNumHiddenLayers + 1> layer_shapes();

// Zero weights, unit standardization.
MlpModel zero_model();

// He-uniform weights, zero biases.
MlpModel init_model(std::uint64_t seed);

// Throws Error(ShapeMismatch) on wrong layer shapes, non-positive feat_std
// or tau outside [0,1].
void validate_model(const MlpModel& model);

// Numerically stable softmax.
ClassProbs softmax(const ClassProbs& logits);

ClassProbs forward(const MlpModel& model, const FeatureArray& features);
inline ClassProbs forward(const MlpModel& model, const FeatureVectord& fv) { return forward(model, to_array(fv)); }

// -alpha * (1 - p)^gamma * ln(p), with p clamped to [1e-12, 1].
double focal_loss(const ClassProbs& probs, int label, double gamma, double alpha);

struct LabeledExample {
  FeatureArray features = FeatureArray::Zero();
  int label = kNegativeClass;
};

struct TrainConfig {
  double gamma = 2.0;
  std::array<double, kNumClasses> alpha = {1, 1, 1, 1, 1, 1, 1};
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 100;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
};

void validate_config(const TrainConfig& cfg);

// Gradient of the focal loss of one example w.r.t. every layer parameter.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;
};

Gradients loss_gradients(const MlpModel& model, const LabeledExample& ex, double gamma, double alpha);
Gradients numeric_gradients(const MlpModel& model, const LabeledExample& ex, double gamma, double alpha,
                            double step = 1e-5);

// max |a - n| / max(|a|, |n|, floor) over all parameters.
double max_relative_error(const Gradients& analytic, const Gradients& numeric, double floor = 1e-6);

// Analytic vs central-difference gradients of the focal loss, with the
// relative-error floor scaled by max(1, loss).
double gradient_check(const MlpModel& model, const LabeledExample& ex, double gamma, double alpha);

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) on shuffled mini-batches. Inputs are
// standardized with training-set statistics. Throws EmptyDataset or
// SingleClassDataset.
MlpModel train(const std::vector<LabeledExample>& dataset, const TrainConfig& cfg);

// Largest probability among the gesture classes.
double gesture_score(const ClassProbs& probs);

// Smallest tau with #{score > tau} <= floor(target_fpr * n). Throws EmptyNegatives.
double threshold_for_scores(std::vector<double> scores, double target_fpr);
double calibrate_threshold(const MlpModel& model, const std::vector<LabeledExample>& negatives, double target_fpr);

// Argmax class, demoted to Negative if it is a gesture with probability <= tau.
int classify_nn_index(const MlpModel& model, const FeatureArray& features);
std::string classify_nn(const MlpModel& model, const FeatureVectord& fv);

}  // namespace hgr
