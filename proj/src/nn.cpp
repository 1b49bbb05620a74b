#include "hgr/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace hgr {

std::optional<int> class_index(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (kClassNames[i] == name) return i;
  }
  return std::nullopt;
}

std::array<std::array<int, 2>, kNumHiddenLayers + 1> layer_shapes() {
  return {{{kNumFeatures, kHiddenWidth}, {kHiddenWidth, kHiddenWidth}, {kHiddenWidth, kHiddenWidth},
           {kHiddenWidth, kNumClasses}}};
}

MlpModel zero_model() {
  MlpModel m;
  for (const auto& [in, out] : layer_shapes()) {
    m.layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
  return m;
}

MlpModel init_model(std::uint64_t seed) {
  MlpModel m = zero_model();
  std::mt19937_64 rng(seed);
  for (auto& layer : m.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weights.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = u(rng);
    }
  }
  return m;
}

void validate_model(const MlpModel& model) {
  const auto shapes = layer_shapes();
  if (model.layers.size() != shapes.size()) {
    throw Error(Errc::ShapeMismatch, "expected 4 layers, got " + std::to_string(model.layers.size()));
  }
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto& layer = model.layers[l];
    const auto [in, out] = shapes[l];
    if (layer.weights.rows() != out || layer.weights.cols() != in || layer.bias.size() != out) {
      throw Error(Errc::ShapeMismatch, "layer " + std::to_string(l) + " must be " + std::to_string(in) + "->" +
                                           std::to_string(out));
    }
  }
  if (!((model.feat_std.array() > 0).all())) throw Error(Errc::ShapeMismatch, "feat_std entries must be positive");
  if (!(model.tau >= 0 && model.tau <= 1)) throw Error(Errc::ShapeMismatch, "tau must lie in [0,1]");
}

ClassProbs softmax(const ClassProbs& logits) {
  const ClassProbs e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

namespace {

struct Activations {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer (post-ReLU for hidden)
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  Eigen::MatrixXd probs;
};

Eigen::MatrixXd standardize(const MlpModel& m, const Eigen::MatrixXd& x) {
  return (x.colwise() - m.feat_mean).array().colwise() / m.feat_std.array();
}

Activations forward_batch(const MlpModel& m, const Eigen::MatrixXd& x_raw) {
  Activations act;
  Eigen::MatrixXd a = standardize(m, x_raw);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    act.inputs.push_back(a);
    Eigen::MatrixXd z = (m.layers[l].weights * a).colwise() + m.layers[l].bias;
    act.pre.push_back(z);
    if (l + 1 < m.layers.size()) a = z.cwiseMax(0.0);
  }
  const Eigen::MatrixXd& logits = act.pre.back();
  act.probs.resize(logits.rows(), logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b) act.probs.col(b) = softmax(logits.col(b));
  return act;
}

double clamp_prob(double p) { return std::clamp(p, 1e-12, 1.0); }

// d loss / d p_label * p_label; the logit gradient is this times (onehot - p).
double focal_logit_coefficient(double p_raw, double gamma, double alpha) {
  const double p = clamp_prob(p_raw);
  const double q = 1.0 - p;
  const double mod = q > 0 ? gamma * std::pow(q, gamma - 1.0) * p * std::log(p) : 0.0;
  return alpha * (mod - std::pow(q, gamma));
}

// Sum of parameter gradients over a batch (not averaged).
Gradients backward(const MlpModel& m, const Activations& act, const std::vector<int>& labels, double gamma,
                   const std::array<double, kNumClasses>& alpha) {
  const Eigen::Index batch = act.probs.cols();
  Eigen::MatrixXd dz(kNumClasses, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const int y = labels[b];
    const double c = focal_logit_coefficient(act.probs(y, b), gamma, alpha[y]);
    dz.col(b) = -c * act.probs.col(b);
    dz(y, b) += c;
  }
  Gradients g;
  g.weights.resize(m.layers.size());
  g.bias.resize(m.layers.size());
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    g.weights[l] = dz * act.inputs[l].transpose();
    g.bias[l] = dz.rowwise().sum();
    if (l > 0) {
      const Eigen::MatrixXd da = m.layers[l].weights.transpose() * dz;
      dz = (act.pre[l - 1].array() > 0).select(da, 0.0);
    }
  }
  return g;
}

}  // namespace

ClassProbs forward(const MlpModel& model, const FeatureArray& features) {
  return forward_batch(model, features).probs.col(0);
}

double focal_loss(const ClassProbs& probs, int label, double gamma, double alpha) {
  const double p = clamp_prob(probs(label));
  return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
}

void validate_config(const TrainConfig& cfg) {
  if (!(cfg.gamma >= 0)) throw Error(Errc::BadConfig, "gamma must be >= 0");
  if (cfg.batch_size < 1) throw Error(Errc::BadConfig, "batch_size must be >= 1");
  if (cfg.epochs < 0) throw Error(Errc::BadConfig, "epochs must be >= 0");
  if (!(cfg.learning_rate > 0)) throw Error(Errc::BadConfig, "learning_rate must be > 0");
  if (!(cfg.validation_fraction >= 0 && cfg.validation_fraction < 1)) {
    throw Error(Errc::BadConfig, "validation_fraction must lie in [0,1)");
  }
  for (double a : cfg.alpha) {
    if (!(a > 0)) throw Error(Errc::BadConfig, "alpha entries must be > 0");
  }
}

Gradients loss_gradients(const MlpModel& model, const LabeledExample& ex, double gamma, double alpha) {
  std::array<double, kNumClasses> alphas;
  alphas.fill(alpha);
  return backward(model, forward_batch(model, ex.features), {ex.label}, gamma, alphas);
}

Gradients numeric_gradients(const MlpModel& model, const LabeledExample& ex, double gamma, double alpha,
                            double step) {
  MlpModel m = model;
  auto loss = [&]() { return focal_loss(forward(m, ex.features), ex.label, gamma, alpha); };
  Gradients g;
  for (auto& layer : m.layers) {
    Eigen::MatrixXd gw(layer.weights.rows(), layer.weights.cols());
    for (Eigen::Index j = 0; j < gw.cols(); ++j) {
      for (Eigen::Index i = 0; i < gw.rows(); ++i) {
        const double w = layer.weights(i, j);
        layer.weights(i, j) = w + step;
        const double lp = loss();
        layer.weights(i, j) = w - step;
        const double lm = loss();
        layer.weights(i, j) = w;
        gw(i, j) = (lp - lm) / (2 * step);
      }
    }
    Eigen::VectorXd gb(layer.bias.size());
    for (Eigen::Index i = 0; i < gb.size(); ++i) {
      const double b = layer.bias(i);
      layer.bias(i) = b + step;
      const double lp = loss();
      layer.bias(i) = b - step;
      const double lm = loss();
      layer.bias(i) = b;
      gb(i) = (lp - lm) / (2 * step);
    }
    g.weights.push_back(std::move(gw));
    g.bias.push_back(std::move(gb));
  }
  return g;
}

double max_relative_error(const Gradients& analytic, const Gradients& numeric, double floor) {
  if (analytic.weights.size() != numeric.weights.size()) throw Error(Errc::ShapeMismatch, "gradient layer count");
  double worst = 0;
  auto update = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& n) {
    if (a.rows() != n.rows() || a.cols() != n.cols()) throw Error(Errc::ShapeMismatch, "gradient shapes differ");
    const Eigen::ArrayXXd denom = a.array().abs().max(n.array().abs()).max(floor);
    worst = std::max(worst, ((a - n).array().abs() / denom).maxCoeff());
  };
  for (std::size_t l = 0; l < analytic.weights.size(); ++l) {
    update(analytic.weights[l], numeric.weights[l]);
    update(analytic.bias[l], numeric.bias[l]);
  }
  return worst;
}

double gradient_check(const MlpModel& model, const LabeledExample& ex, double gamma, double alpha) {
  // Central-difference round-off grows with the loss itself.
  const double loss = focal_loss(forward(model, ex.features), ex.label, gamma, alpha);
  return max_relative_error(loss_gradients(model, ex, gamma, alpha), numeric_gradients(model, ex, gamma, alpha),
                            1e-6 * std::max(1.0, loss));
}

MlpModel train(const std::vector<LabeledExample>& dataset, const TrainConfig& cfg) {
  validate_config(cfg);
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  std::set<int> classes;
  for (const auto& ex : dataset) {
    if (ex.label < 0 || ex.label >= kNumClasses) throw Error(Errc::UnknownLabel, "label index out of range");
    classes.insert(ex.label);
  }
  if (classes.size() < 2) throw Error(Errc::SingleClassDataset, "training set needs at least two classes");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(dataset.size()));
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  if (train_idx.empty()) throw Error(Errc::EmptyDataset, "validation split leaves no training data");

  MlpModel model = init_model(rng());
  {
    FeatureArray mean = FeatureArray::Zero();
    for (auto i : train_idx) mean += dataset[i].features;
    mean /= static_cast<double>(train_idx.size());
    FeatureArray var = FeatureArray::Zero();
    for (auto i : train_idx) var += (dataset[i].features - mean).cwiseAbs2();
    var /= static_cast<double>(train_idx.size());
    model.feat_mean = mean;
    model.feat_std = var.cwiseSqrt().unaryExpr([](double s) { return s > 1e-12 ? s : 1.0; });
  }

  auto gather = [&](const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end, Eigen::MatrixXd& x,
                    std::vector<int>& y) {
    x.resize(kNumFeatures, static_cast<Eigen::Index>(end - begin));
    y.resize(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
      x.col(static_cast<Eigen::Index>(k - begin)) = dataset[idx[k]].features;
      y[k - begin] = dataset[idx[k]].label;
    }
  };
  auto mean_loss = [&](const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    Eigen::MatrixXd x;
    std::vector<int> y;
    gather(idx, 0, idx.size(), x, y);
    const Eigen::MatrixXd probs = forward_batch(model, x).probs;
    double total = 0;
    for (std::size_t b = 0; b < y.size(); ++b) {
      total += focal_loss(probs.col(static_cast<Eigen::Index>(b)), y[b], cfg.gamma, cfg.alpha[y[b]]);
    }
    return total / static_cast<double>(idx.size());
  };

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const std::size_t n_layers = model.layers.size();
  std::vector<Eigen::MatrixXd> mw(n_layers), vw(n_layers);
  std::vector<Eigen::VectorXd> mb(n_layers), vb(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    mw[l] = vw[l] = Eigen::MatrixXd::Zero(model.layers[l].weights.rows(), model.layers[l].weights.cols());
    mb[l] = vb[l] = Eigen::VectorXd::Zero(model.layers[l].bias.size());
  }

  long step = 0;
  Eigen::MatrixXd x;
  std::vector<int> y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    for (std::size_t begin = 0; begin < train_idx.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(train_idx.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      gather(train_idx, begin, end, x, y);
      const Gradients g = backward(model, forward_batch(model, x), y, cfg.gamma, cfg.alpha);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);

      ++step;
      const double lr_t = cfg.learning_rate * std::sqrt(1.0 - std::pow(kBeta2, static_cast<double>(step))) /
                          (1.0 - std::pow(kBeta1, static_cast<double>(step)));
      for (std::size_t l = 0; l < n_layers; ++l) {
        const Eigen::MatrixXd gw = g.weights[l] * inv_batch;
        const Eigen::VectorXd gb = g.bias[l] * inv_batch;
        mw[l] = kBeta1 * mw[l] + (1 - kBeta1) * gw;
        vw[l] = kBeta2 * vw[l] + (1 - kBeta2) * gw.cwiseAbs2();
        mb[l] = kBeta1 * mb[l] + (1 - kBeta1) * gb;
        vb[l] = kBeta2 * vb[l] + (1 - kBeta2) * gb.cwiseAbs2();
        model.layers[l].weights.array() -= lr_t * mw[l].array() / (vw[l].array().sqrt() + kEps);
        model.layers[l].bias.array() -= lr_t * mb[l].array() / (vb[l].array().sqrt() + kEps);
      }
    }
    model.train_loss.push_back(mean_loss(train_idx));
    model.val_loss.push_back(mean_loss(val_idx));
  }
  return model;
}

double gesture_score(const ClassProbs& probs) { return probs.head<kNegativeClass>().maxCoeff(); }

double threshold_for_scores(std::vector<double> scores, double target_fpr) {
  if (scores.empty()) throw Error(Errc::EmptyNegatives, "no negative samples to calibrate on");
  if (!(target_fpr > 0 && target_fpr < 1)) throw Error(Errc::BadConfig, "target FPR must lie in (0,1)");
  std::sort(scores.begin(), scores.end(), std::greater<>());
  // Up to `allowed` scores may exceed tau; tau is the next score down.
  const auto allowed = static_cast<std::size_t>(std::floor(target_fpr * static_cast<double>(scores.size()) + 1e-9));
  return scores[std::min(allowed, scores.size() - 1)];
}

double calibrate_threshold(const MlpModel& model, const std::vector<LabeledExample>& negatives, double target_fpr) {
  std::vector<double> scores;
  scores.reserve(negatives.size());
  for (const auto& ex : negatives) scores.push_back(gesture_score(forward(model, ex.features)));
  return threshold_for_scores(std::move(scores), target_fpr);
}

int classify_nn_index(const MlpModel& model, const FeatureArray& features) {
  const ClassProbs p = forward(model, features);
  Eigen::Index best = 0;
  p.maxCoeff(&best);
  if (best != kNegativeClass && p(best) <= model.tau) return kNegativeClass;
  return static_cast<int>(best);
}

std::string classify_nn(const MlpModel& model, const FeatureVectord& fv) {
  return std::string(kClassNames[classify_nn_index(model, to_array(fv))]);
}

}  // namespace hgr
