// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "conclp/corpus.hpp"
#include "conclp/patterns.hpp"

namespace conclp {

struct Classification {
  std::string report_id;
  Label predicted = Label::NonConcurrency;
  double score = 0;

  bool operator==(const Classification&) const = default;
};

/// Concurrency iff any of `levels` has a hit; score 1 or 0.
Classification classify_by_matching(const MatchReport& report, const std::set<Level>& levels);
inline Classification classify_by_matching(const MatchReport& report, Level level) {
  return classify_by_matching(report, std::set<Level>{level});
}

/// Ordered pattern ids of the chosen levels. The hash binds the pattern set
/// version and the level selection.
struct FeatureLayout {
  std::vector<std::string> ids;
  std::string pattern_set_hash;
  std::string hash;

  static FeatureLayout of(const PatternSet& patterns,
                          const std::set<Level>& levels = {kAllLevels.begin(), kAllLevels.end()});
  std::size_t size() const { return ids.size(); }
};

struct FeatureVector {
  std::string report_id;
  std::vector<std::uint8_t> bits;
  std::string layout_hash;

  bool operator==(const FeatureVector&) const = default;
};

/// Throws LayoutMismatch when the report was matched with another pattern set.
FeatureVector vectorize(const MatchReport& report, const FeatureLayout& layout);

struct Example {
  FeatureVector x;
  bool positive = false;
};

enum class ModelKind { NaiveBayes, LogisticRegression, LinearSVM };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);  // nb, lr, svm or full names

struct Hyperparameters {
  double learning_rate = 0.1;
  double l2 = 1e-3;
  std::size_t epochs = 500;
  double nb_alpha = 1.0;

  bool operator==(const Hyperparameters&) const = default;
};

struct TrainedModel {
  ModelKind kind = ModelKind::LogisticRegression;
  std::string layout_hash;
  std::size_t dimension = 0;
  Hyperparameters hyper;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  double final_loss = 0;

  // LR / SVM
  std::vector<double> weights;
  double bias = 0;
  // SVM margin calibration: score = sigmoid(platt_a * margin + platt_b)
  double platt_a = 1, platt_b = 0;

  // Bernoulli NB, index 0 negative, 1 positive
  double nb_log_prior[2] = {0, 0};
  std::vector<double> nb_log_p1[2], nb_log_p0[2];

  bool operator==(const TrainedModel&) const;
};

/// LR: full-batch gradient descent on mean log-loss + (l2/2)|w|^2. SVM: the
/// same on mean hinge loss, then a sigmoid fitted to the training margins.
/// NB: Bernoulli with additive smoothing. Throws SingleClassData,
/// NonFiniteLoss and PreconditionViolation (ragged or empty input).
TrainedModel train(ModelKind kind, const std::vector<Example>& data, const Hyperparameters& hyper,
                   std::uint64_t seed);

/// Score >= threshold is Concurrency. Throws LayoutMismatch.
Classification predict(const TrainedModel& model, const FeatureVector& x);

// Objective and gradient with respect to (weights..., bias), as minimized
// by train(). Exposed for gradient checks.
double objective(ModelKind kind, const std::vector<Example>& data, const std::vector<double>& params,
                 double l2);
std::vector<double> gradient(ModelKind kind, const std::vector<Example>& data,
                             const std::vector<double>& params, double l2);

/// Hex-float text format; load throws InvalidModelFile.
std::string serialize_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

/// Plug-in point for predictors trained outside this library.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Classification predict(const FeatureVector& x) const = 0;
};

class ModelPredictor : public Predictor {
 public:
  explicit ModelPredictor(TrainedModel model) : model_(std::move(model)) {}
  Classification predict(const FeatureVector& x) const override { return conclp::predict(model_, x); }

 private:
  TrainedModel model_;
};

enum class Rebalance { None, RandomOversample, Smote };

std::string_view to_string(Rebalance method);
std::optional<Rebalance> parse_rebalance(std::string_view text);

/// Grows the minority class to target_ratio * majority (rounded up).
/// Originals come first and are kept as-is. SMOTE interpolates towards one
/// of the 5 nearest minority neighbours (Hamming) and re-binarizes at 0.5.
/// Throws SingleClassData.
std::vector<Example> rebalance(const std::vector<Example>& data, Rebalance method, double target_ratio,
                               std::uint64_t seed);

}  // namespace conclp
