// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "conclp/classify.hpp"
#include "conclp/corpus.hpp"
#include "conclp/llmbridge.hpp"
#include "conclp/patterns.hpp"

namespace conclp {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  double precision() const;  // 0 when tp + fp == 0
  double recall() const;     // 0 when tp + fn == 0
  double f_measure() const;
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

/// Harmonic mean, 0 when p + r == 0.
double f_measure(double precision, double recall);

/// Predictions and gold reports must cover the same ids (IdMismatch).
/// Unlabeled gold reports are rejected with UnlabeledData.
ConfusionCounts score(const std::vector<Classification>& predictions, const std::vector<IssueReport>& gold);

/// "KW+PH+SE+BR" style label, in level order.
std::string combination_label(const std::set<Level>& levels);
/// Parses word,phrase,sentence,br or KW+PH style lists.
std::set<Level> parse_combination(std::string_view text);

enum class MethodKind { Matching, Model, Llm };

struct MethodConfig {
  MethodKind kind = MethodKind::Matching;
  std::set<Level> levels = {Level::Word};
  // Model
  ModelKind model = ModelKind::LogisticRegression;
  Hyperparameters hyper;
  Rebalance rebalance = Rebalance::None;
  double rebalance_ratio = 1.0;
  // Llm
  const LlmClient* llm = nullptr;
  PromptOptions prompt;

  /// "matching", "LR", "SVM", "NB" or "LLM"; with a rebalance suffix.
  std::string name() const;
};

struct EvalRow {
  std::string method;
  std::string combination;
  ConfusionCounts counts;  // summed over folds
  double precision = 0, recall = 0, f_measure = 0;                    // micro
  double macro_precision = 0, macro_recall = 0, macro_f_measure = 0;  // mean of folds
  std::vector<ConfusionCounts> folds;

  bool operator==(const EvalRow&) const = default;
};

struct EvalReport {
  std::string experiment;
  std::string dataset;  // descriptor: name and content hash
  std::uint64_t seed = 0;
  double runtime_ms = 0;  // not rendered
  std::vector<EvalRow> rows;
};

EvalRow make_row(std::string method, std::string combination, std::vector<ConfusionCounts> folds);

/// Matches every report once and reuses the results across methods.
class Evaluator {
 public:
  Evaluator(const Lexicon& lexicon, const PatternSet& patterns, const Dataset& dataset);

  const Matcher& matcher() const { return matcher_; }
  const PatternSet& patterns() const { return matcher_.patterns(); }
  const Dataset& dataset() const { return dataset_; }
  const MatchReport& match_of(const std::string& id) const;
  const std::vector<MatchReport>& matches() const { return matches_; }

  /// Predictions for `test_ids`, trained on `train_ids` when the method
  /// learns.
  std::vector<Classification> predict(const MethodConfig& method, const std::vector<std::string>& train_ids,
                                      const std::vector<std::string>& test_ids, std::uint64_t seed) const;

  /// Stratified k folds; one row with per-fold counts. Folds run on up to
  /// `jobs` threads and are reduced in fold order.
  EvalRow cross_validate(std::size_t k, const MethodConfig& method, std::uint64_t seed, std::size_t jobs = 1) const;

  /// Whole dataset as one fold; for methods that do not learn.
  EvalRow score_all(const MethodConfig& method, std::uint64_t seed) const;

 private:
  Matcher matcher_;
  Dataset dataset_;
  std::vector<MatchReport> matches_;
  std::map<std::string, std::size_t> index_;
};

/// One row per combination; only `levels` varies between rows. Learning
/// methods are cross-validated with k folds, the rest scored on the whole
/// dataset.
EvalReport level_sweep(const Evaluator& evaluator, const std::vector<std::set<Level>>& combinations,
                       const MethodConfig& method, std::size_t k, std::uint64_t seed, std::size_t jobs = 1);

enum class ReportFormat { PlainTable, Csv, Markdown };

std::optional<ReportFormat> parse_report_format(std::string_view text);  // table, csv, markdown

/// Csv keeps full precision and both averages; the tables show micro
/// P/R/F at 2 decimals.
std::string render_report(const EvalReport& report, ReportFormat format);

/// Column order of the metrics CSV; external trainers emit the same header.
extern const std::vector<std::string> kCsvColumns;

/// Rows of a metrics CSV; per-fold counts are not carried. Throws ParseError.
EvalReport parse_csv_report(std::string_view text);

/// Rows of several reports appended under one header.
std::string merge_csv_reports(const std::vector<std::string>& csv_texts);

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::string> config;  // effective settings
  std::map<std::string, std::string> inputs;  // path -> sha256
  std::map<std::string, std::string> outputs;
  std::map<std::string, std::string> versions;
  double runtime_ms = 0;
};

std::string serialize_manifest(const Manifest& manifest);
Manifest parse_manifest(std::string_view text);  // throws ParseError
/// Writes `<artifact>.manifest.json`; returns its path.
std::filesystem::path write_manifest(const Manifest& manifest, const std::filesystem::path& artifact);

/// sha256 over the sorted key=value lines.
std::string config_hash(const std::map<std::string, std::string>& config);

}  // namespace conclp
