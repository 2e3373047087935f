// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace conclp {

enum class Label { Concurrency, NonConcurrency, Unlabeled };
enum class Source { GitHub, Jira, Synthetic };

std::string_view to_string(Label label);
std::string_view to_string(Source source);
std::optional<Label> parse_label(std::string_view text);
std::optional<Source> parse_source(std::string_view text);

struct IssueReport {
  std::string id;
  std::string project;
  std::string title;
  std::string body;
  Label label = Label::Unlabeled;
  Source source = Source::Synthetic;
  // Normalized "YYYY-MM-DDTHH:MM:SSZ"; nullopt when the export had none.
  std::optional<std::string> created_at;
  // Indices (after segmentation) of sentences tagged concurrency-related.
  // nullopt means the report carries no sentence-level annotation.
  std::optional<std::vector<std::size_t>> concurrency_sentences;

  bool operator==(const IssueReport&) const = default;
};

struct SentenceLabel {
  std::string report_id;
  std::size_t sentence_index = 0;
  bool is_concurrency_related = false;
};

/// Expands a report's sentence annotation over `sentence_count` sentences.
/// Throws MissingSentenceLabels when the report has none and
/// PreconditionViolation when an index is out of range.
std::vector<SentenceLabel> sentence_labels(const IssueReport& report,
                                           std::size_t sentence_count);

struct QuarantinedRecord {
  std::size_t index = 0;  // position in the input file
  std::string reason;
  std::string raw;
};

struct Dataset {
  std::vector<IssueReport> reports;
  std::vector<QuarantinedRecord> quarantined;

  std::size_t size() const { return reports.size(); }
  std::size_t count(Label label) const;
  const IssueReport* find(std::string_view id) const;
};

enum class InputFormat { GitHubJson, JiraJson, Jsonl };

std::optional<InputFormat> parse_input_format(std::string_view text);

/// Parses and validates records. Malformed records are quarantined; if more
/// than 10% of records are malformed the first one is raised as a
/// SchemaViolation. Throws EmptyDataset when nothing valid remains.
Dataset parse_dataset(std::string_view text, InputFormat format);

/// parse_dataset over a file, writing quarantined records to
/// `<path>.quarantine.jsonl` when there are any.
Dataset load_dataset(const std::filesystem::path& path, InputFormat format);

std::string serialize_dataset(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Accepts ISO-8601 date-times with "Z", "+HH:MM" or "+HHMM" offsets and
/// optional fractional seconds, returning the UTC form. nullopt on garbage.
std::optional<std::string> normalize_timestamp(std::string_view text);

enum class SplitStrategy { Ratio, StratifiedKFold };

struct DatasetSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> eval_ids;
  std::uint64_t seed = 0;
  SplitStrategy strategy = SplitStrategy::Ratio;
};

/// Seeded shuffle, first round(ratio * n) reports train. Throws
/// UnlabeledData or PreconditionViolation for ratio outside (0, 1).
DatasetSplit split_ratio(const Dataset& dataset, double ratio, std::uint64_t seed);

/// k stratified folds; fold i evaluates on its own members and trains on the
/// rest. Per-fold positive (and negative) counts differ by at most one.
/// Throws UnlabeledData, or KExceedsClassCount when k exceeds the size of
/// the larger class.
std::vector<DatasetSplit> stratified_kfold(const Dataset& dataset, std::size_t k,
                                           std::uint64_t seed);

/// Keeps every positive and round(pos * (1 - f) / f) seeded-sampled
/// negatives, preserving input order. Throws InsufficientNegatives.
Dataset downsample_to_prevalence(const Dataset& dataset, double positive_fraction,
                                 std::uint64_t seed);

/// Reports created at or after `cutoff` (any accepted timestamp form).
/// Throws MissingTimestamp if any report has no created_at.
Dataset filter_created_since(const Dataset& dataset, std::string_view cutoff);

/// Subset in the order of `ids`; throws IdMismatch for unknown ids.
Dataset select(const Dataset& dataset, const std::vector<std::string>& ids);

}  // namespace conclp
