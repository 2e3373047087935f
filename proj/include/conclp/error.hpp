// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace conclp {

enum class ErrorCode {
  // corpus
  UnreadablePath,
  SchemaViolation,
  EmptyDataset,
  UnlabeledData,
  KExceedsClassCount,
  InsufficientNegatives,
  MissingTimestamp,
  // lexicon / patterns
  MissingCategory,
  DuplicateEntryConflict,
  ZeroCorpus,
  EmptyCorpus,
  MissingSentenceLabels,
  InvalidPatternSet,
  AdjudicatorUnavailable,
  // classify
  LayoutMismatch,
  SingleClassData,
  NonFiniteLoss,
  InvalidModelFile,
  // llmbridge
  InsufficientExemplars,
  PromptTooLong,
  EndpointUnreachable,
  RateLimited,
  TranscriptMiss,
  // eval
  IdMismatch,
  // generic
  ParseError,
  PreconditionViolation,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library is an Error carrying a code; callers
// branch on code(), the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by load_dataset when a record fails validation and the malformed
// fraction exceeds the quarantine budget.
class SchemaViolation : public Error {
 public:
  SchemaViolation(std::size_t record_index, std::string reason)
      : Error(ErrorCode::SchemaViolation,
              "record " + std::to_string(record_index) + ": " + reason),
        record_index_(record_index),
        reason_(std::move(reason)) {}

  std::size_t record_index() const noexcept { return record_index_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t record_index_;
  std::string reason_;
};

}  // namespace conclp
