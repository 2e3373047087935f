// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/error.hpp"

namespace conclp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnreadablePath: return "UnreadablePath";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::UnlabeledData: return "UnlabeledData";
    case ErrorCode::KExceedsClassCount: return "KExceedsClassCount";
    case ErrorCode::InsufficientNegatives: return "InsufficientNegatives";
    case ErrorCode::MissingTimestamp: return "MissingTimestamp";
    case ErrorCode::MissingCategory: return "MissingCategory";
    case ErrorCode::DuplicateEntryConflict: return "DuplicateEntryConflict";
    case ErrorCode::ZeroCorpus: return "ZeroCorpus";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::MissingSentenceLabels: return "MissingSentenceLabels";
    case ErrorCode::InvalidPatternSet: return "InvalidPatternSet";
    case ErrorCode::AdjudicatorUnavailable: return "AdjudicatorUnavailable";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::SingleClassData: return "SingleClassData";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidModelFile: return "InvalidModelFile";
    case ErrorCode::InsufficientExemplars: return "InsufficientExemplars";
    case ErrorCode::PromptTooLong: return "PromptTooLong";
    case ErrorCode::EndpointUnreachable: return "EndpointUnreachable";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::TranscriptMiss: return "TranscriptMiss";
    case ErrorCode::IdMismatch: return "IdMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
  }
  return "Unknown";
}

}  // namespace conclp
