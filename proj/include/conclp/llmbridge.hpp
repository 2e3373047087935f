// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "conclp/corpus.hpp"
#include "conclp/patterns.hpp"
#include "conclp/verdict.hpp"

namespace conclp {

// Fixed instruction header of every prompt.
inline constexpr std::string_view kPromptInstruction =
    "Instruction: Follow the given linguistic patterns as reference examples. "
    "Analyze the provided bug report and determine whether it describes a concurrency bug. "
    "Base your reasoning on the relationship between the report content and the patterns.";
inline constexpr std::string_view kPromptCue = "[Concurrent bug or not]:";

/// "pattern:word", "pattern:phrase", "pattern:sentence", "pattern:bug report".
std::string exemplar_tag(Level level);

/// Text a pattern contributes as an exemplar: its example, else the keyword
/// or template name.
std::string exemplar_text(const LinguisticPattern& pattern);

/// Title and body on one line, whitespace collapsed.
std::string report_text(const IssueReport& report);

struct PromptOptions {
  std::array<std::size_t, 4> exemplars_per_level = {1, 1, 1, 1};  // word, phrase, sentence, br
  std::uint64_t seed = 0;
  std::size_t max_prompt_tokens = 4096;  // estimate: ceil(chars / 4)
};

struct PromptBundle {
  std::vector<std::pair<std::string, std::string>> exemplars;  // (tag, text) in rendered order
  std::string target_report_text;
  std::string rendered;
  std::uint64_t seed = 0;
};

std::size_t estimate_tokens(std::string_view text);

/// Exemplars per level are drawn from the pattern set after a seeded
/// shuffle; patterns the report matched (when a MatchReport is given) come
/// first. Throws InsufficientExemplars and PromptTooLong.
PromptBundle build_prompt(const PatternSet& patterns, const IssueReport& report, const PromptOptions& options,
                          const MatchReport* match = nullptr);

// ---------------------------------------------------------------------------
// Endpoint

struct TransportResult {
  int status = 0;  // 0: no connection
  std::string body;
  std::string error;
};

/// One POST of a chat-completion request body.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResult post(const std::string& json_body) = 0;
};

struct EndpointConfig {
  std::string url;  // e.g. http://localhost:8080/v1/chat/completions
  std::string api_key;
  std::string model = "gpt-4o";
  double timeout_seconds = 60;
  std::size_t max_attempts = 3;
  std::chrono::milliseconds backoff{500};  // doubled after each failed attempt
  std::size_t max_in_flight = 4;

  /// CONCLP_LLM_URL, CONCLP_LLM_KEY and CONCLP_LLM_MODEL when set.
  static EndpointConfig from_environment();
};

/// httplib-backed transport, http or https.
std::unique_ptr<Transport> make_http_transport(const EndpointConfig& config);

struct TranscriptRecord {
  std::string prompt_hash;
  std::string rendered_prompt;
  std::string raw_response;
  std::string timestamp;
};

/// Append-only JSONL transcript keyed by SHA-256 of the prompt. Appends are
/// serialized; the first record for a hash wins on lookup.
class Transcript {
 public:
  explicit Transcript(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& prompt) const;
  void append(const std::string& prompt, const std::string& response);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> by_hash_;
  std::size_t records_ = 0;
};

std::vector<TranscriptRecord> read_transcript(const std::filesystem::path& path);

struct LlmResponse {
  std::string raw;
  Verdict verdict = Verdict::Unparseable;
  double latency_ms = 0;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  bool replayed = false;
};

enum class LlmMode { Live, Replay };

class LlmClient {
 public:
  /// Live: every call goes to the transport and is appended to the
  /// transcript if one is given. Replay: answers only from the transcript.
  LlmClient(EndpointConfig config, std::unique_ptr<Transport> transport, std::shared_ptr<Transcript> transcript,
            LlmMode mode);

  /// Throws EndpointUnreachable, RateLimited, TranscriptMiss.
  LlmResponse complete(const std::string& prompt) const;
  LlmResponse query(const PromptBundle& bundle) const { return complete(bundle.rendered); }

  /// Runs up to config.max_in_flight queries at once; results in input order.
  std::vector<LlmResponse> query_all(const std::vector<PromptBundle>& bundles) const;

  const EndpointConfig& config() const { return config_; }
  LlmMode mode() const { return mode_; }

 private:
  EndpointConfig config_;
  std::unique_ptr<Transport> transport_;
  std::shared_ptr<Transcript> transcript_;
  LlmMode mode_;
};

/// Request body with temperature 0 and a single user message.
std::string chat_request_body(const EndpointConfig& config, const std::string& prompt);
/// choices[0].message.content; throws ParseError.
std::string chat_response_content(const std::string& body);

/// Adjudicator backed by an LlmClient.
class LlmAdjudicator : public Adjudicator {
 public:
  explicit LlmAdjudicator(const LlmClient& client) : client_(client) {}
  std::string ask(const std::string& prompt) override { return client_.complete(prompt).raw; }

 private:
  const LlmClient& client_;
};

// ---------------------------------------------------------------------------
// Fine-tune export

struct FinetuneRecord {
  std::string text;
  int label = 0;

  bool operator==(const FinetuneRecord&) const = default;
};

/// `[CLS] [PATTERN:WORD] w [PATTERN:PHRASE] p [PATTERN:SENTENCE] s
/// [PATTERN:BUG REPORT] b [BUG REPORT] text [SEP]`, blocks separated by
/// single spaces, empty blocks kept as bare markers.
std::string finetune_text(const IssueReport& report, const MatchReport& match, const PatternSet& patterns);

/// One {"text","label"} line per report, in dataset order. Throws
/// UnlabeledData and IdMismatch.
std::vector<FinetuneRecord> finetune_records(const Dataset& dataset, const std::vector<MatchReport>& matches,
                                             const PatternSet& patterns);
std::string serialize_finetune(const std::vector<FinetuneRecord>& records);
std::vector<FinetuneRecord> parse_finetune(std::string_view text);  // throws ParseError
std::size_t export_finetune_file(const Dataset& dataset, const std::vector<MatchReport>& matches,
                                 const PatternSet& patterns, const std::filesystem::path& path);

}  // namespace conclp
