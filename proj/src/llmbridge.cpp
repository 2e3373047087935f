// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/llmbridge.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "conclp/error.hpp"
#include "conclp/textproc.hpp"
#include "conclp/util.hpp"

namespace conclp {

using nlohmann::json;
using nlohmann::ordered_json;

std::string exemplar_tag(Level level) {
  switch (level) {
    case Level::Word: return "pattern:word";
    case Level::Phrase: return "pattern:phrase";
    case Level::Sentence: return "pattern:sentence";
    case Level::BugReport: return "pattern:bug report";
  }
  return "pattern:word";
}

std::string exemplar_text(const LinguisticPattern& p) {
  if (!p.example.empty()) return p.example;
  switch (p.level) {
    case Level::Word: return p.keyword().keyword;
    case Level::Sentence: return p.sentence().name;
    case Level::BugReport: return p.bug_report().name;
    case Level::Phrase: break;
  }
  return p.description.empty() ? p.id : p.description;
}

std::string report_text(const IssueReport& report) {
  return normalize_space(report.title + " " + report.body);
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

PromptBundle build_prompt(const PatternSet& patterns, const IssueReport& report, const PromptOptions& options,
                          const MatchReport* match) {
  PromptBundle bundle;
  bundle.seed = options.seed;
  bundle.target_report_text = report_text(report);
  Rng rng(options.seed);
  for (std::size_t li = 0; li < kAllLevels.size(); ++li) {
    Level level = kAllLevels[li];
    std::size_t want = options.exemplars_per_level[li];
    std::vector<const LinguisticPattern*> hit, rest;
    std::set<std::string> matched;
    if (match)
      for (const auto& h : match->hits(level)) matched.insert(h.pattern_id);
    for (const auto& p : patterns.patterns())
      if (p.level == level) (matched.count(p.id) ? hit : rest).push_back(&p);
    if (want > hit.size() + rest.size())
      throw Error(ErrorCode::InsufficientExemplars, std::to_string(want) + " " + exemplar_tag(level) +
                                                        " exemplars requested, " +
                                                        std::to_string(hit.size() + rest.size()) + " available");
    rng.shuffle(hit);
    rng.shuffle(rest);
    hit.insert(hit.end(), rest.begin(), rest.end());
    for (std::size_t i = 0; i < want; ++i) bundle.exemplars.emplace_back(exemplar_tag(level), exemplar_text(*hit[i]));
  }

  std::string out(kPromptInstruction);
  out += "\n";
  for (const auto& [tag, text] : bundle.exemplars) out += "[" + tag + "] " + normalize_space(text) + "\n";
  out += "[bug report] " + bundle.target_report_text + "\n";
  out += kPromptCue;
  bundle.rendered = std::move(out);
  std::size_t est = estimate_tokens(bundle.rendered);
  if (est > options.max_prompt_tokens)
    throw Error(ErrorCode::PromptTooLong, "report '" + report.id + "' needs about " + std::to_string(est) +
                                              " tokens, budget is " + std::to_string(options.max_prompt_tokens));
  return bundle;
}

// ---------------------------------------------------------------------------
// Endpoint

EndpointConfig EndpointConfig::from_environment() {
  EndpointConfig c;
  if (const char* v = std::getenv("CONCLP_LLM_URL")) c.url = v;
  if (const char* v = std::getenv("CONCLP_LLM_KEY")) c.api_key = v;
  if (const char* v = std::getenv("CONCLP_LLM_MODEL")) c.model = v;
  return c;
}

namespace {

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(const EndpointConfig& c) : config_(c) {
    auto scheme = c.url.find("://");
    auto path_at = c.url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    origin_ = c.url.substr(0, path_at);
    path_ = path_at == std::string::npos ? "/" : c.url.substr(path_at);
  }

  TransportResult post(const std::string& body) override {
    httplib::Client client(origin_);
    if (!client.is_valid()) return {0, "", "invalid endpoint url '" + config_.url + "'"};
    auto secs = static_cast<time_t>(config_.timeout_seconds);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) return {0, "", httplib::to_string(res.error())};
    return {res->status, res->body, ""};
  }

 private:
  EndpointConfig config_;
  std::string origin_;
  std::string path_;
};

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::unique_ptr<Transport> make_http_transport(const EndpointConfig& config) {
  return std::make_unique<HttpTransport>(config);
}

std::vector<TranscriptRecord> read_transcript(const std::filesystem::path& path) {
  std::vector<TranscriptRecord> out;
  if (!std::filesystem::exists(path)) return out;
  std::size_t line_no = 0;
  for (const auto& line : split(read_file(path), '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      out.push_back({j.at("prompt_hash").get<std::string>(), j.at("rendered_prompt").get<std::string>(),
                     j.at("raw_response").get<std::string>(), j.value("timestamp", std::string())});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

Transcript::Transcript(std::filesystem::path path) : path_(std::move(path)) {
  for (auto& r : read_transcript(path_)) {
    by_hash_.emplace(r.prompt_hash, std::move(r.raw_response));
    ++records_;
  }
}

std::optional<std::string> Transcript::lookup(const std::string& prompt) const {
  std::lock_guard lock(mu_);
  auto it = by_hash_.find(sha256_hex(prompt));
  if (it == by_hash_.end()) return std::nullopt;
  return it->second;
}

void Transcript::append(const std::string& prompt, const std::string& response) {
  ordered_json j;
  j["prompt_hash"] = sha256_hex(prompt);
  j["rendered_prompt"] = prompt;
  j["raw_response"] = response;
  j["timestamp"] = utc_now();
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::UnreadablePath, "cannot append to transcript " + path_.string());
  out << j.dump() << '\n';
  by_hash_.emplace(j["prompt_hash"].get<std::string>(), response);
  ++records_;
}

std::size_t Transcript::size() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::string chat_request_body(const EndpointConfig& config, const std::string& prompt) {
  ordered_json j;
  j["model"] = config.model;
  j["temperature"] = 0;
  j["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
  return j.dump();
}

std::string chat_response_content(const std::string& body) {
  try {
    return json::parse(body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("unexpected chat completion response: ") + e.what());
  }
}

LlmClient::LlmClient(EndpointConfig config, std::unique_ptr<Transport> transport,
                     std::shared_ptr<Transcript> transcript, LlmMode mode)
    : config_(std::move(config)), transport_(std::move(transport)), transcript_(std::move(transcript)), mode_(mode) {
  if (mode_ == LlmMode::Replay && !transcript_)
    throw Error(ErrorCode::PreconditionViolation, "replay mode needs a transcript");
  if (mode_ == LlmMode::Live && !transport_)
    throw Error(ErrorCode::PreconditionViolation, "live mode needs a transport");
}

LlmResponse LlmClient::complete(const std::string& prompt) const {
  LlmResponse r;
  r.prompt_tokens = estimate_tokens(prompt);
  if (mode_ == LlmMode::Replay) {
    auto hit = transcript_->lookup(prompt);
    if (!hit) throw Error(ErrorCode::TranscriptMiss, "no transcript record for prompt " + sha256_hex(prompt));
    r.raw = *hit;
    r.replayed = true;
  } else {
    const std::string body = chat_request_body(config_, prompt);
    auto wait = config_.backoff;
    bool limited = false;
    std::string last_error;
    std::optional<std::string> content;
    auto start = std::chrono::steady_clock::now();
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, config_.max_attempts); ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(wait);
        wait *= 2;
      }
      TransportResult res = transport_->post(body);
      if (res.status == 200) {
        content = chat_response_content(res.body);
        break;
      }
      limited = res.status == 429;
      last_error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status);
      if (res.status >= 400 && res.status < 500 && res.status != 429 && res.status != 408)
        throw Error(ErrorCode::EndpointUnreachable, config_.url + ": " + last_error);
    }
    if (!content) {
      std::string msg = config_.url + ": " + last_error + " after " + std::to_string(config_.max_attempts) + " attempts";
      throw Error(limited ? ErrorCode::RateLimited : ErrorCode::EndpointUnreachable, msg);
    }
    r.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    r.raw = std::move(*content);
    if (transcript_) transcript_->append(prompt, r.raw);
  }
  r.completion_tokens = estimate_tokens(r.raw);
  r.verdict = parse_verdict(r.raw);
  return r;
}

std::vector<LlmResponse> LlmClient::query_all(const std::vector<PromptBundle>& bundles) const {
  std::vector<LlmResponse> out(bundles.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < bundles.size();) {
      try {
        out[i] = query(bundles[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = bundles.size();
      }
    }
  };
  std::size_t n = std::min(std::max<std::size_t>(1, config_.max_in_flight), bundles.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------
// Fine-tune export

namespace {

std::string phrase_block_item(std::string_view span) {
  std::vector<std::string> words;
  for (const auto& w : split(normalize_space(span), ' '))
    if (!w.empty()) words.push_back(to_lower(w));
  return "(" + join(words, ", ") + ")";
}

}  // namespace

std::string finetune_text(const IssueReport& report, const MatchReport& match, const PatternSet& patterns) {
  auto sentences = segment_sentences(report.title, report.body);
  auto span = [&](const Hit& h) -> std::string {
    if (h.sentence_index >= sentences.size()) return "";
    const auto& s = sentences[h.sentence_index];
    if (h.begin >= h.end || h.end > s.size()) return "";
    return s.substr(h.begin, h.end - h.begin);
  };

  std::vector<std::string> word, phrase, sentence, br;
  std::set<std::string> seen;
  for (const auto& p : patterns.patterns()) {
    if (p.level != Level::Word) continue;
    for (const auto& h : match.word_hits)
      if (h.pattern_id == p.id && seen.insert(p.keyword().keyword).second) word.push_back(p.keyword().keyword);
  }
  seen.clear();
  for (const auto& h : match.phrase_hits) {
    std::string item = phrase_block_item(span(h));
    if (item != "()" && seen.insert(item).second) phrase.push_back(item);
  }
  std::set<std::size_t> used;
  for (const auto& h : match.sentence_hits)
    if (!h.negated && h.sentence_index < sentences.size() && used.insert(h.sentence_index).second)
      sentence.push_back(normalize_space(sentences[h.sentence_index]));
  for (const auto& h : match.br_hits)
    if (const auto* p = patterns.find(h.pattern_id)) br.push_back("Root cause: " + to_lower(p->bug_report().name));

  std::string out = "[CLS]";
  auto block = [&](std::string_view marker, const std::vector<std::string>& items, std::string_view sep) {
    out += " ";
    out += marker;
    if (!items.empty()) out += " " + join(items, sep);
  };
  block("[PATTERN:WORD]", word, "; ");
  block("[PATTERN:PHRASE]", phrase, "; ");
  block("[PATTERN:SENTENCE]", sentence, " ");
  block("[PATTERN:BUG REPORT]", br, "; ");
  std::string text = report_text(report);
  block("[BUG REPORT]", text.empty() ? std::vector<std::string>{} : std::vector<std::string>{text}, "");
  out += " [SEP]";
  return out;
}

std::vector<FinetuneRecord> finetune_records(const Dataset& dataset, const std::vector<MatchReport>& matches,
                                             const PatternSet& patterns) {
  std::map<std::string, const MatchReport*> by_id;
  for (const auto& m : matches) by_id[m.report_id] = &m;
  std::vector<FinetuneRecord> out;
  for (const auto& r : dataset.reports) {
    if (r.label == Label::Unlabeled) throw Error(ErrorCode::UnlabeledData, "report '" + r.id + "' has no label");
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw Error(ErrorCode::IdMismatch, "no match report for '" + r.id + "'");
    out.push_back({finetune_text(r, *it->second, patterns), r.label == Label::Concurrency ? 1 : 0});
  }
  return out;
}

std::string serialize_finetune(const std::vector<FinetuneRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["text"] = r.text;
    j["label"] = r.label;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<FinetuneRecord> parse_finetune(std::string_view text) {
  std::vector<FinetuneRecord> out;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      int label = j.at("label").get<int>();
      if (label != 0 && label != 1) throw Error(ErrorCode::ParseError, "label must be 0 or 1");
      out.push_back({j.at("text").get<std::string>(), label});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::size_t export_finetune_file(const Dataset& dataset, const std::vector<MatchReport>& matches,
                                 const PatternSet& patterns, const std::filesystem::path& path) {
  auto records = finetune_records(dataset, matches, patterns);
  write_file(path, serialize_finetune(records));
  return records.size();
}

}  // namespace conclp
