// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "conclp/corpus.hpp"
#include "conclp/lexicon.hpp"
#include "conclp/textproc.hpp"

namespace conclp {

enum class Level { Word, Phrase, Sentence, BugReport };

inline constexpr std::array<Level, 4> kAllLevels = {Level::Word, Level::Phrase, Level::Sentence,
                                                    Level::BugReport};

std::string_view to_string(Level level);
// Accepts word/kw, phrase/ph, sentence/se, br/bug-report/bugreport.
std::optional<Level> parse_level(std::string_view text);

enum class Topic { Lock, Thread, Race, Atomicity, Sync, Other };

std::string_view to_string(Topic topic);
std::optional<Topic> parse_topic(std::string_view text);

enum class SentenceKind { Action, Symptom, Other };

/// One (category, POS) requirement. `pos` empty matches any POS the unit
/// carries; `lemmas` non-empty restricts the matching lemma.
struct Slot {
  Category category = Category::CBG;
  std::optional<Pos> pos;
  std::set<std::string> lemmas;

  bool operator==(const Slot&) const = default;
};

std::string to_string(const Slot& slot);

struct KeywordTemplate {
  std::string keyword;  // lemma, possibly multi-word
  Category category = Category::CBG;
  bool extension = false;  // added to the lexicon when the set is loaded
};

struct PhraseTemplate {
  std::vector<Slot> slots;  // 2 or 3
  std::size_t max_gap = 4;
};

struct SentenceTemplate {
  std::string name;
  std::vector<Slot> required;
  std::vector<Slot> forbidden;
  Topic topic = Topic::Other;
  SentenceKind kind = SentenceKind::Other;
};

struct BugReportTemplate {
  std::string name;
  std::set<Topic> topics;
  std::size_t min_sentence_matches = 1;
};

struct LinguisticPattern {
  std::string id;
  Level level = Level::Word;
  std::variant<KeywordTemplate, PhraseTemplate, SentenceTemplate, BugReportTemplate> payload;
  std::string description;
  std::string example;  // exemplar text used in prompts

  const KeywordTemplate& keyword() const { return std::get<KeywordTemplate>(payload); }
  const PhraseTemplate& phrase() const { return std::get<PhraseTemplate>(payload); }
  const SentenceTemplate& sentence() const { return std::get<SentenceTemplate>(payload); }
  const BugReportTemplate& bug_report() const { return std::get<BugReportTemplate>(payload); }
};

class PatternSet {
 public:
  PatternSet() = default;

  /// Throws InvalidPatternSet on grammar errors, unknown categories,
  /// duplicate ids or empty requirement lists.
  static PatternSet parse(std::string_view text);
  static PatternSet load(const std::filesystem::path& path);

  const std::string& version() const { return version_; }
  const std::vector<LinguisticPattern>& patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }
  std::size_t count(Level level) const;

  const LinguisticPattern* find(std::string_view id) const;
  // Position in patterns(); throws PreconditionViolation for unknown ids.
  std::size_t index_of(std::string_view id) const;

  /// SHA-256 over the ordered pattern ids and version. Feature layouts and
  /// match reports are bound to it.
  const std::string& layout_hash() const { return layout_hash_; }

  /// `base` plus every keyword the set marks as an extension.
  Lexicon effective_lexicon(const Lexicon& base) const;

  /// Copy keeping the listed patterns, in set order.
  PatternSet subset(const std::set<std::string>& ids) const;

  std::string serialize() const;

 private:
  void finalize();

  std::string version_ = "unversioned";
  std::vector<LinguisticPattern> patterns_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::string layout_hash_;
};

struct Hit {
  std::string pattern_id;
  std::size_t sentence_index = 0;
  std::size_t begin = 0;  // character span inside the sentence text
  std::size_t end = 0;
  // Sentence hits only: a NEG word directly governs a concurrency verb of
  // the match. Such hits do not feed bug-report aggregation.
  bool negated = false;

  bool operator==(const Hit&) const = default;
  auto operator<=>(const Hit&) const = default;
};

struct MatchReport {
  std::string report_id;
  std::string layout_hash;
  std::vector<Hit> word_hits, phrase_hits, sentence_hits, br_hits;

  const std::vector<Hit>& hits(Level level) const;
  std::set<Level> matched_levels() const;
  bool matched(Level level) const { return !hits(level).empty(); }
  std::set<std::string> matched_ids() const;

  bool operator==(const MatchReport&) const = default;
};

/// A run of tokens acting as one lexicon word: a single token, or a
/// multi-word entry matched leftmost-longest over lemmas.
struct Unit {
  std::size_t first = 0;  // token index
  std::size_t last = 0;   // inclusive
  std::string lemma;
  std::set<std::pair<Category, Pos>> labels;

  bool satisfies(const Slot& slot) const;
  std::size_t width() const { return last - first + 1; }
};

std::vector<Unit> sentence_units(const ProcessedSentence& sentence, const Lexicon& lexicon);

/// Confirms or rejects rule-mode candidates. Implementations return the
/// raw model text; the matcher applies the constrained parse itself.
class Adjudicator {
 public:
  virtual ~Adjudicator() = default;
  virtual std::string ask(const std::string& prompt) = 0;
};

std::vector<Hit> match_word_level(const std::vector<ProcessedSentence>& sentences,
                                  const Lexicon& lexicon, const PatternSet& patterns);

std::vector<Hit> match_phrase_level(const std::vector<ProcessedSentence>& sentences,
                                    const Lexicon& lexicon, const PatternSet& patterns);

/// Rule mode when `adjudicator` is null. In adjudicator mode each sentence
/// with candidates is put to the adjudicator; names outside the candidate
/// list are discarded. Transport failures become AdjudicatorUnavailable.
std::vector<Hit> match_sentence_level(const std::vector<ProcessedSentence>& sentences,
                                      const Lexicon& lexicon, const PatternSet& patterns,
                                      Adjudicator* adjudicator = nullptr);

/// Rule aggregation: a template fires when at least min_sentence_matches
/// distinct sentences carry a non-negated hit of a contributing topic. The
/// hit points at the first such sentence.
std::vector<Hit> aggregate_bug_report(const std::vector<Hit>& sentence_hits,
                                      const PatternSet& patterns);

/// Aggregation gated by a per-template yes/no from the adjudicator, which
/// sees the report text and the candidate sentences.
std::vector<Hit> match_bug_report_level(const std::vector<Hit>& sentence_hits,
                                        const PatternSet& patterns,
                                        const std::vector<ProcessedSentence>& sentences,
                                        Adjudicator* adjudicator = nullptr);

/// Holds a pattern set together with its effective lexicon.
class Matcher {
 public:
  Matcher(const Lexicon& base, PatternSet patterns);

  const Lexicon& lexicon() const { return lexicon_; }
  const PatternSet& patterns() const { return patterns_; }

  std::vector<ProcessedSentence> preprocess(const IssueReport& report) const;
  MatchReport match(const IssueReport& report, Adjudicator* adjudicator = nullptr) const;
  MatchReport match(const std::string& report_id, const std::vector<ProcessedSentence>& sentences,
                    Adjudicator* adjudicator = nullptr) const;

 private:
  Lexicon lexicon_;
  PatternSet patterns_;
};

/// One JSON object per line. Throws ParseError on malformed input.
std::string serialize_match_reports(const std::vector<MatchReport>& reports);
std::vector<MatchReport> parse_match_reports(std::string_view text);

struct PhraseCandidate {
  std::vector<std::pair<Category, Pos>> slots;  // sorted
  std::size_t sentence_count = 0;
  double support = 0;
  std::string example;  // first sentence it was seen in

  std::string key() const;
};

/// Category-typed n-grams over lexicon units (n = 2 or 3) with at least one
/// CBG or CME slot, counted once per sentence. Units may be at most
/// `max_gap` tokens apart in total; SIZE_MAX means anywhere in the
/// sentence. Sorted by support descending, then key. Throws EmptyCorpus and
/// PreconditionViolation.
std::vector<PhraseCandidate> mine_phrase_candidates(
    const std::vector<ProcessedSentence>& sentences, const Lexicon& lexicon, std::size_t n,
    double min_support, std::size_t max_gap = 0);

enum class SaturationUnit { SubsetTenths, ByProject };

struct SaturationPoint {
  std::size_t iteration = 0;  // 1-based
  std::string unit_label;     // "subset 3" or the project name
  std::size_t new_entries = 0;
  std::size_t cumulative_entries = 0;
  std::size_t new_patterns = 0;
  std::size_t cumulative_patterns = 0;
  double recall_word = 0, recall_phrase = 0, recall_sentence = 0;
};

struct SaturationCurve {
  std::vector<SaturationPoint> points;
  std::size_t held_out_sentences = 0;
  // recall on the held-out sentences with the full lexicon and pattern set
  double full_recall_word = 0, full_recall_phrase = 0, full_recall_sentence = 0;
};

struct SaturationOptions {
  double held_out_fraction = 0.2;
  double entry_threshold = 0.05;
  std::uint64_t seed = 1;
};

/// Concurrency-related sentences of positive reports are split into a
/// held-out part and discovery units. Each iteration adds a unit, rediscovers
/// lexicon entries (frequency filter) and patterns (at least one match), and
/// measures held-out recall with only what has been discovered so far.
/// Throws MissingSentenceLabels when a positive report has no labels.
SaturationCurve saturation_curve(const std::vector<IssueReport>& reports, SaturationUnit unit,
                                 const Lexicon& lexicon, const PatternSet& patterns,
                                 const SaturationOptions& options = {});

}  // namespace conclp
