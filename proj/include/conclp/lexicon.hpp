// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace conclp {

enum class Pos { Noun, Verb, Adj, Adv, Api, Other };

std::string_view to_string(Pos pos);
std::optional<Pos> parse_pos(std::string_view text);

/// The ten word categories used to build every pattern level.
///
/// CBG concurrency bug nouns, CME concurrency mechanism nouns, CTR concurrency
/// terminology, POP programming operation verbs, PSY programming symptom
/// verbs, AOT adverbs of time, SYB synonyms for bug, API concurrency APIs,
/// EXC exceptions, NEG negation words.
enum class Category { CBG, CME, CTR, POP, PSY, AOT, SYB, API, EXC, NEG };

inline constexpr std::array<Category, 10> kAllCategories = {
    Category::CBG, Category::CME, Category::CTR, Category::POP, Category::PSY,
    Category::AOT, Category::SYB, Category::API, Category::EXC, Category::NEG};

std::string_view to_string(Category category);
std::optional<Category> parse_category(std::string_view text);

struct WordCategory {
  Category abbr = Category::CBG;
  std::set<Pos> pos_constraint;
  // Base entries; these are what expected_count is checked against.
  std::set<std::string> entries;
  // Entries added by later derivation iterations (pattern-set keywords,
  // saturation runs). They participate in lookups like core entries.
  std::set<std::string> extensions;
  int expected_count = 0;

  bool admits(Pos pos) const { return pos_constraint.count(pos) != 0; }
  bool contains(const std::string& entry) const {
    return entries.count(entry) != 0 || extensions.count(entry) != 0;
  }
  std::size_t size() const { return entries.size() + extensions.size(); }
};

/// A multi-word lexicon entry found over consecutive lemmas.
struct PhraseOccurrence {
  std::size_t first = 0;  // index of the first lemma
  std::size_t last = 0;   // index of the last lemma, inclusive
  std::string entry;
};

class Lexicon {
 public:
  Lexicon() = default;

  /// Parses the sectioned lexicon format. Throws MissingCategory,
  /// DuplicateEntryConflict or ParseError.
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);

  const std::string& version() const { return version_; }
  const WordCategory& category(Category abbr) const;
  const std::array<WordCategory, 10>& categories() const { return categories_; }

  // Non-fatal findings from load, e.g. entry counts that drift from the
  // expected totals.
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Every category whose entries contain `lemma` and whose POS constraint
  /// admits `pos`. API-tagged identifiers also match on dotted suffixes, so
  /// `mutex.lock()` is looked up as `lock()` too.
  std::set<Category> categorize(std::string_view lemma, Pos pos) const;

  /// Union of the POS constraints of all categories listing `lemma`.
  std::set<Pos> admitted_pos(std::string_view lemma) const;

  bool contains_lemma(std::string_view lemma) const;

  /// Multi-word entries over a lemma sequence, leftmost first.
  std::vector<PhraseOccurrence> find_phrases(std::span<const std::string> lemmas) const;
  std::size_t longest_entry_words() const { return longest_entry_words_; }

  /// Copy with `entries` added as extensions of `abbr`.
  Lexicon with_extensions(Category abbr, std::span<const std::string> entries) const;

  /// Copy keeping only entries for which `keep` returns true. NEG is never
  /// restricted: negation is context, not discovered vocabulary.
  Lexicon restricted(const std::function<bool(Category, const std::string&)>& keep) const;

  std::string serialize() const;

 private:
  void rebuild_index();

  std::string version_ = "unversioned";
  std::array<WordCategory, 10> categories_{};
  std::vector<std::string> warnings_;
  // lemma -> categories listing it (word and multi-word entries)
  std::unordered_map<std::string, std::vector<Category>> word_index_;
  // identifier -> API/EXC categories listing it
  std::unordered_map<std::string, std::vector<Category>> api_index_;
  std::size_t longest_entry_words_ = 1;
};

struct EntryCount {
  std::string lemma;
  std::size_t count = 0;
};

/// Keeps entries with count / corpus_sentence_count >= threshold, in input
/// order. Throws ZeroCorpus when the corpus is empty.
std::vector<EntryCount> frequency_filter(std::span<const EntryCount> candidates,
                                         std::size_t corpus_sentence_count, double threshold);

}  // namespace conclp
