// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "conclp/error.hpp"
#include "conclp/util.hpp"

namespace conclp {

namespace {

constexpr std::array<std::string_view, 6> kPosNames = {"NOUN", "VERB", "ADJ", "ADV", "API",
                                                       "OTHER"};
constexpr std::array<std::string_view, 10> kCategoryNames = {"CBG", "CME", "CTR", "POP", "PSY",
                                                             "AOT", "SYB", "API", "EXC", "NEG"};

// POS column of the reference category table.
std::set<Pos> reference_pos(Category c) {
  switch (c) {
    case Category::CBG:
    case Category::CME: return {Pos::Noun};
    case Category::CTR:
    case Category::SYB: return {Pos::Noun, Pos::Adj};
    case Category::POP:
    case Category::PSY: return {Pos::Verb};
    case Category::AOT:
    case Category::NEG: return {Pos::Adv, Pos::Adj};
    case Category::API:
    case Category::EXC: return {Pos::Api};
  }
  return {};
}

bool is_identifier_category(Category c) { return c == Category::API || c == Category::EXC; }

std::size_t word_count(const std::string& entry) {
  return static_cast<std::size_t>(std::count(entry.begin(), entry.end(), ' ')) + 1;
}

bool intersects(const std::set<Pos>& a, const std::set<Pos>& b) {
  for (Pos p : a)
    if (b.count(p)) return true;
  return false;
}

std::string pos_list(const std::set<Pos>& pos) {
  std::string out;
  for (Pos p : pos) {
    if (!out.empty()) out += ',';
    out += to_string(p);
  }
  return out;
}

}  // namespace

std::string_view to_string(Pos pos) { return kPosNames[static_cast<std::size_t>(pos)]; }

std::optional<Pos> parse_pos(std::string_view text) {
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < kPosNames.size(); ++i)
    if (kPosNames[i] == upper) return static_cast<Pos>(i);
  return std::nullopt;
}

std::string_view to_string(Category category) {
  return kCategoryNames[static_cast<std::size_t>(category)];
}

std::optional<Category> parse_category(std::string_view text) {
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
    if (kCategoryNames[i] == upper) return static_cast<Category>(i);
  return std::nullopt;
}

const WordCategory& Lexicon::category(Category abbr) const {
  return categories_[static_cast<std::size_t>(abbr)];
}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::array<bool, 10> seen{};
  std::optional<Category> current;
  std::size_t line_no = 0;

  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line[0] == '[') {
      auto close = line.find(']');
      if (close == std::string::npos)
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unterminated header");
      auto abbr = parse_category(line.substr(1, close - 1));
      if (!abbr)
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": unknown category " + line.substr(1, close - 1));
      auto idx = static_cast<std::size_t>(*abbr);
      if (seen[idx])
        throw Error(ErrorCode::DuplicateEntryConflict,
                    "category " + std::string(to_string(*abbr)) + " declared twice");
      seen[idx] = true;
      current = abbr;
      WordCategory& wc = lex.categories_[idx];
      wc.abbr = *abbr;
      wc.pos_constraint = reference_pos(*abbr);

      std::istringstream attrs(line.substr(close + 1));
      std::string attr;
      while (attrs >> attr) {
        auto eq = attr.find('=');
        if (eq == std::string::npos) continue;
        std::string key = attr.substr(0, eq), value = attr.substr(eq + 1);
        if (key == "pos") {
          wc.pos_constraint.clear();
          for (char& c : value)
            if (c == '&') c = ',';
          for (const auto& p : split(value, ',')) {
            auto pos = parse_pos(trim(p));
            if (!pos)
              throw Error(ErrorCode::ParseError,
                          "line " + std::to_string(line_no) + ": unknown POS " + p);
            wc.pos_constraint.insert(*pos);
          }
        } else if (key == "expected") {
          wc.expected_count = std::stoi(value);
        }
      }
      continue;
    }

    if (!current) {
      auto eq = line.find('=');
      if (eq != std::string::npos && trim(line.substr(0, eq)) == "version") {
        lex.version_ = trim(line.substr(eq + 1));
        continue;
      }
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": entry outside any category");
    }

    WordCategory& wc = lex.categories_[static_cast<std::size_t>(*current)];
    bool extension = line[0] == '+';
    std::string entry = normalize_space(extension ? std::string_view(line).substr(1) : line);
    if (!is_identifier_category(*current)) {
      std::string lowered = to_lower(entry);
      if (lowered != entry) {
        lex.warnings_.push_back(std::string(to_string(*current)) + " entry '" + entry +
                                "' lowercased");
        entry = lowered;
      }
    }
    if (wc.contains(entry))
      throw Error(ErrorCode::DuplicateEntryConflict,
                  "'" + entry + "' listed twice in " + std::string(to_string(*current)));
    (extension ? wc.extensions : wc.entries).insert(entry);
  }

  std::string missing;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      if (!missing.empty()) missing += ", ";
      missing += kCategoryNames[i];
    }
  }
  if (!missing.empty()) throw Error(ErrorCode::MissingCategory, missing);

  for (const WordCategory& wc : lex.categories_) {
    if (wc.size() == 0)
      throw Error(ErrorCode::ParseError, std::string(to_string(wc.abbr)) + " has no entries");
    if (wc.pos_constraint != reference_pos(wc.abbr))
      lex.warnings_.push_back(std::string(to_string(wc.abbr)) + " pos=" + pos_list(wc.pos_constraint) +
                              " differs from reference " + pos_list(reference_pos(wc.abbr)));
    if (wc.expected_count > 0 && static_cast<int>(wc.entries.size()) != wc.expected_count)
      lex.warnings_.push_back(std::string(to_string(wc.abbr)) + " has " +
                              std::to_string(wc.entries.size()) + " entries, expected " +
                              std::to_string(wc.expected_count));
  }

  // A lemma may live in several categories only when their POS constraints
  // are disjoint; otherwise categorize() would be ambiguous.
  for (std::size_t i = 0; i < lex.categories_.size(); ++i) {
    for (std::size_t j = i + 1; j < lex.categories_.size(); ++j) {
      const auto& a = lex.categories_[i];
      const auto& b = lex.categories_[j];
      if (!intersects(a.pos_constraint, b.pos_constraint)) continue;
      for (const auto* set : {&a.entries, &a.extensions}) {
        for (const auto& e : *set) {
          if (b.contains(e))
            throw Error(ErrorCode::DuplicateEntryConflict,
                        "'" + e + "' in both " + std::string(to_string(a.abbr)) + " and " +
                            std::string(to_string(b.abbr)) + " with overlapping POS");
        }
      }
    }
  }

  lex.rebuild_index();
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) { return parse(read_file(path)); }

void Lexicon::rebuild_index() {
  word_index_.clear();
  api_index_.clear();
  longest_entry_words_ = 1;
  for (const WordCategory& wc : categories_) {
    for (const auto* set : {&wc.entries, &wc.extensions}) {
      for (const auto& e : *set) {
        auto& index = is_identifier_category(wc.abbr) ? api_index_ : word_index_;
        index[e].push_back(wc.abbr);
        longest_entry_words_ = std::max(longest_entry_words_, word_count(e));
      }
    }
  }
}

std::set<Category> Lexicon::categorize(std::string_view lemma, Pos pos) const {
  std::set<Category> out;
  if (pos == Pos::Api) {
    // The identifier itself, then every suffix that starts after a '.'.
    std::string key(lemma);
    while (true) {
      if (auto it = api_index_.find(key); it != api_index_.end())
        for (Category c : it->second)
          if (category(c).admits(pos)) out.insert(c);
      auto dot = key.find('.');
      if (dot == std::string::npos) break;
      key = key.substr(dot + 1);
    }
    return out;
  }
  if (auto it = word_index_.find(std::string(lemma)); it != word_index_.end())
    for (Category c : it->second)
      if (category(c).admits(pos)) out.insert(c);
  return out;
}

std::set<Pos> Lexicon::admitted_pos(std::string_view lemma) const {
  std::set<Pos> out;
  if (auto it = word_index_.find(std::string(lemma)); it != word_index_.end())
    for (Category c : it->second)
      out.insert(category(c).pos_constraint.begin(), category(c).pos_constraint.end());
  return out;
}

bool Lexicon::contains_lemma(std::string_view lemma) const {
  return word_index_.count(std::string(lemma)) != 0;
}

std::vector<PhraseOccurrence> Lexicon::find_phrases(std::span<const std::string> lemmas) const {
  std::vector<PhraseOccurrence> out;
  if (longest_entry_words_ < 2) return out;
  for (std::size_t i = 0; i < lemmas.size(); ++i) {
    std::string key = lemmas[i];
    for (std::size_t len = 2; len <= longest_entry_words_ && i + len <= lemmas.size(); ++len) {
      key += ' ';
      key += lemmas[i + len - 1];
      if (word_index_.count(key)) out.push_back({i, i + len - 1, key});
    }
  }
  return out;
}

Lexicon Lexicon::with_extensions(Category abbr, std::span<const std::string> entries) const {
  Lexicon copy = *this;
  WordCategory& wc = copy.categories_[static_cast<std::size_t>(abbr)];
  for (const auto& e : entries) {
    std::string entry = is_identifier_category(abbr) ? e : to_lower(e);
    if (!wc.contains(entry)) wc.extensions.insert(entry);
  }
  copy.rebuild_index();
  return copy;
}

Lexicon Lexicon::restricted(const std::function<bool(Category, const std::string&)>& keep) const {
  Lexicon copy = *this;
  copy.warnings_.clear();
  for (WordCategory& wc : copy.categories_) {
    if (wc.abbr == Category::NEG) continue;
    std::erase_if(wc.entries, [&](const std::string& e) { return !keep(wc.abbr, e); });
    std::erase_if(wc.extensions, [&](const std::string& e) { return !keep(wc.abbr, e); });
  }
  copy.version_ += "+restricted";
  copy.rebuild_index();
  return copy;
}

std::string Lexicon::serialize() const {
  std::ostringstream out;
  out << "version = " << version_ << "\n";
  for (const WordCategory& wc : categories_) {
    out << "\n[" << to_string(wc.abbr) << "] pos=" << pos_list(wc.pos_constraint);
    if (wc.expected_count > 0) out << " expected=" << wc.expected_count;
    out << "\n";
    for (const auto& e : wc.entries) out << e << "\n";
    for (const auto& e : wc.extensions) out << "+" << e << "\n";
  }
  return out.str();
}

std::vector<EntryCount> frequency_filter(std::span<const EntryCount> candidates,
                                         std::size_t corpus_sentence_count, double threshold) {
  if (corpus_sentence_count == 0) throw Error(ErrorCode::ZeroCorpus, "no sentences");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::PreconditionViolation, "threshold must lie in [0, 1]");
  std::vector<EntryCount> kept;
  for (const auto& c : candidates) {
    double freq = static_cast<double>(c.count) / static_cast<double>(corpus_sentence_count);
    if (freq >= threshold) kept.push_back(c);
  }
  return kept;
}

}  // namespace conclp
