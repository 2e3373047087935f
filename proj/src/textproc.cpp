// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/textproc.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "conclp/util.hpp"
#include "embedded.hpp"

namespace conclp {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
// Non-ASCII bytes are glued into words so UTF-8 letters never split one.
bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

using WordSet = std::unordered_set<std::string_view>;

const WordSet kAbbreviations = {"e.g", "i.e", "etc", "vs", "fig", "no", "dr", "mr", "mrs",
                                "ms",  "cf",  "al",  "approx", "eq", "resp", "ca", "st"};

const WordSet kDeterminers = {"the",  "a",     "an",    "this",  "these", "those", "my",
                              "your", "his",   "her",   "its",   "our",   "their", "some",
                              "any",  "each",  "every", "another", "no",  "whose", "one",
                              "same", "such",  "that"};

const WordSet kPrepositions = {"of",    "in",      "on",     "at",     "for",   "from",
                               "by",    "with",    "about",  "into",   "onto",  "over",
                               "under", "between", "through", "during", "after", "before",
                               "against", "among", "via",    "per",    "inside", "within",
                               "upon",  "across"};

const WordSet kAuxiliaries = {"is",    "are",   "was",  "were",  "be",     "been",  "being",
                              "am",    "do",    "does", "did",   "will",   "would", "can",
                              "could", "should", "may", "might", "must",   "shall", "has",
                              "have",  "had",   "cannot", "wo", "ca"};

const WordSet kSubjectPronouns = {"i", "you", "he", "she", "it", "we", "they", "who", "which"};

const WordSet kObjectWords = {"the", "a",   "an",   "this", "these", "those", "my",  "your",
                              "his", "her", "its",  "our",  "their", "it",    "them", "him",
                              "me",  "us",  "some", "any",  "each",  "every", "all",  "both"};

const WordSet kClosedClass = {
    "the",   "a",      "an",     "this",    "that",   "these",   "those",  "my",      "your",
    "his",   "her",    "its",    "our",     "their",  "some",    "any",    "each",    "every",
    "all",   "both",   "either", "another", "such",   "what",    "which",  "who",     "whom",
    "whose", "where",  "when",   "why",     "how",    "whether", "if",     "then",    "than",
    "so",    "because", "as",    "while",   "until",  "since",   "although", "though", "and",
    "or",    "but",    "i",      "me",      "you",    "he",      "him",    "she",     "it",
    "we",    "us",     "they",   "them",    "myself", "itself",  "there",  "here",    "of",
    "in",    "on",     "at",     "to",      "for",    "from",    "by",     "with",    "about",
    "into",  "onto",   "over",   "under",   "between", "through", "during", "after",  "before",
    "above", "below",  "against", "among",  "via",    "per",     "up",     "down",    "out",
    "off",   "be",     "is",     "are",     "was",    "were",    "been",   "being",   "am",
    "have",  "has",    "had",    "having",  "do",     "does",    "did",    "done",    "will",
    "would", "can",    "could",  "should",  "may",    "might",   "must",   "shall",   "also",
    "just",  "only",   "very",   "too",     "even",   "more",    "most",   "much",    "many",
    "few",   "less",   "least",  "same",    "other",  "else",    "please", "thanks",  "hi",
    "hello", "yes",    "ok",     "etc",     "inside", "within",  "upon",   "across",  "one"};

const WordSet kAdjectiveWords = {"wrong",   "stale", "flaky", "parallel", "async", "invalid",
                                 "incorrect", "faulty", "fair", "safe",   "unsafe", "same",
                                 "new",     "old",   "slow",  "fast",     "high",  "low",
                                 "main",    "bad",   "good",  "full",     "empty", "free",
                                 "busy",    "idle",  "dead",  "alive",    "multiple", "single"};

constexpr std::string_view kAdjectiveSuffixes[] = {"ous", "ful", "ive", "ent", "ant", "ic",
                                                   "ible", "able", "ed", "en", "less", "ile",
                                                   "al"};
constexpr std::string_view kStrongAdjectiveSuffixes[] = {"ous", "ful", "ive", "able", "ible",
                                                         "less", "ical"};
constexpr std::string_view kNounSuffixes[] = {"tion", "sion", "ment", "ness", "ity", "ance",
                                              "ence", "ship", "ism",  "ure",  "age", "er",
                                              "or"};

constexpr std::string_view kFileExtensions[] = {
    "java", "py",   "cpp", "cc",   "h",    "hpp",  "c",    "js",    "ts",  "txt", "md",
    "xml",  "json", "yml", "yaml", "properties", "log", "sh", "gradle", "html", "css", "jar",
    "so",   "dll",  "exe", "go",   "rs",   "kt",   "scala", "rb",  "conf", "cfg", "ini",
    "png",  "jpg",  "zip", "gz",   "tar",  "csv",  "sql",  "pom",  "lock", "toml"};

// Product and format names that look like CamelCase identifiers.
const WordSet kCamelCaseNames = {
    "iPhone",  "iPad",     "iOS",       "iPod",       "iCloud",    "iTunes",   "macOS",
    "MacOS",   "GitHub",   "GitLab",    "BitBucket",  "JavaScript", "TypeScript", "CoffeeScript",
    "YouTube", "LinkedIn", "WordPress", "PowerPoint", "PostgreSQL", "MySQL",   "MongoDB",
    "NaN",     "IntelliJ", "JetBrains", "VSCode",     "OpenJDK",   "DevOps",   "PyPI",
    "eBay",    "WiFi",     "OAuth",     "GraphQL",    "NoSQL",     "JUnit",    "TestNG"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool has_vowel(std::string_view s) {
  return s.find_first_of("aeiouy") != std::string_view::npos;
}

bool is_vowel(char c) { return std::string_view("aeiou").find(c) != std::string_view::npos; }

const std::unordered_map<std::string, std::string>& irregular_forms() {
  static const auto table = [] {
    std::unordered_map<std::string, std::string> t;
    std::istringstream in{std::string(embedded::kIrregularForms)};
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::istringstream fields(line);
      std::string form, lemma;
      if (fields >> form >> lemma) t.emplace(form, lemma);
    }
    return t;
  }();
  return table;
}

// Lemma for words with an apostrophe, or nullopt if there is none.
std::optional<std::string> contraction_lemma(const std::string& lower) {
  std::string norm = lower;
  // U+2019 right single quotation mark
  for (std::size_t p; (p = norm.find("\xe2\x80\x99")) != std::string::npos;) norm.replace(p, 3, "'");
  if (norm.find('\'') == std::string::npos) return std::nullopt;
  if (norm == "can't") return "cannot";
  if (ends_with(norm, "n't")) return "not";
  auto apos = norm.find('\'');
  return norm.substr(0, apos);
}

bool is_adjective_form(std::string_view lower) {
  if (kAdjectiveWords.count(lower)) return true;
  for (auto suf : kAdjectiveSuffixes)
    if (lower.size() > suf.size() + 2 && ends_with(lower, suf)) return true;
  return false;
}

std::size_t skip_sentence_space(std::string_view text, std::size_t i) {
  while (i < text.size() && is_space(text[i])) ++i;
  return i;
}

// Splits one paragraph (code already removed) into sentences.
void split_paragraph(std::string_view para, std::vector<std::string>& out) {
  std::size_t start = 0;
  for (std::size_t i = 0; i < para.size(); ++i) {
    char c = para[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i;
    while (j + 1 < para.size() && (para[j + 1] == '.' || para[j + 1] == '!' || para[j + 1] == '?'))
      ++j;
    // Closing quotes and brackets belong to the sentence they end.
    while (j + 1 < para.size() && (para[j + 1] == '"' || para[j + 1] == '\'' || para[j + 1] == ')'))
      ++j;
    std::size_t next = j + 1;
    if (next < para.size() && !is_space(para[next])) {
      i = j;
      continue;  // dotted identifiers, decimals, "?)" inside words
    }
    std::size_t k = skip_sentence_space(para, next);
    if (k < para.size() && !is_upper(para[k])) {
      i = j;
      continue;
    }
    if (c == '.' && j == i) {
      std::size_t w = i;
      while (w > start && !is_space(para[w - 1])) --w;
      std::string word = to_lower(para.substr(w, i - w));
      while (!word.empty() && (word[0] == '(' || word[0] == '"')) word.erase(0, 1);
      if (kAbbreviations.count(word)) {
        i = j;
        continue;
      }
    }
    std::string sentence = normalize_space(para.substr(start, j + 1 - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = k;
    i = k == 0 ? 0 : k - 1;
  }
  std::string tail = normalize_space(para.substr(std::min(start, para.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
}

}  // namespace

std::vector<std::string> segment_sentences(std::string_view title, std::string_view body) {
  std::vector<std::string> out;
  std::string t = normalize_space(title);
  if (!t.empty()) out.push_back(std::move(t));

  std::istringstream in{std::string(body)};
  std::string line, para;
  bool in_fence = false;
  auto flush = [&] {
    split_paragraph(para, out);
    para.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.rfind("```", 0) == 0 || stripped.rfind("~~~", 0) == 0) {
      in_fence = !in_fence;
      flush();
      continue;
    }
    if (in_fence) continue;
    if (line.rfind("    ", 0) == 0 || line.rfind("\t", 0) == 0) {
      flush();
      continue;
    }
    if (stripped.empty()) {
      flush();
      continue;
    }
    if (!para.empty()) para += ' ';
    para += stripped;
  }
  flush();
  return out;
}

std::vector<Token> tokenize(std::string_view sentence) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = sentence.size();
  while (i < n) {
    if (!is_word_char(sentence[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < n) {
      char c = sentence[i];
      if (is_word_char(c)) {
        ++i;
      } else if (c == '.' && i + 1 < n && is_word_char(sentence[i + 1]) &&
                 static_cast<unsigned char>(sentence[i + 1]) < 0x80) {
        ++i;
      } else if (c == '\'' && i + 1 < n && is_alpha(sentence[i + 1]) && i > b) {
        ++i;
      } else {
        break;
      }
    }
    if (i + 1 < n && sentence[i] == '(' && sentence[i + 1] == ')') i += 2;
    Token t;
    t.surface = std::string(sentence.substr(b, i - b));
    t.begin = b;
    t.end = i;
    out.push_back(std::move(t));
  }
  return out;
}

std::string lemmatize(std::string_view word, const Lexicon& lexicon) {
  std::string lower = to_lower(word);
  if (auto c = contraction_lemma(lower)) return *c;
  if (lexicon.contains_lemma(lower)) return lower;
  const auto& irregular = irregular_forms();
  if (auto it = irregular.find(lower); it != irregular.end()) return it->second;
  if (lower.size() < 4 || !is_alpha(lower.back())) return lower;

  std::vector<std::string> candidates;
  auto add = [&](std::string s) {
    if (s.size() >= 2 && std::find(candidates.begin(), candidates.end(), s) == candidates.end())
      candidates.push_back(std::move(s));
  };
  auto base = [&](std::string_view stem) {
    // stem as-is, undoubled, and with a silent e restored
    std::vector<std::string> forms;
    std::string s(stem);
    std::size_t k = s.size();
    if (k >= 3 && s[k - 1] == s[k - 2] && !is_vowel(s[k - 1]) && s[k - 1] != 'l' &&
        s[k - 1] != 's' && s[k - 1] != 'z')
      forms.push_back(s.substr(0, k - 1));
    forms.push_back(s);
    forms.push_back(s + "e");
    return forms;
  };
  // The default when no candidate is a known lemma.
  std::string fallback = lower;

  if (ends_with(lower, "ies") && lower.size() > 4) {
    add(lower.substr(0, lower.size() - 3) + "y");
    fallback = candidates.back();
  } else if (ends_with(lower, "sses") || ends_with(lower, "shes") || ends_with(lower, "ches") ||
             ends_with(lower, "xes") || ends_with(lower, "zes")) {
    add(lower.substr(0, lower.size() - 1));
    add(lower.substr(0, lower.size() - 2));
    fallback = lower.substr(0, lower.size() - 2);
  } else if (ends_with(lower, "s") && !ends_with(lower, "ss") && !ends_with(lower, "us") &&
             !ends_with(lower, "is")) {
    add(lower.substr(0, lower.size() - 1));
    fallback = candidates.back();
  } else if (ends_with(lower, "ied") && lower.size() > 4) {
    add(lower.substr(0, lower.size() - 3) + "y");
    fallback = candidates.back();
  } else if (ends_with(lower, "ed") && has_vowel(lower.substr(0, lower.size() - 2))) {
    auto forms = base(lower.substr(0, lower.size() - 2));
    for (auto& f : forms) add(f);
    fallback = candidates.front();
    std::string stem = lower.substr(0, lower.size() - 2);
    if (ends_with(stem, "at") || ends_with(stem, "iz") || ends_with(stem, "v") ||
        ends_with(stem, "us") || ends_with(stem, "ur") || ends_with(stem, "rg") ||
        ends_with(stem, "um"))
      fallback = stem + "e";
  } else if (ends_with(lower, "ing") && lower.size() > 5 &&
             has_vowel(lower.substr(0, lower.size() - 3))) {
    auto forms = base(lower.substr(0, lower.size() - 3));
    for (auto& f : forms) add(f);
    fallback = candidates.front();
    std::string stem = lower.substr(0, lower.size() - 3);
    if (ends_with(stem, "at") || ends_with(stem, "iz") || ends_with(stem, "v") ||
        ends_with(stem, "us") || ends_with(stem, "ur") || ends_with(stem, "rg") ||
        ends_with(stem, "um"))
      fallback = stem + "e";
  }
  for (const auto& c : candidates)
    if (lexicon.contains_lemma(c)) return c;
  return fallback;
}

bool HeuristicEntityRecognizer::is_entity(std::string_view word) const {
  if (word.empty() || !(is_alpha(word[0]) || word[0] == '_')) return false;
  if (ends_with(word, "()")) return word.size() > 2;
  if (word.find('.') != std::string_view::npos) {
    auto parts = split(word, '.');
    if (parts.size() < 2) return false;
    bool all_short = true;
    for (const auto& p : parts) {
      if (p.empty() || !(is_alpha(p[0]) || p[0] == '_')) return false;
      if (p.size() > 1) all_short = false;
    }
    if (all_short) return false;  // "e.g", "i.e"
    std::string last = to_lower(parts.back());
    for (auto ext : kFileExtensions)
      if (last == ext) return false;
    return true;
  }
  if (kCamelCaseNames.count(word)) return false;
  for (std::size_t i = 1; i < word.size(); ++i)
    if (is_lower(word[i - 1]) && is_upper(word[i])) return true;
  for (std::string_view suffix : {std::string_view("Exception"), std::string_view("Error")})
    if (word.size() > suffix.size() && ends_with(word, suffix)) return true;
  return false;
}

const EntityRecognizer& default_entity_recognizer() {
  static const HeuristicEntityRecognizer recognizer;
  return recognizer;
}

std::vector<Token> recognize_software_entities(std::string_view sentence,
                                               const EntityRecognizer& recognizer) {
  std::vector<Token> out;
  for (Token& t : tokenize(sentence)) {
    if (!recognizer.is_entity(t.surface)) continue;
    t.lemma = t.surface;
    t.pos = Pos::Api;
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

struct TagContext {
  const std::vector<Token>& tokens;  // tagged up to index i - 1
  const std::vector<std::string>& lowers;
  std::size_t i;

  // Closest earlier token, skipping adverbs and negation.
  const Token* prev_content() const {
    for (std::size_t k = i; k > 0; --k) {
      const Token& t = tokens[k - 1];
      if (t.pos != Pos::Adv) return &t;
    }
    return nullptr;
  }
  std::string_view prev_lower(std::size_t back) const {
    return i >= back ? std::string_view(lowers[i - back]) : std::string_view();
  }
  std::string_view next_lower() const {
    return i + 1 < lowers.size() ? std::string_view(lowers[i + 1]) : std::string_view();
  }

  bool strong_noun() const {
    if (i == 0) return false;
    std::string_view p = prev_lower(1);
    const Token& prev = tokens[i - 1];
    if (kDeterminers.count(p) || kPrepositions.count(p)) return true;
    if (prev.pos == Pos::Adj || is_digit(p.empty() ? ' ' : p[0])) return true;
    if (i >= 2 && kDeterminers.count(prev_lower(2)) && prev.pos != Pos::Verb &&
        prev.pos != Pos::Noun && !kAuxiliaries.count(p))
      return true;
    return false;
  }

  bool verbal(const std::string& lower, const std::string& lemma) const {
    if (lower != lemma && (ends_with(lower, "ed") || ends_with(lower, "ing")) &&
        !kDeterminers.count(prev_lower(1)))
      return true;
    if (lower != lemma && irregular_forms().count(lower) && !ends_with(lower, "s") &&
        !kDeterminers.count(prev_lower(1)))
      return true;
    const Token* prev = prev_content();
    if (prev) {
      std::string p = to_lower(prev->surface);
      if (p == "to" || kAuxiliaries.count(p) || kSubjectPronouns.count(p)) return true;
      bool inflected_s = lower != lemma && ends_with(lower, "s");
      bool prev_plural = prev->pos == Pos::Noun && to_lower(prev->surface) != prev->lemma &&
                         ends_with(p, "s");
      if (prev->pos == Pos::Noun && inflected_s) return true;
      if (prev_plural && lower == lemma) return true;
    }
    if (kObjectWords.count(next_lower()) && !strong_noun()) return true;
    return false;
  }
};

Pos choose_lexicon_pos(const std::set<Pos>& admitted, const std::string& lower,
                       const std::string& lemma, const TagContext& ctx) {
  bool verb = admitted.count(Pos::Verb) != 0;
  bool noun = admitted.count(Pos::Noun) != 0;
  bool adj = admitted.count(Pos::Adj) != 0;
  bool adv = admitted.count(Pos::Adv) != 0;

  auto nominal = [&] {
    if (adj && (!noun || is_adjective_form(lower))) return Pos::Adj;
    return noun ? Pos::Noun : Pos::Adj;
  };
  if (verb && (noun || adj)) {
    if (ctx.strong_noun()) return nominal();
    return ctx.verbal(lower, lemma) ? Pos::Verb : nominal();
  }
  if (verb) return ctx.strong_noun() && !ctx.verbal(lower, lemma) ? Pos::Noun : Pos::Verb;
  if (noun) return nominal();
  if (adv) {
    // Predicative position: "is missing", "was unable".
    static const WordSet copulas = {"is", "are", "was", "were", "be", "been", "become", "seems"};
    std::string_view next = ctx.next_lower();
    bool predicative = copulas.count(ctx.prev_lower(1)) != 0 &&
                       (next.empty() || next == "to" || kPrepositions.count(next) != 0);
    return adj && (predicative || is_adjective_form(lower)) ? Pos::Adj : Pos::Adv;
  }
  if (adj) return Pos::Adj;
  return Pos::Other;
}

Pos choose_open_pos(const std::string& lower, const std::string& lemma, const TagContext& ctx) {
  if (lower.empty() || is_digit(lower[0])) return Pos::Other;
  if (!is_alpha(lower[0])) return Pos::Other;
  if (lower.size() > 4 && ends_with(lower, "ly")) return Pos::Adv;
  if (ctx.verbal(lower, lemma)) return Pos::Verb;
  for (auto suf : kStrongAdjectiveSuffixes)
    if (lower.size() > suf.size() + 2 && ends_with(lower, suf)) return Pos::Adj;
  if (kAdjectiveWords.count(lower)) return Pos::Adj;
  if (ctx.strong_noun()) return Pos::Noun;
  for (auto suf : kNounSuffixes)
    if (lower.size() > suf.size() + 2 && ends_with(lemma, suf)) return Pos::Noun;
  return Pos::Other;
}

}  // namespace

std::vector<Token> tag_tokens(std::string_view sentence, const Lexicon& lexicon,
                              const EntityRecognizer& recognizer) {
  std::vector<Token> tokens = tokenize(sentence);
  std::vector<std::string> lowers;
  lowers.reserve(tokens.size());
  for (const auto& t : tokens) lowers.push_back(to_lower(t.surface));

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Token& t = tokens[i];
    const std::string& lower = lowers[i];
    if (recognizer.is_entity(t.surface)) {
      t.lemma = t.surface;
      t.pos = Pos::Api;
      continue;
    }
    TagContext ctx{tokens, lowers, i};
    if (kClosedClass.count(lower) && !lexicon.contains_lemma(lower)) {
      auto it = irregular_forms().find(lower);
      t.lemma = it != irregular_forms().end() ? it->second : lower;
      t.pos = Pos::Other;
      continue;
    }
    t.lemma = lemmatize(lower, lexicon);
    if (kClosedClass.count(t.lemma) && !lexicon.contains_lemma(t.lemma)) {
      t.pos = Pos::Other;
      continue;
    }
    std::set<Pos> admitted = lexicon.admitted_pos(t.lemma);
    t.pos = admitted.empty() ? choose_open_pos(lower, t.lemma, ctx)
                             : choose_lexicon_pos(admitted, lower, t.lemma, ctx);
  }
  return tokens;
}

ProcessedSentence::ProcessedSentence(std::string report_id, std::size_t index, std::string text,
                                     std::vector<Token> tokens)
    : report_id_(std::move(report_id)),
      index_(index),
      text_(std::move(text)),
      tokens_(std::move(tokens)) {
  for (const Token& t : tokens_) {
    switch (t.pos) {
      case Pos::Verb: verb_set_.insert(t.lemma); break;
      case Pos::Noun: noun_set_.insert(t.lemma); break;
      case Pos::Adj:
      case Pos::Adv: adv_adj_set_.insert(t.lemma); break;
      case Pos::Api: api_set_.insert(t.lemma); break;
      case Pos::Other: break;
    }
  }
}

bool ProcessedSentence::is_question() const {
  std::string t = trim(text_);
  while (!t.empty() && (t.back() == '"' || t.back() == '\'' || t.back() == ')')) t.pop_back();
  return !t.empty() && t.back() == '?';
}

std::vector<ProcessedSentence> process_report(const IssueReport& report, const Lexicon& lexicon,
                                              const EntityRecognizer& recognizer) {
  std::vector<ProcessedSentence> out;
  auto sentences = segment_sentences(report.title, report.body);
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto tokens = tag_tokens(sentences[i], lexicon, recognizer);
    out.emplace_back(report.id, i, std::move(sentences[i]), std::move(tokens));
  }
  return out;
}

std::string dump_sentences(const std::vector<ProcessedSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    nlohmann::json tokens = nlohmann::json::array();
    for (const auto& t : s.tokens())
      tokens.push_back({t.surface, t.lemma, to_string(t.pos), t.begin, t.end});
    nlohmann::json j{{"report_id", s.report_id()},
                     {"index", s.index()},
                     {"text", s.text()},
                     {"tokens", tokens}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace conclp
