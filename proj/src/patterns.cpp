// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/patterns.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>

#include "conclp/error.hpp"
#include "conclp/util.hpp"
#include "conclp/verdict.hpp"

namespace conclp {

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Word: return "word";
    case Level::Phrase: return "phrase";
    case Level::Sentence: return "sentence";
    case Level::BugReport: return "br";
  }
  return "word";
}

std::optional<Level> parse_level(std::string_view text) {
  std::string t = to_lower(trim(text));
  if (t == "word" || t == "kw") return Level::Word;
  if (t == "phrase" || t == "ph") return Level::Phrase;
  if (t == "sentence" || t == "se") return Level::Sentence;
  if (t == "br" || t == "bug-report" || t == "bugreport" || t == "bug_report") return Level::BugReport;
  return std::nullopt;
}

std::string_view to_string(Topic topic) {
  switch (topic) {
    case Topic::Lock: return "Lock";
    case Topic::Thread: return "Thread";
    case Topic::Race: return "Race";
    case Topic::Atomicity: return "Atomicity";
    case Topic::Sync: return "Sync";
    case Topic::Other: return "Other";
  }
  return "Other";
}

std::optional<Topic> parse_topic(std::string_view text) {
  for (Topic t : {Topic::Lock, Topic::Thread, Topic::Race, Topic::Atomicity, Topic::Sync, Topic::Other})
    if (to_lower(to_string(t)) == to_lower(text)) return t;
  return std::nullopt;
}

std::string to_string(const Slot& slot) {
  std::string out(to_string(slot.category));
  if (slot.pos) out += ":" + std::string(to_string(*slot.pos));
  if (!slot.lemmas.empty()) {
    std::vector<std::string> l(slot.lemmas.begin(), slot.lemmas.end());
    out += "[" + join(l, "|") + "]";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pattern file parsing

namespace {

[[noreturn]] void invalid(const std::string& id, const std::string& why) {
  throw Error(ErrorCode::InvalidPatternSet, (id.empty() ? "" : "[" + id + "] ") + why);
}

// Splits on whitespace outside quotes and brackets; quotes are removed.
std::vector<std::string> lex_fields(std::string_view s, const std::string& id) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quote = false, have = false;
  int depth = 0;
  for (char c : s) {
    if (in_quote) {
      if (c == '"') in_quote = false;
      else cur += c;
      continue;
    }
    if (c == '"') {
      in_quote = have = true;
    } else if (c == '[') {
      ++depth;
      cur += c;
      have = true;
    } else if (c == ']') {
      --depth;
      cur += c;
    } else if (std::isspace(static_cast<unsigned char>(c)) && depth == 0) {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur += c;
      have = true;
    }
  }
  if (in_quote || depth != 0) invalid(id, "unbalanced quote or bracket");
  if (have) out.push_back(cur);
  return out;
}

Slot parse_slot(std::string_view text, const std::string& id) {
  Slot slot;
  std::string_view head = text;
  if (auto lb = text.find('['); lb != std::string_view::npos) {
    if (text.back() != ']') invalid(id, "bad slot '" + std::string(text) + "'");
    head = text.substr(0, lb);
    for (const auto& l : split(text.substr(lb + 1, text.size() - lb - 2), '|')) {
      std::string lemma = trim(l);
      if (lemma.empty()) invalid(id, "empty lemma in slot '" + std::string(text) + "'");
      slot.lemmas.insert(lemma);
    }
  }
  std::string_view cat = head, pos;
  if (auto colon = head.find(':'); colon != std::string_view::npos) {
    cat = head.substr(0, colon);
    pos = head.substr(colon + 1);
  }
  auto c = parse_category(cat);
  if (!c) invalid(id, "unknown category '" + std::string(cat) + "'");
  slot.category = *c;
  if (!pos.empty() && pos != "ANY" && pos != "*") {
    auto p = parse_pos(pos);
    if (!p) invalid(id, "unknown POS '" + std::string(pos) + "'");
    slot.pos = *p;
  }
  return slot;
}

std::vector<Slot> parse_slot_list(std::string_view text, const std::string& id) {
  std::vector<Slot> out;
  // commas inside brackets do not separate slots
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(parse_slot(trim(cur), id));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(parse_slot(trim(cur), id));
  return out;
}

std::size_t parse_count(std::string_view text, const std::string& id, const std::string& key) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size())
    invalid(id, "bad " + key + " '" + std::string(text) + "'");
  return v;
}

LinguisticPattern parse_pattern(const std::string& id, std::string_view rest) {
  LinguisticPattern pat;
  pat.id = id;
  std::string prefix;
  for (char c : id) {
    if (!std::isalpha(static_cast<unsigned char>(c))) break;
    prefix += c;
  }
  auto fields = lex_fields(rest, id);
  std::map<std::string, std::string> kv;
  std::vector<std::string> bare;
  for (const auto& f : fields) {
    auto eq = f.find('=');
    if (eq == std::string::npos) {
      bare.push_back(f);
    } else if (!kv.emplace(f.substr(0, eq), f.substr(eq + 1)).second) {
      invalid(id, "repeated key '" + f.substr(0, eq) + "'");
    }
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  pat.description = take("description").value_or("");
  pat.example = take("example").value_or("");

  if (prefix == "KW") {
    pat.level = Level::Word;
    KeywordTemplate kw;
    kw.keyword = to_lower(normalize_space(take("keyword").value_or("")));
    if (kw.keyword.empty()) invalid(id, "missing keyword");
    auto cat = parse_category(take("category").value_or(""));
    if (!cat || (*cat != Category::CBG && *cat != Category::CME))
      invalid(id, "keyword category must be CBG or CME");
    kw.category = *cat;
    for (const auto& b : bare) {
      if (b == "extension") kw.extension = true;
      else invalid(id, "unexpected '" + b + "'");
    }
    if (pat.example.empty()) pat.example = kw.keyword;
    pat.payload = kw;
  } else if (prefix == "PH") {
    pat.level = Level::Phrase;
    PhraseTemplate ph;
    bool expect_slot = true;
    for (const auto& b : bare) {
      if (b == "+") {
        if (expect_slot) invalid(id, "misplaced '+'");
        expect_slot = true;
      } else {
        if (!expect_slot) invalid(id, "slots must be joined by '+'");
        ph.slots.push_back(parse_slot(b, id));
        expect_slot = false;
      }
    }
    if (expect_slot || ph.slots.size() < 2 || ph.slots.size() > 3)
      invalid(id, "a phrase template needs 2 or 3 slots");
    if (auto g = take("gap")) ph.max_gap = parse_count(*g, id, "gap");
    pat.payload = ph;
  } else if (prefix == "SE") {
    pat.level = Level::Sentence;
    SentenceTemplate se;
    se.name = take("name").value_or("");
    if (se.name.empty()) invalid(id, "missing name");
    se.required = parse_slot_list(take("require").value_or(""), id);
    if (se.required.empty()) invalid(id, "require must list at least one slot");
    if (auto f = take("forbid")) se.forbidden = parse_slot_list(*f, id);
    auto topic = parse_topic(take("topic").value_or("Other"));
    if (!topic) invalid(id, "unknown topic");
    se.topic = *topic;
    std::string kind = to_lower(take("kind").value_or("other"));
    if (kind == "action") se.kind = SentenceKind::Action;
    else if (kind == "symptom") se.kind = SentenceKind::Symptom;
    else if (kind == "other") se.kind = SentenceKind::Other;
    else invalid(id, "unknown kind '" + kind + "'");
    if (!bare.empty()) invalid(id, "unexpected '" + bare[0] + "'");
    pat.payload = se;
  } else if (prefix == "BR") {
    pat.level = Level::BugReport;
    BugReportTemplate br;
    br.name = take("name").value_or("");
    if (br.name.empty()) invalid(id, "missing name");
    for (const auto& t : split(take("topics").value_or(""), ',')) {
      auto topic = parse_topic(trim(t));
      if (!topic) invalid(id, "unknown topic '" + t + "'");
      br.topics.insert(*topic);
    }
    if (br.topics.empty()) invalid(id, "topics must not be empty");
    br.min_sentence_matches = parse_count(take("min").value_or("1"), id, "min");
    if (br.min_sentence_matches < 1) invalid(id, "min must be at least 1");
    if (!bare.empty()) invalid(id, "unexpected '" + bare[0] + "'");
    pat.payload = br;
  } else {
    invalid(id, "id must start with KW, PH, SE or BR");
  }
  if (!kv.empty()) invalid(id, "unknown key '" + kv.begin()->first + "'");
  return pat;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string serialize_pattern(const LinguisticPattern& p) {
  std::string out = "[" + p.id + "]";
  switch (p.level) {
    case Level::Word: {
      const auto& kw = p.keyword();
      out += " keyword=" + quoted(kw.keyword) + " category=" + std::string(to_string(kw.category));
      if (kw.extension) out += " extension";
      break;
    }
    case Level::Phrase: {
      const auto& ph = p.phrase();
      for (std::size_t i = 0; i < ph.slots.size(); ++i)
        out += (i ? " + " : " ") + quoted(to_string(ph.slots[i]));
      out += " gap=" + std::to_string(ph.max_gap);
      break;
    }
    case Level::Sentence: {
      const auto& se = p.sentence();
      auto list = [](const std::vector<Slot>& slots) {
        std::vector<std::string> parts;
        for (const auto& s : slots) parts.push_back(to_string(s));
        return join(parts, ",");
      };
      out += " name=" + quoted(se.name) + " topic=" + std::string(to_string(se.topic));
      out += std::string(" kind=") +
             (se.kind == SentenceKind::Action ? "action"
                                              : se.kind == SentenceKind::Symptom ? "symptom" : "other");
      out += " require=" + quoted(list(se.required));
      if (!se.forbidden.empty()) out += " forbid=" + quoted(list(se.forbidden));
      break;
    }
    case Level::BugReport: {
      const auto& br = p.bug_report();
      std::vector<std::string> topics;
      for (Topic t : br.topics) topics.emplace_back(to_string(t));
      out += " name=" + quoted(br.name) + " topics=" + join(topics, ",") +
             " min=" + std::to_string(br.min_sentence_matches);
      break;
    }
  }
  if (!p.example.empty()) out += " example=" + quoted(p.example);
  if (!p.description.empty()) out += " description=" + quoted(p.description);
  return out;
}

}  // namespace

PatternSet PatternSet::parse(std::string_view text) {
  PatternSet set;
  std::vector<std::string> logical;
  for (const auto& raw : split(text, '\n')) {
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (std::isspace(static_cast<unsigned char>(line[0]))) {
      if (logical.empty()) invalid("", "continuation line before any pattern");
      logical.back() += " " + t;
    } else {
      logical.push_back(t);
    }
  }
  for (const auto& line : logical) {
    if (line[0] != '[') {
      auto eq = line.find('=');
      if (eq == std::string::npos || trim(line.substr(0, eq)) != "version")
        invalid("", "unexpected line '" + line + "'");
      set.version_ = trim(line.substr(eq + 1));
      continue;
    }
    auto close = line.find(']');
    if (close == std::string::npos) invalid("", "unterminated header '" + line + "'");
    std::string id = line.substr(1, close - 1);
    if (set.index_.count(id)) invalid(id, "duplicate id");
    set.index_[id] = set.patterns_.size();
    set.patterns_.push_back(parse_pattern(id, std::string_view(line).substr(close + 1)));
  }
  if (set.patterns_.empty()) invalid("", "no patterns");
  set.finalize();
  return set;
}

PatternSet PatternSet::load(const std::filesystem::path& path) { return parse(read_file(path)); }

void PatternSet::finalize() {
  index_.clear();
  for (std::size_t i = 0; i < patterns_.size(); ++i) index_[patterns_[i].id] = i;
  layout_hash_ = sha256_hex(serialize());
}

std::size_t PatternSet::count(Level level) const {
  return static_cast<std::size_t>(std::count_if(patterns_.begin(), patterns_.end(),
                                                [&](const auto& p) { return p.level == level; }));
}

const LinguisticPattern* PatternSet::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &patterns_[it->second];
}

std::size_t PatternSet::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw Error(ErrorCode::PreconditionViolation, "unknown pattern id '" + std::string(id) + "'");
  return it->second;
}

Lexicon PatternSet::effective_lexicon(const Lexicon& base) const {
  std::vector<std::string> cbg, cme;
  for (const auto& p : patterns_) {
    if (p.level != Level::Word || !p.keyword().extension) continue;
    (p.keyword().category == Category::CBG ? cbg : cme).push_back(p.keyword().keyword);
  }
  return base.with_extensions(Category::CBG, cbg).with_extensions(Category::CME, cme);
}

PatternSet PatternSet::subset(const std::set<std::string>& ids) const {
  PatternSet out;
  out.version_ = version_;
  for (const auto& p : patterns_)
    if (ids.count(p.id)) out.patterns_.push_back(p);
  out.finalize();
  return out;
}

std::string PatternSet::serialize() const {
  std::string out = "version = " + version_ + "\n";
  for (const auto& p : patterns_) out += serialize_pattern(p) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Match reports

const std::vector<Hit>& MatchReport::hits(Level level) const {
  switch (level) {
    case Level::Word: return word_hits;
    case Level::Phrase: return phrase_hits;
    case Level::Sentence: return sentence_hits;
    case Level::BugReport: return br_hits;
  }
  return word_hits;
}

std::set<Level> MatchReport::matched_levels() const {
  std::set<Level> out;
  for (Level l : kAllLevels)
    if (matched(l)) out.insert(l);
  return out;
}

std::set<std::string> MatchReport::matched_ids() const {
  std::set<std::string> out;
  for (Level l : kAllLevels)
    for (const auto& h : hits(l)) out.insert(h.pattern_id);
  return out;
}

namespace {

nlohmann::json hits_to_json(const std::vector<Hit>& hits) {
  auto arr = nlohmann::json::array();
  for (const auto& h : hits) {
    nlohmann::json j = {{"id", h.pattern_id}, {"sentence", h.sentence_index}, {"begin", h.begin},
                        {"end", h.end}};
    if (h.negated) j["negated"] = true;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<Hit> hits_from_json(const nlohmann::json& arr) {
  std::vector<Hit> out;
  for (const auto& j : arr) {
    Hit h;
    h.pattern_id = j.at("id").get<std::string>();
    h.sentence_index = j.at("sentence").get<std::size_t>();
    h.begin = j.at("begin").get<std::size_t>();
    h.end = j.at("end").get<std::size_t>();
    h.negated = j.value("negated", false);
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace

std::string serialize_match_reports(const std::vector<MatchReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    nlohmann::json j = {{"report_id", r.report_id},
                        {"layout_hash", r.layout_hash},
                        {"word", hits_to_json(r.word_hits)},
                        {"phrase", hits_to_json(r.phrase_hits)},
                        {"sentence", hits_to_json(r.sentence_hits)},
                        {"br", hits_to_json(r.br_hits)}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<MatchReport> parse_match_reports(std::string_view text) {
  std::vector<MatchReport> out;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      MatchReport r;
      r.report_id = j.at("report_id").get<std::string>();
      r.layout_hash = j.at("layout_hash").get<std::string>();
      r.word_hits = hits_from_json(j.at("word"));
      r.phrase_hits = hits_from_json(j.at("phrase"));
      r.sentence_hits = hits_from_json(j.at("sentence"));
      r.br_hits = hits_from_json(j.at("br"));
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "match report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Units

bool Unit::satisfies(const Slot& slot) const {
  if (!slot.lemmas.empty() && !slot.lemmas.count(lemma)) return false;
  for (const auto& [c, p] : labels)
    if (c == slot.category && (!slot.pos || *slot.pos == p)) return true;
  return false;
}

namespace {

// Multi-word occurrences over lemmas and over lowercased surfaces, so that
// entries like "lost update" survive lemmatization of their first word.
std::vector<PhraseOccurrence> multiword_occurrences(const std::vector<Token>& tokens,
                                                    const Lexicon& lexicon) {
  std::vector<std::string> lemmas, surfaces;
  for (const auto& t : tokens) {
    lemmas.push_back(t.pos == Pos::Api ? t.lemma : to_lower(t.lemma));
    surfaces.push_back(to_lower(t.surface));
  }
  auto a = lexicon.find_phrases(lemmas);
  auto b = lexicon.find_phrases(surfaces);
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end(), [](const auto& x, const auto& y) {
    return std::tie(x.first, x.last, x.entry) < std::tie(y.first, y.last, y.entry);
  });
  a.erase(std::unique(a.begin(), a.end(),
                      [](const auto& x, const auto& y) {
                        return x.first == y.first && x.last == y.last && x.entry == y.entry;
                      }),
          a.end());
  return a;
}

}  // namespace

std::vector<Unit> sentence_units(const ProcessedSentence& sentence, const Lexicon& lexicon) {
  std::vector<Unit> units;
  const auto& tokens = sentence.tokens();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Unit u{i, i, tokens[i].lemma, {}};
    for (Category c : lexicon.categorize(tokens[i].lemma, tokens[i].pos)) u.labels.emplace(c, tokens[i].pos);
    if (!u.labels.empty()) units.push_back(std::move(u));
  }
  for (const auto& occ : multiword_occurrences(tokens, lexicon)) {
    Unit u{occ.first, occ.last, occ.entry, {}};
    for (Category c : kAllCategories) {
      const WordCategory& wc = lexicon.category(c);
      if (!wc.contains(occ.entry)) continue;
      Pos head = wc.admits(Pos::Noun) ? Pos::Noun : *wc.pos_constraint.begin();
      u.labels.emplace(c, head);
    }
    if (!u.labels.empty()) units.push_back(std::move(u));
  }
  std::sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) {
    return std::tie(a.first, a.last, a.lemma) < std::tie(b.first, b.last, b.lemma);
  });
  return units;
}

// ---------------------------------------------------------------------------
// Matching

namespace {

Hit span_hit(const std::string& id, const ProcessedSentence& s, std::size_t first, std::size_t last) {
  return Hit{id, s.index(), s.tokens()[first].begin, s.tokens()[last].end, false};
}

bool overlaps(const Unit& a, const Unit& b) { return !(a.last < b.first || b.last < a.first); }

// Leftmost-minimal window [s, e] that hosts one non-overlapping unit per
// slot with at most max_gap uncovered tokens in between.
std::optional<std::pair<std::size_t, std::size_t>> find_phrase(const std::vector<Unit>& units,
                                                               const PhraseTemplate& ph,
                                                               std::size_t token_count) {
  const std::size_t n = ph.slots.size();
  std::vector<std::vector<const Unit*>> cand(n);
  std::size_t widest = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& u : units)
      if (u.satisfies(ph.slots[k])) cand[k].push_back(&u);
    if (cand[k].empty()) return std::nullopt;
  }
  for (const auto& u : units) widest = std::max(widest, u.width());

  std::vector<const Unit*> chosen(n, nullptr);
  // depth-first fill of the slots inside [s, e]
  std::function<bool(std::size_t, std::size_t, std::size_t, std::size_t)> fill =
      [&](std::size_t k, std::size_t s, std::size_t e, std::size_t covered) -> bool {
    if (k == n) {
      bool starts = false, ends = false;
      for (const Unit* u : chosen) {
        starts |= u->first == s;
        ends |= u->last == e;
      }
      return starts && ends && (e - s + 1) - covered <= ph.max_gap;
    }
    for (const Unit* u : cand[k]) {
      if (u->first < s || u->last > e) continue;
      bool clash = false;
      for (std::size_t j = 0; j < k; ++j) clash |= overlaps(*chosen[j], *u);
      if (clash) continue;
      chosen[k] = u;
      if (fill(k + 1, s, e, covered + u->width())) return true;
    }
    return false;
  };
  for (std::size_t s = 0; s < token_count; ++s) {
    std::size_t limit = std::min(token_count - 1, s + ph.max_gap + n * widest);
    for (std::size_t e = s; e <= limit; ++e)
      if (fill(0, s, e, 0)) return std::make_pair(s, e);
  }
  return std::nullopt;
}

bool is_concurrency_verb(const Slot& slot) {
  return slot.pos == Pos::Verb && (slot.category == Category::POP || slot.category == Category::PSY);
}

bool negated_unit(const Unit& u, const std::vector<Unit>& units) {
  for (const auto& v : units) {
    bool neg = std::any_of(v.labels.begin(), v.labels.end(),
                           [](const auto& l) { return l.first == Category::NEG; });
    if (neg && v.last < u.first && u.first - v.last <= 3) return true;
  }
  return false;
}

struct SentenceCandidate {
  std::size_t pattern = 0;
  Hit hit;
};

// Rule-mode sentence hits for one sentence, in pattern order.
std::vector<SentenceCandidate> sentence_candidates(const ProcessedSentence& s,
                                                   const std::vector<Unit>& units,
                                                   const PatternSet& patterns) {
  std::vector<SentenceCandidate> out;
  const auto& all = patterns.patterns();
  for (std::size_t pi = 0; pi < all.size(); ++pi) {
    if (all[pi].level != Level::Sentence) continue;
    const SentenceTemplate& se = all[pi].sentence();
    if (se.kind == SentenceKind::Action && s.is_question()) continue;
    bool forbidden = false;
    for (const auto& f : se.forbidden)
      for (const auto& u : units) forbidden |= u.satisfies(f);
    if (forbidden) continue;
    std::size_t first = SIZE_MAX, last = 0;
    bool ok = true, negated = false;
    for (const auto& req : se.required) {
      const Unit* leftmost = nullptr;
      bool all_negated = true;
      for (const auto& u : units) {
        if (!u.satisfies(req)) continue;
        if (!leftmost) leftmost = &u;
        all_negated &= negated_unit(u, units);
      }
      if (!leftmost) {
        ok = false;
        break;
      }
      first = std::min(first, leftmost->first);
      last = std::max(last, leftmost->last);
      if (is_concurrency_verb(req) && all_negated) negated = true;
    }
    if (!ok) continue;
    Hit h = span_hit(all[pi].id, s, first, last);
    h.negated = negated;
    out.push_back({pi, h});
  }
  return out;
}

// Candidate names the adjudicator returned, matched case-insensitively
// against the candidate list; anything else is dropped.
std::set<std::string> confirmed_names(const std::string& raw, const std::vector<std::string>& names) {
  std::set<std::string> out;
  for (const auto& line : split(raw, '\n')) {
    std::string t = trim(line);
    while (!t.empty() && (t[0] == '-' || t[0] == '*' || std::isspace(static_cast<unsigned char>(t[0]))))
      t.erase(0, 1);
    while (!t.empty() && std::ispunct(static_cast<unsigned char>(t.back()))) t.pop_back();
    std::string lower = to_lower(trim(t));
    for (const auto& n : names)
      if (to_lower(n) == lower) out.insert(n);
  }
  return out;
}

std::string ask_adjudicator(Adjudicator& adj, const std::string& prompt) {
  try {
    return adj.ask(prompt);
  } catch (const Error& e) {
    throw Error(ErrorCode::AdjudicatorUnavailable, e.what());
  }
}

}  // namespace

std::vector<Hit> match_word_level(const std::vector<ProcessedSentence>& sentences,
                                  const Lexicon& lexicon, const PatternSet& patterns) {
  struct Keyword {
    std::string id;
    std::vector<std::string> words;
  };
  std::vector<Keyword> keywords;
  for (const auto& p : patterns.patterns()) {
    if (p.level != Level::Word) continue;
    const auto& kw = p.keyword();
    if (!lexicon.category(kw.category).contains(kw.keyword)) continue;
    keywords.push_back({p.id, split(kw.keyword, ' ')});
  }
  std::vector<Hit> out;
  for (const auto& s : sentences) {
    const auto& tokens = s.tokens();
    std::vector<std::string> lemmas, surfaces;
    for (const auto& t : tokens) {
      lemmas.push_back(to_lower(t.lemma));
      surfaces.push_back(to_lower(t.surface));
    }
    for (const auto& kw : keywords) {
      const std::size_t w = kw.words.size();
      for (std::size_t i = 0; i + w <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < w && match; ++k) {
          match = tokens[i + k].pos != Pos::Api &&
                  (lemmas[i + k] == kw.words[k] || surfaces[i + k] == kw.words[k]);
        }
        if (match) out.push_back(span_hit(kw.id, s, i, i + w - 1));
      }
    }
  }
  return out;
}

std::vector<Hit> match_phrase_level(const std::vector<ProcessedSentence>& sentences,
                                    const Lexicon& lexicon, const PatternSet& patterns) {
  std::vector<Hit> out;
  for (const auto& s : sentences) {
    auto units = sentence_units(s, lexicon);
    if (units.size() < 2) continue;
    for (const auto& p : patterns.patterns()) {
      if (p.level != Level::Phrase) continue;
      if (auto w = find_phrase(units, p.phrase(), s.tokens().size()))
        out.push_back(span_hit(p.id, s, w->first, w->second));
    }
  }
  return out;
}

std::vector<Hit> match_sentence_level(const std::vector<ProcessedSentence>& sentences,
                                      const Lexicon& lexicon, const PatternSet& patterns,
                                      Adjudicator* adjudicator) {
  std::vector<Hit> out;
  std::vector<std::string> vocabulary;
  for (const auto& p : patterns.patterns())
    if (p.level == Level::Sentence) vocabulary.push_back(p.sentence().name);
  for (const auto& s : sentences) {
    auto cands = sentence_candidates(s, sentence_units(s, lexicon), patterns);
    if (cands.empty()) continue;
    if (!adjudicator) {
      for (auto& c : cands) out.push_back(std::move(c.hit));
      continue;
    }
    std::vector<std::string> names;
    std::string prompt = "Sentence: " + s.text() + "\nCandidate patterns:\n";
    for (const auto& c : cands) {
      const auto& p = patterns.patterns()[c.pattern];
      names.push_back(p.sentence().name);
      prompt += "- " + p.sentence().name + ": " + p.example + "\n";
    }
    prompt += "Allowed answers: " + join(vocabulary, "; ") +
              "\nReply with the names of the candidate patterns this sentence expresses, one per "
              "line, or None.\n";
    auto confirmed = confirmed_names(ask_adjudicator(*adjudicator, prompt), names);
    for (auto& c : cands)
      if (confirmed.count(patterns.patterns()[c.pattern].sentence().name)) out.push_back(std::move(c.hit));
  }
  return out;
}

namespace {

struct BrCandidate {
  const LinguisticPattern* pattern;
  std::vector<const Hit*> contributing;
};

std::vector<BrCandidate> br_candidates(const std::vector<Hit>& sentence_hits, const PatternSet& patterns) {
  std::vector<BrCandidate> out;
  for (const auto& p : patterns.patterns()) {
    if (p.level != Level::BugReport) continue;
    const auto& br = p.bug_report();
    BrCandidate c{&p, {}};
    std::set<std::size_t> sentences;
    for (const auto& h : sentence_hits) {
      if (h.negated) continue;
      const LinguisticPattern* se = patterns.find(h.pattern_id);
      if (!se || se->level != Level::Sentence || !br.topics.count(se->sentence().topic)) continue;
      c.contributing.push_back(&h);
      sentences.insert(h.sentence_index);
    }
    if (sentences.size() >= br.min_sentence_matches) out.push_back(std::move(c));
  }
  return out;
}

Hit br_hit(const BrCandidate& c) {
  const Hit* first = c.contributing.front();
  return Hit{c.pattern->id, first->sentence_index, first->begin, first->end, false};
}

}  // namespace

std::vector<Hit> aggregate_bug_report(const std::vector<Hit>& sentence_hits, const PatternSet& patterns) {
  std::vector<Hit> out;
  for (const auto& c : br_candidates(sentence_hits, patterns)) out.push_back(br_hit(c));
  return out;
}

std::vector<Hit> match_bug_report_level(const std::vector<Hit>& sentence_hits,
                                        const PatternSet& patterns,
                                        const std::vector<ProcessedSentence>& sentences,
                                        Adjudicator* adjudicator) {
  auto cands = br_candidates(sentence_hits, patterns);
  std::vector<Hit> out;
  if (!adjudicator) {
    for (const auto& c : cands) out.push_back(br_hit(c));
    return out;
  }
  std::string report;
  for (const auto& s : sentences) report += (report.empty() ? "" : " ") + s.text();
  for (const auto& c : cands) {
    std::set<std::size_t> seen;
    std::string listing;
    for (const Hit* h : c.contributing) {
      if (!seen.insert(h->sentence_index).second) continue;
      for (const auto& s : sentences)
        if (s.index() == h->sentence_index) listing += "- " + s.text() + "\n";
    }
    std::string prompt = "Bug report: " + report + "\nCandidate sentences:\n" + listing +
                         "Question: is \"" + c.pattern->bug_report().name +
                         "\" the root cause of this bug report? Answer Yes or No.\n";
    if (is_positive(parse_verdict(ask_adjudicator(*adjudicator, prompt)))) out.push_back(br_hit(c));
  }
  return out;
}

Matcher::Matcher(const Lexicon& base, PatternSet patterns)
    : lexicon_(patterns.effective_lexicon(base)), patterns_(std::move(patterns)) {}

std::vector<ProcessedSentence> Matcher::preprocess(const IssueReport& report) const {
  return process_report(report, lexicon_);
}

MatchReport Matcher::match(const IssueReport& report, Adjudicator* adjudicator) const {
  return match(report.id, preprocess(report), adjudicator);
}

MatchReport Matcher::match(const std::string& report_id, const std::vector<ProcessedSentence>& sentences,
                           Adjudicator* adjudicator) const {
  MatchReport r;
  r.report_id = report_id;
  r.layout_hash = patterns_.layout_hash();
  r.word_hits = match_word_level(sentences, lexicon_, patterns_);
  r.phrase_hits = match_phrase_level(sentences, lexicon_, patterns_);
  r.sentence_hits = match_sentence_level(sentences, lexicon_, patterns_, adjudicator);
  r.br_hits = match_bug_report_level(r.sentence_hits, patterns_, sentences, adjudicator);
  return r;
}

// ---------------------------------------------------------------------------
// Mining

std::string PhraseCandidate::key() const {
  std::vector<std::string> parts;
  for (const auto& [c, p] : slots) parts.push_back(std::string(to_string(c)) + ":" + std::string(to_string(p)));
  return join(parts, "+");
}

std::vector<PhraseCandidate> mine_phrase_candidates(const std::vector<ProcessedSentence>& sentences,
                                                    const Lexicon& lexicon, std::size_t n,
                                                    double min_support, std::size_t max_gap) {
  if (n != 2 && n != 3) throw Error(ErrorCode::PreconditionViolation, "n must be 2 or 3");
  if (!(min_support >= 0 && min_support <= 1))
    throw Error(ErrorCode::PreconditionViolation, "min_support must lie in [0, 1]");
  if (sentences.empty()) throw Error(ErrorCode::EmptyCorpus, "no sentences to mine");

  using Label = std::pair<Category, Pos>;
  std::map<std::vector<Label>, PhraseCandidate> found;
  for (const auto& s : sentences) {
    auto units = sentence_units(s, lexicon);
    std::set<std::vector<Label>> here;
    auto emit = [&](const std::vector<const Unit*>& chosen) {
      std::vector<Label> combo(chosen.size());
      std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == chosen.size()) {
          bool anchored = std::any_of(combo.begin(), combo.end(), [](const Label& l) {
            return l.first == Category::CBG || l.first == Category::CME;
          });
          if (!anchored) return;
          auto sorted = combo;
          std::sort(sorted.begin(), sorted.end());
          here.insert(sorted);
          return;
        }
        for (const auto& l : chosen[k]->labels) {
          combo[k] = l;
          rec(k + 1);
        }
      };
      rec(0);
    };
    auto gap_ok = [&](const std::vector<const Unit*>& chosen) {
      std::size_t lo = SIZE_MAX, hi = 0, covered = 0;
      for (const Unit* u : chosen) {
        lo = std::min(lo, u->first);
        hi = std::max(hi, u->last);
        covered += u->width();
      }
      return max_gap == SIZE_MAX || (hi - lo + 1) - covered <= max_gap;
    };
    for (std::size_t i = 0; i < units.size(); ++i) {
      for (std::size_t j = i + 1; j < units.size(); ++j) {
        if (overlaps(units[i], units[j])) continue;
        if (n == 2) {
          std::vector<const Unit*> c = {&units[i], &units[j]};
          if (gap_ok(c)) emit(c);
          continue;
        }
        for (std::size_t k = j + 1; k < units.size(); ++k) {
          if (overlaps(units[i], units[k]) || overlaps(units[j], units[k])) continue;
          std::vector<const Unit*> c = {&units[i], &units[j], &units[k]};
          if (gap_ok(c)) emit(c);
        }
      }
    }
    for (const auto& key : here) {
      auto [it, fresh] = found.try_emplace(key);
      if (fresh) {
        it->second.slots = key;
        it->second.example = s.text();
      }
      ++it->second.sentence_count;
    }
  }
  std::vector<PhraseCandidate> out;
  for (auto& [key, c] : found) {
    c.support = static_cast<double>(c.sentence_count) / static_cast<double>(sentences.size());
    if (c.support >= min_support) out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.sentence_count != b.sentence_count) return a.sentence_count > b.sentence_count;
    return a.key() < b.key();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Saturation

namespace {

// The lexicon entry behind a unit label; API identifiers may have matched
// on a dotted suffix.
std::optional<std::string> matched_entry(const Lexicon& lexicon, Category c, const Unit& u) {
  const WordCategory& wc = lexicon.category(c);
  std::string key = u.lemma;
  while (true) {
    if (wc.contains(key)) return key;
    auto dot = key.find('.');
    if (dot == std::string::npos) return std::nullopt;
    key = key.substr(dot + 1);
  }
}

struct RelatedSentence {
  ProcessedSentence sentence;
  std::string project;
};

}  // namespace

SaturationCurve saturation_curve(const std::vector<IssueReport>& reports, SaturationUnit unit,
                                 const Lexicon& lexicon, const PatternSet& patterns,
                                 const SaturationOptions& options) {
  const Lexicon full = patterns.effective_lexicon(lexicon);
  std::vector<RelatedSentence> related;
  for (const auto& r : reports) {
    if (r.label != Label::Concurrency) continue;
    if (!r.concurrency_sentences)
      throw Error(ErrorCode::MissingSentenceLabels, "report '" + r.id + "' has no sentence labels");
    auto processed = process_report(r, full);
    for (const auto& lab : sentence_labels(r, processed.size()))
      if (lab.is_concurrency_related) related.push_back({processed[lab.sentence_index], r.project});
  }
  if (related.size() < 2) throw Error(ErrorCode::EmptyCorpus, "fewer than two concurrency-related sentences");

  Rng rng(options.seed);
  rng.shuffle(related);
  auto held_n = static_cast<std::size_t>(
      std::llround(static_cast<double>(related.size()) * options.held_out_fraction));
  held_n = std::clamp<std::size_t>(held_n, 1, related.size() - 1);
  std::vector<ProcessedSentence> held_out;
  for (std::size_t i = 0; i < held_n; ++i) held_out.push_back(related[i].sentence);
  std::vector<RelatedSentence> pool(related.begin() + static_cast<std::ptrdiff_t>(held_n), related.end());

  std::vector<std::pair<std::string, std::vector<ProcessedSentence>>> units;
  if (unit == SaturationUnit::SubsetTenths) {
    for (std::size_t i = 0; i < 10; ++i) {
      std::vector<ProcessedSentence> chunk;
      for (std::size_t k = i * pool.size() / 10; k < (i + 1) * pool.size() / 10; ++k)
        chunk.push_back(pool[k].sentence);
      units.emplace_back("subset " + std::to_string(i + 1), std::move(chunk));
    }
  } else {
    std::map<std::string, std::vector<ProcessedSentence>> by_project;
    for (const auto& r : pool) by_project[r.project].push_back(r.sentence);
    for (auto& [name, s] : by_project) units.emplace_back(name, std::move(s));
    std::stable_sort(units.begin(), units.end(),
                     [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });
  }

  auto recall = [](const std::vector<ProcessedSentence>& sents, auto&& matches) {
    std::size_t hit = 0;
    for (const auto& s : sents) hit += matches(std::vector<ProcessedSentence>{s}) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(sents.size());
  };
  auto measure = [&](const Lexicon& lex, const PatternSet& ps, double& w, double& p, double& s) {
    w = recall(held_out, [&](const auto& v) { return !match_word_level(v, lex, ps).empty(); });
    p = recall(held_out, [&](const auto& v) { return !match_phrase_level(v, lex, ps).empty(); });
    s = recall(held_out, [&](const auto& v) { return !match_sentence_level(v, lex, ps).empty(); });
  };

  SaturationCurve curve;
  curve.held_out_sentences = held_out.size();
  measure(full, patterns, curve.full_recall_word, curve.full_recall_phrase, curve.full_recall_sentence);

  std::set<std::pair<Category, std::string>> discovered;
  std::set<std::string> found_patterns;
  std::vector<ProcessedSentence> cumulative;
  for (std::size_t it = 0; it < units.size(); ++it) {
    cumulative.insert(cumulative.end(), units[it].second.begin(), units[it].second.end());
    SaturationPoint pt;
    pt.iteration = it + 1;
    pt.unit_label = units[it].first;

    if (!cumulative.empty()) {
      std::map<Category, std::map<std::string, std::size_t>> counts;
      for (const auto& s : cumulative) {
        std::set<std::pair<Category, std::string>> seen;
        for (const auto& u : sentence_units(s, full))
          for (const auto& [c, pos] : u.labels)
            if (c != Category::NEG)
              if (auto e = matched_entry(full, c, u)) seen.emplace(c, *e);
        for (const auto& [c, e] : seen) ++counts[c][e];
      }
      std::size_t before = discovered.size();
      for (const auto& [c, m] : counts) {
        std::vector<EntryCount> ec;
        for (const auto& [e, n] : m) ec.push_back({e, n});
        for (const auto& kept : frequency_filter(ec, cumulative.size(), options.entry_threshold))
          discovered.emplace(c, kept.lemma);
      }
      pt.new_entries = discovered.size() - before;
    }
    pt.cumulative_entries = discovered.size();

    Lexicon known = full.restricted(
        [&](Category c, const std::string& e) { return discovered.count({c, e}) != 0; });
    std::size_t before = found_patterns.size();
    for (const auto& p : patterns.patterns()) {
      if (p.level == Level::Word && known.category(p.keyword().category).contains(p.keyword().keyword))
        found_patterns.insert(p.id);
    }
    for (const auto& h : match_phrase_level(cumulative, known, patterns)) found_patterns.insert(h.pattern_id);
    for (const auto& h : match_sentence_level(cumulative, known, patterns)) found_patterns.insert(h.pattern_id);
    pt.new_patterns = found_patterns.size() - before;
    pt.cumulative_patterns = found_patterns.size();

    measure(known, patterns.subset(found_patterns), pt.recall_word, pt.recall_phrase, pt.recall_sentence);
    curve.points.push_back(pt);
  }
  return curve;
}

}  // namespace conclp
