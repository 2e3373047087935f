// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "oracle.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <string>

namespace conclp::testing {
namespace {

struct OUnit {
  std::size_t first, last;
  std::string lemma;
  std::vector<std::pair<Category, Pos>> labels;
};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<OUnit> units_of(const ProcessedSentence& s, const Lexicon& lex) {
  std::vector<OUnit> out;
  const auto& t = s.tokens();
  for (std::size_t i = 0; i < t.size(); ++i) {
    OUnit u{i, i, t[i].lemma, {}};
    for (Category c : kAllCategories)
      if (lex.categorize(t[i].lemma, t[i].pos).count(c)) u.labels.emplace_back(c, t[i].pos);
    if (!u.labels.empty()) out.push_back(u);
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::set<std::string> seen;
    for (std::size_t len = 2; len <= 4 && i + len <= t.size(); ++len) {
      for (int variant = 0; variant < 2; ++variant) {
        std::string key;
        for (std::size_t k = i; k < i + len; ++k) {
          if (!key.empty()) key += ' ';
          key += lower(variant == 0 ? t[k].lemma : t[k].surface);
        }
        if (!seen.insert(key).second) continue;
        OUnit u{i, i + len - 1, key, {}};
        for (Category c : kAllCategories) {
          const auto& wc = lex.category(c);
          if (!wc.entries.count(key) && !wc.extensions.count(key)) continue;
          u.labels.emplace_back(c, wc.pos_constraint.count(Pos::Noun) ? Pos::Noun : *wc.pos_constraint.begin());
        }
        if (!u.labels.empty()) out.push_back(u);
      }
    }
  }
  return out;
}

bool fits(const OUnit& u, const Slot& slot) {
  if (!slot.lemmas.empty() && !slot.lemmas.count(u.lemma)) return false;
  for (const auto& [c, p] : u.labels)
    if (c == slot.category && (!slot.pos || *slot.pos == p)) return true;
  return false;
}

Hit make_hit(const std::string& id, const ProcessedSentence& s, std::size_t a, std::size_t b) {
  return Hit{id, s.index(), s.tokens()[a].begin, s.tokens()[b].end, false};
}

}  // namespace

MatchReport canonical(MatchReport r) {
  for (auto* v : {&r.word_hits, &r.phrase_hits, &r.sentence_hits, &r.br_hits}) std::sort(v->begin(), v->end());
  return r;
}

MatchReport brute_force_match(const std::string& report_id, const std::vector<ProcessedSentence>& sentences,
                              const Lexicon& lex, const PatternSet& patterns) {
  MatchReport r;
  r.report_id = report_id;
  r.layout_hash = patterns.layout_hash();

  for (const auto& s : sentences) {
    const auto& t = s.tokens();
    auto units = units_of(s, lex);
    for (const auto& p : patterns.patterns()) {
      switch (p.level) {
        case Level::Word: {
          const auto& kw = p.keyword();
          const auto& wc = lex.category(kw.category);
          if (!wc.entries.count(kw.keyword) && !wc.extensions.count(kw.keyword)) break;
          std::vector<std::string> words;
          std::string w;
          for (char c : kw.keyword + " ") {
            if (c == ' ') {
              words.push_back(w);
              w.clear();
            } else {
              w += c;
            }
          }
          for (std::size_t i = 0; i + words.size() <= t.size(); ++i) {
            bool ok = true;
            for (std::size_t k = 0; k < words.size(); ++k) {
              const Token& tok = t[i + k];
              if (tok.pos == Pos::Api || (lower(tok.lemma) != words[k] && lower(tok.surface) != words[k])) ok = false;
            }
            if (ok) r.word_hits.push_back(make_hit(p.id, s, i, i + words.size() - 1));
          }
          break;
        }
        case Level::Phrase: {
          const auto& ph = p.phrase();
          std::size_t n = ph.slots.size();
          std::optional<std::pair<std::size_t, std::size_t>> best;
          std::vector<std::size_t> pick(n, 0);
          if (units.empty()) break;
          // odometer over units^n
          while (true) {
            bool ok = true;
            std::size_t lo = SIZE_MAX, hi = 0, covered = 0;
            for (std::size_t k = 0; k < n && ok; ++k) {
              const OUnit& u = units[pick[k]];
              ok = fits(u, ph.slots[k]);
              for (std::size_t j = 0; j < k && ok; ++j) {
                const OUnit& v = units[pick[j]];
                ok = u.last < v.first || v.last < u.first;
              }
              lo = std::min(lo, u.first);
              hi = std::max(hi, u.last);
              covered += u.last - u.first + 1;
            }
            if (ok && (hi - lo + 1) - covered <= ph.max_gap) {
              auto cand = std::make_pair(lo, hi);
              if (!best || cand < *best) best = cand;
            }
            std::size_t k = 0;
            while (k < n && ++pick[k] == units.size()) pick[k++] = 0;
            if (k == n) break;
          }
          if (best) r.phrase_hits.push_back(make_hit(p.id, s, best->first, best->second));
          break;
        }
        case Level::Sentence: {
          const auto& se = p.sentence();
          if (se.kind == SentenceKind::Action && !s.text().empty() && s.text().back() == '?') break;
          bool blocked = false;
          for (const auto& f : se.forbidden)
            for (const auto& u : units) blocked = blocked || fits(u, f);
          if (blocked) break;
          bool ok = true, negated = false;
          std::size_t lo = SIZE_MAX, hi = 0;
          for (const auto& req : se.required) {
            std::vector<const OUnit*> sat;
            for (const auto& u : units)
              if (fits(u, req)) sat.push_back(&u);
            if (sat.empty()) {
              ok = false;
              break;
            }
            const OUnit* left = *std::min_element(sat.begin(), sat.end(), [](auto a, auto b) {
              return std::tie(a->first, a->last, a->lemma) < std::tie(b->first, b->last, b->lemma);
            });
            lo = std::min(lo, left->first);
            hi = std::max(hi, left->last);
            bool verb = req.pos == Pos::Verb && (req.category == Category::POP || req.category == Category::PSY);
            if (verb) {
              bool every = true;
              for (const OUnit* u : sat) {
                bool neg = false;
                for (const auto& v : units) {
                  bool is_neg = false;
                  for (const auto& l : v.labels) is_neg = is_neg || l.first == Category::NEG;
                  if (is_neg && v.last < u->first && u->first - v.last <= 3) neg = true;
                }
                every = every && neg;
              }
              negated = negated || every;
            }
          }
          if (!ok) break;
          Hit h = make_hit(p.id, s, lo, hi);
          h.negated = negated;
          r.sentence_hits.push_back(h);
          break;
        }
        case Level::BugReport:
          break;
      }
    }
  }

  for (const auto& p : patterns.patterns()) {
    if (p.level != Level::BugReport) continue;
    const auto& br = p.bug_report();
    std::set<std::size_t> sents;
    const Hit* first = nullptr;
    std::pair<std::size_t, std::size_t> first_key{SIZE_MAX, SIZE_MAX};
    for (const auto& h : r.sentence_hits) {
      if (h.negated || !br.topics.count(patterns.find(h.pattern_id)->sentence().topic)) continue;
      sents.insert(h.sentence_index);
      std::pair<std::size_t, std::size_t> key{h.sentence_index, patterns.index_of(h.pattern_id)};
      if (key < first_key) {
        first_key = key;
        first = &h;
      }
    }
    if (sents.size() >= br.min_sentence_matches)
      r.br_hits.push_back(Hit{p.id, first->sentence_index, first->begin, first->end, false});
  }
  return r;
}

}  // namespace conclp::testing
