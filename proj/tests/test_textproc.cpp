// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include <catch2/catch_amalgamated.hpp>

#include <cctype>
#include <regex>
#include <sstream>

#include "conclp/textproc.hpp"
#include "conclp/util.hpp"
#include "fixtures.hpp"

using namespace conclp;
using conclp::testing::data_path;
using conclp::testing::make_report;
using conclp::testing::shipped_lexicon;

namespace {

std::string lemmas_with_pos(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.lemma + "/" + std::string(to_string(t.pos));
  }
  return out;
}

const Token* find_surface(const std::vector<Token>& tokens, std::string_view surface) {
  for (const auto& t : tokens)
    if (t.surface == surface) return &t;
  return nullptr;
}

}  // namespace

TEST_CASE("segmentation") {
  SECTION("title only") {
    auto s = segment_sentences("Thread deadlock in stress test!", "");
    REQUIRE(s == std::vector<std::string>{"Thread deadlock in stress test!"});
  }
  SECTION("terminal punctuation") {
    auto s = segment_sentences("", "It hangs. It never returns.");
    CHECK(s == std::vector<std::string>{"It hangs.", "It never returns."});
  }
  SECTION("fenced code is excluded") {
    auto s = segment_sentences("", "First sentence here.\n```\nlock.lock();\nfoo();\n```\nSecond one.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "First sentence here.");
    CHECK(s[1] == "Second one.");
  }
  SECTION("indented code is excluded") {
    auto s = segment_sentences("", "The trace:\n    at Foo.bar(Foo.java:12)\n\tat Baz.run\nThen it dies.");
    CHECK(s == std::vector<std::string>{"The trace:", "Then it dies."});
  }
  SECTION("dotted identifiers and abbreviations do not split") {
    auto s = segment_sentences(
        "", "Calling java.util.Map.get() fails, e.g. on Linux. See Fig. 3 for details. Done!");
    CHECK(s == std::vector<std::string>{"Calling java.util.Map.get() fails, e.g. on Linux.",
                                        "See Fig. 3 for details.", "Done!"});
  }
  SECTION("title is always sentence 0") {
    auto s = segment_sentences("Crash on exit", "It crashes. Every time.");
    REQUIRE(s.size() == 3);
    CHECK(s[0] == "Crash on exit");
  }
  SECTION("blank input") {
    CHECK(segment_sentences("  ", "\n\n").empty());
  }
  SECTION("lowercase after a period keeps the sentence together") {
    CHECK(segment_sentences("", "Set the value to 3. then restart.").size() == 1);
  }
}

TEST_CASE("tokenization keeps identifiers whole") {
  auto toks = tokenize("mutex.lock() doesn't fail in multi-threaded code.");
  std::vector<std::string> surfaces;
  for (const auto& t : toks) surfaces.push_back(t.surface);
  CHECK(surfaces ==
        std::vector<std::string>{"mutex.lock()", "doesn't", "fail", "in", "multi", "threaded",
                                 "code"});
  CHECK(toks[0].begin == 0);
  CHECK(toks[0].end == 12);
}

TEST_CASE("lemmatization") {
  const Lexicon& lex = shipped_lexicon();
  CHECK(lemmatize("locks", lex) == "lock");
  CHECK(lemmatize("hung", lex) == "hang");
  CHECK(lemmatize("froze", lex) == "freeze");
  CHECK(lemmatize("held", lex) == "hold");
  CHECK(lemmatize("ran", lex) == "run");
  CHECK(lemmatize("starved", lex) == "starve");
  CHECK(lemmatize("stopped", lex) == "stop");
  CHECK(lemmatize("acquiring", lex) == "acquire");
  CHECK(lemmatize("deadlocked", lex) == "deadlock");
  CHECK(lemmatize("tries", lex) == "try");
  CHECK(lemmatize("issues", lex) == "issue");
  CHECK(lemmatize("processes", lex) == "process");
  CHECK(lemmatize("doesn't", lex) == "not");
  CHECK(lemmatize("can't", lex) == "cannot");
  CHECK(lemmatize("broken", lex) == "broken");  // SYB entry wins over break
}

TEST_CASE("tagging the documented examples") {
  const Lexicon& lex = shipped_lexicon();
  CHECK(lemmas_with_pos(tag_tokens("thread is hung", lex)) == "thread/NOUN be/OTHER hang/VERB");
  auto toks = tag_tokens("The system hangs when it tries to acquire a lock.", lex);
  CHECK(find_surface(toks, "hangs")->pos == Pos::Verb);
  CHECK(find_surface(toks, "acquire")->pos == Pos::Verb);
  CHECK(find_surface(toks, "lock")->pos == Pos::Noun);
  CHECK(tag_tokens("locks", lex)[0].lemma == "lock");
  auto verb_lock = tag_tokens("Please lock the table.", lex);
  CHECK(find_surface(verb_lock, "lock")->pos == Pos::Verb);
}

TEST_CASE("software entity recognition") {
  auto e1 = recognize_software_entities("tryLock() throws Exception!");
  REQUIRE(e1.size() == 1);
  CHECK(e1[0].lemma == "tryLock()");
  CHECK(e1[0].pos == Pos::Api);
  auto e2 = recognize_software_entities("NullPointerException at startup");
  REQUIRE(e2.size() == 1);
  CHECK(e2[0].lemma == "NullPointerException");
  CHECK(recognize_software_entities("the lock screen turned on").empty());
  CHECK(recognize_software_entities("see config.yaml and e.g. v1.2").empty());

  HeuristicEntityRecognizer r;
  CHECK(r.is_entity("org.apache.Foo"));
  CHECK(r.is_entity("ConcurrentHashMap"));
  CHECK(r.is_entity("OutOfMemoryError"));
  CHECK_FALSE(r.is_entity("Error"));
  CHECK_FALSE(r.is_entity("Thread"));
}

TEST_CASE("entity precision on the hand-labeled sample") {
  std::istringstream in(read_file(data_path("entity_sample.txt")));
  std::string line;
  std::size_t tp = 0, fp = 0, gold_total = 0;
  std::vector<std::string> false_positives;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::set<std::string> gold;
    std::string plain;
    for (std::size_t i = 0; i < line.size();) {
      if (line.compare(i, 2, "{{") == 0) {
        auto close = line.find("}}", i);
        gold.insert(line.substr(i + 2, close - i - 2));
        plain += line.substr(i + 2, close - i - 2);
        i = close + 2;
      } else {
        plain += line[i++];
      }
    }
    gold_total += gold.size();
    for (const auto& t : recognize_software_entities(plain)) {
      if (gold.count(t.lemma)) {
        ++tp;
      } else {
        ++fp;
        false_positives.push_back(t.lemma);
      }
    }
  }
  double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  INFO("false positives: " << join(false_positives, ", "));
  INFO("tp=" << tp << " fp=" << fp << " gold=" << gold_total);
  CHECK(precision >= 0.90);
  CHECK(tp + fp > 40);
}

TEST_CASE("POS agreement on the hand-tagged sample") {
  const Lexicon& lex = shipped_lexicon();
  std::istringstream in(read_file(data_path("pos_sample.txt")));
  std::string line;
  std::size_t agree = 0, total = 0, sentences = 0;
  std::vector<std::string> misses;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++sentences;
    // word|TAG pairs; '|' never appears in the text otherwise.
    std::vector<std::pair<std::string, Pos>> gold;
    std::string plain;
    std::regex pair_re(R"(([^\s|]+)\|([A-Z]+))");
    std::size_t last = 0;
    for (std::sregex_iterator it(line.begin(), line.end(), pair_re), end; it != end; ++it) {
      plain += line.substr(last, static_cast<std::size_t>(it->position()) - last);
      plain += (*it)[1].str();
      last = static_cast<std::size_t>(it->position() + it->length());
      gold.emplace_back((*it)[1].str(), *parse_pos((*it)[2].str()));
    }
    plain += line.substr(last);

    auto tokens = tag_tokens(plain, lex);
    std::size_t cursor = 0;
    for (const auto& [word, pos] : gold) {
      while (cursor < tokens.size() && tokens[cursor].surface != word) ++cursor;
      REQUIRE(cursor < tokens.size());
      ++total;
      if (tokens[cursor].pos == pos) {
        ++agree;
      } else {
        misses.push_back(word + " gold " + std::string(to_string(pos)) + " got " +
                         std::string(to_string(tokens[cursor].pos)) + " in: " + plain);
      }
      ++cursor;
    }
  }
  double agreement = static_cast<double>(agree) / static_cast<double>(total);
  std::string detail;
  for (const auto& m : misses) detail += m + "\n";
  INFO(detail);
  INFO("agreement " << agreement << " over " << total << " words");
  CHECK(sentences >= 200);
  CHECK(agreement >= 0.90);
}

TEST_CASE("process_report on the lock-screen report") {
  const Lexicon& lex = shipped_lexicon();
  Dataset ds = load_dataset(data_path("motivating.jsonl"), InputFormat::Jsonl);
  auto sentences = process_report(ds.reports[2], lex);
  std::set<std::string> nouns, verbs;
  for (const auto& s : sentences) {
    nouns.insert(s.noun_set().begin(), s.noun_set().end());
    verbs.insert(s.verb_set().begin(), s.verb_set().end());
  }
  CHECK(nouns.count("screen"));
  CHECK(nouns.count("phone"));
  CHECK(verbs.count("lock"));
  CHECK_FALSE(nouns.count("lock"));
}

TEST_CASE("title-only report yields one sentence") {
  auto s = process_report(make_report("t", "Deadlock in pool", ""), shipped_lexicon());
  REQUIRE(s.size() == 1);
  CHECK(s[0].index() == 0);
  CHECK(s[0].report_id() == "t");
}

namespace {

// Independent reference: lowercases, splits on whitespace, strips
// surrounding punctuation, and looks each word up on its own.
struct OracleExpectation {
  std::set<std::string> nominal;  // must appear in noun_set or adv_adj_set
  std::set<std::string> adverbial;
  std::set<std::string> api;
};

OracleExpectation oracle(const std::string& sentence, const Lexicon& lex) {
  std::map<std::string, std::set<Pos>> surface_pos;
  std::set<std::string> api_entries;
  for (const auto& wc : lex.categories()) {
    for (const auto& e : wc.entries) {
      if (wc.abbr == Category::API || wc.abbr == Category::EXC) api_entries.insert(e);
      else if (e.find(' ') == std::string::npos)
        surface_pos[e].insert(wc.pos_constraint.begin(), wc.pos_constraint.end());
    }
  }
  OracleExpectation out;
  std::istringstream in(sentence);
  std::string word;
  while (in >> word) {
    while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back())) &&
           !(word.size() >= 2 && word.compare(word.size() - 2, 2, "()") == 0))
      word.pop_back();
    while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front())))
      word.erase(0, 1);
    if (word.empty()) continue;
    if (api_entries.count(word)) {
      out.api.insert(word);
      continue;
    }
    std::string lower;
    for (char c : word) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto it = surface_pos.find(lower);
    if (it == surface_pos.end() || it->second.count(Pos::Verb)) continue;
    if (it->second == std::set<Pos>{Pos::Adv, Pos::Adj}) out.adverbial.insert(lower);
    else out.nominal.insert(lower);
  }
  return out;
}

}  // namespace

TEST_CASE("process_report agrees with a brute-force lookup on fixtures") {
  const Lexicon& lex = shipped_lexicon();
  std::vector<IssueReport> reports =
      load_dataset(data_path("motivating.jsonl"), InputFormat::Jsonl).reports;
  auto mini = load_dataset(data_path("mini_corpus.jsonl"), InputFormat::Jsonl).reports;
  reports.insert(reports.end(), mini.begin(), mini.begin() + 60);
  std::size_t checked = 0;
  for (const auto& r : reports) {
    for (const auto& s : process_report(r, lex)) {
      OracleExpectation exp = oracle(s.text(), lex);
      for (const auto& w : exp.nominal) {
        INFO(s.text() << " / " << w);
        CHECK((s.noun_set().count(w) || s.adv_adj_set().count(w)));
        ++checked;
      }
      for (const auto& w : exp.adverbial) {
        INFO(s.text() << " / " << w);
        CHECK(s.adv_adj_set().count(w));
        ++checked;
      }
      for (const auto& w : exp.api) {
        INFO(s.text() << " / " << w);
        CHECK(s.api_set().count(w));
        ++checked;
      }
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("coverage, determinism and set consistency") {
  const Lexicon& lex = shipped_lexicon();
  auto reports = load_dataset(data_path("mini_corpus.jsonl"), InputFormat::Jsonl).reports;
  for (std::size_t r = 0; r < reports.size(); r += 7) {
    auto a = process_report(reports[r], lex);
    auto b = process_report(reports[r], lex);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].tokens() == b[i].tokens());
      const std::string& text = a[i].text();
      // every alphanumeric run lies inside exactly one token
      for (std::size_t p = 0; p < text.size();) {
        if (!std::isalnum(static_cast<unsigned char>(text[p]))) {
          ++p;
          continue;
        }
        std::size_t q = p;
        while (q < text.size() && std::isalnum(static_cast<unsigned char>(text[q]))) ++q;
        int owners = 0;
        for (const auto& t : a[i].tokens())
          if (t.begin <= p && q <= t.end) ++owners;
        INFO(text.substr(p, q - p) << " in " << text);
        CHECK(owners == 1);
        p = q;
      }
      std::set<std::string> verbs, nouns, advadj, apis;
      for (const auto& t : a[i].tokens()) {
        CHECK(t.end <= text.size());
        CHECK(text.substr(t.begin, t.end - t.begin) == t.surface);
        if (t.pos == Pos::Verb) verbs.insert(t.lemma);
        if (t.pos == Pos::Noun) nouns.insert(t.lemma);
        if (t.pos == Pos::Adv || t.pos == Pos::Adj) advadj.insert(t.lemma);
        if (t.pos == Pos::Api) apis.insert(t.lemma);
        if (t.pos != Pos::Api) CHECK(t.lemma == to_lower(t.lemma));
      }
      CHECK(verbs == a[i].verb_set());
      CHECK(nouns == a[i].noun_set());
      CHECK(advadj == a[i].adv_adj_set());
      CHECK(apis == a[i].api_set());
    }
  }
}
