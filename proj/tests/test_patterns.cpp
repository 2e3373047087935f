// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>

#include "conclp/error.hpp"
#include "conclp/patterns.hpp"
#include "conclp/synthetic.hpp"
#include "conclp/util.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace conclp;
using conclp::testing::brute_force_match;
using conclp::testing::canonical;
using conclp::testing::data_path;
using conclp::testing::make_report;
using conclp::testing::shipped_lexicon;
using conclp::testing::shipped_matcher;
using conclp::testing::shipped_patterns;

namespace {

MatchReport run(const std::string& title, const std::string& body = "") {
  return shipped_matcher().match(make_report("t", title, body));
}

std::set<std::string> ids(const std::vector<Hit>& hits) {
  std::set<std::string> out;
  for (const auto& h : hits) out.insert(h.pattern_id);
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::ParseError;
}

class ScriptedAdjudicator : public Adjudicator {
 public:
  explicit ScriptedAdjudicator(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
  std::string ask(const std::string& prompt) override {
    prompts.push_back(prompt);
    return fn_(prompt);
  }
  std::vector<std::string> prompts;

 private:
  std::function<std::string(const std::string&)> fn_;
};

}  // namespace

TEST_CASE("shipped pattern set has the published level counts") {
  const PatternSet& ps = shipped_patterns();
  CHECK(ps.count(Level::Word) == 23);
  CHECK(ps.count(Level::Phrase) == 12);
  CHECK(ps.count(Level::Sentence) == 17);
  CHECK(ps.count(Level::BugReport) == 6);
  CHECK(ps.size() == 58);
  std::set<std::string> seen;
  for (const auto& p : ps.patterns()) CHECK(seen.insert(p.id).second);
  for (const auto& p : ps.patterns()) CHECK_FALSE(p.example.empty());
}

TEST_CASE("every sentence template is anchored on a keyword category") {
  // Needed for word-level coverage to dominate the stricter levels.
  for (const auto& p : shipped_patterns().patterns()) {
    if (p.level == Level::Phrase) {
      bool anchored = false;
      for (const auto& s : p.phrase().slots) anchored |= s.category == Category::CBG || s.category == Category::CME;
      CHECK(anchored);
    }
    if (p.level == Level::Sentence) {
      bool anchored = false;
      for (const auto& s : p.sentence().required)
        anchored |= s.category == Category::CBG || s.category == Category::CME;
      INFO(p.id);
      CHECK(anchored);
    }
  }
}

TEST_CASE("effective lexicon adds the extension keywords") {
  const Lexicon& lex = shipped_matcher().lexicon();
  CHECK(lex.category(Category::CBG).size() == 13);
  CHECK(lex.category(Category::CME).size() == 10);
  CHECK(lex.category(Category::CBG).contains("interleaving"));
  CHECK(lex.category(Category::CME).contains("executor"));
  CHECK(shipped_lexicon().category(Category::CME).size() == 6);
}

TEST_CASE("serialize round-trip keeps the layout hash") {
  const PatternSet& ps = shipped_patterns();
  PatternSet back = PatternSet::parse(ps.serialize());
  CHECK(back.serialize() == ps.serialize());
  CHECK(back.layout_hash() == ps.layout_hash());
  CHECK(ps.subset({"KW1", "PH1"}).layout_hash() != ps.layout_hash());
}

TEST_CASE("malformed pattern files are rejected") {
  auto bad = [](const std::string& text) {
    return code_of([&] { PatternSet::parse("version = 1\n" + text); });
  };
  CHECK(bad("[PH1] CBG:NOUN + XYZ:NOUN gap=4\n") == ErrorCode::InvalidPatternSet);
  CHECK(bad("[PH1] CBG:NOUN gap=4\n") == ErrorCode::InvalidPatternSet);
  CHECK(bad("[SE1] name=\"x\" topic=Lock\n") == ErrorCode::InvalidPatternSet);
  CHECK(bad("[KW1] keyword=\"a\" category=CBG\n[KW1] keyword=\"b\" category=CBG\n") ==
        ErrorCode::InvalidPatternSet);
  CHECK(bad("[BR1] name=\"x\" topics=Lock min=0\n") == ErrorCode::InvalidPatternSet);
  CHECK(bad("[KW1] keyword=\"a\" category=POP\n") == ErrorCode::InvalidPatternSet);
  CHECK(bad("[PH1] CBG:NOUN + CME:NOUN gap=4 colour=red\n") == ErrorCode::InvalidPatternSet);
}

TEST_CASE("word level") {
  SECTION("lock screen text fires on lemma lock") {
    auto ds = load_dataset(data_path("motivating.jsonl"), InputFormat::Jsonl);
    MatchReport fig2b = shipped_matcher().match(ds.reports[2]);
    REQUIRE(ids(fig2b.word_hits) == std::set<std::string>{"KW11"});
    MatchReport fig1 = shipped_matcher().match(ds.reports[0]);
    CHECK(fig1.word_hits.empty());
  }
  SECTION("empty report") { CHECK(run("").matched_levels().empty()); }
  SECTION("multi-word entries and case") {
    auto r = run("A Race Condition and a DATA RACE.");
    CHECK(ids(r.word_hits) == std::set<std::string>{"KW3", "KW4", "KW5"});
  }
  SECTION("evidence spans cover the keyword") {
    auto r = run("Two threads deadlock here.");
    for (const auto& h : r.word_hits) {
      std::string text = "Two threads deadlock here.";
      std::string span = text.substr(h.begin, h.end - h.begin);
      CHECK((span == "threads" || span == "deadlock"));
    }
  }
}

TEST_CASE("phrase level") {
  SECTION("thread deadlock, not stress test") {
    auto r = run("Thread deadlock in stress test!");
    CHECK(ids(r.phrase_hits).count("PH1"));
    for (const auto& h : r.phrase_hits) CHECK(h.end <= std::string("Thread deadlock").size());
  }
  SECTION("the lock hangs forever") { CHECK(ids(run("the lock hangs forever").phrase_hits).count("PH4")); }
  SECTION("gap boundary") {
    // four filler tokens: within the default gap of 4; five: beyond it
    CHECK(ids(run("The thread one two three four deadlock.").phrase_hits).count("PH1"));
    CHECK_FALSE(ids(run("The thread one two three four five deadlock.").phrase_hits).count("PH1"));
  }
  SECTION("either order") { CHECK(ids(run("A deadlock of the thread.").phrase_hits).count("PH1")); }
}

TEST_CASE("sentence level") {
  CHECK(ids(run("The system hangs when it tries to acquire a lock.").sentence_hits).count("SE2"));
  CHECK(ids(run("I am trying to acquire a fair lock.").sentence_hits).count("SE1"));
  CHECK(run("Does this lock support fairness?").sentence_hits.empty());
  SECTION("questions only block action templates") {
    CHECK_FALSE(ids(run("Does the thread acquire the lock?").sentence_hits).count("SE1"));
    CHECK(ids(run("Why does the lock hang?").sentence_hits).count("SE2"));
  }
  SECTION("forbidden negation") {
    CHECK(ids(run("A deadlock occurs at shutdown.").sentence_hits).count("SE5"));
    CHECK_FALSE(ids(run("No deadlock occurs at shutdown.").sentence_hits).count("SE5"));
  }
  SECTION("all matching templates are kept") {
    auto r = run("The system hangs when it tries to acquire a lock.");
    CHECK(ids(r.sentence_hits) == std::set<std::string>{"SE1", "SE2"});
  }
}

TEST_CASE("bug report level") {
  SECTION("SE1 and SE2 give a lock issue") {
    auto r = run("Lock trouble", "I am trying to acquire a fair lock. The system hangs when it tries to acquire a lock.");
    CHECK(ids(r.br_hits).count("BR1"));
    CHECK(ids(r.br_hits).count("BR6"));
  }
  SECTION("no sentence hits, no bug-report hits") {
    CHECK(aggregate_bug_report({}, shipped_patterns()).empty());
  }
  SECTION("lock screen report stops at the word level") {
    auto ds = load_dataset(data_path("motivating.jsonl"), InputFormat::Jsonl);
    MatchReport r = shipped_matcher().match(ds.reports[2]);
    CHECK(r.matched(Level::Word));
    CHECK_FALSE(r.matched(Level::Sentence));
    CHECK_FALSE(r.matched(Level::BugReport));
  }
  SECTION("negated verbs do not contribute") {
    auto r = run("The worker never releases the lock.");
    REQUIRE(ids(r.sentence_hits).count("SE1"));
    CHECK(r.sentence_hits.front().negated);
    CHECK(r.br_hits.empty());
    auto ok = run("The worker acquires the lock but never releases it.");
    CHECK_FALSE(ok.sentence_hits.front().negated);
    CHECK(ids(ok.br_hits).count("BR1"));
  }
  SECTION("min_sentence_matches counts distinct sentences") {
    auto one = run("The system hangs when it tries to acquire a lock.");
    CHECK_FALSE(ids(one.br_hits).count("BR6"));
  }
}

TEST_CASE("adjudicator mode") {
  const Matcher& m = shipped_matcher();
  auto report = make_report("a", "The system hangs when it tries to acquire a lock.", "");
  SECTION("only candidate names survive") {
    ScriptedAdjudicator adj([](const std::string& p) -> std::string {
      if (p.rfind("Sentence:", 0) == 0) return "- Lock Symptom\nThread Symptom\nsomething else entirely";
      return "Yes, clearly.";
    });
    auto r = m.match(report, &adj);
    CHECK(ids(r.sentence_hits) == std::set<std::string>{"SE2"});
    CHECK(ids(r.br_hits) == std::set<std::string>{"BR1"});
  }
  SECTION("unparseable root-cause answers reject") {
    ScriptedAdjudicator adj([](const std::string& p) -> std::string {
      if (p.rfind("Sentence:", 0) == 0) return "Lock Action\nLock Symptom";
      return "Perhaps.";
    });
    auto r = m.match(report, &adj);
    CHECK(r.sentence_hits.size() == 2);
    CHECK(r.br_hits.empty());
  }
  SECTION("transport failure") {
    ScriptedAdjudicator adj([](const std::string&) -> std::string {
      throw Error(ErrorCode::EndpointUnreachable, "down");
    });
    CHECK(code_of([&] { m.match(report, &adj); }) == ErrorCode::AdjudicatorUnavailable);
  }
  SECTION("replayed answers are deterministic") {
    auto answer = [](const std::string& p) -> std::string { return p.size() % 2 ? "Lock Action" : "Yes"; };
    ScriptedAdjudicator a(answer), b(answer);
    CHECK(m.match(report, &a) == m.match(report, &b));
  }
}

TEST_CASE("match reports round-trip and bug-report hits are reconstructible") {
  auto ds = load_dataset(data_path("mini_corpus.jsonl"), InputFormat::Jsonl);
  std::vector<MatchReport> reports;
  for (const auto& r : ds.reports) reports.push_back(shipped_matcher().match(r));
  CHECK(parse_match_reports(serialize_match_reports(reports)) == reports);
  for (const auto& r : reports) {
    CHECK(aggregate_bug_report(r.sentence_hits, shipped_patterns()) == r.br_hits);
    for (const auto& id : r.matched_ids()) CHECK(shipped_patterns().find(id) != nullptr);
  }
  CHECK(code_of([] { parse_match_reports("{\"report_id\":1}\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("engine equals brute force on a synthetic corpus") {
  SyntheticOptions o;
  o.report_count = 200;
  o.positive_fraction = 0.3;
  o.decoy_fraction = 0.5;
  o.min_body_sentences = 1;
  o.max_body_sentences = 1;
  o.seed = 11;
  Dataset ds = generate_synthetic(o);
  const Matcher& m = shipped_matcher();
  std::size_t sentences = 0, hits = 0;
  for (const auto& r : ds.reports) {
    auto s = m.preprocess(r);
    sentences += s.size();
    MatchReport engine = m.match(r.id, s);
    MatchReport oracle = brute_force_match(r.id, s, m.lexicon(), m.patterns());
    INFO(r.title << " | " << r.body);
    CHECK(canonical(engine) == canonical(oracle));
    hits += engine.matched_ids().size();
  }
  CHECK(sentences <= 500);
  CHECK(hits > 200);
}

TEST_CASE("level coverage monotonicity over random corpora") {
  const Matcher& m = shipped_matcher();
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    SyntheticOptions o;
    o.report_count = 20;
    o.positive_fraction = 0.25;
    o.decoy_fraction = 0.4;
    o.max_body_sentences = 3;
    o.seed = 1000 + trial;
    std::map<Level, std::size_t> recall;
    for (const auto& r : generate_synthetic(o).reports) {
      MatchReport mr = m.match(r);
      if (mr.matched(Level::BugReport)) CHECK(mr.matched(Level::Sentence));
      if (mr.matched(Level::Phrase) || mr.matched(Level::Sentence)) CHECK(mr.matched(Level::Word));
      if (r.label == Label::Concurrency)
        for (Level l : kAllLevels) recall[l] += mr.matched(l);
    }
    for (Level l : kAllLevels) CHECK(recall[Level::Word] >= recall[l]);
  }
}

TEST_CASE("phrase mining") {
  const Lexicon& lex = shipped_matcher().lexicon();
  auto sentences_of = [&](const std::vector<std::string>& texts) {
    std::vector<ProcessedSentence> out;
    for (std::size_t i = 0; i < texts.size(); ++i)
      for (auto& s : process_report(make_report("m" + std::to_string(i), texts[i], ""), lex)) out.push_back(s);
    return out;
  };
  SECTION("support threshold") {
    std::vector<std::string> texts(25, "The page renders slowly.");
    for (int i = 0; i < 3; ++i) texts[i] = "Thread deadlock in the pool.";
    auto s = sentences_of(texts);
    auto c = mine_phrase_candidates(s, lex, 2, 0.10);
    REQUIRE(c.size() == 1);
    CHECK(c[0].key() == "CBG:NOUN+CME:NOUN");
    CHECK(c[0].support == Catch::Approx(0.12));
    CHECK(mine_phrase_candidates(s, lex, 2, 0.13).empty());
  }
  SECTION("preconditions") {
    auto s = sentences_of({"Thread deadlock."});
    CHECK(code_of([&] { mine_phrase_candidates(s, lex, 4, 0.1); }) == ErrorCode::PreconditionViolation);
    CHECK(code_of([&] { mine_phrase_candidates({}, lex, 2, 0.1); }) == ErrorCode::EmptyCorpus);
  }
  SECTION("pairs equal brute-force co-occurrence") {
    auto ds = generate_synthetic(SyntheticOptions{});
    std::vector<ProcessedSentence> s;
    for (const auto& r : ds.reports)
      if (r.label == Label::Concurrency)
        for (auto& x : process_report(r, lex)) s.push_back(x);
    auto mined = mine_phrase_candidates(s, lex, 2, 0.0, SIZE_MAX);
    std::map<std::string, std::size_t> got;
    for (const auto& c : mined) got[c.key()] = c.sentence_count;

    std::map<std::string, std::size_t> want;
    for (const auto& sent : s) {
      auto units = sentence_units(sent, lex);
      std::set<std::string> here;
      for (const auto& a : units)
        for (const auto& b : units) {
          if (&a == &b || !(a.last < b.first || b.last < a.first)) continue;
          for (const auto& la : a.labels)
            for (const auto& lb : b.labels) {
              auto anchor = [](Category c) { return c == Category::CBG || c == Category::CME; };
              if (!anchor(la.first) && !anchor(lb.first)) continue;
              auto x = std::min(la, lb), y = std::max(la, lb);
              here.insert(std::string(to_string(x.first)) + ":" + std::string(to_string(x.second)) + "+" +
                          std::string(to_string(y.first)) + ":" + std::string(to_string(y.second)));
            }
        }
      for (const auto& k : here) ++want[k];
    }
    CHECK(got == want);
    CHECK(got.size() > 5);
    for (std::size_t i = 1; i < mined.size(); ++i) CHECK(mined[i - 1].support >= mined[i].support);
  }
}

TEST_CASE("saturation curve") {
  auto ds = load_dataset(data_path("mini_corpus.jsonl"), InputFormat::Jsonl);
  SECTION("ten subsets") {
    SaturationCurve c = saturation_curve(ds.reports, SaturationUnit::SubsetTenths, shipped_lexicon(), shipped_patterns());
    REQUIRE(c.points.size() == 10);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      const auto& a = c.points[i - 1];
      const auto& b = c.points[i];
      CHECK(a.cumulative_entries <= b.cumulative_entries);
      CHECK(a.cumulative_patterns <= b.cumulative_patterns);
      CHECK(a.recall_word <= b.recall_word);
      CHECK(a.recall_phrase <= b.recall_phrase);
      CHECK(a.recall_sentence <= b.recall_sentence);
    }
    CHECK(c.full_recall_word > c.full_recall_phrase);
    CHECK(c.full_recall_word > c.points.front().recall_word);
    CHECK(c.points.back().recall_word <= c.full_recall_word);
  }
  SECTION("by project") {
    SaturationCurve c = saturation_curve(ds.reports, SaturationUnit::ByProject, shipped_lexicon(), shipped_patterns());
    CHECK_FALSE(c.points.empty());
    for (std::size_t i = 1; i < c.points.size(); ++i)
      CHECK(c.points[i - 1].recall_word <= c.points[i].recall_word);
  }
  SECTION("missing sentence labels") {
    auto reports = ds.reports;
    for (auto& r : reports)
      if (r.label == Label::Concurrency) {
        r.concurrency_sentences.reset();
        break;
      }
    CHECK(code_of([&] {
            saturation_curve(reports, SaturationUnit::SubsetTenths, shipped_lexicon(), shipped_patterns());
          }) == ErrorCode::MissingSentenceLabels);
  }
}

TEST_CASE("restricting the lexicon never raises recall") {
  const Matcher& m = shipped_matcher();
  auto ds = load_dataset(data_path("mini_corpus.jsonl"), InputFormat::Jsonl);
  std::vector<ProcessedSentence> sentences;
  for (const auto& r : ds.reports)
    if (r.label == Label::Concurrency)
      for (auto& s : m.preprocess(r)) sentences.push_back(s);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    // nested random subsets: keep_small implies keep_large
    std::map<std::pair<Category, std::string>, double> draw;
    auto u = [&](Category c, const std::string& e) {
      auto [it, fresh] = draw.try_emplace({c, e}, 0.0);
      if (fresh) it->second = rng.unit();
      return it->second;
    };
    Lexicon small = m.lexicon().restricted([&](Category c, const std::string& e) { return u(c, e) < 0.4; });
    Lexicon large = m.lexicon().restricted([&](Category c, const std::string& e) { return u(c, e) < 0.8; });
    for (const auto& s : sentences) {
      std::vector<ProcessedSentence> one{s};
      if (!match_word_level(one, small, m.patterns()).empty())
        CHECK_FALSE(match_word_level(one, large, m.patterns()).empty());
      if (!match_phrase_level(one, small, m.patterns()).empty())
        CHECK_FALSE(match_phrase_level(one, large, m.patterns()).empty());
      if (!match_sentence_level(one, small, m.patterns()).empty())
        CHECK_FALSE(match_sentence_level(one, large, m.patterns()).empty());
    }
  }
}
