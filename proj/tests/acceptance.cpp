// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

// Runs the acceptance criteria and prints one PASS/FAIL/SKIP line each.
// Criterion 9 reads CONCLP_REPLICATION_DATASET (and optionally
// CONCLP_REPLICATION_FORMAT: github, jira or jsonl).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "conclp/classify.hpp"
#include "conclp/eval.hpp"
#include "conclp/llmbridge.hpp"
#include "conclp/synthetic.hpp"
#include "conclp/util.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace conclp;
using conclp::testing::brute_force_match;
using conclp::testing::canonical;
using conclp::testing::data_path;
using conclp::testing::shipped_lexicon;
using conclp::testing::shipped_matcher;
using conclp::testing::shipped_patterns;
using conclp::testing::TempDir;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Result {
  Outcome outcome;
  std::string detail;
};

Result fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Result check(bool ok, std::string d) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(d)}; }

std::string fmt(double v, int digits = 2) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

double round2(double v) { return std::round(v * 100) / 100; }

const Dataset& mini() {
  static const Dataset ds = load_dataset(data_path("mini_corpus.jsonl"), InputFormat::Jsonl);
  return ds;
}

Result metric_identity() {
  const double p[] = {0.12, 0.15, 0.29, 0.69}, r[] = {0.98, 0.86, 0.85, 0.70}, f[] = {0.21, 0.25, 0.43, 0.69};
  std::string got;
  bool ok = true;
  for (int i = 0; i < 4; ++i) {
    double v = round2(f_measure(p[i], r[i]));
    ok = ok && std::abs(v - f[i]) <= 0.01 + 1e-12;
    got += (i ? " " : "") + fmt(v);
  }
  return check(ok, "F = " + got);
}

Result oracle_equivalence() {
  SyntheticOptions o;
  o.report_count = 200;
  o.positive_fraction = 0.3;
  o.decoy_fraction = 0.5;
  o.min_body_sentences = 1;
  o.max_body_sentences = 1;
  o.seed = 11;
  Dataset ds = generate_synthetic(o);
  const Matcher& m = shipped_matcher();
  std::size_t sentences = 0, hits = 0, differing = 0;
  for (const auto& r : ds.reports) {
    auto s = m.preprocess(r);
    sentences += s.size();
    MatchReport engine = m.match(r.id, s);
    if (!(canonical(engine) == canonical(brute_force_match(r.id, s, m.lexicon(), m.patterns())))) ++differing;
    hits += engine.word_hits.size() + engine.phrase_hits.size() + engine.sentence_hits.size() + engine.br_hits.size();
  }
  if (sentences > 500) return fail(std::to_string(sentences) + " sentences, corpus too large");
  return check(differing == 0, std::to_string(ds.size()) + " reports, " + std::to_string(sentences) +
                                   " sentences, " + std::to_string(hits) + " hits, " + std::to_string(differing) +
                                   " reports differ");
}

Result motivating_examples() {
  auto ds = load_dataset(data_path("motivating.jsonl"), InputFormat::Jsonl);
  const auto* fig1 = ds.find("fig1-missing-keywords");
  const auto* fig2b = ds.find("fig2b-lock-screen");
  if (!fig1 || !fig2b) return fail("fixture reports missing");
  auto m1 = shipped_matcher().match(*fig1);
  auto m2 = shipped_matcher().match(*fig2b);
  bool a = classify_by_matching(m2, Level::Word).predicted == Label::Concurrency;
  bool b = classify_by_matching(m1, Level::Word).predicted == Label::NonConcurrency;
  bool c = classify_by_matching(m2, Level::BugReport).predicted == Label::NonConcurrency;
  return check(a && b && c, std::string("lock screen word=") + (a ? "positive" : "negative") +
                                ", keyword-free race word=" + (b ? "negative" : "positive") +
                                ", lock screen br=" + (c ? "negative" : "positive"));
}

Result level_monotonicity() {
  const Matcher& m = shipped_matcher();
  std::size_t violations = 0, trials = 100;
  for (std::uint64_t t = 0; t < trials; ++t) {
    SyntheticOptions o;
    o.report_count = 20;
    o.positive_fraction = 0.25;
    o.decoy_fraction = 0.4;
    o.max_body_sentences = 3;
    o.seed = 5000 + t;
    std::map<Level, std::size_t> found;
    for (const auto& r : generate_synthetic(o).reports) {
      MatchReport mr = m.match(r);
      if (mr.matched(Level::BugReport) && !mr.matched(Level::Sentence)) ++violations;
      if (r.label == Label::Concurrency)
        for (Level l : kAllLevels) found[l] += mr.matched(l);
    }
    for (Level l : kAllLevels)
      if (found[Level::Word] < found[l]) ++violations;
  }
  return check(violations == 0, std::to_string(trials) + " random corpora, " + std::to_string(violations) +
                                    " violations");
}

Result learning_correctness() {
  auto start = std::chrono::steady_clock::now();
  Rng rng(99);
  double worst = 0;
  for (ModelKind kind : {ModelKind::LogisticRegression, ModelKind::LinearSVM}) {
    for (int point = 0; point < 20; ++point) {
      std::vector<Example> data;
      for (int i = 0; i < 30; ++i) {
        std::vector<std::uint8_t> bits(6);
        for (auto& b : bits) b = rng.below(2);
        data.push_back({FeatureVector{"e", bits, "L"}, rng.below(2) == 1});
      }
      std::vector<double> p(7);
      for (auto& v : p) v = (rng.unit() - 0.5) * 4;
      auto g = gradient(kind, data, p, 0.01);
      const double eps = 1e-5;
      for (std::size_t i = 0; i < p.size(); ++i) {
        auto hi = p, lo = p;
        hi[i] += eps;
        lo[i] -= eps;
        double fd = (objective(kind, data, hi, 0.01) - objective(kind, data, lo, 0.01)) / (2 * eps);
        worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  std::vector<Example> sep;
  for (int i = 0; i < 8; ++i)
    sep.push_back({FeatureVector{"s", {static_cast<std::uint8_t>(i & 1), static_cast<std::uint8_t>((i >> 1) & 1),
                                       static_cast<std::uint8_t>((i >> 2) & 1)},
                                 "L"},
                   (i & 1) == 1});
  Hyperparameters h;
  h.epochs = 500;
  auto model = train(ModelKind::LogisticRegression, sep, h, 1);
  std::size_t correct = 0;
  for (const auto& e : sep) correct += (predict(model, e.x).predicted == Label::Concurrency) == e.positive;
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return check(worst <= 1e-4 && correct == 8 && secs < 5,
               "max relative gradient error " + fmt(worst, 9) + ", separable accuracy " +
                   std::to_string(correct) + "/8, " + fmt(secs, 2) + " s");
}

Result cv_integrity() {
  auto folds = stratified_kfold(mini(), 10, 1);
  std::map<std::string, int> seen;
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& f : folds) {
    std::size_t pos = 0;
    for (const auto& id : f.eval_ids) {
      ++seen[id];
      pos += mini().find(id)->label == Label::Concurrency;
    }
    lo = std::min(lo, pos);
    hi = std::max(hi, pos);
  }
  bool once = seen.size() == mini().size();
  for (const auto& [id, n] : seen) once = once && n == 1;
  auto dump = [](const std::vector<DatasetSplit>& fs) {
    std::string s;
    for (const auto& f : fs) s += join(f.train_ids, ",") + "|" + join(f.eval_ids, ",") + "\n";
    return s;
  };
  bool same = dump(folds) == dump(stratified_kfold(mini(), 10, 1));
  return check(once && hi - lo <= 1 && same, std::to_string(folds.size()) + " folds, every report once: " +
                                                 (once ? "yes" : "no") + ", positives per fold " +
                                                 std::to_string(lo) + "-" + std::to_string(hi) +
                                                 ", rerun identical: " + (same ? "yes" : "no"));
}

Result end_to_end() {
  auto start = std::chrono::steady_clock::now();
  Evaluator ev(shipped_lexicon(), shipped_patterns(), mini());
  MethodConfig word;
  word.levels = {Level::Word};
  MethodConfig br;
  br.levels = {Level::BugReport};
  MethodConfig lr;
  lr.kind = MethodKind::Model;
  lr.levels = {kAllLevels.begin(), kAllLevels.end()};
  auto w = ev.score_all(word, 1);
  auto b = ev.score_all(br, 1);
  auto l = ev.cross_validate(10, lr, 1);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t pos = mini().count(Label::Concurrency);
  return check(l.f_measure > w.f_measure && b.precision > w.precision && secs < 120,
               std::to_string(mini().size()) + " reports at " + fmt(100.0 * pos / mini().size(), 1) +
                   "% positive: LR+ALL F " + fmt(l.f_measure) + " vs word F " + fmt(w.f_measure) + "; BR P " +
                   fmt(b.precision) + " vs word P " + fmt(w.precision) + "; " + fmt(secs, 1) + " s");
}

Result saturation() {
  auto c = saturation_curve(mini().reports, SaturationUnit::SubsetTenths, shipped_lexicon(), shipped_patterns());
  if (c.points.size() != 10) return fail(std::to_string(c.points.size()) + " iterations");
  bool mono = true;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const auto& a = c.points[i - 1];
    const auto& b = c.points[i];
    mono = mono && a.recall_word <= b.recall_word && a.recall_phrase <= b.recall_phrase &&
           a.recall_sentence <= b.recall_sentence;
  }
  const auto& first = c.points.front();
  bool gain = c.full_recall_word > first.recall_word && c.full_recall_phrase >= first.recall_phrase &&
              c.full_recall_sentence >= first.recall_sentence;
  return check(mono && gain, "10 iterations non-decreasing: " + std::string(mono ? "yes" : "no") +
                                 "; held-out word recall first tenth " + fmt(first.recall_word) + " -> full " +
                                 fmt(c.full_recall_word));
}

Result replication() {
  const char* path = std::getenv("CONCLP_REPLICATION_DATASET");
  if (!path || !*path) return {Outcome::Skip, "CONCLP_REPLICATION_DATASET not set"};
  if (!std::filesystem::exists(path)) return {Outcome::Skip, std::string(path) + " not found"};
  InputFormat format = InputFormat::Jsonl;
  if (const char* f = std::getenv("CONCLP_REPLICATION_FORMAT"))
    if (auto parsed = parse_input_format(f)) format = *parsed;
  auto ds = load_dataset(path, format);
  Evaluator ev(shipped_lexicon(), shipped_patterns(), ds);
  MethodConfig m;
  auto rep = level_sweep(ev, {{Level::Word}, {Level::BugReport}}, m, 10, 1);
  const auto& w = rep.rows[0];
  const auto& b = rep.rows[1];
  bool ok = std::abs(w.precision - 0.12) <= 0.05 && std::abs(w.recall - 0.98) <= 0.05 &&
            std::abs(b.precision - 0.69) <= 0.05 && std::abs(b.recall - 0.70) <= 0.05;
  return check(ok, "word P/R " + fmt(w.precision) + "/" + fmt(w.recall) + " (0.12/0.98), br P/R " +
                       fmt(b.precision) + "/" + fmt(b.recall) + " (0.69/0.70)");
}

class ScriptedTransport : public Transport {
 public:
  TransportResult post(const std::string& body) override {
    auto prompt = nlohmann::json::parse(body)["messages"][0]["content"].get<std::string>();
    std::string target = prompt.substr(prompt.find("[bug report]"));
    bool yes = target.find("thread") != std::string::npos || target.find("lock") != std::string::npos;
    nlohmann::json reply = {{"choices", {{{"message", {{"content", yes ? "Yes" : "No"}}}}}}};
    return {200, reply.dump(), ""};
  }
};

Result replay_determinism() {
  TempDir dir("acceptance");
  auto transcript = dir / "transcript.jsonl";
  EndpointConfig cfg;
  cfg.url = "http://127.0.0.1:9/v1/chat/completions";
  Evaluator ev(shipped_lexicon(), shipped_patterns(), mini());
  auto evaluate = [&](const LlmClient& client) {
    MethodConfig m;
    m.kind = MethodKind::Llm;
    m.llm = &client;
    auto rep = level_sweep(ev, {{kAllLevels.begin(), kAllLevels.end()}}, m, 10, 1);
    rep.experiment = "llm-replay";
    rep.dataset = "mini_corpus";
    return render_report(rep, ReportFormat::Csv);
  };
  {
    LlmClient live(cfg, std::make_unique<ScriptedTransport>(), std::make_shared<Transcript>(transcript), LlmMode::Live);
    evaluate(live);
  }
  // no transport: any network attempt is impossible
  LlmClient a(cfg, nullptr, std::make_shared<Transcript>(transcript), LlmMode::Replay);
  LlmClient b(cfg, nullptr, std::make_shared<Transcript>(transcript), LlmMode::Replay);
  std::string first = evaluate(a), second = evaluate(b);
  auto records = read_transcript(transcript).size();
  return check(first == second && records == mini().size(),
               std::to_string(records) + " recorded responses, replayed reports " +
                   (first == second ? "byte-identical" : "differ") + " (" + sha256_hex(first).substr(0, 12) + ")");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"metric identity", metric_identity},
      {"oracle equivalence", oracle_equivalence},
      {"motivating examples", motivating_examples},
      {"level monotonicity", level_monotonicity},
      {"learning correctness", learning_correctness},
      {"cross-validation integrity", cv_integrity},
      {"desk-scale end-to-end", end_to_end},
      {"saturation monotonicity", saturation},
      {"conditional replication", replication},
      {"replay determinism", replay_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = fail(std::string("exception: ") + e.what());
    }
    const char* tag = r.outcome == Outcome::Pass ? "PASS" : r.outcome == Outcome::Skip ? "SKIP" : "FAIL";
    failed += r.outcome == Outcome::Fail;
    std::cout << "AC" << i + 1 << (i + 1 < 10 ? "  " : " ") << tag << "  " << criteria[i].first << ": " << r.detail
              << "\n";
  }
  return failed == 0 ? 0 : 1;
}
