// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "conclp/error.hpp"
#include "conclp/util.hpp"

namespace conclp {

using nlohmann::ordered_json;

double f_measure(double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); }

double ConfusionCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}
double ConfusionCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}
double ConfusionCounts::f_measure() const { return conclp::f_measure(precision(), recall()); }

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

ConfusionCounts score(const std::vector<Classification>& predictions, const std::vector<IssueReport>& gold) {
  std::map<std::string, Label> truth;
  for (const auto& r : gold) {
    if (r.label == Label::Unlabeled) throw Error(ErrorCode::UnlabeledData, "report '" + r.id + "' has no label");
    if (!truth.emplace(r.id, r.label).second) throw Error(ErrorCode::IdMismatch, "duplicate gold id '" + r.id + "'");
  }
  if (predictions.size() != truth.size())
    throw Error(ErrorCode::IdMismatch, std::to_string(predictions.size()) + " predictions for " +
                                           std::to_string(truth.size()) + " gold reports");
  ConfusionCounts c;
  std::set<std::string> seen;
  for (const auto& p : predictions) {
    auto it = truth.find(p.report_id);
    if (it == truth.end() || !seen.insert(p.report_id).second)
      throw Error(ErrorCode::IdMismatch, "prediction '" + p.report_id + "' has no gold report");
    bool gold_pos = it->second == Label::Concurrency;
    bool pred_pos = p.predicted == Label::Concurrency;
    if (pred_pos && gold_pos) ++c.tp;
    else if (pred_pos) ++c.fp;
    else if (gold_pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::string combination_label(const std::set<Level>& levels) {
  static const char* const kShort[] = {"KW", "PH", "SE", "BR"};
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < kAllLevels.size(); ++i)
    if (levels.count(kAllLevels[i])) parts.emplace_back(kShort[i]);
  return join(parts, "+");
}

std::set<Level> parse_combination(std::string_view text) {
  std::string t = to_lower(trim(text));
  if (t == "all") return {kAllLevels.begin(), kAllLevels.end()};
  std::set<Level> out;
  for (char& c : t)
    if (c == '+') c = ',';
  for (const auto& part : split(t, ',')) {
    std::string p = trim(part);
    if (p.empty()) continue;
    if (p == "kw") p = "word";
    else if (p == "ph") p = "phrase";
    else if (p == "se") p = "sentence";
    else if (p == "bug report" || p == "bugreport") p = "br";
    auto level = parse_level(p);
    if (!level) throw Error(ErrorCode::PreconditionViolation, "unknown level '" + part + "'");
    out.insert(*level);
  }
  return out;
}

std::string MethodConfig::name() const {
  std::string n;
  switch (kind) {
    case MethodKind::Matching: return "matching";
    case MethodKind::Llm: return "LLM";
    case MethodKind::Model:
      n = model == ModelKind::NaiveBayes ? "NB" : model == ModelKind::LinearSVM ? "SVM" : "LR";
      break;
  }
  if (rebalance != Rebalance::None) n += "+" + std::string(to_string(rebalance));
  return n;
}

EvalRow make_row(std::string method, std::string combination, std::vector<ConfusionCounts> folds) {
  EvalRow row;
  row.method = std::move(method);
  row.combination = std::move(combination);
  for (const auto& f : folds) {
    row.counts += f;
    row.macro_precision += f.precision();
    row.macro_recall += f.recall();
    row.macro_f_measure += f.f_measure();
  }
  if (!folds.empty()) {
    auto n = static_cast<double>(folds.size());
    row.macro_precision /= n;
    row.macro_recall /= n;
    row.macro_f_measure /= n;
  }
  row.precision = row.counts.precision();
  row.recall = row.counts.recall();
  row.f_measure = row.counts.f_measure();
  row.folds = std::move(folds);
  return row;
}

// ---------------------------------------------------------------------------
// Evaluator

Evaluator::Evaluator(const Lexicon& lexicon, const PatternSet& patterns, const Dataset& dataset)
    : matcher_(lexicon, patterns), dataset_(dataset) {
  matches_.reserve(dataset_.reports.size());
  for (std::size_t i = 0; i < dataset_.reports.size(); ++i) {
    matches_.push_back(matcher_.match(dataset_.reports[i]));
    index_[dataset_.reports[i].id] = i;
  }
}

const MatchReport& Evaluator::match_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::IdMismatch, "unknown report '" + id + "'");
  return matches_[it->second];
}

std::vector<Classification> Evaluator::predict(const MethodConfig& method, const std::vector<std::string>& train_ids,
                                               const std::vector<std::string>& test_ids, std::uint64_t seed) const {
  std::vector<Classification> out;
  switch (method.kind) {
    case MethodKind::Matching:
      for (const auto& id : test_ids) out.push_back(classify_by_matching(match_of(id), method.levels));
      break;
    case MethodKind::Model: {
      auto layout = FeatureLayout::of(patterns(), method.levels);
      std::vector<Example> train_set;
      for (const auto& id : train_ids) {
        const auto& r = dataset_.reports[index_.at(id)];
        if (r.label == Label::Unlabeled) throw Error(ErrorCode::UnlabeledData, "report '" + id + "' has no label");
        train_set.push_back({vectorize(match_of(id), layout), r.label == Label::Concurrency});
      }
      train_set = rebalance(train_set, method.rebalance, method.rebalance_ratio, seed);
      auto model = train(method.model, train_set, method.hyper, seed);
      for (const auto& id : test_ids) out.push_back(conclp::predict(model, vectorize(match_of(id), layout)));
      break;
    }
    case MethodKind::Llm: {
      if (!method.llm) throw Error(ErrorCode::PreconditionViolation, "LLM method without a client");
      std::vector<PromptBundle> bundles;
      for (const auto& id : test_ids)
        bundles.push_back(build_prompt(patterns(), dataset_.reports[index_.at(id)], method.prompt, &match_of(id)));
      auto answers = method.llm->query_all(bundles);
      for (std::size_t i = 0; i < test_ids.size(); ++i) {
        bool yes = is_positive(answers[i].verdict);
        out.push_back({test_ids[i], yes ? Label::Concurrency : Label::NonConcurrency, yes ? 1.0 : 0.0});
      }
      break;
    }
  }
  return out;
}

EvalRow Evaluator::cross_validate(std::size_t k, const MethodConfig& method, std::uint64_t seed,
                                  std::size_t jobs) const {
  auto folds = stratified_kfold(dataset_, k, seed);
  std::vector<ConfusionCounts> counts(folds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < folds.size();) {
      try {
        auto preds = predict(method, folds[i].train_ids, folds[i].eval_ids, seed + i);
        counts[i] = score(preds, select(dataset_, folds[i].eval_ids).reports);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = folds.size();
      }
    }
  };
  // LLM folds share the client's own in-flight cap
  std::size_t n = method.kind == MethodKind::Llm ? 1 : std::min(std::max<std::size_t>(1, jobs), folds.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return make_row(method.name(), combination_label(method.levels), std::move(counts));
}

EvalRow Evaluator::score_all(const MethodConfig& method, std::uint64_t seed) const {
  std::vector<std::string> ids;
  for (const auto& r : dataset_.reports) ids.push_back(r.id);
  auto preds = predict(method, {}, ids, seed);
  return make_row(method.name(), combination_label(method.levels), {score(preds, dataset_.reports)});
}

EvalReport level_sweep(const Evaluator& evaluator, const std::vector<std::set<Level>>& combinations,
                       const MethodConfig& method, std::size_t k, std::uint64_t seed, std::size_t jobs) {
  auto start = std::chrono::steady_clock::now();
  EvalReport report;
  report.experiment = "level-sweep";
  report.seed = seed;
  for (const auto& levels : combinations) {
    MethodConfig m = method;
    m.levels = levels;
    report.rows.push_back(m.kind == MethodKind::Model ? evaluator.cross_validate(k, m, seed, jobs)
                                                      : evaluator.score_all(m, seed));
  }
  report.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Rendering

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  std::string t = to_lower(text);
  if (t == "table" || t == "plain") return ReportFormat::PlainTable;
  if (t == "csv") return ReportFormat::Csv;
  if (t == "markdown" || t == "md") return ReportFormat::Markdown;
  return std::nullopt;
}

const std::vector<std::string> kCsvColumns = {
    "experiment", "dataset",         "seed",         "method",          "combination", "precision",
    "recall",     "f_measure",       "macro_precision", "macro_recall", "macro_f_measure", "tp",
    "fp",         "tn",              "fn",           "folds"};

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote in csv line");
  return out;
}

std::string table(const std::vector<std::vector<std::string>>& rows, bool markdown) {
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    if (markdown) out += "| ";
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::string cell = r[i];
      cell.resize(width[i], ' ');
      out += cell;
      if (i + 1 < r.size()) out += markdown ? " | " : "  ";
    }
    if (markdown) out += " |";
    while (!markdown && !out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  };
  emit(rows.front());
  if (markdown) {
    out += "|";
    for (std::size_t i = 0; i < width.size(); ++i) out += i < 2 ? " " + std::string(width[i], '-') + " |" : " " + std::string(width[i] - 1, '-') + ": |";
    out += "\n";
  }
  for (std::size_t i = 1; i < rows.size(); ++i) emit(rows[i]);
  return out;
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::string out = join(kCsvColumns, ",") + "\n";
    for (const auto& r : report.rows) {
      std::vector<std::string> f = {csv_field(report.experiment), csv_field(report.dataset),
                                    std::to_string(report.seed), csv_field(r.method), csv_field(r.combination),
                                    format_double(r.precision), format_double(r.recall), format_double(r.f_measure),
                                    format_double(r.macro_precision), format_double(r.macro_recall),
                                    format_double(r.macro_f_measure), std::to_string(r.counts.tp),
                                    std::to_string(r.counts.fp), std::to_string(r.counts.tn),
                                    std::to_string(r.counts.fn), std::to_string(r.folds.size())};
      out += join(f, ",") + "\n";
    }
    return out;
  }
  std::vector<std::vector<std::string>> rows = {{"Method", "Patterns", "Precision", "Recall", "F-measure"}};
  for (const auto& r : report.rows)
    rows.push_back({r.method, r.combination, fixed2(r.precision), fixed2(r.recall), fixed2(r.f_measure)});
  return table(rows, format == ReportFormat::Markdown);
}

EvalReport parse_csv_report(std::string_view text) {
  EvalReport report;
  auto lines = split(text, '\n');
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size() || csv_split(trim(lines[i])) != kCsvColumns)
    throw Error(ErrorCode::ParseError, "metrics csv header does not match");
  auto num = [](const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw Error(ErrorCode::ParseError, "bad number '" + s + "'");
    return v;
  };
  auto count = [](const std::string& s) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') throw Error(ErrorCode::ParseError, "bad count '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  for (++i; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto f = csv_split(line);
    if (f.size() != kCsvColumns.size())
      throw Error(ErrorCode::ParseError, "csv row has " + std::to_string(f.size()) + " fields");
    report.experiment = f[0];
    report.dataset = f[1];
    report.seed = count(f[2]);
    EvalRow r;
    r.method = f[3];
    r.combination = f[4];
    r.precision = num(f[5]);
    r.recall = num(f[6]);
    r.f_measure = num(f[7]);
    r.macro_precision = num(f[8]);
    r.macro_recall = num(f[9]);
    r.macro_f_measure = num(f[10]);
    r.counts = {count(f[11]), count(f[12]), count(f[13]), count(f[14])};
    count(f[15]);
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::string merge_csv_reports(const std::vector<std::string>& csv_texts) {
  std::string out = join(kCsvColumns, ",") + "\n";
  for (const auto& text : csv_texts) {
    parse_csv_report(text);  // validates the header and rows
    auto lines = split(text, '\n');
    bool header = true;
    for (const auto& l : lines) {
      if (trim(l).empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      out += l + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifests

std::string config_hash(const std::map<std::string, std::string>& config) {
  std::string text;
  for (const auto& [k, v] : config) text += k + "=" + v + "\n";
  return sha256_hex(text);
}

std::string serialize_manifest(const Manifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["versions"] = m.versions;
  j["runtime_ms"] = m.runtime_ms;
  return j.dump(2) + "\n";
}

Manifest parse_manifest(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.versions = j.at("versions").get<std::map<std::string, std::string>>();
    m.runtime_ms = j.value("runtime_ms", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
}

std::filesystem::path write_manifest(const Manifest& manifest, const std::filesystem::path& artifact) {
  std::filesystem::path path = artifact;
  path += ".manifest.json";
  write_file(path, serialize_manifest(manifest));
  return path;
}

}  // namespace conclp
