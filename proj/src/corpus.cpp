// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "conclp/error.hpp"
#include "conclp/util.hpp"

namespace conclp {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "conclp-dataset";
constexpr int kFormatVersion = 1;
constexpr double kQuarantineBudget = 0.10;

std::string json_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw std::invalid_argument(std::string("field '") + key + "' has wrong type");
}

// "owner/repo" from "https://api.github.com/repos/owner/repo".
std::string project_from_repo_url(const std::string& url) {
  auto pos = url.find("/repos/");
  if (pos == std::string::npos) return {};
  return url.substr(pos + 7);
}

Label label_from_tags(const std::vector<std::string>& names) {
  bool pos = false, neg = false;
  for (const auto& raw : names) {
    std::string name = to_lower(raw);
    if (name.find("non-concurrency") != std::string::npos ||
        name.find("non_concurrency") != std::string::npos ||
        name.find("not-concurrency") != std::string::npos) {
      neg = true;
    } else if (name.find("concurrency") != std::string::npos) {
      pos = true;
    }
  }
  if (pos && !neg) return Label::Concurrency;
  if (neg && !pos) return Label::NonConcurrency;
  return Label::Unlabeled;
}

std::optional<std::string> timestamp_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' not a string");
  auto norm = normalize_timestamp(it->get<std::string>());
  if (!norm) throw std::invalid_argument("unparseable timestamp '" + it->get<std::string>() + "'");
  return norm;
}

IssueReport from_github(const json& j) {
  IssueReport r;
  r.source = Source::GitHub;
  r.project = json_string(j, "project");
  if (r.project.empty()) r.project = project_from_repo_url(json_string(j, "repository_url"));
  std::string number = json_string(j, "number");
  if (number.empty()) number = json_string(j, "id");
  r.id = (r.project.empty() || number.empty()) ? number : r.project + "#" + number;
  r.title = json_string(j, "title");
  r.body = json_string(j, "body");
  std::vector<std::string> tags;
  if (auto it = j.find("labels"); it != j.end() && it->is_array()) {
    for (const auto& l : *it) {
      if (l.is_string()) tags.push_back(l.get<std::string>());
      else if (l.is_object()) tags.push_back(json_string(l, "name"));
    }
  }
  r.label = label_from_tags(tags);
  if (auto explicit_label = parse_label(json_string(j, "label"))) r.label = *explicit_label;
  r.created_at = timestamp_field(j, "created_at");
  return r;
}

IssueReport from_jira(const json& j) {
  IssueReport r;
  r.source = Source::Jira;
  r.id = json_string(j, "key");
  r.project = r.id.substr(0, r.id.find('-'));
  const json empty = json::object();
  const json& fields = j.contains("fields") && j["fields"].is_object() ? j["fields"] : empty;
  r.title = json_string(fields, "summary");
  r.body = json_string(fields, "description");
  std::vector<std::string> tags;
  if (auto it = fields.find("labels"); it != fields.end() && it->is_array())
    for (const auto& l : *it)
      if (l.is_string()) tags.push_back(l.get<std::string>());
  r.label = label_from_tags(tags);
  if (auto explicit_label = parse_label(json_string(j, "label"))) r.label = *explicit_label;
  r.created_at = timestamp_field(fields, "created");
  return r;
}

IssueReport from_canonical(const json& j) {
  IssueReport r;
  r.id = json_string(j, "id");
  r.project = json_string(j, "project");
  r.title = json_string(j, "title");
  r.body = json_string(j, "body");
  std::string label = json_string(j, "label");
  auto parsed_label = parse_label(label);
  if (!parsed_label) throw std::invalid_argument("unknown label '" + label + "'");
  r.label = *parsed_label;
  std::string source = json_string(j, "source");
  auto parsed_source = source.empty() ? std::optional<Source>(Source::Synthetic) : parse_source(source);
  if (!parsed_source) throw std::invalid_argument("unknown source '" + source + "'");
  r.source = *parsed_source;
  r.created_at = timestamp_field(j, "created_at");
  if (auto it = j.find("concurrency_sentences"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw std::invalid_argument("concurrency_sentences not an array");
    std::vector<std::size_t> idx;
    for (const auto& v : *it) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw std::invalid_argument("concurrency_sentences holds a non-index");
      idx.push_back(v.get<std::size_t>());
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    r.concurrency_sentences = std::move(idx);
  }
  return r;
}

void validate(const IssueReport& r) {
  if (r.id.empty()) throw std::invalid_argument("empty id");
  if (trim(r.title).empty() && trim(r.body).empty())
    throw std::invalid_argument("title and body both empty");
}

// Elements to convert, each paired with its raw text for the sidecar. A
// raw-text parse failure on a JSONL line becomes an element that fails
// conversion.
struct RawRecord {
  std::optional<json> value;
  std::string raw;
  std::string parse_error;
};

std::vector<RawRecord> split_records(std::string_view text, InputFormat format) {
  std::vector<RawRecord> out;
  if (format == InputFormat::Jsonl) {
    std::istringstream in{std::string(text)};
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      RawRecord rec;
      rec.raw = line;
      try {
        rec.value = json::parse(line);
      } catch (const json::parse_error& e) {
        rec.parse_error = e.what();
      }
      if (first && rec.value && rec.value->is_object() && rec.value->contains("format")) {
        first = false;
        if ((*rec.value)["format"] != kFormatName)
          throw Error(ErrorCode::ParseError, "unknown dataset format header");
        if ((*rec.value).value("version", 0) != kFormatVersion)
          throw Error(ErrorCode::ParseError, "unsupported dataset version");
        continue;
      }
      first = false;
      out.push_back(std::move(rec));
    }
    return out;
  }

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  const char* wrapper = format == InputFormat::GitHubJson ? "items" : "issues";
  if (doc.is_object() && doc.contains(wrapper)) doc = doc[wrapper];
  if (!doc.is_array()) throw Error(ErrorCode::ParseError, "expected an array of issues");
  for (auto& el : doc) out.push_back({el, el.dump(), {}});
  return out;
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Concurrency: return "concurrency";
    case Label::NonConcurrency: return "non_concurrency";
    case Label::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

std::string_view to_string(Source source) {
  switch (source) {
    case Source::GitHub: return "github";
    case Source::Jira: return "jira";
    case Source::Synthetic: return "synthetic";
  }
  return "synthetic";
}

std::optional<Label> parse_label(std::string_view text) {
  std::string t = to_lower(text);
  if (t == "concurrency" || t == "1" || t == "positive") return Label::Concurrency;
  if (t == "non_concurrency" || t == "non-concurrency" || t == "0" || t == "negative")
    return Label::NonConcurrency;
  if (t == "unlabeled") return Label::Unlabeled;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view text) {
  std::string t = to_lower(text);
  if (t == "github") return Source::GitHub;
  if (t == "jira") return Source::Jira;
  if (t == "synthetic") return Source::Synthetic;
  return std::nullopt;
}

std::optional<InputFormat> parse_input_format(std::string_view text) {
  std::string t = to_lower(text);
  if (t == "github" || t == "githubjson") return InputFormat::GitHubJson;
  if (t == "jira" || t == "jirajson") return InputFormat::JiraJson;
  if (t == "jsonl") return InputFormat::Jsonl;
  return std::nullopt;
}

std::vector<SentenceLabel> sentence_labels(const IssueReport& report, std::size_t sentence_count) {
  if (!report.concurrency_sentences)
    throw Error(ErrorCode::MissingSentenceLabels, "report " + report.id);
  std::vector<SentenceLabel> out;
  for (std::size_t i = 0; i < sentence_count; ++i) out.push_back({report.id, i, false});
  for (std::size_t idx : *report.concurrency_sentences) {
    if (idx >= sentence_count)
      throw Error(ErrorCode::PreconditionViolation,
                  "report " + report.id + ": sentence index " + std::to_string(idx) +
                      " beyond " + std::to_string(sentence_count) + " sentences");
    out[idx].is_concurrency_related = true;
  }
  return out;
}

std::size_t Dataset::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      reports.begin(), reports.end(), [&](const IssueReport& r) { return r.label == label; }));
}

const IssueReport* Dataset::find(std::string_view id) const {
  for (const auto& r : reports)
    if (r.id == id) return &r;
  return nullptr;
}

std::optional<std::string> normalize_timestamp(std::string_view text) {
  int y, mo, d, h = 0, mi = 0, s = 0;
  std::string t = trim(text);
  int consumed = 0;
  if (std::sscanf(t.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) != 3 || consumed != 10)
    return std::nullopt;
  std::size_t pos = 10;
  if (pos < t.size() && (t[pos] == 'T' || t[pos] == ' ')) {
    if (std::sscanf(t.c_str() + pos + 1, "%2d:%2d:%2d%n", &h, &mi, &s, &consumed) != 3 ||
        consumed != 8)
      return std::nullopt;
    pos += 9;
    if (pos < t.size() && (t[pos] == '.' || t[pos] == ',')) {
      ++pos;
      while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) ++pos;
    }
  }
  int offset_minutes = 0;
  if (pos < t.size()) {
    if (t[pos] == 'Z' && pos + 1 == t.size()) {
      // UTC
    } else if (t[pos] == '+' || t[pos] == '-') {
      std::string off = t.substr(pos + 1);
      off.erase(std::remove(off.begin(), off.end(), ':'), off.end());
      if (off.size() != 4 || !std::all_of(off.begin(), off.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return std::nullopt;
      offset_minutes = std::stoi(off.substr(0, 2)) * 60 + std::stoi(off.substr(2));
      if (t[pos] == '-') offset_minutes = -offset_minutes;
    } else {
      return std::nullopt;
    }
  }
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  sys_seconds tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} - minutes{offset_minutes};
  auto dp = floor<days>(tp);
  year_month_day out{dp};
  hh_mm_ss hms{tp - dp};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(out.year()),
                static_cast<unsigned>(out.month()), static_cast<unsigned>(out.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return std::string(buf);
}

Dataset parse_dataset(std::string_view text, InputFormat format) {
  Dataset ds;
  std::vector<RawRecord> raw = split_records(text, format);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const RawRecord& rec = raw[i];
    try {
      if (!rec.value) throw std::invalid_argument("invalid JSON: " + rec.parse_error);
      if (!rec.value->is_object()) throw std::invalid_argument("record is not an object");
      IssueReport r = format == InputFormat::GitHubJson ? from_github(*rec.value)
                      : format == InputFormat::JiraJson ? from_jira(*rec.value)
                                                        : from_canonical(*rec.value);
      validate(r);
      if (!seen.insert(r.id).second) throw std::invalid_argument("duplicate id '" + r.id + "'");
      ds.reports.push_back(std::move(r));
    } catch (const std::exception& e) {
      ds.quarantined.push_back({i, e.what(), rec.raw});
    }
  }
  if (!raw.empty() && static_cast<double>(ds.quarantined.size()) >
                          kQuarantineBudget * static_cast<double>(raw.size())) {
    const auto& first = ds.quarantined.front();
    throw SchemaViolation(first.index, first.reason);
  }
  if (ds.reports.empty()) throw Error(ErrorCode::EmptyDataset, "no valid records");
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, InputFormat format) {
  Dataset ds = parse_dataset(read_file(path), format);
  if (!ds.quarantined.empty()) {
    std::string sidecar;
    for (const auto& q : ds.quarantined) {
      json j{{"index", q.index}, {"reason", q.reason}, {"raw", q.raw}};
      sidecar += j.dump() + "\n";
    }
    write_file(path.string() + ".quarantine.jsonl", sidecar);
  }
  return ds;
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out = json{{"format", kFormatName}, {"version", kFormatVersion}}.dump() + "\n";
  for (const auto& r : dataset.reports) {
    json j{{"id", r.id},
           {"project", r.project},
           {"title", r.title},
           {"body", r.body},
           {"label", to_string(r.label)},
           {"source", to_string(r.source)},
           {"created_at", r.created_at ? json(*r.created_at) : json(nullptr)}};
    if (r.concurrency_sentences) j["concurrency_sentences"] = *r.concurrency_sentences;
    out += j.dump() + "\n";
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file(path, serialize_dataset(dataset));
}

namespace {

void require_labeled(const Dataset& dataset) {
  for (const auto& r : dataset.reports)
    if (r.label == Label::Unlabeled) throw Error(ErrorCode::UnlabeledData, "report " + r.id);
}

}  // namespace

DatasetSplit split_ratio(const Dataset& dataset, double ratio, std::uint64_t seed) {
  require_labeled(dataset);
  if (!(ratio > 0.0 && ratio < 1.0))
    throw Error(ErrorCode::PreconditionViolation, "ratio must lie in (0, 1)");
  std::vector<std::string> ids;
  for (const auto& r : dataset.reports) ids.push_back(r.id);
  Rng rng(seed);
  rng.shuffle(ids);
  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(ids.size())));
  DatasetSplit split;
  split.seed = seed;
  split.strategy = SplitStrategy::Ratio;
  split.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.eval_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  return split;
}

std::vector<DatasetSplit> stratified_kfold(const Dataset& dataset, std::size_t k,
                                           std::uint64_t seed) {
  require_labeled(dataset);
  if (k < 2) throw Error(ErrorCode::PreconditionViolation, "k must be at least 2");
  std::vector<std::string> pos, neg;
  for (const auto& r : dataset.reports)
    (r.label == Label::Concurrency ? pos : neg).push_back(r.id);
  if (k > std::max(pos.size(), neg.size()))
    throw Error(ErrorCode::KExceedsClassCount,
                "k=" + std::to_string(k) + " but the larger class has " +
                    std::to_string(std::max(pos.size(), neg.size())) + " reports");
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);

  // Dealing positives then negatives round-robin keeps both the per-class
  // and the total fold sizes within one of each other.
  std::vector<std::string> order = pos;
  order.insert(order.end(), neg.begin(), neg.end());
  std::vector<DatasetSplit> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    folds[f].seed = seed;
    folds[f].strategy = SplitStrategy::StratifiedKFold;
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f)
      (f == i % k ? folds[f].eval_ids : folds[f].train_ids).push_back(order[i]);
  }
  return folds;
}

Dataset downsample_to_prevalence(const Dataset& dataset, double positive_fraction,
                                 std::uint64_t seed) {
  if (!(positive_fraction > 0.0 && positive_fraction <= 1.0))
    throw Error(ErrorCode::PreconditionViolation, "positive fraction must lie in (0, 1]");
  std::size_t pos = dataset.count(Label::Concurrency);
  std::vector<std::size_t> neg_idx;
  for (std::size_t i = 0; i < dataset.reports.size(); ++i)
    if (dataset.reports[i].label == Label::NonConcurrency) neg_idx.push_back(i);
  auto target = static_cast<std::size_t>(
      std::llround(static_cast<double>(pos) * (1.0 - positive_fraction) / positive_fraction));
  if (target > neg_idx.size())
    throw Error(ErrorCode::InsufficientNegatives,
                "need " + std::to_string(target) + " negatives, have " +
                    std::to_string(neg_idx.size()));
  Rng rng(seed);
  rng.shuffle(neg_idx);
  std::vector<bool> keep(dataset.reports.size(), false);
  for (std::size_t i = 0; i < target; ++i) keep[neg_idx[i]] = true;

  Dataset out;
  for (std::size_t i = 0; i < dataset.reports.size(); ++i) {
    const auto& r = dataset.reports[i];
    if (r.label == Label::Concurrency || keep[i]) out.reports.push_back(r);
  }
  return out;
}

Dataset filter_created_since(const Dataset& dataset, std::string_view cutoff) {
  auto norm_cutoff = normalize_timestamp(cutoff);
  if (!norm_cutoff)
    throw Error(ErrorCode::PreconditionViolation, "bad cutoff '" + std::string(cutoff) + "'");
  Dataset out;
  for (const auto& r : dataset.reports) {
    if (!r.created_at)
      throw Error(ErrorCode::MissingTimestamp, "report " + r.id + " has no created_at");
    // Normalized timestamps compare correctly as strings.
    if (*r.created_at >= *norm_cutoff) out.reports.push_back(r);
  }
  return out;
}

Dataset select(const Dataset& dataset, const std::vector<std::string>& ids) {
  std::unordered_map<std::string_view, const IssueReport*> by_id;
  for (const auto& r : dataset.reports) by_id.emplace(r.id, &r);
  Dataset out;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::IdMismatch, "unknown report id " + id);
    out.reports.push_back(*it->second);
  }
  return out;
}

}  // namespace conclp
