// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "conclp/classify.hpp"
#include "conclp/error.hpp"
#include "conclp/eval.hpp"
#include "conclp/lexicon.hpp"
#include "conclp/llmbridge.hpp"
#include "conclp/patterns.hpp"
#include "conclp/synthetic.hpp"
#include "conclp/textproc.hpp"
#include "conclp/util.hpp"

namespace conclp::cli {
namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string lexicon = std::string(CONCLP_DATA_DIR) + "/lexicon.txt";
  std::string patterns = std::string(CONCLP_DATA_DIR) + "/patterns.txt";
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct LlmOptions {
  std::string url;
  std::string model = "gpt-4o";
  std::string transcript;
  bool replay = false;
  double timeout = 60;
  std::size_t in_flight = 4;
};

struct DataOptions {
  std::string dataset;
  std::string format = "jsonl";
  std::string out;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

InputFormat input_format(const std::string& s) {
  auto f = parse_input_format(s);
  if (!f) throw UsageError("--format: unknown input format '" + s + "' (github, jira, jsonl)");
  return *f;
}

std::map<std::string, std::string> effective_config(const CLI::App& app) {
  std::map<std::string, std::string> out;
  auto collect = [&](const CLI::App& a, const std::string& prefix) {
    for (const CLI::Option* o : a.get_options()) {
      std::string name = o->get_single_name();
      if (name == "help" || name == "config" || name == "version" || name.empty()) continue;
      std::string value = o->count() ? join(o->results(), ",") : o->get_default_str();
      out[prefix + name] = value;
    }
  };
  collect(*app.get_parent(), "");
  collect(app, app.get_name() + ".");
  return out;
}

struct Run {
  const CLI::App& sub;
  Common& common;
  Manifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  Run(const CLI::App& s, Common& c) : sub(s), common(c) {
    manifest.command = s.get_name();
    manifest.seed = c.seed;
    manifest.config = effective_config(s);
    manifest.config_hash = config_hash(manifest.config);
    manifest.versions["conclp"] = kVersion;
  }

  void input(const std::string& path) {
    if (!path.empty() && std::filesystem::is_regular_file(path)) manifest.inputs[path] = sha256_file(path);
  }

  Lexicon lexicon() {
    input(common.lexicon);
    auto lex = Lexicon::load(common.lexicon);
    manifest.versions["lexicon"] = lex.version();
    return lex;
  }

  PatternSet patterns() {
    input(common.patterns);
    auto ps = PatternSet::load(common.patterns);
    manifest.versions["patterns"] = ps.version();
    return ps;
  }

  Dataset dataset(const DataOptions& d) {
    if (d.dataset.empty()) throw UsageError("--dataset is required");
    input(d.dataset);
    return load_dataset(d.dataset, input_format(d.format));
  }

  // "-" or empty writes to stdout without a manifest
  void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
      std::cout << text;
      return;
    }
    std::filesystem::path p(out);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    write_file(p, text);
    manifest.outputs[out] = sha256_hex(text);
    finish(p);
  }

  void finish(const std::filesystem::path& artifact) {
    manifest.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    write_manifest(manifest, artifact);
  }
};

std::string predictions_tsv(const std::vector<Classification>& preds) {
  std::string out = "report_id\tpredicted\tscore\n";
  for (const auto& c : preds)
    out += c.report_id + "\t" + std::string(to_string(c.predicted)) + "\t" + format_double(c.score) + "\n";
  return out;
}

std::vector<MatchReport> load_matches(const std::string& path, const PatternSet& ps) {
  auto matches = parse_match_reports(read_file(path));
  for (const auto& m : matches)
    if (m.layout_hash != ps.layout_hash())
      throw Error(ErrorCode::LayoutMismatch, path + " was matched with a different pattern set");
  return matches;
}

std::map<std::string, MatchReport> by_id(std::vector<MatchReport> matches) {
  std::map<std::string, MatchReport> out;
  for (auto& m : matches) {
    std::string id = m.report_id;
    out.emplace(std::move(id), std::move(m));
  }
  return out;
}

std::unique_ptr<LlmClient> make_client(const LlmOptions& o) {
  auto cfg = EndpointConfig::from_environment();
  if (!o.url.empty()) cfg.url = o.url;
  if (!o.model.empty()) cfg.model = o.model;
  cfg.timeout_seconds = o.timeout;
  cfg.max_in_flight = o.in_flight;
  std::shared_ptr<Transcript> transcript;
  if (!o.transcript.empty()) transcript = std::make_shared<Transcript>(o.transcript);
  if (o.replay) {
    if (!transcript) throw UsageError("--replay needs --transcript");
    return std::make_unique<LlmClient>(cfg, nullptr, transcript, LlmMode::Replay);
  }
  if (cfg.url.empty()) throw UsageError("--llm-url (or CONCLP_LLM_URL) is required for live LLM calls");
  return std::make_unique<LlmClient>(cfg, make_http_transport(cfg), transcript, LlmMode::Live);
}

void add_llm_options(CLI::App* s, LlmOptions& o) {
  s->add_option("--llm-url", o.url, "chat-completion endpoint URL (default: $CONCLP_LLM_URL)");
  s->add_option("--llm-model", o.model, "model name sent to the endpoint")->capture_default_str();
  s->add_option("--transcript", o.transcript, "JSONL transcript to append to or replay from");
  s->add_flag("--replay", o.replay, "answer only from --transcript, no network");
  s->add_option("--llm-timeout", o.timeout, "seconds per request")->capture_default_str();
  s->add_option("--llm-in-flight", o.in_flight, "concurrent requests")->capture_default_str();
}

void add_data_options(CLI::App* s, DataOptions& d, const std::string& out_help) {
  s->add_option("--dataset,-d", d.dataset, "dataset file");
  s->add_option("--format", d.format, "input format: github, jira, jsonl")->capture_default_str();
  s->add_option("--out,-o", d.out, out_help);
}

PromptOptions prompt_options(const std::vector<std::size_t>& counts, std::size_t max_tokens, std::uint64_t seed) {
  PromptOptions p;
  if (counts.size() == 1) p.exemplars_per_level.fill(counts[0]);
  else if (counts.size() == 4) std::copy(counts.begin(), counts.end(), p.exemplars_per_level.begin());
  else throw UsageError("--exemplars takes one count or four (word,phrase,sentence,br)");
  p.max_prompt_tokens = max_tokens;
  p.seed = seed;
  return p;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EndpointUnreachable:
    case ErrorCode::RateLimited:
    case ErrorCode::TranscriptMiss:
    case ErrorCode::AdjudicatorUnavailable:
      return kEndpointError;
    case ErrorCode::PreconditionViolation:
      return kUsageError;
    default:
      return kDataError;
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Concurrency bug report classification with linguistic patterns", "conclp"};
  app.set_config("--config", "", "flat key=value file; [name] sections apply to subcommands");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  Common common;
  app.add_option("--lexicon", common.lexicon, "lexicon file")->capture_default_str()->check(CLI::ExistingFile);
  app.add_option("--patterns", common.patterns, "pattern set file")->capture_default_str()->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_option("--jobs,-j", common.jobs, "worker threads")->capture_default_str();

  std::map<CLI::App*, std::function<void(Run&)>> handlers;

  // ingest
  DataOptions ingest;
  auto* s_ingest = app.add_subcommand("ingest", "convert a tracker export to the canonical JSONL dataset");
  add_data_options(s_ingest, ingest, "output dataset");
  s_ingest->get_option("--out")->required();
  handlers[s_ingest] = [&](Run& run) {
    auto ds = run.dataset(ingest);
    std::cerr << ds.size() << " reports, " << ds.count(Label::Concurrency) << " concurrency, "
              << ds.quarantined.size() << " quarantined\n";
    run.emit(ingest.out, serialize_dataset(ds));
  };

  // split
  DataOptions split_d;
  double split_ratio_v = 0.8;
  std::size_t folds = 0;
  auto* s_split = app.add_subcommand("split", "ratio split into train/eval files, or k stratified folds");
  add_data_options(s_split, split_d, "output directory");
  s_split->get_option("--out")->required();
  s_split->add_option("--ratio", split_ratio_v, "train fraction")->capture_default_str();
  s_split->add_option("--folds,-k", folds, "stratified folds (overrides --ratio)");
  handlers[s_split] = [&](Run& run) {
    auto ds = run.dataset(split_d);
    std::filesystem::create_directories(split_d.out);
    std::filesystem::path dir(split_d.out);
    if (folds > 0) {
      std::string tsv = "report_id\tfold\n";
      auto fs = stratified_kfold(ds, folds, common.seed);
      for (std::size_t i = 0; i < fs.size(); ++i)
        for (const auto& id : fs[i].eval_ids) tsv += id + "\t" + std::to_string(i) + "\n";
      run.emit((dir / "folds.tsv").string(), tsv);
      return;
    }
    auto sp = conclp::split_ratio(ds, split_ratio_v, common.seed);
    auto train_text = serialize_dataset(select(ds, sp.train_ids));
    write_file(dir / "train.jsonl", train_text);
    run.manifest.outputs[(dir / "train.jsonl").string()] = sha256_hex(train_text);
    run.emit((dir / "eval.jsonl").string(), serialize_dataset(select(ds, sp.eval_ids)));
  };

  // downsample
  DataOptions down;
  double fraction = 0.05;
  auto* s_down = app.add_subcommand("downsample", "drop negatives to reach a positive prevalence");
  add_data_options(s_down, down, "output dataset");
  s_down->get_option("--out")->required();
  s_down->add_option("--fraction", fraction, "target positive fraction")->capture_default_str();
  handlers[s_down] = [&](Run& run) {
    run.emit(down.out, serialize_dataset(downsample_to_prevalence(run.dataset(down), fraction, common.seed)));
  };

  // preprocess
  DataOptions pre;
  auto* s_pre = app.add_subcommand("preprocess", "sentence split, tag and lemmatize every report");
  add_data_options(s_pre, pre, "output JSONL of processed sentences");
  handlers[s_pre] = [&](Run& run) {
    auto ds = run.dataset(pre);
    auto lex = run.patterns().effective_lexicon(run.lexicon());
    std::string out;
    for (const auto& r : ds.reports) out += dump_sentences(process_report(r, lex));
    run.emit(pre.out, out);
  };

  // match
  DataOptions match_d;
  bool adjudicate = false;
  LlmOptions match_llm;
  auto* s_match = app.add_subcommand("match", "run the pattern matcher and write match reports");
  add_data_options(s_match, match_d, "output JSONL of match reports");
  s_match->add_flag("--adjudicate", adjudicate, "confirm sentence and report hits with the LLM");
  add_llm_options(s_match, match_llm);
  handlers[s_match] = [&](Run& run) {
    auto ds = run.dataset(match_d);
    Matcher matcher(run.lexicon(), run.patterns());
    std::unique_ptr<LlmClient> client;
    std::unique_ptr<LlmAdjudicator> adj;
    if (adjudicate) {
      client = make_client(match_llm);
      adj = std::make_unique<LlmAdjudicator>(*client);
    }
    std::vector<MatchReport> out;
    for (const auto& r : ds.reports) out.push_back(matcher.match(r, adj.get()));
    run.emit(match_d.out, serialize_match_reports(out));
  };

  // mine
  DataOptions mine_d;
  std::size_t ngram = 2;
  double support = 0.05;
  std::size_t gap = 0;
  auto* s_mine = app.add_subcommand("mine", "mine typed bigram/trigram candidates from concurrency sentences");
  add_data_options(s_mine, mine_d, "output TSV");
  s_mine->add_option("--n", ngram, "2 or 3")->capture_default_str()->check(CLI::Range(2, 3));
  s_mine->add_option("--min-support", support, "minimum sentence fraction")->capture_default_str();
  s_mine->add_option("--gap", gap, "tokens allowed between units")->capture_default_str();
  handlers[s_mine] = [&](Run& run) {
    auto ds = run.dataset(mine_d);
    auto lex = run.patterns().effective_lexicon(run.lexicon());
    std::vector<ProcessedSentence> sents;
    for (const auto& r : ds.reports) {
      if (r.label != Label::Concurrency) continue;
      auto all = process_report(r, lex);
      std::set<std::size_t> keep;
      if (r.concurrency_sentences) keep.insert(r.concurrency_sentences->begin(), r.concurrency_sentences->end());
      for (auto& s : all)
        if (!r.concurrency_sentences || keep.count(s.index())) sents.push_back(std::move(s));
    }
    std::string out = "pattern\tsentences\tsupport\texample\n";
    for (const auto& c : mine_phrase_candidates(sents, lex, ngram, support, gap))
      out += c.key() + "\t" + std::to_string(c.sentence_count) + "\t" + format_double(c.support) + "\t" +
             normalize_space(c.example) + "\n";
    run.emit(mine_d.out, out);
  };

  // train
  DataOptions train_d;
  std::string model_name = "lr", levels_text = "all", rebalance_name = "none";
  double rebalance_ratio = 1.0;
  Hyperparameters hyper;
  auto* s_train = app.add_subcommand("train", "train a classifier on pattern feature vectors");
  add_data_options(s_train, train_d, "output model file");
  s_train->get_option("--out")->required();
  s_train->add_option("--model", model_name, "nb, lr or svm")->capture_default_str();
  s_train->add_option("--levels", levels_text, "feature levels, e.g. all or KW+PH")->capture_default_str();
  s_train->add_option("--rebalance", rebalance_name, "none, oversample or smote")->capture_default_str();
  s_train->add_option("--rebalance-ratio", rebalance_ratio, "minority/majority target")->capture_default_str();
  s_train->add_option("--learning-rate", hyper.learning_rate)->capture_default_str();
  s_train->add_option("--l2", hyper.l2)->capture_default_str();
  s_train->add_option("--epochs", hyper.epochs)->capture_default_str();
  s_train->add_option("--nb-alpha", hyper.nb_alpha)->capture_default_str();
  auto parse_model_opt = [&] {
    auto k = parse_model_kind(model_name);
    if (!k) throw UsageError("--model: unknown model '" + model_name + "'");
    return *k;
  };
  auto parse_rebalance_opt = [&] {
    auto r = parse_rebalance(rebalance_name);
    if (!r) throw UsageError("--rebalance: unknown method '" + rebalance_name + "'");
    return *r;
  };
  handlers[s_train] = [&](Run& run) {
    auto ds = run.dataset(train_d);
    Evaluator ev(run.lexicon(), run.patterns(), ds);
    auto layout = FeatureLayout::of(ev.patterns(), parse_combination(levels_text));
    std::vector<Example> data;
    for (const auto& r : ds.reports) {
      if (r.label == Label::Unlabeled) throw Error(ErrorCode::UnlabeledData, "report '" + r.id + "' has no label");
      data.push_back({vectorize(ev.match_of(r.id), layout), r.label == Label::Concurrency});
    }
    data = rebalance(data, parse_rebalance_opt(), rebalance_ratio, common.seed);
    auto model = train(parse_model_opt(), data, hyper, common.seed);
    std::cerr << "final loss " << format_double(model.final_loss) << "\n";
    run.emit(train_d.out, serialize_model(model));
  };

  // classify
  DataOptions cls_d;
  std::string model_path, from_match, cls_levels = "word";
  auto* s_cls = app.add_subcommand("classify", "predict labels with a trained model or by matching");
  add_data_options(s_cls, cls_d, "output TSV of predictions");
  s_cls->add_option("--model", model_path, "model file; without it, matching-based classification");
  s_cls->add_option("--levels", cls_levels, "levels (matching, or the model's feature levels)")->capture_default_str();
  s_cls->add_option("--from-match", from_match, "reuse match reports instead of matching again");
  handlers[s_cls] = [&](Run& run) {
    auto ds = run.dataset(cls_d);
    auto ps = run.patterns();
    auto levels = parse_combination(cls_levels);
    std::map<std::string, MatchReport> matches;
    if (!from_match.empty()) {
      run.input(from_match);
      matches = by_id(load_matches(from_match, ps));
    } else {
      Matcher matcher(run.lexicon(), ps);
      for (const auto& r : ds.reports) matches.emplace(r.id, matcher.match(r));
    }
    std::optional<TrainedModel> model;
    if (!model_path.empty()) {
      run.input(model_path);
      model = load_model(model_path);
    }
    auto layout = FeatureLayout::of(ps, levels);
    std::vector<Classification> preds;
    for (const auto& r : ds.reports) {
      auto it = matches.find(r.id);
      if (it == matches.end()) throw Error(ErrorCode::IdMismatch, "no match report for '" + r.id + "'");
      preds.push_back(model ? predict(*model, vectorize(it->second, layout))
                            : classify_by_matching(it->second, levels));
    }
    run.emit(cls_d.out, predictions_tsv(preds));
  };

  // prompt
  DataOptions pr_d;
  std::vector<std::size_t> exemplars = {1, 1, 1, 1};
  std::size_t max_tokens = 4096;
  std::string report_id;
  bool query = false;
  LlmOptions pr_llm;
  auto* s_prompt = app.add_subcommand("prompt", "build pattern-guided prompts, optionally query the LLM");
  add_data_options(s_prompt, pr_d, "output JSONL");
  s_prompt->add_option("--exemplars", exemplars, "per-level exemplar counts (one or four values)")
      ->delimiter(',')
      ->capture_default_str();
  s_prompt->add_option("--max-tokens", max_tokens, "prompt token budget")->capture_default_str();
  s_prompt->add_option("--id", report_id, "only this report");
  s_prompt->add_flag("--query", query, "send prompts and record verdicts");
  add_llm_options(s_prompt, pr_llm);
  handlers[s_prompt] = [&](Run& run) {
    auto ds = run.dataset(pr_d);
    auto ps = run.patterns();
    Matcher matcher(run.lexicon(), ps);
    auto opts = prompt_options(exemplars, max_tokens, common.seed);
    std::vector<PromptBundle> bundles;
    std::vector<std::string> ids;
    for (const auto& r : ds.reports) {
      if (!report_id.empty() && r.id != report_id) continue;
      auto m = matcher.match(r);
      bundles.push_back(build_prompt(ps, r, opts, &m));
      ids.push_back(r.id);
    }
    if (!report_id.empty() && ids.empty()) throw Error(ErrorCode::IdMismatch, "no report '" + report_id + "'");
    std::vector<LlmResponse> answers;
    if (query) answers = make_client(pr_llm)->query_all(bundles);
    std::string out;
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      nlohmann::ordered_json j;
      j["report_id"] = ids[i];
      j["seed"] = bundles[i].seed;
      j["prompt"] = bundles[i].rendered;
      if (query) {
        j["response"] = answers[i].raw;
        j["verdict"] = std::string(to_string(answers[i].verdict));
      }
      out += j.dump() + "\n";
    }
    run.emit(pr_d.out, out);
  };

  // export-finetune
  DataOptions ft_d;
  std::string ft_from_match;
  auto* s_ft = app.add_subcommand("export-finetune", "write [CLS]...[SEP] fine-tuning records");
  add_data_options(s_ft, ft_d, "output JSONL");
  s_ft->get_option("--out")->required();
  s_ft->add_option("--from-match", ft_from_match, "reuse match reports");
  handlers[s_ft] = [&](Run& run) {
    auto ds = run.dataset(ft_d);
    auto ps = run.patterns();
    std::vector<MatchReport> matches;
    if (!ft_from_match.empty()) {
      run.input(ft_from_match);
      matches = load_matches(ft_from_match, ps);
    } else {
      Matcher matcher(run.lexicon(), ps);
      for (const auto& r : ds.reports) matches.push_back(matcher.match(r));
    }
    auto records = finetune_records(ds, matches, ps);
    std::cerr << records.size() << " records\n";
    run.emit(ft_d.out, serialize_finetune(records));
  };

  // eval
  DataOptions ev_d;
  std::string ev_levels = "word,phrase,sentence,br", method_name = "matching", ev_format = "table";
  std::string ev_model = "lr", ev_rebalance = "none", experiment = "eval";
  double ev_ratio = 1.0;
  std::size_t k = 10;
  Hyperparameters ev_hyper;
  std::vector<std::size_t> ev_exemplars = {1, 1, 1, 1};
  LlmOptions ev_llm;
  auto* s_eval = app.add_subcommand("eval", "score methods per level combination");
  add_data_options(s_eval, ev_d, "report file (stdout if omitted)");
  s_eval->add_option("--levels", ev_levels, "comma-separated rows; join levels with + for one row")
      ->capture_default_str();
  s_eval->add_option("--method", method_name, "matching, model or llm")->capture_default_str();
  s_eval->add_option("--model", ev_model, "nb, lr or svm for --method model")->capture_default_str();
  s_eval->add_option("--rebalance", ev_rebalance, "none, oversample or smote")->capture_default_str();
  s_eval->add_option("--rebalance-ratio", ev_ratio)->capture_default_str();
  s_eval->add_option("--learning-rate", ev_hyper.learning_rate)->capture_default_str();
  s_eval->add_option("--l2", ev_hyper.l2)->capture_default_str();
  s_eval->add_option("--epochs", ev_hyper.epochs)->capture_default_str();
  s_eval->add_option("--folds,-k", k, "cross-validation folds for learned models")->capture_default_str();
  s_eval->add_option("--report-format", ev_format, "table, csv or markdown")->capture_default_str();
  s_eval->add_option("--experiment", experiment, "experiment id in the report")->capture_default_str();
  s_eval->add_option("--exemplars", ev_exemplars, "LLM exemplars per level")->delimiter(',')->capture_default_str();
  add_llm_options(s_eval, ev_llm);
  handlers[s_eval] = [&](Run& run) {
    auto fmt = parse_report_format(ev_format);
    if (!fmt) throw UsageError("--report-format: unknown format '" + ev_format + "'");
    auto ds = run.dataset(ev_d);
    Evaluator ev(run.lexicon(), run.patterns(), ds);
    MethodConfig m;
    std::string mn = to_lower(method_name);
    std::unique_ptr<LlmClient> client;
    if (mn == "matching") {
      m.kind = MethodKind::Matching;
    } else if (mn == "model" || parse_model_kind(mn)) {
      m.kind = MethodKind::Model;
      model_name = mn == "model" ? ev_model : mn;
      m.model = parse_model_opt();
      rebalance_name = ev_rebalance;
      m.rebalance = parse_rebalance_opt();
      m.rebalance_ratio = ev_ratio;
      m.hyper = ev_hyper;
    } else if (mn == "llm") {
      m.kind = MethodKind::Llm;
      client = make_client(ev_llm);
      m.llm = client.get();
      m.prompt = prompt_options(ev_exemplars, 4096, common.seed);
    } else {
      throw UsageError("--method: unknown method '" + method_name + "'");
    }
    std::vector<std::set<Level>> combos;
    for (const auto& part : split(ev_levels, ','))
      if (!trim(part).empty()) combos.push_back(parse_combination(part));
    auto report = level_sweep(ev, combos, m, k, common.seed, common.jobs);
    report.experiment = experiment;
    report.dataset = std::filesystem::path(ev_d.dataset).filename().string() + "@" +
                     sha256_file(ev_d.dataset).substr(0, 12);
    run.emit(ev_d.out, render_report(report, *fmt));
  };

  // saturate
  DataOptions sat_d;
  std::string unit = "tenths";
  SaturationOptions sat_opts;
  auto* s_sat = app.add_subcommand("saturate", "incremental lexicon and pattern discovery curve");
  add_data_options(s_sat, sat_d, "output CSV");
  s_sat->add_option("--unit", unit, "tenths or project")->capture_default_str();
  s_sat->add_option("--held-out", sat_opts.held_out_fraction, "held-out sentence fraction")->capture_default_str();
  s_sat->add_option("--threshold", sat_opts.entry_threshold, "lexicon frequency threshold")->capture_default_str();
  handlers[s_sat] = [&](Run& run) {
    SaturationUnit u;
    if (unit == "tenths") u = SaturationUnit::SubsetTenths;
    else if (unit == "project") u = SaturationUnit::ByProject;
    else throw UsageError("--unit: expected tenths or project");
    auto ds = run.dataset(sat_d);
    sat_opts.seed = common.seed;
    auto curve = saturation_curve(ds.reports, u, run.lexicon(), run.patterns(), sat_opts);
    std::string out =
        "iteration,unit,new_entries,cumulative_entries,new_patterns,cumulative_patterns,recall_word,"
        "recall_phrase,recall_sentence\n";
    for (const auto& p : curve.points)
      out += std::to_string(p.iteration) + "," + p.unit_label + "," + std::to_string(p.new_entries) + "," +
             std::to_string(p.cumulative_entries) + "," + std::to_string(p.new_patterns) + "," +
             std::to_string(p.cumulative_patterns) + "," + format_double(p.recall_word) + "," +
             format_double(p.recall_phrase) + "," + format_double(p.recall_sentence) + "\n";
    out += "full,all,,,,," + format_double(curve.full_recall_word) + "," + format_double(curve.full_recall_phrase) +
           "," + format_double(curve.full_recall_sentence) + "\n";
    run.emit(sat_d.out, out);
  };

  // validate
  DataOptions val_d;
  auto* s_val = app.add_subcommand("validate", "load and check the lexicon, pattern set and dataset");
  add_data_options(s_val, val_d, "unused");
  handlers[s_val] = [&](Run& run) {
    auto lex = run.lexicon();
    auto ps = run.patterns();
    std::cout << "lexicon " << lex.version() << ":";
    for (Category c : kAllCategories) std::cout << " " << to_string(c) << "=" << lex.category(c).size();
    std::cout << "\n";
    for (const auto& w : lex.warnings()) std::cout << "  warning: " << w << "\n";
    std::cout << "patterns " << ps.version() << ":";
    for (Level l : kAllLevels) std::cout << " " << to_string(l) << "=" << ps.count(l);
    std::cout << " hash=" << ps.layout_hash().substr(0, 12) << "\n";
    if (!val_d.dataset.empty()) {
      auto ds = run.dataset(val_d);
      std::cout << "dataset: " << ds.size() << " reports, " << ds.count(Label::Concurrency) << " concurrency, "
                << ds.count(Label::Unlabeled) << " unlabeled, " << ds.quarantined.size() << " quarantined\n";
    }
  };

  // synth
  SyntheticOptions syn = mini_corpus_options();
  std::string syn_out;
  auto* s_syn = app.add_subcommand("synth", "generate the synthetic mini corpus");
  s_syn->add_option("--out,-o", syn_out, "output dataset")->required();
  s_syn->add_option("--count", syn.report_count)->capture_default_str();
  s_syn->add_option("--positive-fraction", syn.positive_fraction)->capture_default_str();
  s_syn->add_option("--keyword-free-fraction", syn.keyword_free_fraction)->capture_default_str();
  s_syn->add_option("--decoy-fraction", syn.decoy_fraction)->capture_default_str();
  s_syn->add_option("--synth-seed", syn.seed)->capture_default_str();
  handlers[s_syn] = [&](Run& run) { run.emit(syn_out, serialize_dataset(generate_synthetic(syn))); };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "conclp: " << e.what() << "\n";
    return kUsageError;
  }

  for (auto& [sub, handler] : handlers) {
    if (!sub->parsed()) continue;
    try {
      Run r(*sub, common);
      handler(r);
      return 0;
    } catch (const UsageError& e) {
      std::cerr << "conclp " << sub->get_name() << ": " << e.what() << "\n";
      return kUsageError;
    } catch (const Error& e) {
      std::cerr << "conclp " << sub->get_name() << ": " << e.what() << "\n";
      return exit_code_for(e.code());
    } catch (const std::exception& e) {
      std::cerr << "conclp " << sub->get_name() << ": " << e.what() << "\n";
      return kDataError;
    }
  }
  return kUsageError;
}

}  // namespace conclp::cli
