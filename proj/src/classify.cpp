// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "conclp/error.hpp"
#include "conclp/util.hpp"

namespace conclp {

Classification classify_by_matching(const MatchReport& report, const std::set<Level>& levels) {
  bool hit = std::any_of(levels.begin(), levels.end(), [&](Level l) { return report.matched(l); });
  return {report.report_id, hit ? Label::Concurrency : Label::NonConcurrency, hit ? 1.0 : 0.0};
}

FeatureLayout FeatureLayout::of(const PatternSet& patterns, const std::set<Level>& levels) {
  FeatureLayout layout;
  layout.pattern_set_hash = patterns.layout_hash();
  for (const auto& p : patterns.patterns())
    if (levels.count(p.level)) layout.ids.push_back(p.id);
  layout.hash = sha256_hex(layout.pattern_set_hash + "|" + join(layout.ids, ","));
  return layout;
}

FeatureVector vectorize(const MatchReport& report, const FeatureLayout& layout) {
  if (report.layout_hash != layout.pattern_set_hash)
    throw Error(ErrorCode::LayoutMismatch,
                "report '" + report.report_id + "' was matched with a different pattern set");
  FeatureVector v{report.report_id, std::vector<std::uint8_t>(layout.size(), 0), layout.hash};
  auto hit = report.matched_ids();
  for (std::size_t i = 0; i < layout.size(); ++i) v.bits[i] = hit.count(layout.ids[i]) ? 1 : 0;
  return v;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::NaiveBayes: return "NaiveBayes";
    case ModelKind::LogisticRegression: return "LogisticRegression";
    case ModelKind::LinearSVM: return "LinearSVM";
  }
  return "LogisticRegression";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  std::string t = to_lower(text);
  if (t == "nb" || t == "naivebayes") return ModelKind::NaiveBayes;
  if (t == "lr" || t == "logisticregression") return ModelKind::LogisticRegression;
  if (t == "svm" || t == "linearsvm") return ModelKind::LinearSVM;
  return std::nullopt;
}

std::string_view to_string(Rebalance method) {
  switch (method) {
    case Rebalance::None: return "none";
    case Rebalance::RandomOversample: return "oversample";
    case Rebalance::Smote: return "smote";
  }
  return "none";
}

std::optional<Rebalance> parse_rebalance(std::string_view text) {
  std::string t = to_lower(text);
  if (t == "none") return Rebalance::None;
  if (t == "oversample" || t == "randomoversample") return Rebalance::RandomOversample;
  if (t == "smote") return Rebalance::Smote;
  return std::nullopt;
}

bool TrainedModel::operator==(const TrainedModel& o) const {
  return kind == o.kind && layout_hash == o.layout_hash && dimension == o.dimension && hyper == o.hyper &&
         threshold == o.threshold && seed == o.seed && final_loss == o.final_loss && weights == o.weights &&
         bias == o.bias && platt_a == o.platt_a && platt_b == o.platt_b &&
         nb_log_prior[0] == o.nb_log_prior[0] && nb_log_prior[1] == o.nb_log_prior[1] &&
         nb_log_p1[0] == o.nb_log_p1[0] && nb_log_p1[1] == o.nb_log_p1[1] && nb_log_p0[0] == o.nb_log_p0[0] &&
         nb_log_p0[1] == o.nb_log_p0[1];
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double margin(const std::vector<double>& params, const FeatureVector& x) {
  double z = params.back();
  for (std::size_t i = 0; i < x.bits.size(); ++i)
    if (x.bits[i]) z += params[i];
  return z;
}

void check_shape(const std::vector<Example>& data) {
  if (data.empty()) throw Error(ErrorCode::PreconditionViolation, "no training examples");
  std::size_t d = data.front().x.bits.size();
  std::size_t pos = 0;
  for (const auto& e : data) {
    if (e.x.bits.size() != d || e.x.layout_hash != data.front().x.layout_hash)
      throw Error(ErrorCode::LayoutMismatch, "training vectors have mixed layouts");
    pos += e.positive;
  }
  if (pos == 0 || pos == data.size())
    throw Error(ErrorCode::SingleClassData, "training data needs both classes");
}

}  // namespace

double objective(ModelKind kind, const std::vector<Example>& data, const std::vector<double>& params, double l2) {
  double loss = 0;
  for (const auto& e : data) {
    double z = margin(params, e.x);
    if (kind == ModelKind::LinearSVM) {
      double y = e.positive ? 1.0 : -1.0;
      loss += std::max(0.0, 1.0 - y * z);
    } else {
      loss += softplus(z) - (e.positive ? z : 0.0);
    }
  }
  loss /= static_cast<double>(data.size());
  double reg = 0;
  for (std::size_t i = 0; i + 1 < params.size(); ++i) reg += params[i] * params[i];
  return loss + 0.5 * l2 * reg;
}

std::vector<double> gradient(ModelKind kind, const std::vector<Example>& data, const std::vector<double>& params,
                             double l2) {
  std::vector<double> g(params.size(), 0.0);
  for (const auto& e : data) {
    double z = margin(params, e.x);
    double dz;
    if (kind == ModelKind::LinearSVM) {
      double y = e.positive ? 1.0 : -1.0;
      dz = y * z < 1.0 ? -y : 0.0;
    } else {
      dz = sigmoid(z) - (e.positive ? 1.0 : 0.0);
    }
    if (dz == 0.0) continue;
    for (std::size_t i = 0; i < e.x.bits.size(); ++i)
      if (e.x.bits[i]) g[i] += dz;
    g.back() += dz;
  }
  const double m = static_cast<double>(data.size());
  for (auto& v : g) v /= m;
  for (std::size_t i = 0; i + 1 < params.size(); ++i) g[i] += l2 * params[i];
  return g;
}

TrainedModel train(ModelKind kind, const std::vector<Example>& data, const Hyperparameters& hyper,
                   std::uint64_t seed) {
  check_shape(data);
  TrainedModel model;
  model.kind = kind;
  model.layout_hash = data.front().x.layout_hash;
  model.dimension = data.front().x.bits.size();
  model.hyper = hyper;
  model.seed = seed;
  const std::size_t d = model.dimension;

  if (kind == ModelKind::NaiveBayes) {
    double n[2] = {0, 0};
    std::vector<double> ones[2] = {std::vector<double>(d, 0), std::vector<double>(d, 0)};
    for (const auto& e : data) {
      int c = e.positive ? 1 : 0;
      n[c] += 1;
      for (std::size_t i = 0; i < d; ++i) ones[c][i] += e.x.bits[i];
    }
    const double a = hyper.nb_alpha;
    for (int c = 0; c < 2; ++c) {
      model.nb_log_prior[c] = std::log(n[c] / static_cast<double>(data.size()));
      model.nb_log_p1[c].resize(d);
      model.nb_log_p0[c].resize(d);
      for (std::size_t i = 0; i < d; ++i) {
        double p = (ones[c][i] + a) / (n[c] + 2 * a);
        model.nb_log_p1[c][i] = std::log(p);
        model.nb_log_p0[c][i] = std::log1p(-p);
      }
    }
    // mean negative log-likelihood of the labels
    double nll = 0;
    for (const auto& e : data) {
      double s = predict(model, e.x).score;
      nll -= std::log(std::max(e.positive ? s : 1 - s, 1e-300));
    }
    model.final_loss = nll / static_cast<double>(data.size());
    if (!std::isfinite(model.final_loss)) throw Error(ErrorCode::NonFiniteLoss, "naive Bayes likelihood");
    return model;
  }

  Rng rng(seed);
  std::vector<double> params(d + 1);
  for (auto& p : params) p = (rng.unit() - 0.5) * 0.02;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    auto g = gradient(kind, data, params, hyper.l2);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= hyper.learning_rate * g[i];
    if (epoch % 50 == 49 && !std::isfinite(objective(kind, data, params, hyper.l2)))
      throw Error(ErrorCode::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch + 1));
  }
  model.final_loss = objective(kind, data, params, hyper.l2);
  if (!std::isfinite(model.final_loss)) throw Error(ErrorCode::NonFiniteLoss, "final loss is not finite");
  model.bias = params.back();
  params.pop_back();
  model.weights = std::move(params);

  if (kind == ModelKind::LinearSVM) {
    std::vector<double> full = model.weights;
    full.push_back(model.bias);
    std::vector<double> m;
    for (const auto& e : data) m.push_back(margin(full, e.x));
    double a = 1, b = 0;
    for (int it = 0; it < 500; ++it) {
      double ga = 0, gb = 0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        double r = sigmoid(a * m[i] + b) - (data[i].positive ? 1.0 : 0.0);
        ga += r * m[i];
        gb += r;
      }
      a -= 0.1 * ga / static_cast<double>(data.size());
      b -= 0.1 * gb / static_cast<double>(data.size());
    }
    model.platt_a = a;
    model.platt_b = b;
  }
  return model;
}

Classification predict(const TrainedModel& model, const FeatureVector& x) {
  if (x.layout_hash != model.layout_hash || x.bits.size() != model.dimension)
    throw Error(ErrorCode::LayoutMismatch, "vector '" + x.report_id + "' does not match the model layout");
  double score;
  if (model.kind == ModelKind::NaiveBayes) {
    double lj[2];
    for (int c = 0; c < 2; ++c) {
      lj[c] = model.nb_log_prior[c];
      for (std::size_t i = 0; i < x.bits.size(); ++i)
        lj[c] += x.bits[i] ? model.nb_log_p1[c][i] : model.nb_log_p0[c][i];
    }
    score = sigmoid(lj[1] - lj[0]);
  } else {
    double z = model.bias;
    for (std::size_t i = 0; i < x.bits.size(); ++i)
      if (x.bits[i]) z += model.weights[i];
    score = model.kind == ModelKind::LinearSVM ? sigmoid(model.platt_a * z + model.platt_b) : sigmoid(z);
  }
  return {x.report_id, score >= model.threshold ? Label::Concurrency : Label::NonConcurrency, score};
}

// ---------------------------------------------------------------------------
// Model files

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string hex_list(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += " " + hex(x);
  return out;
}

[[noreturn]] void bad_model(const std::string& why) { throw Error(ErrorCode::InvalidModelFile, why); }

double parse_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') bad_model("bad number '" + s + "'");
  return v;
}

}  // namespace

std::string serialize_model(const TrainedModel& m) {
  std::ostringstream out;
  out << "conclp-model 1\n";
  out << "kind " << to_string(m.kind) << "\n";
  out << "layout_hash " << m.layout_hash << "\n";
  out << "dimension " << m.dimension << "\n";
  out << "threshold " << hex(m.threshold) << "\n";
  out << "learning_rate " << hex(m.hyper.learning_rate) << "\n";
  out << "l2 " << hex(m.hyper.l2) << "\n";
  out << "epochs " << m.hyper.epochs << "\n";
  out << "nb_alpha " << hex(m.hyper.nb_alpha) << "\n";
  out << "seed " << m.seed << "\n";
  out << "final_loss " << hex(m.final_loss) << "\n";
  if (m.kind == ModelKind::NaiveBayes) {
    out << "nb_log_prior " << hex(m.nb_log_prior[0]) << " " << hex(m.nb_log_prior[1]) << "\n";
    for (int c = 0; c < 2; ++c) {
      out << "nb_log_p1_" << c << hex_list(m.nb_log_p1[c]) << "\n";
      out << "nb_log_p0_" << c << hex_list(m.nb_log_p0[c]) << "\n";
    }
  } else {
    out << "bias " << hex(m.bias) << "\n";
    out << "weights" << hex_list(m.weights) << "\n";
    out << "platt " << hex(m.platt_a) << " " << hex(m.platt_b) << "\n";
  }
  return out.str();
}

TrainedModel parse_model(std::string_view text) {
  std::map<std::string, std::vector<std::string>> fields;
  bool header = false;
  for (const auto& line : split(text, '\n')) {
    if (trim(line).empty()) continue;
    std::istringstream in(line);
    std::string key, tok;
    in >> key;
    std::vector<std::string> vals;
    while (in >> tok) vals.push_back(tok);
    if (!header) {
      if (key != "conclp-model" || vals != std::vector<std::string>{"1"}) bad_model("missing conclp-model 1 header");
      header = true;
      continue;
    }
    fields[key] = std::move(vals);
  }
  if (!header) bad_model("empty model file");
  auto one = [&](const std::string& k) -> std::string {
    auto it = fields.find(k);
    if (it == fields.end() || it->second.size() != 1) bad_model("field '" + k + "' missing or malformed");
    return it->second[0];
  };
  auto list = [&](const std::string& k, std::size_t n) {
    auto it = fields.find(k);
    if (it == fields.end() || it->second.size() != n) bad_model("field '" + k + "' missing or wrong length");
    std::vector<double> v;
    for (const auto& s : it->second) v.push_back(parse_double(s));
    return v;
  };
  auto count = [&](const std::string& k) {
    std::string s = one(k);
    char* end = nullptr;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') bad_model("bad integer for '" + k + "'");
    return static_cast<std::uint64_t>(v);
  };

  TrainedModel m;
  auto kind = parse_model_kind(one("kind"));
  if (!kind) bad_model("unknown kind");
  m.kind = *kind;
  m.layout_hash = one("layout_hash");
  m.dimension = count("dimension");
  m.threshold = parse_double(one("threshold"));
  m.hyper.learning_rate = parse_double(one("learning_rate"));
  m.hyper.l2 = parse_double(one("l2"));
  m.hyper.epochs = count("epochs");
  m.hyper.nb_alpha = parse_double(one("nb_alpha"));
  m.seed = count("seed");
  m.final_loss = parse_double(one("final_loss"));
  if (m.kind == ModelKind::NaiveBayes) {
    auto prior = list("nb_log_prior", 2);
    m.nb_log_prior[0] = prior[0];
    m.nb_log_prior[1] = prior[1];
    for (int c = 0; c < 2; ++c) {
      m.nb_log_p1[c] = list("nb_log_p1_" + std::to_string(c), m.dimension);
      m.nb_log_p0[c] = list("nb_log_p0_" + std::to_string(c), m.dimension);
    }
  } else {
    m.bias = parse_double(one("bias"));
    m.weights = list("weights", m.dimension);
    auto platt = list("platt", 2);
    m.platt_a = platt[0];
    m.platt_b = platt[1];
  }
  return m;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

// ---------------------------------------------------------------------------
// Rebalancing

std::vector<Example> rebalance(const std::vector<Example>& data, Rebalance method, double target_ratio,
                               std::uint64_t seed) {
  std::vector<const Example*> pos, neg;
  for (const auto& e : data) (e.positive ? pos : neg).push_back(&e);
  if (pos.empty() || neg.empty()) throw Error(ErrorCode::SingleClassData, "rebalancing needs both classes");
  if (method == Rebalance::None) return data;
  if (!(target_ratio > 0 && target_ratio <= 1))
    throw Error(ErrorCode::PreconditionViolation, "target ratio must lie in (0, 1]");

  const auto& minority = pos.size() <= neg.size() ? pos : neg;
  const auto& majority = pos.size() <= neg.size() ? neg : pos;
  auto target = static_cast<std::size_t>(std::ceil(target_ratio * static_cast<double>(majority.size()) - 1e-9));
  std::vector<Example> out = data;
  if (minority.size() >= target) return out;

  Rng rng(seed);
  std::size_t need = target - minority.size();
  for (std::size_t k = 0; k < need; ++k) {
    const Example& a = *minority[rng.below(minority.size())];
    Example e = a;
    e.x.report_id = a.x.report_id + "#" + std::string(to_string(method)) + std::to_string(k + 1);
    if (method == Rebalance::Smote && minority.size() > 1) {
      // five nearest minority neighbours by Hamming distance, ties by position
      std::vector<std::pair<std::size_t, std::size_t>> dist;
      for (std::size_t j = 0; j < minority.size(); ++j) {
        if (minority[j] == &a) continue;
        std::size_t h = 0;
        for (std::size_t i = 0; i < a.x.bits.size(); ++i) h += a.x.bits[i] != minority[j]->x.bits[i];
        dist.emplace_back(h, j);
      }
      std::sort(dist.begin(), dist.end());
      std::size_t kn = std::min<std::size_t>(5, dist.size());
      const Example& b = *minority[dist[rng.below(kn)].second];
      double u = rng.unit();
      for (std::size_t i = 0; i < a.x.bits.size(); ++i) {
        double v = a.x.bits[i] + u * (static_cast<double>(b.x.bits[i]) - a.x.bits[i]);
        e.x.bits[i] = v >= 0.5 ? 1 : 0;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace conclp
