// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "conclp/error.hpp"
#include "conclp/util.hpp"

namespace conclp {
namespace {

using Pool = std::vector<std::string_view>;

const Pool kComponents = {"flush", "compaction", "replication", "scheduler", "heartbeat",
                          "indexer", "cleanup", "upload", "metrics", "snapshot"};
const Pool kFields = {"hit count", "offset", "balance", "sequence number", "reference count",
                      "retry counter", "queue size"};
const Pool kMethods = {"flushCache", "closeSession", "registerListener", "rotateLog",
                       "commitOffset", "refreshToken", "evictEntry"};
const Pool kCollections = {"listener list", "session map", "pending queue", "route table"};
const Pool kResources = {"region", "table", "index", "segment", "bucket"};
const Pool kWidgets = {"button", "label", "icon", "dropdown", "checkbox", "tooltip"};
const Pool kVersions = {"2.3.1", "3.0.0", "4.1.2", "1.9.7", "5.2.0"};
const Pool kProjects = {"acme/storage", "acme/gateway", "orbit/scheduler", "northwind/cache",
                        "lumen/web", "delta/etl"};

const Pool kRelated = {
    "The {comp} thread hangs forever while it waits for the {res} lock.",
    "A deadlock occurs when the {comp} thread and the {comp2} thread acquire the locks in opposite order.",
    "Two threads update the {field} at the same time and one update is lost.",
    "There is a race condition between {m1}() and {m2}().",
    "The {comp} thread throws ConcurrentModificationException while iterating the {coll}.",
    "A data race on the {field} corrupts the cache.",
    "The transaction fails with a lock timeout when concurrent writes hit the same row.",
    "The {comp} thread blocks indefinitely in {m1}().",
    "The {comp} thread acquires the {res} lock but never releases it.",
    "Concurrent threads modify the {coll} without synchronization.",
    "The mutex is held forever after the {comp} task fails.",
    "The {comp} service stalls because every worker thread waits on the same semaphore.",
    "Calling {m1}() from two threads leaves the {field} in an inconsistent state.",
    "The lock is released before the {field} is written, so another thread reads a stale value.",
    "The system hangs when the {comp} thread tries to acquire the {res} lock.",
    "The {comp} worker thread is interrupted and throws InterruptedException.",
    "Sometimes the lost update on the {field} happens after a retry.",
};

const Pool kKeywordFree = {
    "The {field} is sometimes smaller than the number of processed requests.",
    "Two requests change the {field} at the same moment and one change disappears.",
    "The problem only shows up under heavy parallel load.",
    "Running the {comp} job twice at once corrupts the {coll}.",
    "The result depends on which request finishes first.",
};

const Pool kRelatedTitles = {
    "Deadlock between {comp} and {comp2} threads",
    "Race condition in {m1}()",
    "The {comp} thread hangs forever",
    "Lost update on the {field} under concurrent writes",
    "Thread deadlock in {comp} under load",
    "Data race on the {field}",
};

const Pool kKeywordFreeTitles = {
    "The {field} is lower than expected under load",
    "Intermittent wrong {field} after parallel requests",
    "Duplicate entries in the {coll} after restart",
};

const Pool kContext = {
    "We run version {ver} on Linux.",
    "Steps to reproduce are attached below.",
    "The log output is included in the attachment.",
    "Expected behavior is that the request completes normally.",
    "This started after the upgrade to version {ver}.",
    "The issue is reproducible on a fresh install.",
};

const Pool kPlain = {
    "The settings page shows a misaligned {widget}.",
    "Clicking save opens an empty error dialog.",
    "The CSV export writes an invalid header row.",
    "The search field ignores uppercase letters.",
    "The date picker displays the wrong month.",
    "Uploading a large file shows a timeout message.",
    "The documentation link points to a missing page.",
    "The installer fails on machines behind a proxy.",
    "Dark mode uses the wrong color for links.",
    "The report total is rounded incorrectly.",
    "The {widget} on the profile page does nothing when clicked.",
    "Sorting by name puts lowercase entries last.",
};

const Pool kPlainTitles = {
    "Misaligned {widget} on the settings page",
    "Save button opens an empty dialog",
    "Invalid header in CSV export",
    "Wrong month in the date picker",
    "Installer fails behind a proxy",
    "Broken documentation link",
    "Search ignores uppercase letters",
};

const Pool kDecoy = {
    "When the phone screen is locked, the video stops.",
    "The discussion thread on the forum shows duplicate replies.",
    "The database transaction log grows without limit.",
    "The race results page lists the wrong winner.",
    "Please lock this issue after the release.",
    "The lock icon on the login page is blurry.",
    "The thread count setting is ignored by the importer.",
    "Does the library support fairness when it creates a lock?",
    "The deadlock detection guide has a broken link.",
    "The user cannot unlock the account after a password reset.",
    "The thread dump page fails to load.",
};

const Pool kDecoyTitles = {
    "Lock screen stops video playback",
    "Forum thread shows duplicate replies",
    "Race results show the wrong winner",
    "Thread dump page fails to load",
    "Lock icon is blurry",
};

class Filler {
 public:
  explicit Filler(Rng& rng) : rng_(rng) {}

  std::string fill(std::string_view tmpl) {
    std::string comp(pick(kComponents)), comp2(pick(kComponents));
    while (comp2 == comp) comp2 = pick(kComponents);
    std::string m1(pick(kMethods)), m2(pick(kMethods));
    while (m2 == m1) m2 = pick(kMethods);
    const std::array<std::pair<std::string_view, std::string>, 9> vars = {{
        {"{comp}", comp},
        {"{comp2}", comp2},
        {"{field}", std::string(pick(kFields))},
        {"{m1}", m1},
        {"{m2}", m2},
        {"{coll}", std::string(pick(kCollections))},
        {"{res}", std::string(pick(kResources))},
        {"{widget}", std::string(pick(kWidgets))},
        {"{ver}", std::string(pick(kVersions))},
    }};
    std::string out(tmpl);
    for (const auto& [key, value] : vars) {
      for (std::size_t p = out.find(key); p != std::string::npos; p = out.find(key, p)) {
        out.replace(p, key.size(), value);
        p += value.size();
      }
    }
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
  }

  std::string_view pick(const Pool& pool) { return rng_.pick(std::span<const std::string_view>(pool)); }
  std::string from(const Pool& pool) { return fill(pick(pool)); }

 private:
  Rng& rng_;
};

std::string date_for(std::size_t i) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{year{2021} / January / 1} + days{static_cast<int>(i * 3)}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT12:00:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

SyntheticOptions mini_corpus_options() { return SyntheticOptions{}; }

Dataset generate_synthetic(const SyntheticOptions& o) {
  if (o.report_count == 0 || o.positive_fraction < 0 || o.positive_fraction > 1 ||
      o.min_body_sentences > o.max_body_sentences) {
    throw Error(ErrorCode::PreconditionViolation, "invalid synthetic corpus options");
  }
  Rng rng(o.seed);
  Filler f(rng);
  auto positives = static_cast<std::size_t>(
      std::llround(static_cast<double>(o.report_count) * o.positive_fraction));
  auto keyword_free = static_cast<std::size_t>(
      std::llround(static_cast<double>(positives) * o.keyword_free_fraction));

  std::vector<bool> is_positive(o.report_count, false);
  for (std::size_t i = 0; i < positives; ++i) is_positive[i] = true;
  rng.shuffle(is_positive);

  Dataset ds;
  std::size_t positive_seen = 0;
  for (std::size_t i = 0; i < o.report_count; ++i) {
    IssueReport r;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%04zu", i + 1);
    r.id = id;
    r.project = std::string(f.pick(kProjects));
    r.source = Source::Synthetic;
    r.created_at = date_for(i);
    std::size_t body_n =
        o.min_body_sentences + rng.below(o.max_body_sentences - o.min_body_sentences + 1);

    // (sentence, related) with the title first
    std::vector<std::pair<std::string, bool>> sentences;
    if (is_positive[i]) {
      r.label = Label::Concurrency;
      bool kw_free = positive_seen++ < keyword_free;
      sentences.emplace_back(f.from(kw_free ? kKeywordFreeTitles : kRelatedTitles), true);
      std::vector<std::pair<std::string, bool>> body;
      std::size_t related_n = std::max<std::size_t>(1, body_n - body_n / 3);
      for (std::size_t k = 0; k < body_n; ++k) {
        if (k < related_n) body.emplace_back(f.from(kw_free ? kKeywordFree : kRelated), true);
        else body.emplace_back(f.from(kContext), false);
      }
      rng.shuffle(body);
      sentences.insert(sentences.end(), body.begin(), body.end());
    } else {
      r.label = Label::NonConcurrency;
      bool decoy = rng.unit() < o.decoy_fraction;
      bool decoy_title = decoy && (body_n == 0 || rng.below(2) == 0);
      sentences.emplace_back(f.from(decoy_title ? kDecoyTitles : kPlainTitles), false);
      std::size_t decoy_at = decoy && !decoy_title ? rng.below(body_n) : body_n;
      for (std::size_t k = 0; k < body_n; ++k) {
        const Pool& pool = k == decoy_at ? kDecoy : (rng.below(3) == 0 ? kContext : kPlain);
        sentences.emplace_back(f.from(pool), false);
      }
    }

    r.title = sentences[0].first;
    std::vector<std::string> body_text;
    std::vector<std::size_t> related;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      if (k > 0) body_text.push_back(sentences[k].first);
      if (sentences[k].second) related.push_back(k);
    }
    r.body = join(body_text, " ");
    if (r.label == Label::Concurrency) r.concurrency_sentences = related;
    ds.reports.push_back(std::move(r));
  }
  return ds;
}

}  // namespace conclp
