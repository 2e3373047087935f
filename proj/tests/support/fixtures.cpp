// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "fixtures.hpp"

#include <atomic>
#include <unistd.h>

namespace conclp::testing {

std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(CONCLP_DATA_DIR) / name;
}

const Lexicon& shipped_lexicon() {
  static const Lexicon lex = Lexicon::load(data_path("lexicon.txt"));
  return lex;
}

const PatternSet& shipped_patterns() {
  static const PatternSet set = PatternSet::load(data_path("patterns.txt"));
  return set;
}

const Matcher& shipped_matcher() {
  static const Matcher matcher(shipped_lexicon(), shipped_patterns());
  return matcher;
}

IssueReport make_report(std::string id, std::string title, std::string body, Label label) {
  IssueReport r;
  r.id = std::move(id);
  r.project = "fixture";
  r.title = std::move(title);
  r.body = std::move(body);
  r.label = label;
  return r;
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace conclp::testing
