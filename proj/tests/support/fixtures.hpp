// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <filesystem>
#include <string>

#include "conclp/corpus.hpp"
#include "conclp/lexicon.hpp"
#include "conclp/patterns.hpp"

namespace conclp::testing {

std::filesystem::path data_path(const std::string& name);

// Shipped lexicon, loaded once.
const Lexicon& shipped_lexicon();
const PatternSet& shipped_patterns();
// Shipped lexicon plus pattern-set extensions.
const Matcher& shipped_matcher();

IssueReport make_report(std::string id, std::string title, std::string body,
                        Label label = Label::Unlabeled);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace conclp::testing
