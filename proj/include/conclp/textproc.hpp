// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "conclp/corpus.hpp"
#include "conclp/lexicon.hpp"

namespace conclp {

struct Token {
  std::string surface;
  std::string lemma;  // lowercase unless pos == Api
  Pos pos = Pos::Other;
  std::size_t begin = 0;  // character offsets into the sentence, [begin, end)
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

/// Title (when non-blank) is sentence 0. Fenced ``` blocks and lines
/// indented by four spaces or a tab are dropped from the body before
/// splitting.
std::vector<std::string> segment_sentences(std::string_view title, std::string_view body);

/// Word tokens with surface and span only. Identifiers keep internal dots
/// and a trailing "()", apostrophes stay inside words, hyphens split.
std::vector<Token> tokenize(std::string_view sentence);

/// Rule-based lemmatizer backed by an irregular-form table. `lexicon` is
/// consulted so candidate stems that are known entries win.
std::string lemmatize(std::string_view word, const Lexicon& lexicon);

class EntityRecognizer {
 public:
  virtual ~EntityRecognizer() = default;
  virtual bool is_entity(std::string_view word) const = 0;
};

/// Morphology rules: trailing "()", interior capital after a lowercase
/// letter, dotted identifier paths, and names ending in Exception/Error.
class HeuristicEntityRecognizer : public EntityRecognizer {
 public:
  bool is_entity(std::string_view word) const override;
};

const EntityRecognizer& default_entity_recognizer();

/// Tokens flagged as software entities (pos Api, lemma verbatim).
std::vector<Token> recognize_software_entities(
    std::string_view sentence, const EntityRecognizer& recognizer = default_entity_recognizer());

/// One token per word with lemma and POS. Entities are recognized first,
/// then lexicon membership with context disambiguation, then suffix rules.
std::vector<Token> tag_tokens(std::string_view sentence, const Lexicon& lexicon,
                              const EntityRecognizer& recognizer = default_entity_recognizer());

class ProcessedSentence {
 public:
  ProcessedSentence() = default;
  ProcessedSentence(std::string report_id, std::size_t index, std::string text,
                    std::vector<Token> tokens);

  const std::string& report_id() const { return report_id_; }
  std::size_t index() const { return index_; }
  const std::string& text() const { return text_; }
  const std::vector<Token>& tokens() const { return tokens_; }

  const std::set<std::string>& verb_set() const { return verb_set_; }
  const std::set<std::string>& noun_set() const { return noun_set_; }
  const std::set<std::string>& adv_adj_set() const { return adv_adj_set_; }
  const std::set<std::string>& api_set() const { return api_set_; }

  bool is_question() const;

 private:
  std::string report_id_;
  std::size_t index_ = 0;
  std::string text_;
  std::vector<Token> tokens_;
  std::set<std::string> verb_set_, noun_set_, adv_adj_set_, api_set_;
};

std::vector<ProcessedSentence> process_report(
    const IssueReport& report, const Lexicon& lexicon,
    const EntityRecognizer& recognizer = default_entity_recognizer());

/// Line-delimited debug dump of processed sentences.
std::string dump_sentences(const std::vector<ProcessedSentence>& sentences);

}  // namespace conclp
