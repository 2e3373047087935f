// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <cstddef>
#include <cstdint>

#include "conclp/corpus.hpp"

namespace conclp {

// Template-filled issue reports for tests and the bundled mini corpus.
// Positives carry sentence labels. Some positives avoid every concurrency
// keyword, and some negatives use concurrency words in an unrelated sense
// ("the phone screen is locked", "forum thread").
struct SyntheticOptions {
  std::size_t report_count = 300;
  double positive_fraction = 0.05;
  double keyword_free_fraction = 0.2;  // of positives
  double decoy_fraction = 0.2;         // of negatives
  std::size_t min_body_sentences = 2;
  std::size_t max_body_sentences = 5;
  std::uint64_t seed = 2024;
};

Dataset generate_synthetic(const SyntheticOptions& options);

// The options the shipped data/mini_corpus.jsonl was generated with.
SyntheticOptions mini_corpus_options();

}  // namespace conclp
