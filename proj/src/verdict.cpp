// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "conclp/verdict.hpp"

#include <cctype>
#include <string>

#include "conclp/util.hpp"

namespace conclp {

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Yes: return "Yes";
    case Verdict::No: return "No";
    case Verdict::Unparseable: return "Unparseable";
  }
  return "Unparseable";
}

Verdict parse_verdict(std::string_view raw) {
  std::string_view line = raw.substr(0, raw.find('\n'));
  std::string text = to_lower(line);
  constexpr std::string_view kCue = "[concurrent bug or not]";
  std::size_t i = 0;
  auto skip_noise = [&] {
    while (i < text.size()) {
      unsigned char c = static_cast<unsigned char>(text[i]);
      if (std::isspace(c) || (std::ispunct(c) && c != '[')) {
        ++i;
      } else if (text.compare(i, kCue.size(), kCue) == 0) {
        i += kCue.size();
      } else {
        break;
      }
    }
  };
  skip_noise();
  std::size_t j = i;
  while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
  std::string_view word = std::string_view(text).substr(i, j - i);
  if (word == "yes") return Verdict::Yes;
  if (word == "no") return Verdict::No;
  return Verdict::Unparseable;
}

}  // namespace conclp
