// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <string_view>

namespace conclp {

enum class Verdict { Yes, No, Unparseable };

std::string_view to_string(Verdict verdict);

/// Reads a yes/no answer from the first line of a model response: leading
/// punctuation and an echoed "[Concurrent bug or not]:" cue are skipped,
/// then the first word must be "yes" or "no" (any case). Total and
/// idempotent on its own output.
Verdict parse_verdict(std::string_view raw);

/// Callers treat anything but an explicit Yes as No.
inline bool is_positive(Verdict v) { return v == Verdict::Yes; }

}  // namespace conclp
