// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

#include <string_view>

// Data files compiled into the library (generated from data/ at configure
// time).
namespace conclp::embedded {

extern const std::string_view kIrregularForms;

}  // namespace conclp::embedded
