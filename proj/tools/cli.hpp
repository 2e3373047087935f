// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#pragma once

namespace conclp::cli {

// Exit codes beyond 0.
inline constexpr int kUsageError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kEndpointError = 4;

int run(int argc, const char* const* argv);

}  // namespace conclp::cli
