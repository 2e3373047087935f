// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 conclp contributors

#include "cli.hpp"

int main(int argc, char** argv) { return conclp::cli::run(argc, argv); }
