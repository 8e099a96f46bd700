// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "metaheac/cli.hpp"

int main(int argc, char** argv) { return metaheac::dispatch(argc, argv, std::cout, std::cerr); }
