// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace metaheac {

/// Runs one `metaheac` subcommand. Returns 0 on success, 1 on a runtime
/// error and 2 on a usage error (including no arguments).
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace metaheac
