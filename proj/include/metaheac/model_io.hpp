// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>

#include "metaheac/model.hpp"

namespace metaheac {

// Model file, text, version 1:
//
//   metaheac-model 1
//   [schema]
//   <schema key-value lines>
//   [config]
//   n_experts = 8
//   ...
//   [params] <count>
//   <name> <rank> <dim>...
//   <values as hexadecimal floating point, one tensor row per line>
//   ...
//   end
//
// Values use the shortest hex representation, so a load/save cycle
// reproduces every double bit for bit.

void write_model(std::ostream& out, const MetaHeacModel& model);
MetaHeacModel read_model(std::istream& in, std::string_view source);

void save_model(const std::filesystem::path& path, const MetaHeacModel& model);
MetaHeacModel load_model(const std::filesystem::path& path);

/// Shared by the config section of the model file and run configs.
void write_model_config(std::ostream& out, const ModelConfig& config);
/// Applies one `key = value` setting; returns false if the key is not a model key.
bool apply_model_setting(ModelConfig& config, std::string_view key, std::string_view value);

}  // namespace metaheac
