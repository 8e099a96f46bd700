// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#include "metaheac/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "metaheac/error.hpp"
#include "metaheac/key_value.hpp"

namespace metaheac {
namespace {

constexpr std::string_view kMagic = "metaheac-model 1";

std::string join_sizes(const std::vector<std::size_t>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(sizes[i]);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(std::string_view text, std::string_view what) {
  std::vector<std::size_t> out;
  for (auto part : split(text, ',')) out.push_back(parse_uint(part, what));
  return out;
}

std::string hex(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, ptr);
}

double parse_hex(std::string_view text, std::string_view source) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, std::chars_format::hex);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw SchemaError(std::string(source) + ": bad tensor value '" + std::string(text) + "'");
  }
  return v;
}

bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  if (!std::getline(in, line)) return false;
  ++line_no;
  return true;
}

}  // namespace

void write_model_config(std::ostream& out, const ModelConfig& c) {
  out << "n_experts = " << c.n_experts << '\n'
      << "m_critics = " << c.m_critics << '\n'
      << "expert_hidden = " << join_sizes(c.expert_hidden) << '\n'
      << "gate_hidden = " << join_sizes(c.gate_hidden) << '\n'
      << "embedding_dim = " << c.embedding_dim << '\n'
      << "literal_scaling = " << (c.literal_scaling ? "true" : "false") << '\n'
      << "ablation = " << to_string(c.ablation) << '\n';
}

bool apply_model_setting(ModelConfig& c, std::string_view key, std::string_view value) {
  if (key == "n_experts") {
    c.n_experts = parse_uint(value, key);
  } else if (key == "m_critics") {
    c.m_critics = parse_uint(value, key);
  } else if (key == "expert_hidden") {
    c.expert_hidden = parse_sizes(value, key);
  } else if (key == "gate_hidden") {
    c.gate_hidden = parse_sizes(value, key);
  } else if (key == "embedding_dim") {
    c.embedding_dim = parse_uint(value, key);
  } else if (key == "literal_scaling") {
    c.literal_scaling = parse_bool(value, key);
  } else if (key == "ablation") {
    c.ablation = parse_ablation(trim(value));
  } else {
    return false;
  }
  return true;
}

void write_model(std::ostream& out, const MetaHeacModel& model) {
  out << kMagic << '\n' << "[schema]\n";
  model.schema().write(out);
  out << "[config]\n";
  write_model_config(out, model.config());
  out << "[params] " << model.params().size() << '\n';
  for (const auto& e : model.params()) {
    const auto& shape = e.value.shape();
    out << e.name << ' ' << shape.size();
    for (auto d : shape) out << ' ' << d;
    out << '\n';
    const std::size_t cols = e.value.cols();
    auto data = e.value.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      out << hex(data[i]) << ((i + 1) % cols == 0 ? '\n' : ' ');
    }
  }
  out << "end\n";
}

MetaHeacModel read_model(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> SchemaError {
    return SchemaError(std::string(source) + ":" + std::to_string(line_no) + ": " + msg);
  };
  if (!next_line(in, line, line_no) || line != kMagic) throw fail("not a metaheac model file (version 1)");
  if (!next_line(in, line, line_no) || line != "[schema]") throw fail("expected [schema]");

  std::ostringstream schema_text;
  while (next_line(in, line, line_no) && line != "[config]") schema_text << line << '\n';
  if (line != "[config]") throw fail("expected [config]");
  std::istringstream schema_in(schema_text.str());
  FeatureSchema schema = FeatureSchema::parse(schema_in, source);

  ModelConfig config;
  while (next_line(in, line, line_no) && line.rfind("[params]", 0) != 0) {
    std::istringstream kv_in(line);
    for (const auto& kv : parse_key_values(kv_in, source)) {
      if (!apply_model_setting(config, kv.key, kv.value)) throw fail("unknown config key '" + kv.key + "'");
    }
  }
  if (line.rfind("[params]", 0) != 0) throw fail("expected [params]");
  const std::size_t count = parse_uint(trim(std::string_view(line).substr(8)), "param count");

  ParamSet params;
  for (std::size_t p = 0; p < count; ++p) {
    if (!next_line(in, line, line_no)) throw fail("truncated parameter list");
    std::istringstream header(line);
    std::string name;
    std::size_t rank = 0;
    if (!(header >> name >> rank) || rank == 0 || rank > 2) throw fail("bad tensor header");
    Shape shape(rank);
    for (auto& d : shape) {
      if (!(header >> d) || d == 0) throw fail("bad tensor shape for '" + name + "'");
    }
    Tensor t(shape);
    const std::size_t rows = t.rows();
    const std::size_t cols = t.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      if (!next_line(in, line, line_no)) throw fail("truncated tensor '" + name + "'");
      auto fields = split(line, ' ');
      if (fields.size() != cols) throw fail("tensor '" + name + "' row has wrong width");
      for (std::size_t c = 0; c < cols; ++c) t.at(r, c) = parse_hex(fields[c], source);
    }
    params.add(std::move(name), std::move(t));
  }
  if (!next_line(in, line, line_no) || line != "end") throw fail("expected end");
  return MetaHeacModel(std::move(schema), std::move(config), std::move(params));
}

void save_model(const std::filesystem::path& path, const MetaHeacModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path.string() + "'");
  write_model(out, model);
  if (!out) throw Error("failed writing model file '" + path.string() + "'");
}

MetaHeacModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  return read_model(in, path.string());
}

}  // namespace metaheac
