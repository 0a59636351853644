#include "searchlab/flops.hpp"

#include <charconv>

#include "searchlab/error.hpp"

namespace searchlab::flops {

namespace {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw DomainError("flops overflow 64 bits");
  return r;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw DomainError("flops overflow 64 bits");
  return r;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

void ModelConfig::validate() const {
  if (!d_model || !layers || !heads || !kv_heads || !d_ff)
    throw ConfigError("model config fields must be positive");
  if (d_model % heads) throw ConfigError("d_model must be divisible by heads");
  if (heads % kv_heads) throw ConfigError("heads must be divisible by kv_heads");
}

const std::vector<ModelConfig>& named_configs() {
  static const std::vector<ModelConfig> configs{
      {"3M", 256, 6, 4, 1, 512},
      {"17M", 512, 8, 4, 1, 1024},
      {"38M", 512, 10, 8, 2, 2048},
      {"144M", 1024, 12, 8, 2, 3072},
  };
  return configs;
}

const ModelConfig& named_config(std::string_view name) {
  for (const auto& c : named_configs()) {
    if (c.name == name) return c;
  }
  throw LookupError("unknown model config: " + std::string(name));
}

ModelConfig config_from_text(std::string_view text) {
  ModelConfig c;
  c.name = "custom";
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "name") {
      c.name = std::string(value);
      continue;
    }
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size())
      throw ConfigError("line " + std::to_string(line_no) + ": bad number for " + std::string(key));
    if (key == "d_model")
      c.d_model = v;
    else if (key == "layers")
      c.layers = v;
    else if (key == "heads")
      c.heads = v;
    else if (key == "kv_heads")
      c.kv_heads = v;
    else if (key == "d_ff")
      c.d_ff = v;
    else
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key " + std::string(key));
  }
  c.validate();
  return c;
}

std::uint64_t kv_dim(const ModelConfig& c) {
  c.validate();
  return c.d_model / c.heads * c.kv_heads;
}

Breakdown flops_breakdown(const ModelConfig& c, std::uint64_t tokens, std::uint64_t samples) {
  const std::uint64_t d = c.d_model;
  const std::uint64_t dkv = kv_dim(c);
  Breakdown b;
  b.linear_per_token = add(add(mul(2, mul(d, d)), mul(2, mul(d, dkv))), mul(3, mul(d, c.d_ff)));
  // T(T+1)/2 without losing the exact half.
  const std::uint64_t tri = tokens % 2 == 0 ? mul(tokens / 2, add(tokens, 1)) : mul(tokens, add(tokens, 1) / 2);
  b.attention_quadratic = mul(d, tri);
  b.per_sequence = mul(c.layers, add(mul(b.linear_per_token, tokens), b.attention_quadratic));
  b.total = mul(samples, b.per_sequence);
  return b;
}

}  // namespace searchlab::flops
