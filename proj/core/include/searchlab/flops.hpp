#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace searchlab::flops {

struct ModelConfig {
  std::string name;
  std::uint64_t d_model = 0;
  std::uint64_t layers = 0;
  std::uint64_t heads = 0;
  std::uint64_t kv_heads = 0;
  std::uint64_t d_ff = 0;

  /// Throws ConfigError unless all fields are positive, heads divides
  /// d_model and kv_heads divides heads.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// The 3M, 17M, 38M and 144M architectures.
const std::vector<ModelConfig>& named_configs();
/// Throws LookupError for unknown names.
const ModelConfig& named_config(std::string_view name);

/// Parses "key=value" lines (name, d_model, layers, heads, kv_heads, d_ff);
/// '#' starts a comment.
ModelConfig config_from_text(std::string_view text);

std::uint64_t kv_dim(const ModelConfig& config);

struct Breakdown {
  std::uint64_t linear_per_token = 0;
  std::uint64_t attention_quadratic = 0;
  std::uint64_t per_sequence = 0;
  std::uint64_t total = 0;
};

/// Inference cost of `samples` sequences of `tokens` generated tokens.
/// Embeddings, softmax and normalisation are not counted. Throws
/// DomainError on 64-bit overflow.
Breakdown flops_breakdown(const ModelConfig& config, std::uint64_t tokens, std::uint64_t samples = 1);

}  // namespace searchlab::flops
