#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "searchlab/trace.hpp"

namespace searchlab::tokenizer {

using TokenId = std::uint32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kSpecialCount = 4;

class Vocabulary {
 public:
  Vocabulary(trace::Game game, std::string version, std::vector<std::string> tokens);

  trace::Game game() const { return game_; }
  const std::string& version() const { return version_; }
  /// Specials first: <pad>, <bos>, <eos>, <unk>.
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  std::optional<TokenId> id(std::string_view token) const;

  /// One token per line in id order; "\n", "\t" and "\\" are escaped.
  std::string file_text() const;
  static Vocabulary from_file_text(trace::Game game, std::string version, std::string_view text);
  /// SHA-256 of file_text().
  std::string content_hash() const;

  // Longest token starting at text[pos]; nullopt when none matches.
  std::optional<TokenId> match(std::string_view text, std::size_t pos) const;

 private:
  trace::Game game_;
  std::string version_;
  std::vector<std::string> tokens_;
  // Non-special ids grouped by first byte, longest first.
  std::array<std::vector<TokenId>, 256> by_first_{};
};

/// Deterministic vocabulary derived from the game's trace grammar.
const Vocabulary& build_vocab(trace::Game game);

/// Greedy longest match. Unknown bytes become <unk> when allowed, otherwise
/// CoverageError.
std::vector<TokenId> encode(std::string_view text, const Vocabulary& vocab, bool allow_unk = false);

/// Specials other than <unk> decode to nothing.
std::string decode(const std::vector<TokenId>& ids, const Vocabulary& vocab);

/// Token count with unknown bytes counted once each.
std::size_t count_tokens(std::string_view text, const Vocabulary& vocab);

/// Prefix of `text` covering its first `max_tokens` tokens.
std::string_view truncate_tokens(std::string_view text, const Vocabulary& vocab, std::size_t max_tokens);

}  // namespace searchlab::tokenizer
