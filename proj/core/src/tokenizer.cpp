#include "searchlab/tokenizer.hpp"

#include <algorithm>
#include <set>

#include "searchlab/error.hpp"
#include "searchlab/hash.hpp"

namespace searchlab::tokenizer {

namespace {

constexpr std::string_view kSpecials[] = {"<pad>", "<bos>", "<eos>", "<unk>"};

std::string escape(std::string_view t) {
  std::string out;
  for (char c : t) {
    if (c == '\n')
      out += "\\n";
    else if (c == '\t')
      out += "\\t";
    else if (c == '\\')
      out += "\\\\";
    else
      out += c;
  }
  return out;
}

std::string unescape(std::string_view t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != '\\') {
      out += t[i];
      continue;
    }
    if (++i == t.size()) throw ParseError("dangling escape in vocabulary file");
    switch (t[i]) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '\\': out += '\\'; break;
      default: throw ParseError("unknown escape in vocabulary file");
    }
  }
  return out;
}

std::vector<std::string> with_digits(std::vector<std::string> grammar) {
  std::vector<std::string> out(std::begin(kSpecials), std::end(kSpecials));
  for (char d = '0'; d <= '9'; ++d) out.emplace_back(1, d);
  out.insert(out.end(), grammar.begin(), grammar.end());
  return out;
}

}  // namespace

Vocabulary::Vocabulary(trace::Game game, std::string version, std::vector<std::string> tokens)
    : game_(game), version_(std::move(version)), tokens_(std::move(tokens)) {
  if (tokens_.size() < kSpecialCount) throw ConfigError("vocabulary needs the four special tokens");
  for (std::size_t i = 0; i < kSpecialCount; ++i) {
    if (tokens_[i] != kSpecials[i]) throw ConfigError("vocabulary must start with <pad>, <bos>, <eos>, <unk>");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw ConfigError("empty vocabulary token");
    if (!seen.insert(tokens_[i]).second) throw ConfigError("duplicate vocabulary token: " + escape(tokens_[i]));
    if (i >= kSpecialCount)
      by_first_[static_cast<unsigned char>(tokens_[i][0])].push_back(static_cast<TokenId>(i));
  }
  for (auto& bucket : by_first_) {
    std::stable_sort(bucket.begin(), bucket.end(),
                     [this](TokenId a, TokenId b) { return tokens_[a].size() > tokens_[b].size(); });
  }
}

std::optional<TokenId> Vocabulary::id(std::string_view token) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i] == token) return static_cast<TokenId>(i);
  }
  return std::nullopt;
}

std::optional<TokenId> Vocabulary::match(std::string_view text, std::size_t pos) const {
  for (TokenId t : by_first_[static_cast<unsigned char>(text[pos])]) {
    const auto& tok = tokens_[t];
    if (text.compare(pos, tok.size(), tok) == 0) return t;
  }
  return std::nullopt;
}

std::string Vocabulary::file_text() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += escape(t);
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::from_file_text(trace::Game game, std::string version, std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    tokens.push_back(unescape(text.substr(start, nl - start)));
    start = nl + 1;
  }
  return Vocabulary(game, std::move(version), std::move(tokens));
}

std::string Vocabulary::content_hash() const { return sha256_hex(file_text()); }

const Vocabulary& build_vocab(trace::Game game) {
  static const Vocabulary countdown(
      trace::Game::countdown, "countdown-v1",
      with_digits({"+", "-", "*", "/", "=", "[", "]", ",", ":", "'", "#", " ", "\n", ", ", "Current", "State",
                   "Operations", "Operation", "Exploring", "Resulting", "Numbers", "Generated", "Node", "Moving", "to",
                   "from", "unequal", "equal", "No", "Solution", "Goal", "Reached"}));
  static const Vocabulary sudoku(trace::Game::sudoku, "sudoku-v1",
                                 with_digits({"(", ")", ",", " ", "=", "[", "]", ":", "\t", "\n", ", ", " = ", "START",
                                              "solving", "SOL_START", "SOL_END", "GUESS", "NO_CANDIDATE", "REVERT",
                                              "NONE"}));
  return game == trace::Game::sudoku ? sudoku : countdown;
}

std::vector<TokenId> encode(std::string_view text, const Vocabulary& vocab, bool allow_unk) {
  std::vector<TokenId> ids;
  ids.reserve(text.size() / 2);
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (auto t = vocab.match(text, pos)) {
      ids.push_back(*t);
      pos += vocab.tokens()[*t].size();
      continue;
    }
    if (!allow_unk)
      throw CoverageError("no token covers byte " + std::to_string(static_cast<unsigned char>(text[pos])) +
                          " at offset " + std::to_string(pos));
    ids.push_back(kUnk);
    ++pos;
  }
  return ids;
}

std::string decode(const std::vector<TokenId>& ids, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (id >= vocab.size()) throw CoverageError("token id out of range: " + std::to_string(id));
    if (id == kPad || id == kBos || id == kEos) continue;
    out += vocab.tokens()[id];
  }
  return out;
}

std::size_t count_tokens(std::string_view text, const Vocabulary& vocab) {
  std::size_t n = 0, pos = 0;
  while (pos < text.size()) {
    const auto t = vocab.match(text, pos);
    pos += t ? vocab.tokens()[*t].size() : 1;
    ++n;
  }
  return n;
}

std::string_view truncate_tokens(std::string_view text, const Vocabulary& vocab, std::size_t max_tokens) {
  std::size_t n = 0, pos = 0;
  while (pos < text.size() && n < max_tokens) {
    const auto t = vocab.match(text, pos);
    pos += t ? vocab.tokens()[*t].size() : 1;
    ++n;
  }
  return text.substr(0, pos);
}

}  // namespace searchlab::tokenizer
