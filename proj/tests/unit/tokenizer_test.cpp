#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "searchlab/codec.hpp"
#include "searchlab/error.hpp"
#include "searchlab/search.hpp"
#include "searchlab/tokenizer.hpp"

using namespace searchlab;
using namespace searchlab::tokenizer;
using trace::Game;

TEST(Tokenizer, SpecialsAndDigits) {
  for (Game g : {Game::countdown, Game::sudoku}) {
    const auto& v = build_vocab(g);
    EXPECT_EQ(v.tokens()[kPad], "<pad>");
    EXPECT_EQ(v.tokens()[kBos], "<bos>");
    EXPECT_EQ(v.tokens()[kEos], "<eos>");
    EXPECT_EQ(v.tokens()[kUnk], "<unk>");
    for (char d = '0'; d <= '9'; ++d) EXPECT_TRUE(v.id(std::string(1, d))) << d;
  }
}

TEST(Tokenizer, SizesArePinned) {
  EXPECT_EQ(build_vocab(Game::countdown).size(), 46u);
  EXPECT_EQ(build_vocab(Game::sudoku).size(), 34u);
}

TEST(Tokenizer, GoldenCoverage) {
  const auto& v = build_vocab(Game::countdown);
  const std::string text = testkit::golden("countdown_dfs.txt");
  const auto ids = encode(text, v);
  for (auto id : ids) EXPECT_NE(id, kUnk);
  EXPECT_EQ(decode(ids, v), text);
  EXPECT_EQ(ids.size(), 863u);
  const auto& sv = build_vocab(Game::sudoku);
  for (const char* f : {"sudoku_dfs.txt", "sudoku_direct.txt"}) {
    const std::string s = testkit::golden(f);
    EXPECT_EQ(decode(encode(s, sv), sv), s) << f;
  }
  EXPECT_THROW(encode(testkit::golden("sudoku_dfs_typeset.txt"), sv), CoverageError);
}

TEST(Tokenizer, Empty) {
  EXPECT_TRUE(encode("", build_vocab(Game::countdown)).empty());
  EXPECT_EQ(count_tokens("", build_vocab(Game::sudoku)), 0u);
}

TEST(Tokenizer, CoverageError) {
  const auto& v = build_vocab(Game::countdown);
  EXPECT_THROW(encode("Current State: ?", v), CoverageError);
  const auto ids = encode("12?", v, true);
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_EQ(ids[2], kUnk);
  EXPECT_EQ(count_tokens("12?", v), 3u);
}

TEST(Tokenizer, GreedyLongestMatch) {
  const auto& v = build_vocab(Game::countdown);
  const auto ids = encode("Goal Reached", v);
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_EQ(v.tokens()[ids[0]], "Goal");
  EXPECT_EQ(v.tokens()[ids[1]], " ");
  EXPECT_EQ(encode("Goal Reached", v), ids);
}

TEST(Tokenizer, RoundTripOnGeneratedTraces) {
  const auto& v = build_vocab(Game::countdown);
  const trace::Dialect d{Game::countdown, trace::Mode::backtrack};
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto p = countdown::generate_puzzle(41, {}, i);
    const auto text = codec::serialize(search::search(p, search::default_policy()).trace, d);
    ASSERT_EQ(decode(encode(text, v), v), text);
  }
}

TEST(Tokenizer, CountsAddAtLineBoundaries) {
  const auto& v = build_vocab(Game::countdown);
  const std::string text = testkit::golden("countdown_dfs.txt");
  const auto cut = text.find('\n', text.size() / 2) + 1;
  EXPECT_EQ(count_tokens(text, v), count_tokens(text.substr(0, cut), v) + count_tokens(text.substr(cut), v));
}

TEST(Tokenizer, Truncate) {
  const auto& v = build_vocab(Game::countdown);
  const std::string text = testkit::golden("countdown_dfs.txt");
  const auto head = truncate_tokens(text, v, 10);
  EXPECT_EQ(count_tokens(head, v), 10u);
  EXPECT_EQ(text.rfind(head, 0), 0u);
  EXPECT_EQ(truncate_tokens(text, v, 100000), text);
}

TEST(Tokenizer, FileRoundTripAndHash) {
  for (Game g : {Game::countdown, Game::sudoku}) {
    const auto& v = build_vocab(g);
    const auto back = Vocabulary::from_file_text(g, v.version(), v.file_text());
    EXPECT_EQ(back.tokens(), v.tokens());
    EXPECT_EQ(back.content_hash(), v.content_hash());
    EXPECT_EQ(v.content_hash().size(), 64u);
  }
  EXPECT_NE(build_vocab(Game::countdown).content_hash(), build_vocab(Game::sudoku).content_hash());
}

TEST(Tokenizer, RejectsDuplicates) {
  EXPECT_THROW(Vocabulary(Game::countdown, "t", {"<pad>", "<bos>", "<eos>", "<unk>", "a", "a"}), ConfigError);
  EXPECT_THROW(Vocabulary(Game::countdown, "t", {"<bos>", "<pad>", "<eos>", "<unk>"}), ConfigError);
}
