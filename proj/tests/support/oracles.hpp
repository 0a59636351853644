#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace searchlab::testkit {

// Standalone CountDown enumeration. Inexact divisions stay in the tree as
// poisoned branches so every 4-number puzzle has the same leaf count.
struct CdEnumeration {
  std::uint64_t leaf_paths = 0;
  std::uint64_t solving_paths = 0;
};
CdEnumeration enumerate_countdown(std::int64_t target, const std::vector<std::int64_t>& numbers);

// Stacked: first four (after removing the partial target) must hit the fifth
// number, then the reached value plus the last three must hit the target.
CdEnumeration enumerate_stacked(std::int64_t target, const std::vector<std::int64_t>& numbers);

// Plain bitmask backtracking. Counts up to `limit` solutions over an
// 81-character grid with '0' or '.' for blanks.
struct SdOracle {
  int solutions = 0;
  std::string first;
};
SdOracle sudoku_oracle(const std::string& grid, int limit = 2);

struct CorpusRow {
  std::string puzzle;
  std::string solution;
  int clues = 0;
};
// Unique-solution boards made by digging a random full grid until the clue
// count drawn from [min_clues, max_clues] is reached or no cell can go.
std::vector<CorpusRow> make_sudoku_corpus(std::size_t count, std::uint64_t seed, int min_clues = 22,
                                          int max_clues = 30);
// Writes "id,puzzle,solution,clues" with '.' blanks.
void write_corpus_csv(const std::string& path, const std::vector<CorpusRow>& rows);

// Shared cached corpus for tests that need thousands of boards.
const std::vector<CorpusRow>& standard_corpus(std::size_t count);

std::string read_file(const std::string& path);
std::string temp_dir(const std::string& tag);

}  // namespace searchlab::testkit
