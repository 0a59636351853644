#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "searchlab/countdown.hpp"
#include "searchlab/eval.hpp"

namespace searchlab::testkit {

inline constexpr const char* kExampleSudoku =
    "702400005000100070083000090000050010209000007000302000008040000047080009600210003";

countdown::Puzzle example_puzzle();
countdown::Puzzle example_stacked();

std::string golden(const std::string& name);

// Rewrites the result of the last "Exploring Operation" line so the
// arithmetic is wrong while the goal line still claims success.
std::string corrupt_last_operation(const std::string& text);

struct Generation {
  std::string problem_id;
  std::uint64_t sample_id = 0;
  std::string text;
};

// Problems are solvable CountDown puzzles. Sample j of problem i is the
// engine's backtracking trace when (i + j) % modulus == 0, otherwise the
// same trace with its last operation corrupted. modulus 1 is a perfect
// policy.
struct GenerationFixture {
  eval::ProblemSet problems;
  std::vector<std::string> ids;
  std::vector<Generation> generations;
  std::size_t modulus = 1;
};
GenerationFixture make_generation_fixture(std::size_t problems, std::size_t samples, std::size_t modulus,
                                          std::uint64_t seed = 11);

}  // namespace searchlab::testkit
