#include "fixtures.hpp"

#include <filesystem>

#include "oracles.hpp"
#include "searchlab/codec.hpp"
#include "searchlab/search.hpp"

#ifndef SEARCHLAB_TEST_DATA
#error "SEARCHLAB_TEST_DATA must point at tests/golden"
#endif

namespace searchlab::testkit {

countdown::Puzzle example_puzzle() { return {"example", 16, {96, 11, 78, 22}, std::nullopt}; }

countdown::Puzzle example_stacked() {
  return {"example-stacked", 96, {22, 77, 24, 48, 31, 12, 36, 35}, countdown::kStackedPartialIndex};
}

std::string golden(const std::string& name) {
  return read_file((std::filesystem::path(SEARCHLAB_TEST_DATA) / name).string());
}

std::string corrupt_last_operation(const std::string& text) {
  const std::string key = "Exploring Operation: ";
  const auto at = text.rfind(key);
  if (at == std::string::npos) return text;
  const auto eq = text.find('=', at);
  const auto comma = text.find(',', eq);
  const long long value = std::stoll(text.substr(eq + 1, comma - eq - 1));
  return text.substr(0, eq + 1) + std::to_string(value + 1) + text.substr(comma);
}

GenerationFixture make_generation_fixture(std::size_t problems, std::size_t samples, std::size_t modulus,
                                          std::uint64_t seed) {
  GenerationFixture fx;
  fx.modulus = modulus;
  const trace::Dialect dialect{trace::Game::countdown, trace::Mode::backtrack};
  countdown::GenConfig config;
  for (std::uint64_t index = 0; fx.ids.size() < problems; ++index) {
    const auto puzzle = countdown::generate_puzzle(seed, config, index);
    const auto outcome = search::search(puzzle, search::default_policy());
    if (outcome.status != search::Status::solved) continue;
    const std::string good = codec::serialize(outcome.trace, dialect);
    const std::string bad = corrupt_last_operation(good);
    const std::size_t i = fx.ids.size();
    fx.ids.push_back(puzzle.id);
    fx.problems.add({puzzle.id, puzzle});
    for (std::size_t j = 0; j < samples; ++j)
      fx.generations.push_back({puzzle.id, j, (i + j) % modulus == 0 ? good : bad});
  }
  return fx;
}

}  // namespace searchlab::testkit
