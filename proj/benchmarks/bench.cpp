#include <benchmark/benchmark.h>

#include <filesystem>

#include "searchlab/codec.hpp"
#include "searchlab/pipeline.hpp"
#include "searchlab/search.hpp"
#include "searchlab/sudoku.hpp"
#include "searchlab/tokenizer.hpp"

using namespace searchlab;

namespace {

const trace::Dialect kCdBack{trace::Game::countdown, trace::Mode::backtrack};
constexpr const char* kBoard = "702400005000100070083000090000050010209000007000302000008040000047080009600210003";
constexpr const char* kHard = "000000010400000000020000000000050407008000300001090000300400200050100000000806000";

void BM_CountdownSearch(benchmark::State& st) {
  const auto pol = search::Policy::parse(st.range(0) ? "dfs:sum:asc:off" : "dfs:sum:asc:prune@1x1.0");
  std::uint64_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(search::search(countdown::generate_puzzle(1, {}, i++ % 512), pol));
}
BENCHMARK(BM_CountdownSearch)->Arg(0)->Arg(1);

void BM_BeamSearch(benchmark::State& st) {
  const auto pol = search::Policy::parse("bfs" + std::to_string(st.range(0)) + ":mult:asc:off");
  std::uint64_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(search::search(countdown::generate_puzzle(1, {}, i++ % 512), pol));
}
BENCHMARK(BM_BeamSearch)->DenseRange(1, 5, 2);

void BM_SudokuSolve(benchmark::State& st) {
  const auto board = sudoku::Board::parse(st.range(0) ? kHard : kBoard);
  for (auto _ : st) benchmark::DoNotOptimize(sudoku::solve(board, {0, 0}));
}
BENCHMARK(BM_SudokuSolve)->Arg(0)->Arg(1);

void BM_Serialize(benchmark::State& st) {
  const auto t = search::search(countdown::generate_puzzle(3, {}, 0), search::Policy::parse("dfs:sum:asc:off")).trace;
  for (auto _ : st) benchmark::DoNotOptimize(codec::serialize(t, kCdBack));
}
BENCHMARK(BM_Serialize);

void BM_Parse(benchmark::State& st) {
  const auto text = codec::serialize(
      search::search(countdown::generate_puzzle(3, {}, 0), search::Policy::parse("dfs:sum:asc:off")).trace, kCdBack);
  for (auto _ : st) benchmark::DoNotOptimize(codec::parse(text, kCdBack));
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * text.size()));
}
BENCHMARK(BM_Parse);

void BM_Tokenize(benchmark::State& st) {
  const auto text = codec::serialize(
      search::search(countdown::generate_puzzle(3, {}, 0), search::Policy::parse("dfs:sum:asc:off")).trace, kCdBack);
  const auto& v = tokenizer::build_vocab(trace::Game::countdown);
  for (auto _ : st) benchmark::DoNotOptimize(tokenizer::encode(text, v));
  st.SetBytesProcessed(static_cast<std::int64_t>(st.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize);

void BM_Pipeline(benchmark::State& st) {
  const auto dir = std::filesystem::temp_directory_path() / "searchlab-bench";
  std::filesystem::create_directories(dir);
  pipeline::DatasetSpec spec;
  spec.out_dir = dir.string();
  spec.name = "bench";
  spec.count = 1000;
  spec.workers = static_cast<unsigned>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(pipeline::generate_dataset(spec));
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * spec.count));
}
BENCHMARK(BM_Pipeline)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
