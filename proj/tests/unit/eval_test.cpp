#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "searchlab/codec.hpp"
#include "searchlab/error.hpp"
#include "searchlab/eval.hpp"
#include "searchlab/search.hpp"

using namespace searchlab;
using namespace searchlab::eval;

namespace {

const trace::Dialect kCdBack{trace::Game::countdown, trace::Mode::backtrack};
const trace::Dialect kSdBack{trace::Game::sudoku, trace::Mode::backtrack};

EvalRecord rec(const std::string& id, std::uint64_t sample, bool correct, std::uint64_t mistakes = 0,
               std::uint64_t tokens = 10) {
  EvalRecord r;
  r.problem_id = id;
  r.sample_id = sample;
  r.correct = correct;
  r.mistakes = mistakes;
  r.tokens = tokens;
  return r;
}

// C(n, k) by enumerating subsets of a bitmask; tiny n only.
double brute_pass_at_k(unsigned n, unsigned c, unsigned k) {
  unsigned total = 0, hit = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<unsigned>(__builtin_popcount(mask)) != k) continue;
    ++total;
    if (mask & ((1u << c) - 1)) ++hit;
  }
  return static_cast<double>(hit) / total;
}

}  // namespace

TEST(Score, ExampleTraceIsCorrect) {
  ProblemSet set;
  set.add({"example", testkit::example_puzzle()});
  const auto r = score(set, "example", 0, testkit::golden("countdown_dfs.txt"), kCdBack);
  EXPECT_TRUE(r.correct) << r.reason;
  EXPECT_EQ(r.mistakes, 4u);
  EXPECT_EQ(r.tokens, 863u);
  EXPECT_THROW(score(set, "missing", 0, "", kCdBack), LookupError);
}

TEST(Score, ArithmeticIsRechecked) {
  ProblemSet set;
  set.add({"example", testkit::example_puzzle()});
  std::string bad = testkit::golden("countdown_dfs.txt");
  bad.replace(bad.find("18-2=16, Resulting Numbers: [16]"), 32, "18-2=15, Resulting Numbers: [16]");
  EXPECT_FALSE(score(set, "example", 0, bad, kCdBack).correct);
  const std::string corrupted = testkit::corrupt_last_operation(testkit::golden("countdown_dfs.txt"));
  EXPECT_FALSE(score(set, "example", 1, corrupted, kCdBack).correct);
}

TEST(Score, CorruptingAnyPathLineFlipsVerdict) {
  ProblemSet set;
  set.add({"example", testkit::example_puzzle()});
  const std::string good = testkit::golden("countdown_direct.txt");
  const trace::Dialect direct{trace::Game::countdown, trace::Mode::direct};
  ASSERT_TRUE(score(set, "example", 0, good, direct).correct);
  for (const char* op : {"96-78=18", "22/11=2", "18-2=16"}) {
    std::string bad = good;
    const auto at = bad.find(std::string("Exploring Operation: ") + op);
    const auto eq = bad.find('=', at);
    bad[eq + 1] = bad[eq + 1] == '9' ? '8' : static_cast<char>(bad[eq + 1] + 1);
    EXPECT_FALSE(score(set, "example", 0, bad, direct).correct) << op;
  }
}

TEST(Score, SudokuRequiresFullBoard) {
  ProblemSet set;
  set.add({"sd", sudoku::Board::parse(testkit::kExampleSudoku)});
  const std::string text = testkit::golden("sudoku_direct.txt");
  const auto ok = score(set, "sd", 0, text, trace::Dialect{trace::Game::sudoku, trace::Mode::direct});
  EXPECT_TRUE(ok.correct) << ok.reason;
  const auto back = score(set, "sd", 0, testkit::golden("sudoku_dfs.txt"), kSdBack);
  EXPECT_TRUE(back.correct) << back.reason;
  EXPECT_EQ(back.mistakes, 2u);
  // drop the last fill: one cell stays empty
  std::string missing = text;
  const auto last = missing.rfind("\t(");
  const auto end = missing.find(" SOL_END");
  missing.erase(last, end - last);
  EXPECT_FALSE(score(set, "sd", 0, missing, trace::Dialect{trace::Game::sudoku, trace::Mode::direct}).correct);
}

TEST(Score, SudokuWrongStartIsIncorrect) {
  ProblemSet set;
  std::string other = testkit::kExampleSudoku;
  other[1] = '1';
  set.add({"sd", sudoku::Board::parse(other)});
  EXPECT_FALSE(score(set, "sd", 0, testkit::golden("sudoku_dfs.txt"), kSdBack).correct);
}

TEST(Score, GarbageIsIncorrect) {
  ProblemSet set;
  set.add({"example", testkit::example_puzzle()});
  const auto r = score(set, "example", 0, "hello world", kCdBack);
  EXPECT_FALSE(r.correct);
  EXPECT_TRUE(r.answer.empty());
}

TEST(Score, FlopsFromModel) {
  ProblemSet set;
  set.add({"example", testkit::example_puzzle()});
  const auto& m = flops::named_config("17M");
  const auto r = score(set, "example", 0, testkit::golden("countdown_dfs.txt"), kCdBack, &m);
  EXPECT_EQ(r.flops, flops::flops_breakdown(m, r.tokens, 1).total);
}

TEST(BestOfN, PrefixSemantics) {
  const std::vector<EvalRecord> rs{rec("p", 1, true), rec("p", 0, false)};
  EXPECT_FALSE(best_of_n(rs, 1));
  EXPECT_TRUE(best_of_n(rs, 2));
  EXPECT_THROW(best_of_n(rs, 3), DomainError);
  std::vector<EvalRecord> wrong;
  for (std::uint64_t i = 0; i < 64; ++i) wrong.push_back(rec("p", i, false));
  EXPECT_FALSE(best_of_n(wrong, 64));
}

TEST(BestOfN, Monotone) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<EvalRecord> rs;
    const std::size_t n = 1 + rng() % 16;
    for (std::size_t i = 0; i < n; ++i) rs.push_back(rec("p", i, rng() % 5 == 0));
    bool prev = false;
    for (std::size_t k = 1; k <= n; ++k) {
      const bool now = best_of_n(rs, k);
      EXPECT_TRUE(!prev || now);
      prev = now;
    }
  }
}

TEST(PassAtK, KnownValues) {
  EXPECT_EQ(pass_at_k_exact(4, 2, 2), (Fraction{5, 6}));
  EXPECT_NEAR(pass_at_k(4, 2, 2), 5.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(pass_at_k(64, 64, 1), 1.0);
  for (std::uint64_t k = 1; k <= 64; ++k) EXPECT_DOUBLE_EQ(pass_at_k(64, 0, k), 0.0);
  EXPECT_THROW(pass_at_k(4, 5, 1), DomainError);
  EXPECT_THROW(pass_at_k(4, 2, 0), DomainError);
  EXPECT_THROW(pass_at_k(4, 2, 5), DomainError);
}

TEST(PassAtK, MatchesSubsetEnumeration) {
  for (unsigned n = 1; n <= 10; ++n)
    for (unsigned c = 0; c <= n; ++c)
      for (unsigned k = 1; k <= n; ++k) {
        EXPECT_NEAR(pass_at_k(n, c, k), brute_pass_at_k(n, c, k), 1e-12);
        EXPECT_NEAR(pass_at_k_exact(n, c, k).value(), brute_pass_at_k(n, c, k), 1e-12);
      }
}

TEST(Majority, Plurality) {
  EXPECT_EQ(majority_vote({"A", "A", "B"}, 1), 0u);
  EXPECT_EQ(majority_vote({"B", "A", "A"}, 1), 1u);
  EXPECT_EQ(majority_vote({"C", "C", "C"}, 9), 0u);
  EXPECT_EQ(majority_vote({"", "", "B"}, 9), 2u);
  const auto a = majority_vote({"A", "B"}, 7);
  EXPECT_EQ(a, majority_vote({"A", "B"}, 7));
  std::set<std::size_t> picks;
  for (std::uint64_t s = 0; s < 64; ++s) picks.insert(majority_vote({"A", "B"}, s));
  EXPECT_EQ(picks.size(), 2u);
  EXPECT_THROW(majority_vote({}, 1), DomainError);
}

TEST(Majority, AnswerKeys) {
  EXPECT_EQ(answer_key(testkit::golden("countdown_dfs.txt"), kCdBack),
            answer_key(testkit::golden("countdown_direct.txt"), {trace::Game::countdown, trace::Mode::direct}));
  EXPECT_TRUE(answer_key("nothing", kCdBack).empty());
  EXPECT_EQ(answer_key(testkit::golden("sudoku_dfs.txt"), kSdBack), testkit::sudoku_oracle(testkit::kExampleSudoku).first);
}

TEST(Jaccard, Values) {
  EXPECT_EQ(jaccard({"1", "2", "3"}, {"2", "3", "4"}), (Fraction{1, 2}));
  EXPECT_EQ(jaccard({"1"}, {"2"}), (Fraction{0, 1}));
  EXPECT_EQ(jaccard({"1", "2"}, {"1", "2"}), (Fraction{1, 1}));
  EXPECT_EQ(jaccard({}, {}), (Fraction{1, 1}));
}

TEST(SolvedSet, CumulativeAndExact) {
  const std::vector<EvalRecord> rs{rec("a", 0, true, 0), rec("b", 0, true, 2), rec("c", 0, false, 1),
                                   rec("d", 0, true, 5)};
  EXPECT_EQ(solved_set(rs, 2), (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(solved_set(rs, 2, false), (std::set<std::string>{"b"}));
  for (std::uint64_t m = 0; m < 6; ++m) {
    const auto lo = solved_set(rs, m), hi = solved_set(rs, m + 1);
    EXPECT_TRUE(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()));
  }
}

TEST(DirectMistakes, FirstCorrectIndex) {
  EXPECT_EQ(direct_mistakes({rec("p", 2, true), rec("p", 0, false), rec("p", 1, false)}), std::optional<std::uint64_t>(2));
  EXPECT_EQ(direct_mistakes({rec("p", 0, true)}), std::optional<std::uint64_t>(0));
  EXPECT_FALSE(direct_mistakes({rec("p", 0, false)}));
}

TEST(Curve, ParallelIsLinearInSamples) {
  std::vector<EvalRecord> rs;
  for (std::uint64_t i = 0; i < 8; ++i) rs.push_back(rec("p", i, i == 3));
  const auto& m = flops::named_config("3M");
  const auto pts = build_curve(rs, {"p"}, m, {1, 2, 4, 8}, CurveMode::parallel, 1000);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[1].flops, 2 * pts[0].flops);
  EXPECT_EQ(pts[3].flops, 2 * pts[2].flops);
  EXPECT_DOUBLE_EQ(pts[1].accuracy, 0.0);
  EXPECT_DOUBLE_EQ(pts[2].accuracy, 1.0);
  EXPECT_THROW(build_curve(rs, {"p", "q"}, m, {1}, CurveMode::parallel), CoverageError);
  EXPECT_THROW(build_curve(rs, {"p"}, m, {16}, CurveMode::parallel), CoverageError);
}

TEST(Curve, SequentialTruncates) {
  const std::vector<EvalRecord> rs{rec("a", 0, true, 0, 100), rec("b", 0, true, 0, 300), rec("c", 0, false, 0, 50)};
  const auto& m = flops::named_config("3M");
  const auto pts = build_curve(rs, {"a", "b", "c"}, m, {50, 100, 300}, CurveMode::sequential);
  EXPECT_DOUBLE_EQ(pts[0].accuracy, 0.0);
  EXPECT_DOUBLE_EQ(pts[1].accuracy, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(pts[2].accuracy, 2.0 / 3.0);
  EXPECT_EQ(pts[2].flops, flops::flops_breakdown(m, 300, 1).total);
  const auto csv = curve_csv(pts);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "flops,accuracy,mode,budget");
}

TEST(Curve, AllCorrectFixture) {
  const auto fx = testkit::make_generation_fixture(6, 4, 1);
  std::vector<EvalRecord> rs;
  for (const auto& g : fx.generations) rs.push_back(score(fx.problems, g.problem_id, g.sample_id, g.text, kCdBack));
  for (const auto& p : build_curve(rs, fx.ids, flops::named_config("17M"), {1, 2, 4}, CurveMode::parallel))
    EXPECT_DOUBLE_EQ(p.accuracy, 1.0);
}

TEST(Records, JsonRoundTrip) {
  EvalRecord r = rec("cd-1-2", 7, true, 3, 99);
  r.flops = 12345678901234ull;
  r.answer = "96-78=18|22/11=2|18-2=16";
  r.reason = "";
  EXPECT_EQ(record_from_json(record_json(r)), r);
  EXPECT_THROW(record_from_json("{}"), ParseError);
}
