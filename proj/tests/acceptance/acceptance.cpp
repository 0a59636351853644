#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "searchlab/codec.hpp"
#include "searchlab/countdown.hpp"
#include "searchlab/eval.hpp"
#include "searchlab/flops.hpp"
#include "searchlab/hash.hpp"
#include "searchlab/pipeline.hpp"
#include "searchlab/search.hpp"
#include "searchlab/sudoku.hpp"
#include "searchlab/tokenizer.hpp"

using namespace searchlab;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

const trace::Dialect kCdBack{trace::Game::countdown, trace::Mode::backtrack};
const trace::Dialect kCdDirect{trace::Game::countdown, trace::Mode::direct};
const trace::Dialect kCdThink{trace::Game::countdown, trace::Mode::think};
const trace::Dialect kSdBack{trace::Game::sudoku, trace::Mode::backtrack};
const trace::Dialect kSdDirect{trace::Game::sudoku, trace::Mode::direct};

void tree_arithmetic(Check& c) {
  c.expect(countdown::tree_path_count(4) == 1152, "tree_path_count(4)");
  c.expect(countdown::tree_path_count(5) == 46080, "tree_path_count(5)");
  c.expect(testkit::enumerate_countdown(16, {96, 11, 78, 22}).leaf_paths == 1152, "enumerated leaves");
  c.detail << "paths(4)=" << countdown::tree_path_count(4) << " paths(5)=" << countdown::tree_path_count(5);
}

void golden_traces(Check& c) {
  const std::string back = testkit::golden("countdown_dfs.txt");
  const std::string direct = testkit::golden("countdown_direct.txt");
  const auto t0 = Clock::now();
  const auto o = search::search(testkit::example_puzzle(), search::default_policy());
  const std::string got_back = codec::serialize(o.trace, kCdBack);
  const std::string got_direct = codec::serialize(codec::prune_to_direct(o.trace), kCdDirect);
  const double secs = seconds_since(t0);
  c.expect(got_back == back, "backtracking panel differs");
  c.expect(got_direct == direct, "direct panel differs");
  c.expect(secs < 1.0, "slower than 1 s");
  c.detail << back.size() << " + " << direct.size() << " bytes identical in " << secs << " s";
}

void mistake_counting(Check& c) {
  const auto parsed = codec::parse(testkit::golden("countdown_dfs.txt"), kCdBack);
  const auto m = codec::count_mistakes(parsed.trace);
  const auto d = codec::count_mistakes(codec::prune_to_direct(parsed.trace));
  c.expect(parsed.report.clean(), "golden does not parse clean");
  c.expect(m == 4, "backtracking mistakes");
  c.expect(d == 0, "direct mistakes");
  c.detail << "backtracking " << m << ", pruned " << d;
}

__extension__ typedef unsigned __int128 u128;

std::string u128_str(u128 v) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  } while (v);
  return s;
}

void flops_formulas(Check& c) {
  struct Arch {
    const char* name;
    u128 d, layers, heads, ff, kv;
  };
  // hidden, layers, attention heads, intermediate, kv heads
  const Arch archs[] = {{"3M", 256, 6, 4, 512, 1},
                        {"17M", 512, 8, 4, 1024, 1},
                        {"38M", 512, 10, 8, 2048, 2},
                        {"144M", 1024, 12, 8, 3072, 2}};
  const auto reference = [](const Arch& a, u128 T, u128 N) {
    const u128 dkv = a.d / a.heads * a.kv;
    const u128 q = a.d * a.d, k = a.d * dkv, v = a.d * dkv, o = a.d * a.d;
    const u128 mlp = 3 * a.d * a.ff;
    const u128 per_layer_linear = q + k + v + o + mlp;
    u128 attn = 0;
    for (u128 t = 1; t <= T; ++t) attn += t * a.d;
    return N * a.layers * (per_layer_linear * T + attn);
  };
  const auto toy = flops::flops_breakdown({"toy", 4, 1, 2, 1, 8}, 2, 1).total;
  c.expect(toy == 300, "toy config");
  c.detail << "toy=" << toy;
  const Arch toy_arch{"toy", 4, 1, 2, 8, 1};
  c.expect(reference(toy_arch, 2, 1) == 300, "reference toy");
  for (const auto& a : archs) {
    const auto& cfg = flops::named_config(a.name);
    for (std::uint64_t T : {1ull, 2ull, 37ull, 1024ull, 4096ull, 10000ull}) {
      for (std::uint64_t N : {1ull, 3ull, 64ull}) {
        const u128 want = reference(a, T, N);
        const u128 got = flops::flops_breakdown(cfg, T, N).total;
        c.expect(want == got, std::string(a.name) + " T=" + std::to_string(T) + " N=" + std::to_string(N) +
                                  " want " + u128_str(want) + " got " + u128_str(got));
      }
    }
    c.detail << " " << a.name << "@4096=" << u128_str(reference(a, 4096, 1));
  }
}

void countdown_oracle(Check& c) {
  const auto t0 = Clock::now();
  countdown::GenConfig cfg;
  cfg.target_mode = countdown::TargetMode::uniform;
  const auto pol = search::Policy::parse("dfs:sum:asc:off");
  std::size_t solvable = 0, discrepancies = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto p = countdown::generate_puzzle(5, cfg, i);
    const auto o = search::search(p, pol, {0, 0});
    const auto e = testkit::enumerate_countdown(p.target, p.candidates);
    c.expect(e.leaf_paths == 1152, p.id + " enumerated leaves");
    const bool engine = o.status == search::Status::solved;
    if (engine && !countdown::verify_solution(p, o.solution).correct) ++discrepancies;
    if (engine != (e.solving_paths > 0)) {
      ++discrepancies;
      c.expect(false, p.id + " engine and enumeration disagree");
    }
    solvable += e.solving_paths > 0;
  }
  const double secs = seconds_since(t0);
  c.expect(discrepancies == 0, "discrepancies");
  c.expect(secs < 60.0, "slower than 1 min");
  c.detail << "1000 puzzles, " << solvable << " solvable, " << discrepancies << " discrepancies, " << secs << " s";
}

void sudoku_oracle(Check& c) {
  const auto t0 = Clock::now();
  const auto& corpus = testkit::standard_corpus(10000);
  std::size_t solved = 0, discrepancies = 0, eliminations = 0;
  const auto check_sound = [&](const sudoku::Board& b, const std::string& truth, const std::string& tag) {
    const auto r = sudoku::apply_strategies(b);
    for (const auto& e : r.eliminations) {
      ++eliminations;
      if (truth[static_cast<std::size_t>(e.row * 9 + e.col)] - '0' == e.value) {
        ++discrepancies;
        c.expect(false, tag + " elimination removed the solution value");
      }
    }
    for (const auto& f : r.fills)
      if (truth[static_cast<std::size_t>(f.row * 9 + f.col)] - '0' != f.value) {
        ++discrepancies;
        c.expect(false, tag + " deduction disagrees with the solution");
      }
    c.expect(!r.contradiction, tag + " contradiction on a consistent board");
  };
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& row = corpus[i];
    const auto oracle = testkit::sudoku_oracle(row.puzzle, 2);
    c.expect(oracle.solutions == 1, "corpus board without unique solution");
    const auto board = sudoku::Board::parse(row.puzzle);
    const auto o = sudoku::solve(board);
    if (o.status == sudoku::SolveStatus::solved) {
      ++solved;
      if (o.board.str() != oracle.first) {
        ++discrepancies;
        c.expect(false, "board " + std::to_string(i) + " solved grid differs");
      }
    }
    check_sound(board, oracle.first, "board " + std::to_string(i));
    check_sound(sudoku::ease_board(board, 10, i), oracle.first, "eased board " + std::to_string(i));
  }
  const double secs = seconds_since(t0);
  c.expect(discrepancies == 0, "discrepancies");
  c.expect(secs < 600.0, "slower than 10 min");
  c.detail << "1000 boards, " << solved << " solved, " << eliminations << " eliminations checked, " << discrepancies
           << " discrepancies, " << secs << " s";
}

void solve_rates(Check& c) {
  const auto t0 = Clock::now();
  const auto& corpus = testkit::standard_corpus(10000);
  const auto& sd_vocab = tokenizer::build_vocab(trace::Game::sudoku);
  const trace::SearchBudget budget;
  std::size_t sd_solved = 0;
  for (const auto& row : corpus) {
    const auto o = sudoku::solve(sudoku::Board::parse(row.puzzle), budget);
    if (o.status != sudoku::SolveStatus::solved) continue;
    if (tokenizer::count_tokens(codec::serialize(o.trace, kSdBack), sd_vocab) <= budget.max_tokens) ++sd_solved;
  }
  const double sd_rate = static_cast<double>(sd_solved) / static_cast<double>(corpus.size());
  c.expect(sd_rate >= 0.97, "sudoku solve rate below 97%");

  std::vector<countdown::Puzzle> sample;
  for (std::uint64_t i = 0; i < 1000; ++i) sample.push_back(countdown::generate_puzzle(777, {}, i));
  const auto cal = search::calibrate_prune_multiplier(sample, search::default_policy(), 0.57);
  auto pol = search::default_policy();
  pol.prune.multiplier = cal.multiplier;
  std::size_t cd_solved = 0;
  for (std::uint64_t i = 0; i < 10000; ++i)
    cd_solved += search::search(countdown::generate_puzzle(2024, {}, i), pol).status == search::Status::solved;
  const double cd_rate = static_cast<double>(cd_solved) / 10000.0;
  c.expect(std::abs(cd_rate - 0.57) <= 0.05, "countdown rate outside 0.57 +/- 0.05");
  c.detail << "(a) sudoku " << sd_solved << "/10000 = " << sd_rate << "; (b) multiplier " << cal.multiplier.str()
           << " calibrated at " << cal.solve_rate << ", held-out countdown " << cd_solved << "/10000 = " << cd_rate
           << "; " << seconds_since(t0) << " s";
}

bool frac_le(const eval::Fraction& a, const eval::Fraction& b) {
  return u128(a.num) * b.den <= u128(b.num) * a.den;
}

void metric_properties(Check& c) {
  const auto exact = eval::pass_at_k_exact(4, 2, 2);
  c.expect(exact == (eval::Fraction{5, 6}), "pass@k(4,2,2) != 5/6");
  c.expect(std::abs(eval::pass_at_k(4, 2, 2) - 5.0 / 6.0) < 1e-15, "float pass@k(4,2,2)");
  std::mt19937_64 rng(99);
  const auto uniform = [&](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t n = uniform(2, 40);
    const std::uint64_t cc = uniform(0, n - 1);
    const std::uint64_t k = uniform(1, n - 1);
    const auto base = eval::pass_at_k_exact(n, cc, k);
    const bool ok_k = frac_le(base, eval::pass_at_k_exact(n, cc, k + 1));
    const bool ok_c = frac_le(base, eval::pass_at_k_exact(n, cc + 1, k));
    const bool ok_f = std::abs(base.value() - eval::pass_at_k(n, cc, k)) < 1e-12;
    const bool ok_fk = eval::pass_at_k(n, cc, k) <= eval::pass_at_k(n, cc, k + 1);
    if (!(ok_k && ok_c && ok_f && ok_fk)) {
      ++violations;
      c.expect(false, "pass@k n=" + std::to_string(n) + " c=" + std::to_string(cc) + " k=" + std::to_string(k));
    }
  }
  for (int i = 0; i < 10000; ++i) {
    const std::size_t samples = uniform(1, 12);
    std::vector<eval::EvalRecord> recs;
    for (std::size_t j = 0; j < samples; ++j) {
      eval::EvalRecord r;
      r.problem_id = "p";
      r.sample_id = j;
      r.correct = uniform(0, 3) == 0;
      recs.push_back(r);
    }
    std::shuffle(recs.begin(), recs.end(), rng);
    bool prev = false;
    for (std::size_t n = 1; n <= samples; ++n) {
      const bool now = eval::best_of_n(recs, n);
      if (prev && !now) {
        ++violations;
        c.expect(false, "best-of-n not monotone");
      }
      prev = now;
    }
  }
  for (int i = 0; i < 10000; ++i) {
    std::set<std::string> a, b;
    const auto na = uniform(0, 15), nb = uniform(0, 15);
    for (std::uint64_t j = 0; j < na; ++j) a.insert(std::to_string(uniform(0, 20)));
    for (std::uint64_t j = 0; j < nb; ++j) b.insert(std::to_string(uniform(0, 20)));
    const auto ab = eval::jaccard(a, b), ba = eval::jaccard(b, a);
    const bool ok = ab == ba && eval::jaccard(a, a) == (eval::Fraction{1, 1}) && ab.value() >= 0 && ab.value() <= 1;
    if (!ok) {
      ++violations;
      c.expect(false, "jaccard property");
    }
  }
  c.detail << "pass@k(4,2,2)=" << exact.num << "/" << exact.den << ", 30000 randomized cases, " << violations
           << " violations";
}

void round_trip(Check& c, const std::string& text, const trace::SearchTrace& t, const trace::Dialect& d,
                std::mt19937_64& rng, std::size_t& failures) {
  const auto parsed = codec::parse(text, d);
  const bool ok = parsed.report.clean() && !parsed.report.truncated && parsed.trace == t &&
                  codec::serialize(parsed.trace, d) == text;
  if (!ok) {
    ++failures;
    c.expect(false, std::string(trace::to_string(d.game)) + "/" + trace::to_string(d.mode) + " round trip");
  }
  for (int k = 0; k < 3; ++k) {
    const std::size_t cut = std::uniform_int_distribution<std::size_t>(0, text.size())(rng);
    const auto p = codec::parse(std::string_view(text).substr(0, cut), d);
    const bool mid_line = cut > 0 && text[cut - 1] != '\n';
    std::size_t keep = 0;
    if (cut > 0) {
      const auto nl = text.rfind('\n', cut - 1);
      keep = nl == std::string::npos ? 0 : nl + 1;
    }
    const auto& ev = p.trace.events;
    bool ok_prefix = p.report.truncated == mid_line && p.report.clean() && ev.size() <= t.events.size() &&
                     std::equal(ev.begin(), ev.end(), t.events.begin());
    if (ok_prefix && !mid_line && d.game == trace::Game::countdown)
      ok_prefix = codec::serialize(p.trace, d) == text.substr(0, keep);
    if (!ok_prefix) {
      ++failures;
      c.expect(false, std::string(trace::to_string(d.game)) + "/" + trace::to_string(d.mode) + " prefix of " +
                          std::to_string(cut) + " bytes");
    }
  }
}

void codec_round_trip(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4);
  std::size_t failures = 0, traces = 0;
  const auto registry = search::mixture_registry();
  countdown::GenConfig uniform_cfg;
  uniform_cfg.target_mode = countdown::TargetMode::uniform;
  std::size_t think = 0;
  for (std::uint64_t i = 0; traces < 5000; ++i) {
    const auto p = i % 10 == 9 ? countdown::make_stacked(61, {}, i)
                               : countdown::generate_puzzle(61, i % 3 ? countdown::GenConfig{} : uniform_cfg, i);
    const auto o = search::search(p, registry[i % registry.size()], {0, 0});
    round_trip(c, codec::serialize(o.trace, kCdBack), o.trace, kCdBack, rng, failures);
    ++traces;
    if (o.status != search::Status::solved) continue;
    const auto d = codec::prune_to_direct(o.trace);
    round_trip(c, codec::serialize(d, kCdDirect), d, kCdDirect, rng, failures);
    ++traces;
    if (i % 5 == 0) {
      const auto th = codec::shorten_think(o.trace);
      round_trip(c, codec::serialize(th, kCdThink), th, kCdThink, rng, failures);
      ++think;
    }
  }
  const auto& corpus = testkit::standard_corpus(10000);
  for (std::size_t i = 0; traces < 10000; ++i) {
    const auto board = sudoku::Board::parse(corpus[i].puzzle);
    const auto o = sudoku::solve(board, {}, i % 2 ? sudoku::singles_strategies() : sudoku::default_strategies());
    round_trip(c, codec::serialize(o.trace, kSdBack), o.trace, kSdBack, rng, failures);
    ++traces;
    if (o.status != sudoku::SolveStatus::solved) continue;
    const auto d = codec::prune_to_direct(o.trace);
    round_trip(c, codec::serialize(d, kSdDirect), d, kSdDirect, rng, failures);
    ++traces;
  }
  c.expect(failures == 0, "failures");
  c.detail << traces << " traces over four dialects (+" << think << " think), " << 3 * (traces + think)
           << " prefixes, " << failures << " failures, " << seconds_since(t0) << " s";
}

void determinism(Check& c) {
  const std::string dir = testkit::temp_dir("acceptance-det");
  pipeline::DatasetSpec spec;
  spec.out_dir = dir;
  spec.count = 10000;
  spec.seed = 20250101;
  const auto run = [&](unsigned workers) {
    spec.workers = workers;
    spec.name = "w" + std::to_string(workers);
    const auto t0 = Clock::now();
    const auto m = pipeline::generate_dataset(spec);
    return std::make_pair(m, seconds_since(t0));
  };
  const auto [one, t1] = run(1);
  const auto [eight, t8] = run(8);
  c.expect(one.sha256 == eight.sha256, "hash differs between worker counts");
  c.expect(one.sha256 == sha256_file(dir + "/w1.jsonl"), "manifest hash does not match file");
  c.expect(one.records == 10000, "record count");
  c.expect(t1 + t8 < 300.0, "slower than 5 min");
  c.detail << "sha256 " << one.sha256.substr(0, 16) << "..., 1 worker " << t1 << " s, 8 workers " << t8 << " s";
}

std::uint64_t binom(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void generation_fixtures(Check& c) {
  const std::size_t P = 60, S = 8;
  const auto model = flops::named_config("17M");
  for (std::size_t m : {1u, 2u, 3u, 5u, 9u}) {
    const auto fx = testkit::make_generation_fixture(P, S, m);
    std::map<std::string, std::vector<eval::EvalRecord>> by_problem;
    std::vector<eval::EvalRecord> all;
    for (const auto& g : fx.generations) {
      auto r = eval::score(fx.problems, g.problem_id, g.sample_id, g.text, kCdBack, &model);
      by_problem[g.problem_id].push_back(r);
      all.push_back(std::move(r));
    }
    std::vector<std::uint64_t> budgets;
    for (std::uint64_t n = 1; n <= S; ++n) budgets.push_back(n);
    const auto curve = eval::build_curve(all, fx.ids, model, budgets, eval::CurveMode::parallel);
    for (std::size_t n = 1; n <= S; ++n) {
      // sample j of problem i is correct iff (i + j) % m == 0
      std::size_t expect_solved = 0;
      double expect_pass = 0.0;
      for (std::size_t i = 0; i < P; ++i) {
        const std::size_t first = (m - i % m) % m;
        expect_solved += first < n;
        std::uint64_t correct = 0;
        for (std::size_t j = 0; j < S; ++j) correct += (i + j) % m == 0;
        expect_pass += 1.0 - static_cast<double>(binom(S - correct, n)) / static_cast<double>(binom(S, n));
      }
      const double want_best = static_cast<double>(expect_solved) / P;
      const double want_pass = expect_pass / P;
      std::size_t got_solved = 0;
      double got_pass = 0.0;
      for (const auto& id : fx.ids) {
        const auto& recs = by_problem.at(id);
        got_solved += eval::best_of_n(recs, n);
        const auto correct = static_cast<std::uint64_t>(std::count_if(recs.begin(), recs.end(), [](auto& r) {
          return r.correct;
        }));
        got_pass += eval::pass_at_k(S, correct, n);
      }
      const double got_best = static_cast<double>(got_solved) / P;
      got_pass /= P;
      const auto same3 = [](double a, double b) { return std::abs(a - b) < 0.0005; };
      const std::string tag = "m=" + std::to_string(m) + " n=" + std::to_string(n);
      c.expect(same3(got_best, want_best), tag + " best-of-n");
      c.expect(same3(got_pass, want_pass), tag + " pass@k");
      c.expect(same3(curve[n - 1].accuracy, want_best), tag + " curve");
      c.expect(curve[n - 1].flops == flops::flops_breakdown(model, 4096, n).total, tag + " curve flops");
      if (n == 1 || n == S) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " m=%zu@%zu:%.3f/%.3f", m, n, got_best, got_pass);
        c.detail << buf;
      }
    }
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"tree arithmetic", tree_arithmetic},
      {"golden traces", golden_traces},
      {"mistake counting", mistake_counting},
      {"flops formulas", flops_formulas},
      {"countdown oracle equivalence", countdown_oracle},
      {"sudoku oracle equivalence", sudoku_oracle},
      {"solve rates", solve_rates},
      {"metric properties", metric_properties},
      {"codec round trip", codec_round_trip},
      {"determinism and scale", determinism},
      {"generation fixtures", generation_fixtures},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail << "exception: " << e.what();
    }
    failed += !c.pass;
    std::printf("%s  %2zu %-30s %s\n", c.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                c.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
