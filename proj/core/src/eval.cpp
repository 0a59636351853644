#include "searchlab/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "searchlab/codec.hpp"
#include "searchlab/error.hpp"
#include "searchlab/rng.hpp"
#include "searchlab/tokenizer.hpp"

namespace searchlab::eval {

namespace {

__extension__ typedef unsigned __int128 u128;

std::string ops_key(const std::vector<countdown::Operation>& ops) {
  std::string out;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i) out += ',';
    out += ops[i].str();
  }
  return out;
}

struct Judged {
  bool correct = false;
  std::string answer;
  std::string reason;
  std::uint64_t mistakes = 0;
};

Judged judge_countdown(const countdown::Puzzle& puzzle, const codec::Parsed& parsed) {
  Judged j;
  j.mistakes = codec::count_mistakes(parsed.trace);
  const auto ops = codec::claimed_solution(parsed.trace);
  if (!ops) {
    j.reason = "no goal reached";
    return j;
  }
  j.answer = ops_key(*ops);
  if (parsed.report.count(codec::ViolationKind::arithmetic) > 0) {
    j.reason = "arithmetic error in trace";
    return j;
  }
  const auto v = countdown::verify_solution(puzzle, *ops);
  j.correct = v.correct;
  j.reason = v.reason;
  return j;
}

Judged judge_sudoku(const sudoku::Board& start, const codec::Parsed& parsed) {
  Judged j;
  j.mistakes = codec::count_mistakes(parsed.trace);
  const auto& ev = parsed.trace.events;
  if (ev.empty() || !std::holds_alternative<trace::SdStart>(ev.front())) {
    j.reason = "missing START line";
    return j;
  }
  if (std::get<trace::SdStart>(ev.front()).givens != start.filled_cells()) {
    j.reason = "START line does not match the puzzle";
    return j;
  }
  const auto r = sudoku::replay(start, parsed.trace);
  if (r.board.filled_count() > 0) j.answer = r.board.str();
  if (!r.problems.empty()) {
    j.reason = r.problems.front();
    return j;
  }
  if (!r.ended) {
    j.reason = "no SOL_END";
    return j;
  }
  if (!r.board.complete()) {
    j.reason = "board not complete";
    return j;
  }
  if (!r.board.consistent()) {
    j.reason = "board breaks a rule";
    return j;
  }
  j.correct = true;
  return j;
}

std::uint64_t binom(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  u128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > UINT64_MAX) throw DomainError("binomial coefficient overflows");
  }
  return static_cast<std::uint64_t>(r);
}

void check_pass_domain(std::uint64_t n, std::uint64_t c, std::uint64_t k) {
  if (c > n) throw DomainError("pass@k needs c <= n");
  if (k < 1 || k > n) throw DomainError("pass@k needs 1 <= k <= n");
}

void sort_by_sample(std::vector<EvalRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const EvalRecord& a, const EvalRecord& b) { return a.sample_id < b.sample_id; });
}

}  // namespace

bool operator==(const Fraction& a, const Fraction& b) {
  return static_cast<u128>(a.num) * b.den == static_cast<u128>(b.num) * a.den;
}

trace::Game Problem::game() const {
  return std::holds_alternative<sudoku::Board>(instance) ? trace::Game::sudoku : trace::Game::countdown;
}

void ProblemSet::add(Problem p) {
  const std::string id = p.id;
  problems_.insert_or_assign(id, std::move(p));
}

const Problem& ProblemSet::get(std::string_view id) const {
  auto it = problems_.find(id);
  if (it == problems_.end()) throw LookupError("unknown problem id: " + std::string(id));
  return it->second;
}

bool ProblemSet::contains(std::string_view id) const { return problems_.find(id) != problems_.end(); }

std::vector<std::string> ProblemSet::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, p] : problems_) out.push_back(id);
  return out;
}

EvalRecord score(const Problem& problem, std::uint64_t sample_id, std::string_view text,
                 const trace::Dialect& dialect, const flops::ModelConfig* model) {
  if (dialect.game != problem.game()) throw ConfigError("dialect " + dialect.str() + " does not fit the problem");
  EvalRecord r;
  r.problem_id = problem.id;
  r.sample_id = sample_id;
  r.tokens = tokenizer::count_tokens(text, tokenizer::build_vocab(dialect.game));
  if (model) r.flops = flops::flops_breakdown(*model, r.tokens, 1).total;
  const auto parsed = codec::parse(text, dialect);
  const Judged j = problem.game() == trace::Game::sudoku
                       ? judge_sudoku(std::get<sudoku::Board>(problem.instance), parsed)
                       : judge_countdown(std::get<countdown::Puzzle>(problem.instance), parsed);
  r.correct = j.correct;
  r.mistakes = j.mistakes;
  r.answer = j.answer;
  r.reason = j.reason;
  return r;
}

EvalRecord score(const ProblemSet& problems, std::string_view problem_id, std::uint64_t sample_id,
                 std::string_view text, const trace::Dialect& dialect, const flops::ModelConfig* model) {
  return score(problems.get(problem_id), sample_id, text, dialect, model);
}

std::string answer_key(std::string_view text, const trace::Dialect& dialect) {
  const auto parsed = codec::parse(text, dialect);
  if (dialect.game == trace::Game::countdown) {
    const auto ops = codec::claimed_solution(parsed.trace);
    return ops ? ops_key(*ops) : std::string{};
  }
  try {
    const auto start = codec::sudoku_start(parsed.trace);
    const auto r = sudoku::replay(start, parsed.trace);
    return r.ended ? r.board.str() : std::string{};
  } catch (const Error&) {
    return {};
  }
}

bool best_of_n(std::vector<EvalRecord> records, std::size_t n) {
  if (records.size() < n)
    throw DomainError("best-of-" + std::to_string(n) + " needs " + std::to_string(n) + " samples, got " +
                      std::to_string(records.size()));
  sort_by_sample(records);
  return std::any_of(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(n),
                     [](const EvalRecord& r) { return r.correct; });
}

double pass_at_k(std::uint64_t n, std::uint64_t c, std::uint64_t k) {
  check_pass_domain(n, c, k);
  if (n - c < k) return 1.0;
  double miss = 1.0;
  for (std::uint64_t i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  return 1.0 - miss;
}

Fraction pass_at_k_exact(std::uint64_t n, std::uint64_t c, std::uint64_t k) {
  check_pass_domain(n, c, k);
  const std::uint64_t all = binom(n, k);
  const std::uint64_t miss = binom(n - c, k);
  const std::uint64_t g = std::gcd(all - miss, all);
  return {(all - miss) / g, all / g};
}

std::size_t majority_vote(const std::vector<std::string>& answers, std::uint64_t seed) {
  if (answers.empty()) throw DomainError("majority vote needs at least one sample");
  std::map<std::string, std::size_t> votes;
  for (const auto& a : answers) {
    if (!a.empty()) ++votes[a];
  }
  if (votes.empty()) return 0;
  std::size_t best = 0;
  for (const auto& [a, n] : votes) best = std::max(best, n);
  std::vector<std::string> tied;
  for (const auto& [a, n] : votes) {
    if (n == best) tied.push_back(a);
  }
  std::mt19937_64 rng(seed);
  const auto& pick = tied[uniform_int<std::size_t>(rng, 0, tied.size() - 1)];
  return static_cast<std::size_t>(std::find(answers.begin(), answers.end(), pick) - answers.begin());
}

Fraction jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::vector<std::string> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  const std::uint64_t uni = a.size() + b.size() - both.size();
  if (uni == 0) return {1, 1};
  const std::uint64_t g = std::gcd<std::uint64_t>(both.size(), uni);
  return {both.size() / g, uni / g};
}

std::set<std::string> solved_set(const std::vector<EvalRecord>& records, std::uint64_t budget, bool cumulative) {
  std::set<std::string> out;
  for (const auto& r : records) {
    if (r.correct && (cumulative ? r.mistakes <= budget : r.mistakes == budget)) out.insert(r.problem_id);
  }
  return out;
}

std::optional<std::uint64_t> direct_mistakes(std::vector<EvalRecord> records) {
  sort_by_sample(records);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].correct) return i;
  }
  return std::nullopt;
}

const char* to_string(CurveMode m) { return m == CurveMode::parallel ? "parallel" : "sequential"; }

std::vector<CurvePoint> build_curve(const std::vector<EvalRecord>& records, const std::vector<std::string>& problems,
                                    const flops::ModelConfig& model, const std::vector<std::uint64_t>& budgets,
                                    CurveMode mode, std::uint64_t fixed_tokens) {
  if (problems.empty()) throw DomainError("curve needs at least one problem");
  std::map<std::string, std::vector<EvalRecord>> by_problem;
  for (const auto& r : records) by_problem[r.problem_id].push_back(r);
  for (auto& [id, rs] : by_problem) sort_by_sample(rs);

  std::vector<std::string> missing;
  for (std::uint64_t b : budgets) {
    for (const auto& p : problems) {
      auto it = by_problem.find(p);
      const std::size_t have = it == by_problem.end() ? 0 : it->second.size();
      const std::size_t need = mode == CurveMode::parallel ? b : 1;
      if (have < need) missing.push_back("(" + p + ", " + std::to_string(b) + ")");
    }
  }
  if (!missing.empty()) {
    std::string msg = "records missing for";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " and " + std::to_string(missing.size() - 20) + " more";
    throw CoverageError(msg);
  }

  std::vector<CurvePoint> out;
  for (std::uint64_t b : budgets) {
    std::size_t solved = 0;
    for (const auto& p : problems) {
      const auto& rs = by_problem[p];
      if (mode == CurveMode::parallel) {
        solved += best_of_n(rs, b) ? 1 : 0;
      } else {
        solved += rs.front().correct && rs.front().tokens <= b ? 1 : 0;
      }
    }
    CurvePoint pt;
    pt.mode = mode;
    pt.budget = b;
    pt.accuracy = static_cast<double>(solved) / static_cast<double>(problems.size());
    pt.flops = mode == CurveMode::parallel ? flops::flops_breakdown(model, fixed_tokens, b).total
                                           : flops::flops_breakdown(model, b, 1).total;
    out.push_back(pt);
  }
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
  std::string out = "flops,accuracy,mode,budget\n";
  char buf[32];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.6f", p.accuracy);
    out += std::to_string(p.flops) + "," + buf + "," + to_string(p.mode) + "," + std::to_string(p.budget) + "\n";
  }
  return out;
}

std::string record_json(const EvalRecord& r) {
  nlohmann::json j{{"problem_id", r.problem_id}, {"sample_id", r.sample_id},
                   {"verdict", r.correct ? "correct" : "incorrect"},
                   {"mistakes", r.mistakes},     {"tokens", r.tokens},
                   {"flops", r.flops},           {"answer", r.answer},
                   {"reason", r.reason}};
  return j.dump();
}

EvalRecord record_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    EvalRecord r;
    r.problem_id = j.at("problem_id").get<std::string>();
    r.sample_id = j.at("sample_id").get<std::uint64_t>();
    const auto verdict = j.at("verdict").get<std::string>();
    if (verdict != "correct" && verdict != "incorrect") throw ParseError("verdict must be correct or incorrect");
    r.correct = verdict == "correct";
    r.mistakes = j.value("mistakes", std::uint64_t{0});
    r.tokens = j.value("tokens", std::uint64_t{0});
    r.flops = j.value("flops", std::uint64_t{0});
    r.answer = j.value("answer", std::string{});
    r.reason = j.value("reason", std::string{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad eval record: ") + e.what());
  }
}

}  // namespace searchlab::eval
