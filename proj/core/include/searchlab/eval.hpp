#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "searchlab/countdown.hpp"
#include "searchlab/flops.hpp"
#include "searchlab/sudoku.hpp"
#include "searchlab/trace.hpp"

namespace searchlab::eval {

struct Problem {
  std::string id;
  std::variant<countdown::Puzzle, sudoku::Board> instance;

  trace::Game game() const;
};

class ProblemSet {
 public:
  void add(Problem p);
  /// Throws LookupError.
  const Problem& get(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::size_t size() const { return problems_.size(); }
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, Problem, std::less<>> problems_;
};

struct EvalRecord {
  std::string problem_id;
  std::uint64_t sample_id = 0;
  bool correct = false;
  std::uint64_t mistakes = 0;
  std::uint64_t tokens = 0;
  std::uint64_t flops = 0;
  // Normalised claimed answer (operation list or final grid); empty if none.
  std::string answer;
  std::string reason;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

/// Re-derives the verdict from the game rules; the trace's own goal line is
/// never trusted. `model` sets the flops field (tokens as one sequence).
EvalRecord score(const Problem& problem, std::uint64_t sample_id, std::string_view text,
                 const trace::Dialect& dialect, const flops::ModelConfig* model = nullptr);
EvalRecord score(const ProblemSet& problems, std::string_view problem_id, std::uint64_t sample_id,
                 std::string_view text, const trace::Dialect& dialect, const flops::ModelConfig* model = nullptr);

/// Normalised answer of a generation: CountDown operation list, Sudoku final
/// grid. Empty when the text claims nothing.
std::string answer_key(std::string_view text, const trace::Dialect& dialect);

/// Solved iff one of the first n samples (by sample_id) is correct. Throws
/// DomainError with fewer than n samples.
bool best_of_n(std::vector<EvalRecord> records, std::size_t n);

struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction& a, const Fraction& b);
};

/// 1 - C(n-c, k) / C(n, k) as a product of per-term ratios.
double pass_at_k(std::uint64_t n, std::uint64_t c, std::uint64_t k);
/// Exact form, reduced. Throws DomainError when the binomials overflow.
Fraction pass_at_k_exact(std::uint64_t n, std::uint64_t c, std::uint64_t k);

/// Index of the plurality answer; ties go to a seeded uniform draw among the
/// tied answers. Empty answers only win when nothing else was claimed.
std::size_t majority_vote(const std::vector<std::string>& answers, std::uint64_t seed);

/// |a n b| / |a u b|, 1 when both are empty.
Fraction jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Problems with a correct record within the mistake budget. Cumulative
/// counts mistakes <= budget, otherwise exactly budget.
std::set<std::string> solved_set(const std::vector<EvalRecord>& records, std::uint64_t budget,
                                 bool cumulative = true);

/// 1-based position (by sample_id) of the first correct sample minus one.
std::optional<std::uint64_t> direct_mistakes(std::vector<EvalRecord> records);

enum class CurveMode { sequential, parallel };
const char* to_string(CurveMode m);

struct CurvePoint {
  std::uint64_t flops = 0;
  double accuracy = 0.0;
  CurveMode mode = CurveMode::sequential;
  std::uint64_t budget = 0;
};

/// Sequential: budget is a token cap T; a problem counts when its first
/// sample is correct within T tokens. x = flops(T, 1).
/// Parallel: budget is a sample count n; best-of-n. x = flops(fixed_tokens, n).
/// Throws CoverageError naming the missing (problem, budget) pairs.
std::vector<CurvePoint> build_curve(const std::vector<EvalRecord>& records, const std::vector<std::string>& problems,
                                    const flops::ModelConfig& model, const std::vector<std::uint64_t>& budgets,
                                    CurveMode mode, std::uint64_t fixed_tokens = 4096);

/// Header "flops,accuracy,mode,budget".
std::string curve_csv(const std::vector<CurvePoint>& points);

std::string record_json(const EvalRecord& r);
EvalRecord record_from_json(std::string_view line);

}  // namespace searchlab::eval
