#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "searchlab/countdown.hpp"
#include "searchlab/trace.hpp"

namespace searchlab::search {

using countdown::Number;

enum class HeuristicKind { sum, multiply };
enum class Traversal { dfs, bfs };
enum class ChildOrder { ascending, descending };

/// Positive rational used for pruning multipliers and heuristic scores.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  /// Accepts "1", "0.5", "1.25", "3/4".
  static Rational parse(std::string_view text);
  /// Decimal when exact ("1.0", "0.75"), otherwise "p/q".
  std::string str() const;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational reduced() const;

  friend bool operator==(const Rational& a, const Rational& b);
  friend bool operator<(const Rational& a, const Rational& b);
};

/// Heuristic value of a state; lower is closer to the goal.
/// sum: mean absolute distance of the active numbers to the goal.
/// multiply: smallest distance from any active number to any factor of the goal.
Rational heuristic_score(const countdown::State& state, HeuristicKind h);

struct Prune {
  bool enabled = false;
  // Children at depth >= min_depth (operations applied) whose score exceeds
  // multiplier * goal are dropped.
  int min_depth = 1;
  Rational multiplier{1, 1};

  friend bool operator==(const Prune&, const Prune&) = default;
};

/// Compact string form: "dfs:sum:asc:prune@1x1.0", "bfs3:mult:desc:off".
struct Policy {
  Traversal traversal = Traversal::dfs;
  int beam_width = 0;  // bfs only, 1..5
  HeuristicKind heuristic = HeuristicKind::sum;
  ChildOrder order = ChildOrder::ascending;
  Prune prune;

  std::string str() const;
  static Policy parse(std::string_view text);
  void validate() const;

  friend bool operator==(const Policy& a, const Policy& b) { return a.str() == b.str(); }
};

/// DFS with the sum heuristic pruning any child whose score exceeds the goal.
Policy default_policy();

/// 32 policies: {dfs, bfs1..bfs5, dfs+prune, bfs2+prune} x {sum, mult} x
/// {asc, desc}, in that nesting order.
std::vector<Policy> mixture_registry();
inline constexpr const char* kMixtureVersion = "mix32-v1";

enum class Status { solved, failed, budget_exhausted };
const char* to_string(Status s);

struct Outcome {
  Status status = Status::failed;
  trace::SearchTrace trace;
  std::vector<countdown::Operation> solution;  // empty unless solved
  std::uint64_t nodes_expanded = 0;
};

/// Runs one policy on a puzzle. budget.max_nodes caps expanded states.
Outcome search(const countdown::Puzzle& puzzle, const Policy& policy, const trace::SearchBudget& budget = {});

/// Children of a state in the policy's visiting order with pruning applied.
std::vector<countdown::Move> ordered_children(const countdown::State& state, const Policy& policy);

struct Calibration {
  Rational multiplier;
  double solve_rate = 0.0;
  std::vector<std::pair<Rational, double>> sweep;
};

/// Picks the pruning multiplier (from a fixed grid) whose DFS solve rate over
/// `puzzles` is closest to `target_rate`; ties go to the larger multiplier.
Calibration calibrate_prune_multiplier(const std::vector<countdown::Puzzle>& puzzles, Policy base,
                                       double target_rate, const trace::SearchBudget& budget = {});

}  // namespace searchlab::search
