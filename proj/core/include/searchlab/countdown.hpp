#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace searchlab::countdown {

using Number = std::int64_t;

enum class OpKind : char { add = '+', sub = '-', mul = '*', div = '/' };

inline constexpr OpKind kAllOps[] = {OpKind::add, OpKind::sub, OpKind::mul, OpKind::div};

/// One arithmetic step. `result` is whatever was claimed; arithmetic_ok()
/// tells whether the claim is the exact, legal outcome.
struct Operation {
  Number left = 0;
  Number right = 0;
  OpKind op = OpKind::add;
  Number result = 0;

  /// Rendered as in traces: "96-78=18".
  std::string str() const;

  /// Exact arithmetic under the game's canonical operand order:
  /// subtraction and division take the larger operand on the left, and
  /// division must be exact.
  bool arithmetic_ok() const;

  friend bool operator==(const Operation&, const Operation&) = default;
};

/// Canonical operation on an unordered pair, or nullopt for an inexact or
/// zero division. Addition and multiplication keep the pair order (a, b).
std::optional<Operation> combine(Number a, Number b, OpKind op);

enum class Variant { standard, stacked };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct Puzzle {
  std::string id;
  Number target = 0;
  std::vector<Number> candidates;
  // Stacked only: index of the number that is the intermediate target.
  std::optional<std::size_t> partial_goal_index;

  Variant variant() const { return partial_goal_index ? Variant::stacked : Variant::standard; }

  /// Throws ConfigError when the puzzle breaks its shape invariants.
  void validate() const;

  friend bool operator==(const Puzzle&, const Puzzle&) = default;
};

inline constexpr std::size_t kStandardCount = 4;
inline constexpr std::size_t kStackedCount = 8;
inline constexpr std::size_t kStackedPartialIndex = 4;

/// A node of the search tree. `numbers` is the active group that operations
/// consume; `tail` holds numbers reserved for a later stacked phase and is
/// printed after the group. For a standard puzzle the tail is empty.
struct State {
  Number target = 0;
  std::vector<Number> numbers;
  std::vector<Number> tail;
  std::vector<Operation> operations;

  /// Number the active group must reduce to: the partial target while a
  /// tail remains, otherwise the final target.
  Number goal() const { return tail.empty() ? target : tail.front(); }
  bool final_phase() const { return tail.empty(); }
  bool is_leaf() const { return numbers.size() == 1; }
  std::vector<Number> printed() const;

  friend bool operator==(const State&, const State&) = default;
};

/// Root state of the puzzle (first phase for stacked puzzles).
State initial_state(const Puzzle& puzzle);

/// Second-phase root of a stacked puzzle once the partial target is reached.
State next_phase(const State& reached);

struct Move {
  Operation op;
  State child;
};

/// All legal children, pairs in index order (i < j), then + - * /.
/// Children keep the remaining numbers in order with the result appended.
/// Throws DomainError when fewer than two numbers remain.
std::vector<Move> enumerate_moves(const State& state);

/// Number of actions at a state with n numbers, counting inexact divisions.
std::uint64_t action_count(std::size_t n);

struct Verdict {
  bool correct = false;
  std::string reason;  // empty when correct

  static Verdict ok() { return {true, {}}; }
  static Verdict violation(std::string why) { return {false, std::move(why)}; }
};

/// Checks a complete solution against the rules. Never throws for rule
/// violations; they come back as verdicts.
Verdict verify_solution(const Puzzle& puzzle, const std::vector<Operation>& ops);

enum class TargetMode {
  reachable,  // target is the result of a random full operation path
  uniform,    // target drawn independently; may be unsolvable
};

struct GenConfig {
  Number candidate_min = 1;
  Number candidate_max = 99;
  Number target_min = 10;
  Number target_max = 100;
  TargetMode target_mode = TargetMode::reachable;

  void validate() const;
};

/// Deterministic in (seed, index). The id is "cd-{seed}-{index}".
Puzzle generate_puzzle(std::uint64_t seed, const GenConfig& config, std::uint64_t index = 0);

/// Eight-candidate puzzle whose fifth number is the intermediate target.
Puzzle make_stacked(std::uint64_t seed, const GenConfig& config, std::uint64_t index = 0);

/// Product over N = n..2 of C(N,2)*4. Throws DomainError for n < 2 or on
/// overflow.
std::uint64_t tree_path_count(std::size_t n_candidates);

/// Root-to-leaf paths of the stacked tree: two independent 4-number trees.
std::uint64_t stacked_tree_path_count();

/// Exhaustive enumeration; returns the first solution in enumeration order.
std::optional<std::vector<Operation>> brute_force_solve(const Puzzle& puzzle);

}  // namespace searchlab::countdown
