#include "searchlab/countdown.hpp"

#include <algorithm>
#include <random>

#include "searchlab/error.hpp"
#include "searchlab/rng.hpp"

namespace searchlab::countdown {

std::string Operation::str() const {
  std::string out = std::to_string(left);
  out += static_cast<char>(op);
  out += std::to_string(right);
  out += '=';
  out += std::to_string(result);
  return out;
}

bool Operation::arithmetic_ok() const {
  switch (op) {
    case OpKind::add:
      return result == left + right;
    case OpKind::sub:
      return left >= right && result == left - right;
    case OpKind::mul:
      return result == left * right;
    case OpKind::div:
      return right != 0 && left >= right && left % right == 0 && result == left / right;
  }
  return false;
}

std::optional<Operation> combine(Number a, Number b, OpKind op) {
  const Number hi = std::max(a, b);
  const Number lo = std::min(a, b);
  switch (op) {
    case OpKind::add:
      return Operation{a, b, op, a + b};
    case OpKind::sub:
      return Operation{hi, lo, op, hi - lo};
    case OpKind::mul:
      return Operation{a, b, op, a * b};
    case OpKind::div:
      if (lo == 0 || hi % lo != 0) return std::nullopt;
      return Operation{hi, lo, op, hi / lo};
  }
  return std::nullopt;
}

const char* to_string(Variant v) { return v == Variant::stacked ? "stacked" : "standard"; }

Variant variant_from_string(const std::string& s) {
  if (s == "standard") return Variant::standard;
  if (s == "stacked") return Variant::stacked;
  throw ConfigError("unknown countdown variant: " + s);
}

void Puzzle::validate() const {
  if (target < 1) throw ConfigError("countdown target must be >= 1");
  for (Number c : candidates) {
    if (c < 1) throw ConfigError("countdown candidates must be >= 1");
  }
  if (partial_goal_index) {
    if (candidates.size() != kStackedCount || *partial_goal_index != kStackedPartialIndex)
      throw ConfigError("stacked puzzles need 8 candidates with the 5th as partial goal");
  } else if (candidates.size() != kStandardCount) {
    throw ConfigError("standard puzzles need exactly 4 candidates");
  }
}

std::vector<Number> State::printed() const {
  std::vector<Number> out = numbers;
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

State initial_state(const Puzzle& puzzle) {
  State s;
  s.target = puzzle.target;
  if (puzzle.partial_goal_index) {
    const auto split = static_cast<std::ptrdiff_t>(*puzzle.partial_goal_index);
    s.numbers.assign(puzzle.candidates.begin(), puzzle.candidates.begin() + split);
    s.tail.assign(puzzle.candidates.begin() + split, puzzle.candidates.end());
  } else {
    s.numbers = puzzle.candidates;
  }
  return s;
}

State next_phase(const State& reached) {
  State s;
  s.target = reached.target;
  s.numbers = reached.tail;
  return s;
}

std::vector<Move> enumerate_moves(const State& state) {
  const auto& nums = state.numbers;
  if (nums.size() < 2) throw DomainError("enumerate_moves needs at least two numbers");
  std::vector<Move> moves;
  moves.reserve(nums.size() * (nums.size() - 1) * 2);
  for (std::size_t i = 0; i < nums.size(); ++i) {
    for (std::size_t j = i + 1; j < nums.size(); ++j) {
      for (OpKind kind : kAllOps) {
        auto op = combine(nums[i], nums[j], kind);
        if (!op) continue;
        Move m{*op, State{state.target, {}, state.tail, state.operations}};
        m.child.numbers.reserve(nums.size() - 1);
        for (std::size_t k = 0; k < nums.size(); ++k) {
          if (k != i && k != j) m.child.numbers.push_back(nums[k]);
        }
        m.child.numbers.push_back(op->result);
        m.child.operations.push_back(*op);
        moves.push_back(std::move(m));
      }
    }
  }
  return moves;
}

std::uint64_t action_count(std::size_t n) {
  if (n < 2) return 0;
  return static_cast<std::uint64_t>(n) * (n - 1) / 2 * 4;
}

namespace {

// Applies ops[begin, end) to a multiset of numbers. On success the multiset
// holds what remains.
Verdict replay_group(std::vector<Number>& pool, const std::vector<Operation>& ops, std::size_t begin,
                     std::size_t end) {
  for (std::size_t k = begin; k < end; ++k) {
    const Operation& op = ops[k];
    if (!op.arithmetic_ok()) return Verdict::violation("bad arithmetic: " + op.str());
    auto take = [&pool](Number v) {
      auto it = std::find(pool.begin(), pool.end(), v);
      if (it == pool.end()) return false;
      pool.erase(it);
      return true;
    };
    if (!take(op.left) || !take(op.right))
      return Verdict::violation("operand not available: " + op.str());
    pool.push_back(op.result);
  }
  return Verdict::ok();
}

Verdict check_reduced(const std::vector<Number>& pool, Number goal) {
  if (pool.size() != 1)
    return Verdict::violation("not all numbers used (" + std::to_string(pool.size()) + " left)");
  if (pool.front() != goal)
    return Verdict::violation("reached " + std::to_string(pool.front()) + " instead of " +
                              std::to_string(goal));
  return Verdict::ok();
}

}  // namespace

Verdict verify_solution(const Puzzle& puzzle, const std::vector<Operation>& ops) {
  const State root = initial_state(puzzle);
  if (!puzzle.partial_goal_index) {
    std::vector<Number> pool = root.numbers;
    if (ops.size() + 1 != pool.size())
      return Verdict::violation("expected " + std::to_string(pool.size() - 1) + " operations, got " +
                                std::to_string(ops.size()));
    if (auto v = replay_group(pool, ops, 0, ops.size()); !v.correct) return v;
    return check_reduced(pool, puzzle.target);
  }
  const std::size_t first = root.numbers.size() - 1;
  const std::size_t second = root.tail.size() - 1;
  if (ops.size() != first + second)
    return Verdict::violation("expected " + std::to_string(first + second) + " operations, got " +
                              std::to_string(ops.size()));
  std::vector<Number> pool = root.numbers;
  if (auto v = replay_group(pool, ops, 0, first); !v.correct) return v;
  if (auto v = check_reduced(pool, root.goal()); !v.correct)
    return Verdict::violation("partial goal: " + v.reason);
  pool = root.tail;
  if (auto v = replay_group(pool, ops, first, ops.size()); !v.correct) return v;
  return check_reduced(pool, puzzle.target);
}

void GenConfig::validate() const {
  if (candidate_min < 1 || candidate_min > candidate_max)
    throw ConfigError("invalid candidate range [" + std::to_string(candidate_min) + ", " +
                      std::to_string(candidate_max) + "]");
  if (target_min < 1 || target_min > target_max)
    throw ConfigError("invalid target range [" + std::to_string(target_min) + ", " +
                      std::to_string(target_max) + "]");
}

namespace {

constexpr int kMaxConstructionAttempts = 100000;

std::vector<Number> draw_candidates(std::mt19937_64& rng, const GenConfig& config, std::size_t n) {
  std::vector<Number> out(n);
  for (auto& v : out) v = uniform_int(rng, config.candidate_min, config.candidate_max);
  return out;
}

// Random walk down the tree to a single number.
Number random_path_result(std::mt19937_64& rng, const std::vector<Number>& numbers) {
  State s;
  s.numbers = numbers;
  while (s.numbers.size() > 1) {
    auto moves = enumerate_moves(s);
    const auto pick = uniform_int<std::size_t>(rng, 0, moves.size() - 1);
    s = std::move(moves[pick].child);
  }
  return s.numbers.front();
}

// Candidates plus a goal inside [lo, hi] reachable from them.
std::pair<std::vector<Number>, Number> draw_reachable(std::mt19937_64& rng, const GenConfig& config,
                                                      Number lo, Number hi) {
  for (int attempt = 0; attempt < kMaxConstructionAttempts; ++attempt) {
    auto nums = draw_candidates(rng, config, kStandardCount);
    const Number goal = random_path_result(rng, nums);
    if (goal >= lo && goal <= hi) return {std::move(nums), goal};
  }
  throw ConfigError("could not construct a reachable target in [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
}

std::string puzzle_id(std::uint64_t seed, std::uint64_t index) {
  return "cd-" + std::to_string(seed) + "-" + std::to_string(index);
}

}  // namespace

Puzzle generate_puzzle(std::uint64_t seed, const GenConfig& config, std::uint64_t index) {
  config.validate();
  std::mt19937_64 rng(derive_seed(seed, index));
  Puzzle p;
  p.id = puzzle_id(seed, index);
  if (config.target_mode == TargetMode::uniform) {
    p.candidates = draw_candidates(rng, config, kStandardCount);
    p.target = uniform_int(rng, config.target_min, config.target_max);
  } else {
    auto [nums, goal] = draw_reachable(rng, config, config.target_min, config.target_max);
    p.candidates = std::move(nums);
    p.target = goal;
  }
  return p;
}

Puzzle make_stacked(std::uint64_t seed, const GenConfig& config, std::uint64_t index) {
  config.validate();
  // Separate stream from generate_puzzle for the same (seed, index).
  std::mt19937_64 rng(derive_seed(~seed, index));
  Puzzle p;
  p.id = puzzle_id(seed, index);
  p.partial_goal_index = kStackedPartialIndex;
  if (config.target_mode == TargetMode::uniform) {
    p.candidates = draw_candidates(rng, config, kStackedCount);
    p.target = uniform_int(rng, config.target_min, config.target_max);
    return p;
  }
  // The partial goal doubles as a candidate of the second phase, so it stays
  // inside the candidate range.
  auto [first, partial] = draw_reachable(rng, config, config.candidate_min, config.candidate_max);
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxConstructionAttempts)
      throw ConfigError("could not construct a reachable stacked target");
    auto rest = draw_candidates(rng, config, kStandardCount - 1);
    std::vector<Number> second{partial};
    second.insert(second.end(), rest.begin(), rest.end());
    const Number goal = random_path_result(rng, second);
    if (goal < config.target_min || goal > config.target_max) continue;
    p.candidates = first;
    p.candidates.insert(p.candidates.end(), second.begin(), second.end());
    p.target = goal;
    return p;
  }
}

std::uint64_t tree_path_count(std::size_t n_candidates) {
  if (n_candidates < 2) throw DomainError("tree_path_count needs at least 2 candidates");
  std::uint64_t total = 1;
  for (std::size_t n = n_candidates; n >= 2; --n) {
    if (__builtin_mul_overflow(total, action_count(n), &total))
      throw DomainError("tree_path_count overflows 64 bits for n=" + std::to_string(n_candidates));
  }
  return total;
}

std::uint64_t stacked_tree_path_count() {
  const std::uint64_t half = tree_path_count(kStandardCount);
  return half * half;
}

namespace {

bool solve_rec(const State& s, std::vector<Operation>& path) {
  if (s.is_leaf()) return s.numbers.front() == s.goal();
  for (auto& m : enumerate_moves(s)) {
    path.push_back(m.op);
    if (solve_rec(m.child, path)) return true;
    path.pop_back();
  }
  return false;
}

}  // namespace

std::optional<std::vector<Operation>> brute_force_solve(const Puzzle& puzzle) {
  State root = initial_state(puzzle);
  std::vector<Operation> path;
  if (!solve_rec(root, path)) return std::nullopt;
  if (puzzle.partial_goal_index) {
    const State second = next_phase(root);
    if (!solve_rec(second, path)) return std::nullopt;
  }
  return path;
}

}  // namespace searchlab::countdown
