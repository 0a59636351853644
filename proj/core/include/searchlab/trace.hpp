#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "searchlab/countdown.hpp"

namespace searchlab::trace {

using countdown::Number;
using countdown::Operation;

enum class Game { countdown, sudoku };
enum class Mode { backtrack, direct, think };

const char* to_string(Game g);
const char* to_string(Mode m);
Game game_from_string(std::string_view s);
Mode mode_from_string(std::string_view s);

struct Dialect {
  Game game = Game::countdown;
  Mode mode = Mode::backtrack;

  /// "countdown-backtrack", "sudoku-direct", ...
  std::string str() const;
  /// Throws ConfigError for unknown names and for think mode outside CountDown.
  static Dialect parse(std::string_view s);

  friend bool operator==(const Dialect&, const Dialect&) = default;
};

/// Backtracking ids are root-relative paths (#0,2,1); direct traces use a
/// single sequential number (#2, #3, ...).
using NodeId = std::vector<std::uint32_t>;
std::string node_id_str(const NodeId& id);

// CountDown events. `tail` counts the trailing numbers of `numbers` that
// belong to a later stacked phase.
struct CdState {
  Number target = 0;
  std::vector<Number> numbers;
  std::size_t tail = 0;
  std::vector<Operation> operations;
  friend bool operator==(const CdState&, const CdState&) = default;
};
struct CdExplore {
  Operation op;
  std::vector<Number> resulting;
  friend bool operator==(const CdExplore&, const CdExplore&) = default;
};
struct CdGenerated {
  NodeId node;
  Number target = 0;
  std::vector<Number> numbers;
  Operation op;
  friend bool operator==(const CdGenerated&, const CdGenerated&) = default;
};
struct CdMoveTo {
  NodeId node;
  friend bool operator==(const CdMoveTo&, const CdMoveTo&) = default;
};
struct CdDeadEnd {
  Number value = 0;
  Number goal = 0;
  bool final_phase = true;  // false for a missed stacked partial goal
  friend bool operator==(const CdDeadEnd&, const CdDeadEnd&) = default;
};
struct CdPartialGoal {
  Number value = 0;
  Number goal = 0;
  friend bool operator==(const CdPartialGoal&, const CdPartialGoal&) = default;
};
struct CdGoal {
  Number value = 0;
  Number target = 0;
  friend bool operator==(const CdGoal&, const CdGoal&) = default;
};

// Sudoku events.
struct CellValue {
  int row = 0;
  int col = 0;
  int value = 0;
  friend bool operator==(const CellValue&, const CellValue&) = default;
};
struct SdStart {
  std::vector<CellValue> givens;
  friend bool operator==(const SdStart&, const SdStart&) = default;
};
struct SdSolStart {
  friend bool operator==(const SdSolStart&, const SdSolStart&) = default;
};
struct SdFill {
  CellValue cell;
  friend bool operator==(const SdFill&, const SdFill&) = default;
};
struct SdGuess {
  int row = 0;
  int col = 0;
  std::vector<int> candidates;
  int value = 0;
  friend bool operator==(const SdGuess&, const SdGuess&) = default;
};
struct SdNoCandidate {
  int row = 0;
  int col = 0;
  friend bool operator==(const SdNoCandidate&, const SdNoCandidate&) = default;
};
struct SdRevert {
  int row = 0;
  int col = 0;
  std::vector<int> candidates;
  bool exhausted = false;  // "= NO_CANDIDATE" rather than "= NONE"
  friend bool operator==(const SdRevert&, const SdRevert&) = default;
};
struct SdSolEnd {
  friend bool operator==(const SdSolEnd&, const SdSolEnd&) = default;
};

using Event = std::variant<CdState, CdExplore, CdGenerated, CdMoveTo, CdDeadEnd, CdPartialGoal, CdGoal,
                           SdStart, SdSolStart, SdFill, SdGuess, SdNoCandidate, SdRevert, SdSolEnd>;

enum class EventKind {
  state,
  explore,
  generated,
  move_to,
  dead_end,
  partial_goal,
  goal,
  start,
  sol_start,
  fill,
  guess,
  no_candidate,
  revert,
  revert_exhausted,
  sol_end,
};

EventKind kind(const Event& e);
const char* to_string(EventKind k);
Game game_of(const Event& e);

struct SearchTrace {
  Game game = Game::countdown;
  std::vector<Event> events;

  template <typename T>
  void push(T&& e) {
    events.emplace_back(std::forward<T>(e));
  }
  std::size_t count(EventKind k) const;

  friend bool operator==(const SearchTrace&, const SearchTrace&) = default;
};

/// Caps shared by both games. Node caps are enforced by the searches; the
/// token cap is enforced where traces are serialized (it needs a vocabulary).
/// Zero means unlimited.
struct SearchBudget {
  std::uint64_t max_nodes = 0;
  std::uint64_t max_tokens = 4096;
};

}  // namespace searchlab::trace
