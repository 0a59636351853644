#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "searchlab/trace.hpp"

namespace searchlab::sudoku {

inline constexpr int kSize = 9;
inline constexpr int kCells = 81;

/// Candidate set: bit d set means digit d (1..9) is still possible.
using Mask = std::uint16_t;
inline constexpr Mask kAllDigits = 0x3FE;

constexpr Mask digit_bit(int d) { return static_cast<Mask>(1u << d); }
int popcount(Mask m);
std::vector<int> digits_of(Mask m);

struct Cell {
  int row = 0;
  int col = 0;
  int index() const { return row * kSize + col; }
  static Cell at(int index) { return {index / kSize, index % kSize}; }
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class AssignmentKind { given, deduced, guessed };

struct CellAssignment {
  int row = 0;
  int col = 0;
  int value = 0;
  AssignmentKind kind = AssignmentKind::deduced;
  friend bool operator==(const CellAssignment&, const CellAssignment&) = default;
};

enum class Strategy {
  naked_single,
  hidden_single,
  naked_pair,
  hidden_pair,
  naked_triple,
  pointing_pair,
  box_line_reduction,
};
const char* to_string(Strategy s);

struct CandidateElimination {
  int row = 0;
  int col = 0;
  int value = 0;
  Strategy strategy = Strategy::naked_pair;
};

/// Ordered strategy list applied to fixpoint. Versioned so datasets can
/// record which deduction set produced their traces.
struct StrategySet {
  std::string version;
  std::vector<Strategy> order;
};
const StrategySet& default_strategies();
/// Naked singles only, applied in row-major passes.
const StrategySet& singles_strategies();
/// "seven-v1" / "seven", "singles-v1" / "singles". Throws ConfigError.
const StrategySet& strategy_set(std::string_view name);

/// The three units containing each cell and the 27 units themselves.
const std::array<std::array<int, 9>, 27>& units();
const std::array<std::array<int, 20>, 81>& peers();

class Board {
 public:
  Board();

  /// 81 characters, '0' or '.' for empty. Throws ParseError for bad shape or
  /// alphabet and InvalidBoardError when the givens break a rule.
  static Board parse(std::string_view text);

  int value(int index) const { return cells_[static_cast<std::size_t>(index)]; }
  int value(Cell c) const { return value(c.index()); }
  Mask candidates(int index) const { return cands_[static_cast<std::size_t>(index)]; }
  Mask candidates(Cell c) const { return candidates(c.index()); }
  bool empty(int index) const { return value(index) == 0; }

  /// Fills a cell and removes the digit from its peers. False when the digit
  /// is not a candidate of an empty cell.
  bool place(int index, int digit);
  /// Removes one candidate; false when it was not present.
  bool eliminate(int index, int digit);

  int filled_count() const;
  bool complete() const;
  /// No unit repeats a filled digit.
  bool consistent() const;
  /// Complete and consistent.
  bool solved() const { return complete() && consistent(); }

  /// 81-character form with '0' for empty cells.
  std::string str() const;
  std::vector<trace::CellValue> filled_cells() const;

  friend bool operator==(const Board&, const Board&) = default;

 private:
  std::array<std::uint8_t, kCells> cells_{};
  std::array<Mask, kCells> cands_{};
};

struct StrategyResult {
  Board board;
  std::vector<CellAssignment> fills;
  std::vector<CandidateElimination> eliminations;
  // Set when a cell (or a unit) ran out of candidates; drives backtracking.
  std::optional<Cell> contradiction;
};

/// Applies the strategies to fixpoint without guessing. Fills come out in
/// strategy precedence, then row-major order.
StrategyResult apply_strategies(Board board, const StrategySet& strategies = default_strategies());

enum class SolveStatus { solved, dead, budget_exhausted };
const char* to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::dead;
  Board board;  // final board for solved outcomes, the root otherwise
  trace::SearchTrace trace;
  std::uint64_t guesses = 0;
};

/// Propagation plus guessing. Guess cell: fewest candidates, row-major ties;
/// candidates tried ascending. budget.max_nodes caps guesses.
SolveOutcome solve(const Board& board, const trace::SearchBudget& budget = {},
                   const StrategySet& strategies = default_strategies());

/// Plain backtracking (no deduction strategies). Counts solutions up to
/// `limit` and stores the first one found.
int count_solutions(const Board& board, int limit, Board* first = nullptr);

/// Fills `extra_fills` random empty cells with the unique-solution values.
Board ease_board(const Board& board, int extra_fills, std::uint64_t seed);

/// Replays a trace over a starting board. Guesses push a snapshot that the
/// matching revert restores.
struct ReplayResult {
  Board board;
  bool ended = false;  // SOL_END seen
  std::vector<std::string> problems;
};
ReplayResult replay(const Board& start, const trace::SearchTrace& trace);

}  // namespace searchlab::sudoku
