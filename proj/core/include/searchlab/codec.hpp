#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "searchlab/countdown.hpp"
#include "searchlab/sudoku.hpp"
#include "searchlab/trace.hpp"

namespace searchlab::codec {

using trace::Dialect;
using trace::SearchTrace;

/// Renders a trace in the dialect's line grammar. Every line ends with '\n'.
/// Throws CodecError when the trace does not replay cleanly.
std::string serialize(const SearchTrace& trace, const Dialect& dialect);

enum class ViolationKind { grammar, arithmetic, illegal_transition };
const char* to_string(ViolationKind k);

struct Violation {
  std::size_t line = 0;  // 1-based
  ViolationKind kind = ViolationKind::grammar;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool goal_present = false;
  // Input did not end with a newline; the last line may be cut short.
  bool truncated = false;

  bool clean() const { return violations.empty(); }
  std::size_t count(ViolationKind k) const;
};

struct Parsed {
  SearchTrace trace;
  ValidationReport report;
};

/// Tolerant parse. Lines that do not match the grammar are reported and
/// skipped; an unterminated last line that does not parse is only marked as
/// truncation. Never throws.
Parsed parse(std::string_view text, const Dialect& dialect);

/// Keeps only the path to the goal. CountDown nodes are renumbered #2, #3, ...
/// per phase; Sudoku guesses become plain fills. Throws DomainError when the
/// trace is not solved.
SearchTrace prune_to_direct(const SearchTrace& trace);

/// Collapses every two-number state block to its state line plus one
/// terminal line. Throws ConfigError for Sudoku traces.
SearchTrace shorten_think(const SearchTrace& trace);

/// CountDown: dead ends before the first goal. Sudoku: failure runs, i.e.
/// NO_CANDIDATE lines not preceded by another NO_CANDIDATE or a REVERT.
std::size_t count_mistakes(const SearchTrace& trace);

/// Operations the trace claims solve the puzzle, across both stacked phases.
/// Empty when no goal line is present. Final operations omitted by think
/// traces are recovered from the last state.
std::optional<std::vector<countdown::Operation>> claimed_solution(const SearchTrace& trace);

/// Board described by the START line. Throws DomainError when absent and
/// InvalidBoardError when the givens conflict.
sudoku::Board sudoku_start(const SearchTrace& trace);

}  // namespace searchlab::codec
