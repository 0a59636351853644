#include "searchlab/sudoku.hpp"

#include <algorithm>
#include <bit>
#include <random>

#include "searchlab/error.hpp"
#include "searchlab/rng.hpp"

namespace searchlab::sudoku {

int popcount(Mask m) { return std::popcount(static_cast<unsigned>(m)); }

std::vector<int> digits_of(Mask m) {
  std::vector<int> out;
  for (int d = 1; d <= 9; ++d) {
    if (m & digit_bit(d)) out.push_back(d);
  }
  return out;
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::naked_single: return "naked_single";
    case Strategy::hidden_single: return "hidden_single";
    case Strategy::naked_pair: return "naked_pair";
    case Strategy::hidden_pair: return "hidden_pair";
    case Strategy::naked_triple: return "naked_triple";
    case Strategy::pointing_pair: return "pointing_pair";
    case Strategy::box_line_reduction: return "box_line_reduction";
  }
  return "?";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return "solved";
    case SolveStatus::dead: return "dead";
    case SolveStatus::budget_exhausted: return "budget_exhausted";
  }
  return "?";
}

const StrategySet& default_strategies() {
  static const StrategySet set{
      "seven-v1",
      {Strategy::naked_single, Strategy::hidden_single, Strategy::naked_pair, Strategy::hidden_pair,
       Strategy::naked_triple, Strategy::pointing_pair, Strategy::box_line_reduction}};
  return set;
}

const StrategySet& singles_strategies() {
  static const StrategySet set{"singles-v1", {Strategy::naked_single}};
  return set;
}

const StrategySet& strategy_set(std::string_view name) {
  for (const StrategySet* s : {&default_strategies(), &singles_strategies()}) {
    if (s->version == name || s->version.substr(0, s->version.find('-')) == name) return *s;
  }
  throw ConfigError("unknown strategy set: " + std::string(name));
}

namespace {

// Units 0-8 are rows, 9-17 columns, 18-26 boxes.
std::array<std::array<int, 9>, 27> make_units() {
  std::array<std::array<int, 9>, 27> u{};
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = i * 9 + j;
      u[static_cast<std::size_t>(9 + i)][static_cast<std::size_t>(j)] = j * 9 + i;
      const int r = (i / 3) * 3 + j / 3;
      const int c = (i % 3) * 3 + j % 3;
      u[static_cast<std::size_t>(18 + i)][static_cast<std::size_t>(j)] = r * 9 + c;
    }
  }
  return u;
}

std::array<std::array<int, 20>, 81> make_peers() {
  std::array<std::array<int, 20>, 81> p{};
  for (int idx = 0; idx < 81; ++idx) {
    const int r = idx / 9, c = idx % 9;
    std::size_t n = 0;
    for (int other = 0; other < 81; ++other) {
      if (other == idx) continue;
      const int r2 = other / 9, c2 = other % 9;
      if (r2 == r || c2 == c || (r2 / 3 == r / 3 && c2 / 3 == c / 3))
        p[static_cast<std::size_t>(idx)][n++] = other;
    }
  }
  return p;
}

int box_of(int idx) { return (idx / 27) * 3 + (idx % 9) / 3; }

}  // namespace

const std::array<std::array<int, 9>, 27>& units() {
  static const auto u = make_units();
  return u;
}

const std::array<std::array<int, 20>, 81>& peers() {
  static const auto p = make_peers();
  return p;
}

Board::Board() { cands_.fill(kAllDigits); }

Board Board::parse(std::string_view text) {
  if (text.size() != kCells)
    throw ParseError("sudoku board needs 81 characters, got " + std::to_string(text.size()));
  Board b;
  for (int i = 0; i < kCells; ++i) {
    const char ch = text[static_cast<std::size_t>(i)];
    if (ch == '0' || ch == '.') continue;
    if (ch < '1' || ch > '9')
      throw ParseError(std::string("invalid sudoku character '") + ch + "' at offset " + std::to_string(i));
  }
  for (int i = 0; i < kCells; ++i) {
    const char ch = text[static_cast<std::size_t>(i)];
    if (ch == '0' || ch == '.') continue;
    if (!b.place(i, ch - '0'))
      throw InvalidBoardError("given " + std::string(1, ch) + " at (" + std::to_string(i / 9) + ", " +
                              std::to_string(i % 9) + ") repeats a digit in its row, column or box");
  }
  return b;
}

bool Board::place(int index, int digit) {
  const auto i = static_cast<std::size_t>(index);
  if (cells_[i] != 0 || !(cands_[i] & digit_bit(digit))) return false;
  cells_[i] = static_cast<std::uint8_t>(digit);
  cands_[i] = 0;
  const Mask clear = static_cast<Mask>(~digit_bit(digit));
  for (int p : peers()[i]) cands_[static_cast<std::size_t>(p)] &= clear;
  return true;
}

bool Board::eliminate(int index, int digit) {
  auto& m = cands_[static_cast<std::size_t>(index)];
  if (!(m & digit_bit(digit))) return false;
  m = static_cast<Mask>(m & ~digit_bit(digit));
  return true;
}

int Board::filled_count() const {
  return static_cast<int>(std::count_if(cells_.begin(), cells_.end(), [](std::uint8_t v) { return v != 0; }));
}

bool Board::complete() const { return filled_count() == kCells; }

bool Board::consistent() const {
  for (const auto& unit : units()) {
    Mask seen = 0;
    for (int idx : unit) {
      const int v = value(idx);
      if (!v) continue;
      if (seen & digit_bit(v)) return false;
      seen |= digit_bit(v);
    }
  }
  return true;
}

std::string Board::str() const {
  std::string out(kCells, '0');
  for (int i = 0; i < kCells; ++i) out[static_cast<std::size_t>(i)] = static_cast<char>('0' + value(i));
  return out;
}

std::vector<trace::CellValue> Board::filled_cells() const {
  std::vector<trace::CellValue> out;
  for (int i = 0; i < kCells; ++i) {
    if (value(i)) out.push_back({i / 9, i % 9, value(i)});
  }
  return out;
}

namespace {

struct PassResult {
  bool progress = false;
  std::optional<Cell> contradiction;
};

class Propagator {
 public:
  explicit Propagator(StrategyResult& r) : r_(r), b_(r.board) {}

  PassResult run(Strategy s) {
    switch (s) {
      case Strategy::naked_single: return naked_single();
      case Strategy::hidden_single: return hidden_single();
      case Strategy::naked_pair: return naked_subset(2);
      case Strategy::hidden_pair: return hidden_pair();
      case Strategy::naked_triple: return naked_subset(3);
      case Strategy::pointing_pair: return pointing_pair();
      case Strategy::box_line_reduction: return box_line_reduction();
    }
    return {};
  }

 private:
  void fill(int idx, int d) {
    b_.place(idx, d);
    r_.fills.push_back({idx / 9, idx % 9, d, AssignmentKind::deduced});
  }

  bool drop(int idx, int d, Strategy s) {
    if (!b_.empty(idx) || !b_.eliminate(idx, d)) return false;
    r_.eliminations.push_back({idx / 9, idx % 9, d, s});
    return true;
  }

  PassResult naked_single() {
    PassResult out;
    for (int idx = 0; idx < kCells; ++idx) {
      if (!b_.empty(idx)) continue;
      const Mask m = b_.candidates(idx);
      if (m == 0) {
        if (!out.contradiction) out.contradiction = Cell::at(idx);
        continue;
      }
      if (popcount(m) == 1) {
        fill(idx, std::countr_zero(static_cast<unsigned>(m)));
        out.progress = true;
      }
    }
    // a dead cell only ends the pass once nothing else can be filled
    if (out.progress) out.contradiction.reset();
    return out;
  }

  // Positions (within the unit) of empty cells that still allow d.
  unsigned places(const std::array<int, 9>& unit, int d) const {
    unsigned bits = 0;
    for (std::size_t k = 0; k < 9; ++k) {
      if (b_.empty(unit[k]) && (b_.candidates(unit[k]) & digit_bit(d))) bits |= 1u << k;
    }
    return bits;
  }

  PassResult hidden_single() {
    PassResult out;
    for (const auto& unit : units()) {
      Mask placed = 0;
      for (int idx : unit) {
        if (!b_.empty(idx)) placed |= digit_bit(b_.value(idx));
      }
      for (int d = 1; d <= 9; ++d) {
        if (placed & digit_bit(d)) continue;
        if (places(unit, d) == 0) {
          const auto first = std::find_if(unit.begin(), unit.end(), [&](int i) { return b_.empty(i); });
          out.contradiction = Cell::at(*first);
          return out;
        }
      }
    }
    for (int idx = 0; idx < kCells; ++idx) {
      if (!b_.empty(idx)) continue;
      for (int d : digits_of(b_.candidates(idx))) {
        bool forced = false;
        for (int u : {idx / 9, 9 + idx % 9, 18 + box_of(idx)}) {
          if (std::popcount(places(units()[static_cast<std::size_t>(u)], d)) == 1) {
            forced = true;
            break;
          }
        }
        if (forced) {
          fill(idx, d);
          out.progress = true;
          break;
        }
      }
    }
    return out;
  }

  // Naked pairs (size 2) and naked triples (size 3): `size` cells of one unit
  // whose candidates together cover exactly `size` digits.
  PassResult naked_subset(int size) {
    PassResult out;
    const Strategy tag = size == 2 ? Strategy::naked_pair : Strategy::naked_triple;
    for (const auto& unit : units()) {
      std::vector<int> pool;
      for (int idx : unit) {
        const int n = popcount(b_.candidates(idx));
        if (b_.empty(idx) && n >= 2 && n <= size) pool.push_back(idx);
      }
      const auto n = pool.size();
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          if (size == 2) {
            const Mask m = b_.candidates(pool[a]) | b_.candidates(pool[b]);
            if (popcount(m) == 2) out.progress |= clear_others(unit, {pool[a], pool[b]}, m, tag);
            continue;
          }
          for (std::size_t c = b + 1; c < n; ++c) {
            const Mask m = b_.candidates(pool[a]) | b_.candidates(pool[b]) | b_.candidates(pool[c]);
            if (popcount(m) == 3) out.progress |= clear_others(unit, {pool[a], pool[b], pool[c]}, m, tag);
          }
        }
      }
    }
    return out;
  }

  bool clear_others(const std::array<int, 9>& unit, std::initializer_list<int> keep, Mask digits, Strategy s) {
    bool any = false;
    for (int idx : unit) {
      if (std::find(keep.begin(), keep.end(), idx) != keep.end()) continue;
      for (int d : digits_of(digits)) any |= drop(idx, d, s);
    }
    return any;
  }

  PassResult hidden_pair() {
    PassResult out;
    for (const auto& unit : units()) {
      std::array<unsigned, 10> where{};
      for (int d = 1; d <= 9; ++d) where[static_cast<std::size_t>(d)] = places(unit, d);
      for (int d1 = 1; d1 <= 9; ++d1) {
        const unsigned w = where[static_cast<std::size_t>(d1)];
        if (std::popcount(w) != 2) continue;
        for (int d2 = d1 + 1; d2 <= 9; ++d2) {
          if (where[static_cast<std::size_t>(d2)] != w) continue;
          const Mask keep = digit_bit(d1) | digit_bit(d2);
          for (std::size_t k = 0; k < 9; ++k) {
            if (!(w & (1u << k))) continue;
            for (int d : digits_of(static_cast<Mask>(b_.candidates(unit[k]) & ~keep)))
              out.progress |= drop(unit[k], d, Strategy::hidden_pair);
          }
        }
      }
    }
    return out;
  }

  // Box -> line: a digit confined to one row or column of a box is removed
  // from the rest of that line.
  PassResult pointing_pair() {
    PassResult out;
    for (int box = 0; box < 9; ++box) {
      const auto& unit = units()[static_cast<std::size_t>(18 + box)];
      for (int d = 1; d <= 9; ++d) {
        const unsigned w = places(unit, d);
        if (std::popcount(w) < 2) continue;
        int row = -1, col = -1;
        bool same_row = true, same_col = true;
        for (std::size_t k = 0; k < 9; ++k) {
          if (!(w & (1u << k))) continue;
          const int r = unit[k] / 9, c = unit[k] % 9;
          if (row < 0) {
            row = r;
            col = c;
          }
          same_row &= r == row;
          same_col &= c == col;
        }
        if (same_row) {
          for (int idx : units()[static_cast<std::size_t>(row)]) {
            if (box_of(idx) != box) out.progress |= drop(idx, d, Strategy::pointing_pair);
          }
        }
        if (same_col) {
          for (int idx : units()[static_cast<std::size_t>(9 + col)]) {
            if (box_of(idx) != box) out.progress |= drop(idx, d, Strategy::pointing_pair);
          }
        }
      }
    }
    return out;
  }

  // Line -> box: a digit confined to one box within a row or column is
  // removed from the rest of that box.
  PassResult box_line_reduction() {
    PassResult out;
    for (int line = 0; line < 18; ++line) {
      const auto& unit = units()[static_cast<std::size_t>(line)];
      for (int d = 1; d <= 9; ++d) {
        const unsigned w = places(unit, d);
        if (std::popcount(w) < 2) continue;
        int box = -1;
        bool same_box = true;
        for (std::size_t k = 0; k < 9; ++k) {
          if (!(w & (1u << k))) continue;
          const int b = box_of(unit[k]);
          if (box < 0) box = b;
          same_box &= b == box;
        }
        if (!same_box) continue;
        for (int idx : units()[static_cast<std::size_t>(18 + box)]) {
          const bool on_line = line < 9 ? idx / 9 == line : idx % 9 == line - 9;
          if (!on_line) out.progress |= drop(idx, d, Strategy::box_line_reduction);
        }
      }
    }
    return out;
  }

  StrategyResult& r_;
  Board& b_;
};

}  // namespace

StrategyResult apply_strategies(Board board, const StrategySet& strategies) {
  StrategyResult r{std::move(board), {}, {}, std::nullopt};
  Propagator prop(r);
  for (;;) {
    bool progress = false;
    for (Strategy s : strategies.order) {
      const PassResult pass = prop.run(s);
      if (pass.contradiction) {
        r.contradiction = pass.contradiction;
        return r;
      }
      if (pass.progress) {
        progress = true;
        break;
      }
    }
    if (!progress) return r;
  }
}

namespace {

enum class Branch { found, failed, aborted };

class Solver {
 public:
  Solver(const trace::SearchBudget& budget, const StrategySet& strategies, trace::SearchTrace& out)
      : budget_(budget), strategies_(strategies), out_(out) {}

  Branch run(const Board& board) {
    StrategyResult res = apply_strategies(board, strategies_);
    for (const auto& f : res.fills) out_.push(trace::SdFill{{f.row, f.col, f.value}});
    if (res.contradiction) {
      out_.push(trace::SdNoCandidate{res.contradiction->row, res.contradiction->col});
      return Branch::failed;
    }
    if (res.board.complete()) {
      solution = res.board;
      return Branch::found;
    }
    int pick = -1;
    int best = 10;
    for (int idx = 0; idx < kCells; ++idx) {
      if (!res.board.empty(idx)) continue;
      const int n = popcount(res.board.candidates(idx));
      if (n < best) {
        best = n;
        pick = idx;
      }
    }
    const Cell cell = Cell::at(pick);
    const std::vector<int> cands = digits_of(res.board.candidates(pick));
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (budget_.max_nodes && guesses >= budget_.max_nodes) return Branch::aborted;
      ++guesses;
      if (i > 0) out_.push(trace::SdRevert{cell.row, cell.col, cands, false});
      out_.push(trace::SdGuess{cell.row, cell.col, cands, cands[i]});
      out_.push(trace::SdFill{{cell.row, cell.col, cands[i]}});
      Board child = res.board;
      child.place(pick, cands[i]);
      const Branch b = run(child);
      if (b != Branch::failed) return b;
      out_.push(trace::SdNoCandidate{cell.row, cell.col});
    }
    out_.push(trace::SdRevert{cell.row, cell.col, cands, true});
    return Branch::failed;
  }

  Board solution;
  std::uint64_t guesses = 0;

 private:
  const trace::SearchBudget& budget_;
  const StrategySet& strategies_;
  trace::SearchTrace& out_;
};

}  // namespace

SolveOutcome solve(const Board& board, const trace::SearchBudget& budget, const StrategySet& strategies) {
  SolveOutcome out;
  out.board = board;
  out.trace.game = trace::Game::sudoku;
  out.trace.push(trace::SdStart{board.filled_cells()});
  out.trace.push(trace::SdSolStart{});
  Solver solver(budget, strategies, out.trace);
  const Branch b = solver.run(board);
  out.guesses = solver.guesses;
  switch (b) {
    case Branch::found:
      out.status = SolveStatus::solved;
      out.board = solver.solution;
      out.trace.push(trace::SdSolEnd{});
      break;
    case Branch::failed:
      out.status = SolveStatus::dead;
      out.trace.push(trace::SdSolEnd{});
      break;
    case Branch::aborted:
      out.status = SolveStatus::budget_exhausted;
      break;
  }
  return out;
}

namespace {

void count_rec(const Board& b, int limit, Board* first, int& found) {
  int pick = -1;
  int best = 10;
  for (int idx = 0; idx < kCells; ++idx) {
    if (!b.empty(idx)) continue;
    const int n = popcount(b.candidates(idx));
    if (n < best) {
      best = n;
      pick = idx;
      if (n == 0) return;
    }
  }
  if (pick < 0) {
    if (++found == 1 && first) *first = b;
    return;
  }
  for (int d : digits_of(b.candidates(pick))) {
    Board child = b;
    child.place(pick, d);
    count_rec(child, limit, first, found);
    if (found >= limit) return;
  }
}

}  // namespace

int count_solutions(const Board& board, int limit, Board* first) {
  int found = 0;
  if (limit <= 0) return 0;
  count_rec(board, limit, first, found);
  return found;
}

Board ease_board(const Board& board, int extra_fills, std::uint64_t seed) {
  std::vector<int> empties;
  for (int i = 0; i < kCells; ++i) {
    if (board.empty(i)) empties.push_back(i);
  }
  if (extra_fills < 0 || static_cast<std::size_t>(extra_fills) > empties.size())
    throw DomainError("ease_board: extra_fills must be in [0, " + std::to_string(empties.size()) + "]");
  Board solution;
  if (count_solutions(board, 1, &solution) == 0) throw InvalidBoardError("ease_board: board has no solution");
  std::mt19937_64 rng(splitmix64(seed));
  Board out = board;
  for (std::size_t k = 0; k < static_cast<std::size_t>(extra_fills); ++k) {
    const auto j = uniform_int<std::size_t>(rng, k, empties.size() - 1);
    std::swap(empties[k], empties[j]);
    out.place(empties[k], solution.value(empties[k]));
  }
  return out;
}

ReplayResult replay(const Board& start, const trace::SearchTrace& trace) {
  ReplayResult r{start, false, {}};
  struct Frame {
    Cell cell;
    Board before;
  };
  std::vector<Frame> stack;
  auto where = [](int row, int col) {
    return "(" + std::to_string(row) + ", " + std::to_string(col) + ")";
  };
  auto in_range = [](int row, int col) { return row >= 0 && row < 9 && col >= 0 && col < 9; };
  for (const auto& e : trace.events) {
    if (r.ended && !std::holds_alternative<trace::SdSolEnd>(e)) {
      r.problems.push_back("event after SOL_END");
      continue;
    }
    if (const auto* f = std::get_if<trace::SdFill>(&e)) {
      if (!in_range(f->cell.row, f->cell.col) || f->cell.value < 1 || f->cell.value > 9) {
        r.problems.push_back("fill out of range");
        continue;
      }
      const int idx = f->cell.row * 9 + f->cell.col;
      if (!r.board.empty(idx)) {
        r.problems.push_back("fill of occupied cell " + where(f->cell.row, f->cell.col));
      } else if (!r.board.place(idx, f->cell.value)) {
        r.problems.push_back("fill " + where(f->cell.row, f->cell.col) + " = " + std::to_string(f->cell.value) +
                             " conflicts with a peer");
      }
    } else if (const auto* g = std::get_if<trace::SdGuess>(&e)) {
      if (!in_range(g->row, g->col)) {
        r.problems.push_back("guess out of range");
        continue;
      }
      if (std::find(g->candidates.begin(), g->candidates.end(), g->value) == g->candidates.end())
        r.problems.push_back("guess value not among its candidates at " + where(g->row, g->col));
      stack.push_back({{g->row, g->col}, r.board});
    } else if (const auto* rv = std::get_if<trace::SdRevert>(&e)) {
      auto it = std::find_if(stack.rbegin(), stack.rend(),
                             [&](const Frame& fr) { return fr.cell == Cell{rv->row, rv->col}; });
      if (it == stack.rend()) {
        r.problems.push_back("revert without open guess at " + where(rv->row, rv->col));
        continue;
      }
      r.board = it->before;
      stack.erase(std::prev(it.base()), stack.end());
    } else if (std::holds_alternative<trace::SdSolEnd>(e)) {
      r.ended = true;
    }
  }
  return r;
}

}  // namespace searchlab::sudoku
