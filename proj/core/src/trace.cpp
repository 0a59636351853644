#include "searchlab/trace.hpp"

#include <algorithm>

#include "searchlab/error.hpp"

namespace searchlab::trace {

const char* to_string(Game g) { return g == Game::sudoku ? "sudoku" : "countdown"; }

const char* to_string(Mode m) {
  switch (m) {
    case Mode::backtrack:
      return "backtrack";
    case Mode::direct:
      return "direct";
    case Mode::think:
      return "think";
  }
  return "?";
}

Game game_from_string(std::string_view s) {
  if (s == "countdown") return Game::countdown;
  if (s == "sudoku") return Game::sudoku;
  throw ConfigError("unknown game: " + std::string(s));
}

Mode mode_from_string(std::string_view s) {
  if (s == "backtrack") return Mode::backtrack;
  if (s == "direct") return Mode::direct;
  if (s == "think") return Mode::think;
  throw ConfigError("unknown trace mode: " + std::string(s));
}

std::string Dialect::str() const { return std::string(to_string(game)) + "-" + to_string(mode); }

Dialect Dialect::parse(std::string_view s) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) throw ConfigError("dialect must look like game-mode: " + std::string(s));
  Dialect d{game_from_string(s.substr(0, dash)), mode_from_string(s.substr(dash + 1))};
  if (d.mode == Mode::think && d.game != Game::countdown)
    throw ConfigError("think mode is only defined for countdown");
  return d;
}

std::string node_id_str(const NodeId& id) {
  std::string out = "#";
  for (std::size_t i = 0; i < id.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(id[i]);
  }
  return out;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

EventKind kind(const Event& e) {
  return std::visit(overloaded{
                        [](const CdState&) { return EventKind::state; },
                        [](const CdExplore&) { return EventKind::explore; },
                        [](const CdGenerated&) { return EventKind::generated; },
                        [](const CdMoveTo&) { return EventKind::move_to; },
                        [](const CdDeadEnd&) { return EventKind::dead_end; },
                        [](const CdPartialGoal&) { return EventKind::partial_goal; },
                        [](const CdGoal&) { return EventKind::goal; },
                        [](const SdStart&) { return EventKind::start; },
                        [](const SdSolStart&) { return EventKind::sol_start; },
                        [](const SdFill&) { return EventKind::fill; },
                        [](const SdGuess&) { return EventKind::guess; },
                        [](const SdNoCandidate&) { return EventKind::no_candidate; },
                        [](const SdRevert& r) { return r.exhausted ? EventKind::revert_exhausted : EventKind::revert; },
                        [](const SdSolEnd&) { return EventKind::sol_end; },
                    },
                    e);
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::state: return "state";
    case EventKind::explore: return "explore";
    case EventKind::generated: return "generated";
    case EventKind::move_to: return "move_to";
    case EventKind::dead_end: return "dead_end";
    case EventKind::partial_goal: return "partial_goal";
    case EventKind::goal: return "goal";
    case EventKind::start: return "start";
    case EventKind::sol_start: return "sol_start";
    case EventKind::fill: return "fill";
    case EventKind::guess: return "guess";
    case EventKind::no_candidate: return "no_candidate";
    case EventKind::revert: return "revert";
    case EventKind::revert_exhausted: return "revert_exhausted";
    case EventKind::sol_end: return "sol_end";
  }
  return "?";
}

Game game_of(const Event& e) { return e.index() <= 6 ? Game::countdown : Game::sudoku; }

std::size_t SearchTrace::count(EventKind k) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [k](const Event& e) { return kind(e) == k; }));
}

}  // namespace searchlab::trace
