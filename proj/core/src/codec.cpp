#include "searchlab/codec.hpp"

#include <algorithm>
#include <map>

#include "searchlab/error.hpp"

namespace searchlab::codec {

using countdown::Number;
using countdown::Operation;
using countdown::OpKind;
using trace::Event;
using trace::Game;
using trace::Mode;
using trace::NodeId;

namespace {

// ---------------------------------------------------------------- writing

void put_list(std::string& out, const std::vector<Number>& nums) {
  out += '[';
  for (std::size_t i = 0; i < nums.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(nums[i]);
  }
  out += ']';
}

void put_ints(std::string& out, const std::vector<int>& nums) {
  out += '[';
  for (std::size_t i = 0; i < nums.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(nums[i]);
  }
  out += ']';
}

void put_ops(std::string& out, const std::vector<Operation>& ops) {
  out += '[';
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (i) out += ", ";
    out += '\'';
    out += ops[i].str();
    out += '\'';
  }
  out += ']';
}

void put_cell(std::string& out, int row, int col) {
  out += '(';
  out += std::to_string(row);
  out += ", ";
  out += std::to_string(col);
  out += ')';
}

std::string cd_line(const Event& e, Mode mode) {
  std::string out;
  if (const auto* s = std::get_if<trace::CdState>(&e)) {
    out = "Current State: " + std::to_string(s->target) + ":";
    put_list(out, s->numbers);
    out += ", Operations: ";
    put_ops(out, s->operations);
  } else if (const auto* x = std::get_if<trace::CdExplore>(&e)) {
    out = "Exploring Operation: " + x->op.str() + ", Resulting Numbers: ";
    put_list(out, x->resulting);
  } else if (const auto* g = std::get_if<trace::CdGenerated>(&e)) {
    if (mode == Mode::direct) {
      if (g->node.size() != 1) throw CodecError("direct traces need sequential node numbers");
      out = "Generated Node #" + std::to_string(g->node[0]) + ": ";
      put_list(out, g->numbers);
      out += " from Operation: " + g->op.str();
    } else {
      out = "Generated Node " + trace::node_id_str(g->node) + ": " + std::to_string(g->target) + ":";
      put_list(out, g->numbers);
      out += " Operation: " + g->op.str();
    }
  } else if (const auto* m = std::get_if<trace::CdMoveTo>(&e)) {
    if (mode == Mode::direct) throw CodecError("direct traces have no moves");
    out = "Moving to Node " + trace::node_id_str(m->node);
  } else if (const auto* d = std::get_if<trace::CdDeadEnd>(&e)) {
    out = std::to_string(d->value) + "," + std::to_string(d->goal) + " unequal";
    if (d->final_phase) out += ": No Solution";
  } else if (const auto* p = std::get_if<trace::CdPartialGoal>(&e)) {
    out = std::to_string(p->value) + "," + std::to_string(p->goal) + " equal";
  } else if (const auto* gl = std::get_if<trace::CdGoal>(&e)) {
    out = std::to_string(gl->value) + "," + std::to_string(gl->target) + " equal: Goal Reached";
  } else {
    throw CodecError("sudoku event in a countdown trace");
  }
  out += '\n';
  return out;
}

std::string sd_field(const Event& e) {
  std::string out;
  if (const auto* f = std::get_if<trace::SdFill>(&e)) {
    put_cell(out, f->cell.row, f->cell.col);
    out += " = " + std::to_string(f->cell.value);
  } else if (const auto* g = std::get_if<trace::SdGuess>(&e)) {
    out = "GUESS: ";
    put_cell(out, g->row, g->col);
    out += ' ';
    put_ints(out, g->candidates);
    out += " = " + std::to_string(g->value);
  } else if (const auto* n = std::get_if<trace::SdNoCandidate>(&e)) {
    out = "NO_CANDIDATE: ";
    put_cell(out, n->row, n->col);
  } else if (const auto* r = std::get_if<trace::SdRevert>(&e)) {
    out = "REVERT: ";
    put_cell(out, r->row, r->col);
    out += ' ';
    put_ints(out, r->candidates);
    out += r->exhausted ? " = NO_CANDIDATE" : " = NONE";
  } else {
    throw CodecError(std::string("unexpected ") + trace::to_string(trace::kind(e)) + " event in a sudoku trace body");
  }
  return out;
}

std::string sd_text(const SearchTrace& t) {
  const auto& ev = t.events;
  if (ev.size() < 2 || !std::holds_alternative<trace::SdStart>(ev[0]) ||
      !std::holds_alternative<trace::SdSolStart>(ev[1]))
    throw CodecError("sudoku traces start with START and SOL_START");
  std::string out = "START";
  const auto& givens = std::get<trace::SdStart>(ev[0]).givens;
  for (std::size_t i = 0; i < givens.size(); ++i) {
    out += i ? '\t' : ' ';
    put_cell(out, givens[i].row, givens[i].col);
    out += " = " + std::to_string(givens[i].value);
  }
  out += "\tsolving\nSOL_START";
  bool ended = false;
  for (std::size_t i = 2; i < ev.size(); ++i) {
    if (ended) throw CodecError("events after SOL_END");
    if (std::holds_alternative<trace::SdSolEnd>(ev[i])) {
      ended = true;
      continue;
    }
    out += i == 2 ? ' ' : '\t';
    out += sd_field(ev[i]);
  }
  if (ended) out += " SOL_END";
  out += '\n';
  return out;
}

// ---------------------------------------------------------------- reading

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ == s_.size(); }
  std::string_view rest() const { return s_.substr(pos_); }

  bool lit(std::string_view w) {
    if (s_.substr(pos_, w.size()) != w) return false;
    pos_ += w.size();
    return true;
  }

  bool integer(Number& v) {
    std::size_t i = pos_;
    Number acc = 0;
    while (i < s_.size() && s_[i] >= '0' && s_[i] <= '9') {
      if (i - pos_ >= 17) return false;
      acc = acc * 10 + (s_[i] - '0');
      ++i;
    }
    if (i == pos_) return false;
    v = acc;
    pos_ = i;
    return true;
  }

  bool small(int& v) {
    Number n = 0;
    if (!integer(n) || n > 1000) return false;
    v = static_cast<int>(n);
    return true;
  }

  bool list(std::vector<Number>& out) {
    out.clear();
    if (!lit("[")) return false;
    if (lit("]")) return true;
    do {
      Number v = 0;
      if (!integer(v)) return false;
      out.push_back(v);
    } while (lit(", "));
    return lit("]");
  }

  bool ints(std::vector<int>& out) {
    out.clear();
    if (!lit("[")) return false;
    if (lit("]")) return true;
    do {
      int v = 0;
      if (!small(v)) return false;
      out.push_back(v);
    } while (lit(", "));
    return lit("]");
  }

  bool op(Operation& o) {
    if (!integer(o.left)) return false;
    if (done()) return false;
    const char c = s_[pos_];
    if (c != '+' && c != '-' && c != '*' && c != '/') return false;
    o.op = static_cast<OpKind>(c);
    ++pos_;
    return integer(o.right) && lit("=") && integer(o.result);
  }

  bool ops(std::vector<Operation>& out) {
    out.clear();
    if (!lit("[")) return false;
    if (lit("]")) return true;
    do {
      Operation o;
      if (!lit("'") || !op(o) || !lit("'")) return false;
      out.push_back(o);
    } while (lit(", "));
    return lit("]");
  }

  bool node(NodeId& id) {
    id.clear();
    if (!lit("#")) return false;
    do {
      Number v = 0;
      if (!integer(v) || v > 1000000) return false;
      id.push_back(static_cast<std::uint32_t>(v));
    } while (lit(","));
    return true;
  }

  bool cell(int& row, int& col) { return lit("(") && small(row) && lit(", ") && small(col) && lit(")"); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::size_t root_tail(std::size_t printed) {
  return printed == countdown::kStackedCount ? printed - countdown::kStackedPartialIndex : 0;
}

// Tail length is not printed; it is implied by the phase. `tail` is the
// current phase's value.
std::optional<Event> cd_parse_line(std::string_view line, Mode mode, std::size_t tail) {
  Cursor c(line);
  if (c.lit("Current State: ")) {
    trace::CdState s;
    if (c.integer(s.target) && c.lit(":") && c.list(s.numbers) && c.lit(", Operations: ") && c.ops(s.operations) &&
        c.done()) {
      s.tail = std::min(tail, s.numbers.size());
      return s;
    }
    return std::nullopt;
  }
  if (c.lit("Exploring Operation: ")) {
    trace::CdExplore x;
    if (c.op(x.op) && c.lit(", Resulting Numbers: ") && c.list(x.resulting) && c.done()) return x;
    return std::nullopt;
  }
  if (c.lit("Generated Node ")) {
    trace::CdGenerated g;
    if (mode == Mode::direct) {
      Number k = 0;
      if (c.lit("#") && c.integer(k) && k <= 1000000 && c.lit(": ") && c.list(g.numbers) &&
          c.lit(" from Operation: ") && c.op(g.op) && c.done()) {
        g.node = {static_cast<std::uint32_t>(k)};
        return g;
      }
      return std::nullopt;
    }
    if (c.node(g.node) && c.lit(": ") && c.integer(g.target) && c.lit(":") && c.list(g.numbers) &&
        c.lit(" Operation: ") && c.op(g.op) && c.done())
      return g;
    return std::nullopt;
  }
  if (c.lit("Moving to Node ")) {
    trace::CdMoveTo m;
    if (c.node(m.node) && c.done()) return m;
    return std::nullopt;
  }
  Number v = 0, g = 0;
  if (!(c.integer(v) && c.lit(",") && c.integer(g))) return std::nullopt;
  if (c.lit(" unequal")) {
    if (c.done()) return trace::CdDeadEnd{v, g, false};
    if (c.lit(": No Solution") && c.done()) return trace::CdDeadEnd{v, g, true};
    return std::nullopt;
  }
  if (c.lit(" equal")) {
    if (c.done()) return trace::CdPartialGoal{v, g};
    if (c.lit(": Goal Reached") && c.done()) return trace::CdGoal{v, g};
  }
  return std::nullopt;
}

bool cd_prefix_ok(std::string_view line) {
  static constexpr std::string_view kHeads[] = {"Current State: ", "Exploring Operation: ", "Generated Node ",
                                                "Moving to Node "};
  for (auto h : kHeads) {
    if (line.size() <= h.size() ? h.substr(0, line.size()) == line : line.substr(0, h.size()) == h) return true;
  }
  return !line.empty() && line[0] >= '0' && line[0] <= '9';
}

// Only lines whose last token is a closing bracket or a fixed phrase can be
// recognised as complete without their newline.
bool cd_line_closed(std::string_view line) {
  const auto ends = [&](std::string_view e) { return line.size() >= e.size() && line.substr(line.size() - e.size()) == e; };
  if (ends("Goal Reached") || ends("No Solution")) return true;
  return ends("]") && (line.find("Numbers: [") != std::string_view::npos ||
                       line.find("Operations: [") != std::string_view::npos);
}

bool multiset_take(std::vector<Number>& pool, Number v) {
  auto it = std::find(pool.begin(), pool.end(), v);
  if (it == pool.end()) return false;
  pool.erase(it);
  return true;
}

std::vector<Number> final_results(Number a, Number b) {
  std::vector<Number> out;
  for (OpKind k : countdown::kAllOps) {
    if (auto o = countdown::combine(a, b, k)) out.push_back(o->result);
  }
  return out;
}

class CdChecker {
 public:
  CdChecker(Mode mode, ValidationReport& report) : mode_(mode), report_(report) {}

  std::size_t tail() const { return phase_start_ ? pending_tail_ : tail_; }
  Number target() const { return cur_.target; }
  void set_root_tail(std::size_t printed) {
    if (!have_state_) pending_tail_ = root_tail(printed);
  }

  void feed(const Event& e, std::size_t line) {
    line_ = line;
    if (finished_) flag(ViolationKind::illegal_transition, "content after the goal line");
    std::visit([this](const auto& ev) { on(ev); }, e);
  }

 private:
  void flag(ViolationKind k, std::string msg) { report_.violations.push_back({line_, k, std::move(msg)}); }

  bool open_explore() const { return await_terminal_ || child_pending_; }

  void on(const trace::CdState& s) {
    if (open_explore()) flag(ViolationKind::illegal_transition, "state line before the explored move was finished");
    await_terminal_ = child_pending_ = false;
    countdown::State st;
    st.target = s.target;
    const std::size_t tail = std::min(s.tail, s.numbers.size());
    st.numbers.assign(s.numbers.begin(), s.numbers.end() - static_cast<std::ptrdiff_t>(tail));
    st.tail.assign(s.numbers.end() - static_cast<std::ptrdiff_t>(tail), s.numbers.end());
    st.operations = s.operations;
    const bool new_phase = phase_start_;
    if (new_phase && s.tail != pending_tail_)
      flag(ViolationKind::illegal_transition, "state tail does not match the phase");
    if (!new_phase && s.tail != tail_) flag(ViolationKind::illegal_transition, "state tail changed within a phase");
    if (expect_) {
      if (!(st == *expect_)) flag(ViolationKind::illegal_transition, "state does not match the node it follows");
      expect_.reset();
    } else if (!new_phase) {
      flag(ViolationKind::illegal_transition,
           mode_ == Mode::direct ? "state line without a generated node" : "state line without a move");
    } else if (!st.operations.empty() || st.numbers.size() != countdown::kStandardCount) {
      flag(ViolationKind::illegal_transition, "root state must have four numbers and no operations");
    }
    if (new_phase) {
      nodes_.clear();
      cur_id_ = NodeId{0};
      nodes_[cur_id_] = st;
      tail_ = s.tail;
      next_direct_ = 2;
      phase_start_ = false;
    }
    cur_ = std::move(st);
    have_state_ = true;
    explored_any_ = false;
    terminal_after_state_ = false;
  }

  void on(const trace::CdExplore& x) {
    if (!have_state_) {
      flag(ViolationKind::illegal_transition, "explore line before any state");
      return;
    }
    if (expect_) flag(ViolationKind::illegal_transition, "explore line where a state line was expected");
    if (open_explore()) flag(ViolationKind::illegal_transition, "previous explored move was not finished");
    await_terminal_ = child_pending_ = false;
    if (!x.op.arithmetic_ok()) flag(ViolationKind::arithmetic, "wrong arithmetic: " + x.op.str());
    std::vector<Number> pool = cur_.numbers;
    if (!multiset_take(pool, x.op.left) || !multiset_take(pool, x.op.right)) {
      flag(ViolationKind::illegal_transition, "operands not available: " + x.op.str());
      return;
    }
    pool.push_back(x.op.result);
    const std::size_t tail = cur_.tail.size();
    if (x.resulting.size() != pool.size() + tail ||
        !std::equal(cur_.tail.begin(), cur_.tail.end(), x.resulting.end() - static_cast<std::ptrdiff_t>(tail))) {
      flag(ViolationKind::illegal_transition, "resulting numbers do not follow from the operation");
      return;
    }
    std::vector<Number> group(x.resulting.begin(), x.resulting.end() - static_cast<std::ptrdiff_t>(tail));
    std::vector<Number> a = group, b = pool;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) {
      flag(ViolationKind::illegal_transition, "resulting numbers do not follow from the operation");
      return;
    }
    countdown::State child{cur_.target, std::move(group), cur_.tail, cur_.operations};
    child.operations.push_back(x.op);
    explored_ = std::move(child);
    explored_any_ = true;
    if (explored_.is_leaf())
      await_terminal_ = true;
    else
      child_pending_ = true;
  }

  void on(const trace::CdGenerated& g) {
    if (!child_pending_) {
      flag(ViolationKind::illegal_transition, "generated node without an explored move");
      return;
    }
    child_pending_ = false;
    if (!(g.op == explored_.operations.back()) || g.numbers != explored_.printed())
      flag(ViolationKind::illegal_transition, "generated node does not match the explored move");
    if (mode_ == Mode::direct) {
      if (g.node.size() != 1 || g.node[0] != next_direct_)
        flag(ViolationKind::illegal_transition, "direct node numbers must count up from #2");
      ++next_direct_;
      expect_ = explored_;
      return;
    }
    if (g.target != cur_.target) flag(ViolationKind::illegal_transition, "generated node has the wrong target");
    if (g.node.size() != cur_id_.size() + 1 || !std::equal(cur_id_.begin(), cur_id_.end(), g.node.begin()))
      flag(ViolationKind::illegal_transition, "generated node id is not a child of " + trace::node_id_str(cur_id_));
    nodes_[g.node] = explored_;
  }

  void on(const trace::CdMoveTo& m) {
    if (open_explore()) flag(ViolationKind::illegal_transition, "move before the explored move was finished");
    await_terminal_ = child_pending_ = false;
    if (mode_ == Mode::direct) {
      flag(ViolationKind::illegal_transition, "direct traces have no moves");
      return;
    }
    auto it = nodes_.find(m.node);
    if (it == nodes_.end()) {
      flag(ViolationKind::illegal_transition, "move to unknown node " + trace::node_id_str(m.node));
      expect_.reset();
      return;
    }
    cur_id_ = m.node;
    expect_ = it->second;
  }

  // Checks a terminal value. Returns the state it completes, if any.
  std::optional<countdown::State> terminal(Number value, bool success) {
    if (await_terminal_) {
      await_terminal_ = false;
      if (explored_.numbers.front() != value)
        flag(ViolationKind::illegal_transition, "terminal value differs from the explored result");
      return explored_;
    }
    if (mode_ == Mode::think && have_state_ && !explored_any_ && !terminal_after_state_ && cur_.numbers.size() == 2) {
      terminal_after_state_ = true;
      const auto results = final_results(cur_.numbers[0], cur_.numbers[1]);
      if (std::find(results.begin(), results.end(), value) == results.end())
        flag(ViolationKind::arithmetic, std::to_string(value) + " is not reachable from the last two numbers");
      countdown::State leaf{cur_.target, {value}, cur_.tail, cur_.operations};
      if (success) {
        for (OpKind k : countdown::kAllOps) {
          auto o = countdown::combine(cur_.numbers[0], cur_.numbers[1], k);
          if (o && o->result == value) {
            leaf.operations.push_back(*o);
            break;
          }
        }
      }
      return leaf;
    }
    flag(ViolationKind::illegal_transition, "terminal line without an explored leaf");
    return std::nullopt;
  }

  void on(const trace::CdDeadEnd& d) {
    auto leaf = terminal(d.value, false);
    if (!leaf) return;
    if (d.goal != leaf->goal()) flag(ViolationKind::illegal_transition, "dead end names the wrong goal");
    if (d.value == d.goal) flag(ViolationKind::arithmetic, "dead end reports equal numbers");
    if (d.final_phase != leaf->final_phase())
      flag(ViolationKind::grammar, "dead-end form does not match the phase");
  }

  void on(const trace::CdPartialGoal& p) {
    auto leaf = terminal(p.value, true);
    if (!leaf) return;
    if (leaf->final_phase()) flag(ViolationKind::illegal_transition, "partial goal outside the first phase");
    if (p.goal != leaf->goal() || p.value != p.goal)
      flag(ViolationKind::arithmetic, "partial goal value does not equal the goal");
    expect_ = countdown::next_phase(*leaf);
    phase_start_ = true;
    pending_tail_ = 0;
  }

  void on(const trace::CdGoal& g) {
    report_.goal_present = true;
    auto leaf = terminal(g.value, true);
    if (!leaf) return;
    if (!leaf->final_phase()) flag(ViolationKind::illegal_transition, "goal reached before the final phase");
    if (g.target != leaf->target || g.value != g.target)
      flag(ViolationKind::arithmetic, "goal value does not equal the target");
    finished_ = true;
  }

  template <typename T>
  void on(const T&) {
    flag(ViolationKind::grammar, "sudoku event in a countdown trace");
  }

  Mode mode_;
  ValidationReport& report_;
  std::size_t line_ = 0;
  bool have_state_ = false;
  bool phase_start_ = true;
  std::size_t pending_tail_ = 0;
  std::size_t tail_ = 0;
  countdown::State cur_;
  NodeId cur_id_{0};
  std::map<NodeId, countdown::State> nodes_;
  std::optional<countdown::State> expect_;
  countdown::State explored_;
  bool explored_any_ = false;
  bool terminal_after_state_ = false;
  bool await_terminal_ = false;
  bool child_pending_ = false;
  bool finished_ = false;
  std::uint32_t next_direct_ = 2;
};

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto at = text.find(sep, start);
    if (at == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, at - start));
    start = at + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

Parsed parse_countdown(std::string_view text, Mode mode) {
  Parsed out;
  out.trace.game = Game::countdown;
  auto& rep = out.report;
  if (text.empty()) return out;
  rep.truncated = text.back() != '\n';
  auto lines = split(text, '\n');
  if (!rep.truncated) lines.pop_back();
  CdChecker check(mode, rep);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool last_cut = rep.truncated && i + 1 == lines.size();
    const std::string_view line = lines[i];
    if (last_cut && !cd_line_closed(line)) {
      if (!cd_prefix_ok(line))
        rep.violations.push_back({i + 1, ViolationKind::grammar, "unrecognised line: " + std::string(line.substr(0, 80))});
      break;
    }
    if (line.substr(0, 15) == "Current State: ") {
      // Peek at the printed numbers so the root's tail is known before parsing.
      auto open = line.find('['), close = line.find(']');
      if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
        const auto inner = line.substr(open + 1, close - open - 1);
        check.set_root_tail(inner.empty() ? 0 : static_cast<std::size_t>(std::count(inner.begin(), inner.end(), ',')) + 1);
      }
    }
    auto ev = cd_parse_line(line, mode, check.tail());
    if (!ev) {
      rep.violations.push_back({i + 1, ViolationKind::grammar, "unrecognised line: " + std::string(line.substr(0, 80))});
      continue;
    }
    if (auto* g = std::get_if<trace::CdGenerated>(&*ev); g && mode == Mode::direct) g->target = check.target();
    check.feed(*ev, i + 1);
    out.trace.events.push_back(std::move(*ev));
  }
  return out;
}

std::optional<Event> sd_parse_field(std::string_view f) {
  Cursor c(f);
  int row = 0, col = 0;
  if (c.lit("GUESS: ")) {
    trace::SdGuess g;
    if (c.cell(g.row, g.col) && c.lit(" ") && c.ints(g.candidates) && c.lit(" = ") && c.small(g.value) && c.done())
      return g;
    return std::nullopt;
  }
  if (c.lit("NO_CANDIDATE: ") || c.lit("NO CANDIDATE: ")) {
    if (c.cell(row, col) && c.done()) return trace::SdNoCandidate{row, col};
    return std::nullopt;
  }
  if (c.lit("REVERT: ") || c.lit("revert: ")) {
    trace::SdRevert r;
    if (!(c.cell(r.row, r.col) && c.lit(" ") && c.ints(r.candidates) && c.lit(" = "))) return std::nullopt;
    if (c.lit("NONE") && c.done()) return r;
    if ((c.lit("NO_CANDIDATE") || c.lit("NO CANDIDATE")) && c.done()) {
      r.exhausted = true;
      return r;
    }
    return std::nullopt;
  }
  int v = 0;
  if (c.cell(row, col) && c.lit(" = ") && c.small(v) && c.done()) return trace::SdFill{{row, col, v}};
  return std::nullopt;
}

bool sd_prefix_ok(std::string_view f) {
  static constexpr std::string_view kHeads[] = {"GUESS: ", "NO_CANDIDATE: ", "REVERT: ", "SOL_END", "SOL_START",
                                                "START", "solving", "("};
  for (auto h : kHeads) {
    if (f.size() <= h.size() ? h.substr(0, f.size()) == f : f.substr(0, h.size()) == h) return true;
  }
  return f.empty();
}

bool strip_prefix(std::string_view& s, std::string_view p) {
  if (s.substr(0, p.size()) != p) return false;
  s.remove_prefix(p.size());
  return true;
}

bool strip_suffix(std::string_view& s, std::string_view p) {
  if (s.size() < p.size() || s.substr(s.size() - p.size()) != p) return false;
  s.remove_suffix(p.size());
  return true;
}

class SdChecker {
 public:
  SdChecker(Mode mode, ValidationReport& report) : mode_(mode), report_(report) {}

  void start(const std::vector<trace::CellValue>& givens) {
    for (const auto& g : givens) {
      if (g.row < 0 || g.row > 8 || g.col < 0 || g.col > 8 || g.value < 1 || g.value > 9 ||
          !board_.empty(g.row * 9 + g.col) || !board_.place(g.row * 9 + g.col, g.value))
        flag(1, ViolationKind::illegal_transition, "given conflicts with the board");
    }
  }

  void feed(const Event& e, std::size_t field) {
    const std::string where = "field " + std::to_string(field) + ": ";
    if (ended_) flag(2, ViolationKind::illegal_transition, where + "content after SOL_END");
    if (guess_open_) {
      const auto* f = std::get_if<trace::SdFill>(&e);
      if (!f || f->cell.row != last_guess_.row || f->cell.col != last_guess_.col ||
          f->cell.value != last_guess_.value)
        flag(2, ViolationKind::illegal_transition, where + "a guess must be followed by its fill");
      guess_open_ = false;
    }
    if (const auto* f = std::get_if<trace::SdFill>(&e)) {
      const auto& c = f->cell;
      if (c.row < 0 || c.row > 8 || c.col < 0 || c.col > 8 || c.value < 1 || c.value > 9) {
        flag(2, ViolationKind::grammar, where + "cell out of range");
      } else if (!board_.empty(c.row * 9 + c.col)) {
        flag(2, ViolationKind::illegal_transition, where + "fill of an occupied cell");
      } else if (!board_.place(c.row * 9 + c.col, c.value)) {
        flag(2, ViolationKind::arithmetic, where + "fill conflicts with a peer");
      }
      return;
    }
    if (mode_ == Mode::direct && !std::holds_alternative<trace::SdSolEnd>(e)) {
      flag(2, ViolationKind::illegal_transition, where + "direct traces only contain fills");
      return;
    }
    if (const auto* g = std::get_if<trace::SdGuess>(&e)) {
      if (g->row < 0 || g->row > 8 || g->col < 0 || g->col > 8) {
        flag(2, ViolationKind::grammar, where + "cell out of range");
        return;
      }
      const int idx = g->row * 9 + g->col;
      if (!board_.empty(idx)) flag(2, ViolationKind::illegal_transition, where + "guess on an occupied cell");
      if (std::find(g->candidates.begin(), g->candidates.end(), g->value) == g->candidates.end())
        flag(2, ViolationKind::illegal_transition, where + "guess value is not among its candidates");
      for (int v : g->candidates) {
        if (v < 1 || v > 9 || !(board_.candidates(idx) & sudoku::digit_bit(v))) {
          flag(2, ViolationKind::illegal_transition, where + "guess lists an impossible candidate");
          break;
        }
      }
      stack_.push_back({g->row, g->col, board_});
      guess_open_ = true;
      last_guess_ = *g;
    } else if (const auto* r = std::get_if<trace::SdRevert>(&e)) {
      auto it = std::find_if(stack_.rbegin(), stack_.rend(),
                             [&](const Frame& fr) { return fr.row == r->row && fr.col == r->col; });
      if (it == stack_.rend()) {
        flag(2, ViolationKind::illegal_transition, where + "revert without an open guess");
        return;
      }
      board_ = it->before;
      stack_.erase(std::prev(it.base()), stack_.end());
    } else if (std::holds_alternative<trace::SdSolEnd>(e)) {
      ended_ = true;
      report_.goal_present = board_.solved();
    }
  }

 private:
  struct Frame {
    int row;
    int col;
    sudoku::Board before;
  };

  void flag(std::size_t line, ViolationKind k, std::string msg) {
    report_.violations.push_back({line, k, std::move(msg)});
  }

  Mode mode_;
  ValidationReport& report_;
  sudoku::Board board_;
  std::vector<Frame> stack_;
  bool guess_open_ = false;
  trace::SdGuess last_guess_;
  bool ended_ = false;
};

Parsed parse_sudoku(std::string_view text, Mode mode) {
  Parsed out;
  out.trace.game = Game::sudoku;
  auto& rep = out.report;
  if (text.empty()) return out;
  rep.truncated = text.back() != '\n';
  auto lines = split(text, '\n');
  if (!rep.truncated) lines.pop_back();
  auto bad = [&rep](std::size_t line, std::string msg) {
    rep.violations.push_back({line, ViolationKind::grammar, std::move(msg)});
  };
  auto cut = [&](std::size_t line_index, bool last_field) {
    return rep.truncated && line_index + 1 == lines.size() && last_field;
  };
  SdChecker check(mode, rep);

  // START line
  {
    auto fields = split(lines[0], '\t');
    std::string_view head = fields[0];
    if (!strip_prefix(head, "START")) {
      if (!(cut(0, fields.size() == 1) && sd_prefix_ok(head))) bad(1, "first line must begin with START");
      return out;
    }
    fields[0] = head;
    trace::SdStart start;
    bool solving = false;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto f = trim(fields[i]);
      const bool last = i + 1 == fields.size();
      if (f.empty() && i == 0) continue;
      if (f == "solving" && last) {
        solving = true;
        break;
      }
      Cursor c(f);
      trace::CellValue cv;
      if (c.cell(cv.row, cv.col) && c.lit(" = ") && c.small(cv.value) && c.done()) {
        start.givens.push_back(cv);
      } else if (!(cut(0, last) && sd_prefix_ok(f))) {
        bad(1, "field " + std::to_string(i + 1) + ": unrecognised given");
      }
    }
    if (!solving) {
      if (rep.truncated && lines.size() == 1) return out;
      bad(1, "START line must end with solving");
    }
    check.start(start.givens);
    out.trace.push(std::move(start));
  }
  if (lines.size() < 2) return out;

  // Solution line
  {
    auto fields = split(lines[1], '\t');
    std::string_view head = fields[0];
    if (!strip_prefix(head, "SOL_START") && !strip_prefix(head, "SOL START")) {
      if (!(cut(1, fields.size() == 1) && sd_prefix_ok(head))) bad(2, "second line must begin with SOL_START");
      return out;
    }
    fields[0] = head;
    out.trace.push(trace::SdSolStart{});
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::string_view f = trim(fields[i]);
      const bool last = i + 1 == fields.size();
      bool ends = false;
      if (last && (strip_suffix(f, "SOL_END") || strip_suffix(f, "SOL END"))) {
        ends = true;
        f = trim(f);
      }
      if (!f.empty()) {
        if (auto ev = sd_parse_field(f)) {
          check.feed(*ev, i + 1);
          out.trace.events.push_back(std::move(*ev));
        } else if (!(cut(1, last) && sd_prefix_ok(f))) {
          bad(2, "field " + std::to_string(i + 1) + ": unrecognised event");
        }
      } else if (i > 0 && !ends && !cut(1, last)) {
        bad(2, "field " + std::to_string(i + 1) + ": empty");
      }
      if (ends) {
        check.feed(trace::SdSolEnd{}, i + 1);
        out.trace.push(trace::SdSolEnd{});
      }
    }
  }
  for (std::size_t i = 2; i < lines.size(); ++i) bad(i + 1, "unexpected line after the solution line");
  return out;
}

// Rebuilds one phase's direct path by replaying its operations.
void direct_phase(SearchTrace& out, countdown::State s, const std::vector<Operation>& ops) {
  out.push(trace::CdState{s.target, s.printed(), s.tail.size(), s.operations});
  std::uint32_t next = 2;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    std::optional<countdown::State> child;
    for (auto& m : countdown::enumerate_moves(s)) {
      if (m.op == ops[i]) {
        child = std::move(m.child);
        break;
      }
    }
    if (!child) throw DomainError("solution path does not replay: " + ops[i].str());
    out.push(trace::CdExplore{ops[i], child->printed()});
    if (child->is_leaf()) {
      if (child->numbers.front() != child->goal()) throw DomainError("solution path misses its goal");
      if (child->final_phase())
        out.push(trace::CdGoal{child->numbers.front(), child->target});
      else
        out.push(trace::CdPartialGoal{child->numbers.front(), child->goal()});
    } else {
      out.push(trace::CdGenerated{{next++}, child->target, child->printed(), ops[i]});
      out.push(trace::CdState{child->target, child->printed(), child->tail.size(), child->operations});
    }
    s = std::move(*child);
  }
}

countdown::State to_state(const trace::CdState& s) {
  countdown::State st;
  st.target = s.target;
  const auto split_at = s.numbers.end() - static_cast<std::ptrdiff_t>(std::min(s.tail, s.numbers.size()));
  st.numbers.assign(s.numbers.begin(), split_at);
  st.tail.assign(split_at, s.numbers.end());
  st.operations = s.operations;
  return st;
}

struct PhasePath {
  countdown::State root;
  std::vector<Operation> ops;
};

// Root and winning operations of each completed phase, in order.
std::vector<PhasePath> goal_paths(const SearchTrace& t, bool& solved) {
  std::vector<PhasePath> out;
  solved = false;
  std::optional<countdown::State> root;
  const trace::CdState* last_state = nullptr;
  const trace::CdExplore* last_explore = nullptr;
  for (const auto& e : t.events) {
    if (const auto* s = std::get_if<trace::CdState>(&e)) {
      if (!root) root = to_state(*s);
      last_state = s;
      last_explore = nullptr;
    } else if (const auto* x = std::get_if<trace::CdExplore>(&e)) {
      last_explore = x;
    } else if (std::holds_alternative<trace::CdGoal>(e) || std::holds_alternative<trace::CdPartialGoal>(e)) {
      if (!last_state || !root) break;
      PhasePath p{*root, last_state->operations};
      if (last_explore) {
        p.ops.push_back(last_explore->op);
      } else {
        const auto st = to_state(*last_state);
        const Number value = std::holds_alternative<trace::CdGoal>(e) ? std::get<trace::CdGoal>(e).value
                                                                       : std::get<trace::CdPartialGoal>(e).value;
        bool found = false;
        if (st.numbers.size() == 2) {
          for (OpKind k : countdown::kAllOps) {
            auto o = countdown::combine(st.numbers[0], st.numbers[1], k);
            if (o && o->result == value) {
              p.ops.push_back(*o);
              found = true;
              break;
            }
          }
        }
        if (!found) break;
      }
      out.push_back(std::move(p));
      root.reset();
      if (std::holds_alternative<trace::CdGoal>(e)) {
        solved = true;
        break;
      }
    }
  }
  return out;
}

SearchTrace prune_sudoku(const SearchTrace& t) {
  SearchTrace out;
  out.game = Game::sudoku;
  struct Mark {
    int row;
    int col;
    std::size_t size;
  };
  std::vector<Mark> marks;
  bool ended = false;
  for (const auto& e : t.events) {
    if (const auto* g = std::get_if<trace::SdGuess>(&e)) {
      marks.push_back({g->row, g->col, out.events.size()});
    } else if (const auto* r = std::get_if<trace::SdRevert>(&e)) {
      while (!marks.empty() && !(marks.back().row == r->row && marks.back().col == r->col)) marks.pop_back();
      if (marks.empty()) throw DomainError("revert without a matching guess");
      out.events.resize(marks.back().size);
      marks.pop_back();
    } else if (std::holds_alternative<trace::SdNoCandidate>(e)) {
      continue;
    } else {
      if (std::holds_alternative<trace::SdSolEnd>(e)) ended = true;
      out.events.push_back(e);
    }
  }
  if (!ended) throw DomainError("sudoku trace is not solved");
  const auto board = sudoku::replay(sudoku_start(out), out).board;
  if (!board.solved()) throw DomainError("sudoku trace is not solved");
  return out;
}

}  // namespace

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::grammar: return "grammar";
    case ViolationKind::arithmetic: return "arithmetic";
    case ViolationKind::illegal_transition: return "illegal_transition";
  }
  return "?";
}

std::size_t ValidationReport::count(ViolationKind k) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; }));
}

std::string serialize(const SearchTrace& t, const Dialect& dialect) {
  if (t.game != dialect.game) throw CodecError("trace game does not match dialect " + dialect.str());
  std::string out;
  if (dialect.game == Game::sudoku) {
    out = sd_text(t);
  } else {
    for (const auto& e : t.events) out += cd_line(e, dialect.mode);
  }
  const auto check = parse(out, dialect);
  if (!check.report.clean()) {
    const auto& v = check.report.violations.front();
    throw CodecError("inconsistent trace at line " + std::to_string(v.line) + ": " + v.message);
  }
  if (!(check.trace == t)) {
    std::size_t i = 0;
    while (i < t.events.size() && i < check.trace.events.size() && t.events[i] == check.trace.events[i]) ++i;
    throw CodecError("trace does not survive its own grammar at event " + std::to_string(i));
  }
  return out;
}

Parsed parse(std::string_view text, const Dialect& dialect) {
  if (dialect.game == Game::sudoku) return parse_sudoku(text, dialect.mode);
  return parse_countdown(text, dialect.mode);
}

SearchTrace prune_to_direct(const SearchTrace& t) {
  if (t.game == Game::sudoku) return prune_sudoku(t);
  bool solved = false;
  const auto paths = goal_paths(t, solved);
  if (!solved) throw DomainError("countdown trace is not solved");
  SearchTrace out;
  for (const auto& p : paths) direct_phase(out, p.root, p.ops);
  return out;
}

SearchTrace shorten_think(const SearchTrace& t) {
  if (t.game != Game::countdown) throw ConfigError("think mode is only defined for countdown");
  SearchTrace out;
  const auto& ev = t.events;
  std::size_t i = 0;
  auto leaf_explore = [&](std::size_t k, const trace::CdState& s) {
    if (k + 1 >= ev.size()) return false;
    const auto* x = std::get_if<trace::CdExplore>(&ev[k]);
    if (!x || x->resulting.size() != s.tail + 1) return false;
    const auto kd = trace::kind(ev[k + 1]);
    return kd == trace::EventKind::dead_end || kd == trace::EventKind::goal || kd == trace::EventKind::partial_goal;
  };
  while (i < ev.size()) {
    const auto* s = std::get_if<trace::CdState>(&ev[i]);
    if (!s || s->numbers.size() != s->tail + 2) {
      out.events.push_back(ev[i++]);
      continue;
    }
    out.events.push_back(ev[i++]);
    std::optional<Event> success;
    std::optional<trace::CdDeadEnd> best;
    while (i < ev.size() && !success) {
      if (leaf_explore(i, *s)) {
        const Event& term = ev[i + 1];
        if (const auto* d = std::get_if<trace::CdDeadEnd>(&term)) {
          const auto dist = [&](Number v) { return v > d->goal ? v - d->goal : d->goal - v; };
          if (!best || dist(d->value) < dist(best->value) ||
              (dist(d->value) == dist(best->value) && d->value < best->value))
            best = *d;
        } else {
          success = term;
        }
        i += 2;
        continue;
      }
      // DFS returns to this state between siblings.
      if (i + 2 < ev.size() && std::holds_alternative<trace::CdMoveTo>(ev[i]) && ev[i + 1] == Event{*s} &&
          leaf_explore(i + 2, *s)) {
        i += 2;
        continue;
      }
      break;
    }
    if (success)
      out.events.push_back(*success);
    else if (best)
      out.events.push_back(*best);
  }
  return out;
}

std::size_t count_mistakes(const SearchTrace& t) {
  std::size_t n = 0;
  if (t.game == Game::sudoku) {
    bool in_run = false;
    for (const auto& e : t.events) {
      const auto k = trace::kind(e);
      if (k == trace::EventKind::no_candidate) {
        if (!in_run) ++n;
        in_run = true;
      } else {
        in_run = k == trace::EventKind::revert || k == trace::EventKind::revert_exhausted;
      }
    }
    return n;
  }
  for (const auto& e : t.events) {
    if (std::holds_alternative<trace::CdGoal>(e)) break;
    if (std::holds_alternative<trace::CdDeadEnd>(e)) ++n;
  }
  return n;
}

std::optional<std::vector<Operation>> claimed_solution(const SearchTrace& t) {
  if (t.game != Game::countdown) return std::nullopt;
  bool solved = false;
  const auto paths = goal_paths(t, solved);
  if (!solved) return std::nullopt;
  std::vector<Operation> ops;
  for (const auto& p : paths) ops.insert(ops.end(), p.ops.begin(), p.ops.end());
  return ops;
}

sudoku::Board sudoku_start(const SearchTrace& t) {
  for (const auto& e : t.events) {
    if (const auto* s = std::get_if<trace::SdStart>(&e)) {
      sudoku::Board b;
      for (const auto& g : s->givens) {
        if (g.row < 0 || g.row > 8 || g.col < 0 || g.col > 8 || !b.empty(g.row * 9 + g.col) ||
            !b.place(g.row * 9 + g.col, g.value))
          throw InvalidBoardError("conflicting givens on the START line");
      }
      return b;
    }
  }
  throw DomainError("trace has no START line");
}

}  // namespace searchlab::codec
