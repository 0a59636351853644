#include "searchlab/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "searchlab/error.hpp"

namespace searchlab::search {

using countdown::Move;
using countdown::Operation;
using countdown::State;

namespace {

__extension__ typedef __int128 i128;

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  if (s.empty() || s.size() > 15) throw ConfigError("bad rational: " + std::string(whole));
  std::int64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw ConfigError("bad rational: " + std::string(whole));
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational r{parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text)};
    if (r.den == 0) throw ConfigError("bad rational: " + std::string(text));
    return r.reduced();
  }
  const auto dot = text.find('.');
  if (dot == std::string_view::npos) return Rational{parse_int(text, text), 1};
  const auto frac = text.substr(dot + 1);
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const std::int64_t whole = dot == 0 ? 0 : parse_int(text.substr(0, dot), text);
  const std::int64_t part = frac.empty() ? 0 : parse_int(frac, text);
  return Rational{whole * den + part, den}.reduced();
}

Rational Rational::reduced() const {
  const std::int64_t g = std::gcd(num, den);
  if (g == 0) return *this;
  return {num / g, den / g};
}

std::string Rational::str() const {
  const Rational r = reduced();
  std::int64_t d = r.den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) d /= 2, ++twos;
  while (d % 5 == 0) d /= 5, ++fives;
  if (d != 1) return std::to_string(r.num) + "/" + std::to_string(r.den);
  const int places = std::max({twos, fives, 1});
  std::int64_t scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  const std::int64_t scaled = r.num * (scale / r.den);
  std::string frac = std::to_string(scaled % scale);
  frac.insert(frac.begin(), static_cast<std::size_t>(places) - frac.size(), '0');
  while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
  return std::to_string(scaled / scale) + "." + frac;
}

bool operator==(const Rational& a, const Rational& b) {
  return static_cast<i128>(a.num) * b.den == static_cast<i128>(b.num) * a.den;
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<i128>(a.num) * b.den < static_cast<i128>(b.num) * a.den;
}

Rational heuristic_score(const State& state, HeuristicKind h) {
  const Number goal = state.goal();
  if (state.numbers.empty()) return {0, 1};
  if (h == HeuristicKind::sum) {
    Number total = 0;
    for (Number n : state.numbers) total += std::abs(n - goal);
    return {total, static_cast<std::int64_t>(state.numbers.size())};
  }
  Number best = -1;
  for (Number f = 1; f * f <= goal; ++f) {
    if (goal % f != 0) continue;
    for (Number factor : {f, goal / f}) {
      for (Number n : state.numbers) {
        const Number d = std::abs(n - factor);
        if (best < 0 || d < best) best = d;
      }
    }
  }
  return {best < 0 ? 0 : best, 1};
}

const char* to_string(Status s) {
  switch (s) {
    case Status::solved: return "solved";
    case Status::failed: return "failed";
    case Status::budget_exhausted: return "budget_exhausted";
  }
  return "?";
}

std::string Policy::str() const {
  std::string out = traversal == Traversal::dfs ? "dfs" : "bfs" + std::to_string(beam_width);
  out += heuristic == HeuristicKind::sum ? ":sum" : ":mult";
  out += order == ChildOrder::ascending ? ":asc" : ":desc";
  if (prune.enabled)
    out += ":prune@" + std::to_string(prune.min_depth) + "x" + prune.multiplier.str();
  else
    out += ":off";
  return out;
}

Policy Policy::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon == std::string_view::npos ? colon : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  const std::string whole(text);
  if (parts.size() != 4) throw ConfigError("policy needs 4 ':'-separated fields: " + whole);
  Policy p;
  if (parts[0] == "dfs") {
    p.traversal = Traversal::dfs;
  } else if (parts[0].size() > 3 && parts[0].substr(0, 3) == "bfs") {
    p.traversal = Traversal::bfs;
    p.beam_width = static_cast<int>(parse_int(parts[0].substr(3), text));
  } else {
    throw ConfigError("policy traversal must be dfs or bfs<k>: " + whole);
  }
  if (parts[1] == "sum")
    p.heuristic = HeuristicKind::sum;
  else if (parts[1] == "mult" || parts[1] == "multiply")
    p.heuristic = HeuristicKind::multiply;
  else
    throw ConfigError("policy heuristic must be sum or mult: " + whole);
  if (parts[2] == "asc")
    p.order = ChildOrder::ascending;
  else if (parts[2] == "desc")
    p.order = ChildOrder::descending;
  else
    throw ConfigError("policy order must be asc or desc: " + whole);
  if (parts[3] != "off") {
    constexpr std::string_view kPrefix = "prune@";
    const auto x = parts[3].find('x');
    if (parts[3].substr(0, kPrefix.size()) != kPrefix || x == std::string_view::npos)
      throw ConfigError("policy prune field must be off or prune@<depth>x<multiplier>: " + whole);
    p.prune.enabled = true;
    p.prune.min_depth = static_cast<int>(parse_int(parts[3].substr(kPrefix.size(), x - kPrefix.size()), text));
    p.prune.multiplier = Rational::parse(parts[3].substr(x + 1));
  }
  p.validate();
  return p;
}

void Policy::validate() const {
  if (traversal == Traversal::bfs && (beam_width < 1 || beam_width > 5))
    throw ConfigError("bfs beam width must be in 1..5");
  if (prune.enabled && (prune.multiplier.num <= 0 || prune.multiplier.den <= 0))
    throw ConfigError("prune multiplier must be positive");
  if (prune.enabled && prune.min_depth < 0) throw ConfigError("prune depth must be non-negative");
}

Policy default_policy() {
  Policy p;
  p.prune = Prune{true, 1, Rational{1, 1}};
  return p;
}

std::vector<Policy> mixture_registry() {
  std::vector<Policy> bases;
  auto base = [](Traversal t, int beam, bool prune) {
    Policy p;
    p.traversal = t;
    p.beam_width = beam;
    if (prune) p.prune = default_policy().prune;
    return p;
  };
  bases.push_back(base(Traversal::dfs, 0, false));
  for (int k = 1; k <= 5; ++k) bases.push_back(base(Traversal::bfs, k, false));
  bases.push_back(base(Traversal::dfs, 0, true));
  bases.push_back(base(Traversal::bfs, 2, true));

  std::vector<Policy> out;
  for (const auto& b : bases) {
    for (auto h : {HeuristicKind::sum, HeuristicKind::multiply}) {
      for (auto o : {ChildOrder::ascending, ChildOrder::descending}) {
        Policy p = b;
        p.heuristic = h;
        p.order = o;
        out.push_back(p);
      }
    }
  }
  return out;
}

namespace {

struct Scored {
  Move move;
  Rational score;
  std::size_t index;
};

bool pruned(const State& child, const Rational& score, const Prune& prune) {
  if (!prune.enabled) return false;
  if (static_cast<int>(child.operations.size()) < prune.min_depth) return false;
  const i128 lhs = static_cast<i128>(score.num) * prune.multiplier.den;
  const i128 rhs = static_cast<i128>(prune.multiplier.num) * child.goal() * score.den;
  return lhs > rhs;
}

std::vector<Scored> scored_children(const State& state, const Policy& policy) {
  std::vector<Scored> kids;
  std::size_t index = 0;
  for (auto& m : countdown::enumerate_moves(state)) {
    const Rational score = heuristic_score(m.child, policy.heuristic);
    if (pruned(m.child, score, policy.prune)) continue;
    kids.push_back({std::move(m), score, index++});
  }
  const bool asc = policy.order == ChildOrder::ascending;
  std::stable_sort(kids.begin(), kids.end(), [asc](const Scored& a, const Scored& b) {
    if (!(a.score == b.score)) return asc ? a.score < b.score : b.score < a.score;
    const Operation& x = a.move.op;
    const Operation& y = b.move.op;
    if (x.left != y.left) return x.left < y.left;
    if (x.right != y.right) return x.right < y.right;
    return static_cast<char>(x.op) < static_cast<char>(y.op);
  });
  return kids;
}

enum class Branch { found, failed, aborted };

class Runner {
 public:
  Runner(const Policy& policy, const trace::SearchBudget& budget, bool record)
      : policy_(policy), budget_(budget), record_(record) {
    out.trace.game = trace::Game::countdown;
  }

  Branch phase(const State& root) {
    if (policy_.traversal == Traversal::dfs) return dfs(root, trace::NodeId{0});
    return bfs(root);
  }

  Outcome out;

 private:
  template <typename E>
  void emit(E&& e) {
    if (record_) out.trace.push(std::forward<E>(e));
  }

  void emit_state(const State& s) {
    if (record_) out.trace.push(trace::CdState{s.target, s.printed(), s.tail.size(), s.operations});
  }

  bool spend() {
    if (budget_.max_nodes && out.nodes_expanded >= budget_.max_nodes) return false;
    ++out.nodes_expanded;
    return true;
  }

  // Emits the explore line and, for a leaf, its verdict. Returns true when
  // the leaf reaches the phase goal.
  bool explore(const Move& m) {
    emit(trace::CdExplore{m.op, m.child.printed()});
    if (!m.child.is_leaf()) return false;
    const Number v = m.child.numbers.front();
    const Number goal = m.child.goal();
    if (v == goal) {
      if (m.child.final_phase())
        emit(trace::CdGoal{v, m.child.target});
      else
        emit(trace::CdPartialGoal{v, goal});
      reached = m.child;
      return true;
    }
    emit(trace::CdDeadEnd{v, goal, m.child.final_phase()});
    return false;
  }

  Branch dfs(const State& s, const trace::NodeId& id) {
    if (!spend()) return Branch::aborted;
    emit_state(s);
    const auto kids = scored_children(s, policy_);
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const Move& m = kids[i].move;
      if (i > 0) {
        emit(trace::CdMoveTo{id});
        emit_state(s);
      }
      if (explore(m)) return Branch::found;
      if (m.child.is_leaf()) continue;
      trace::NodeId cid = id;
      cid.push_back(static_cast<std::uint32_t>(i));
      emit(trace::CdGenerated{cid, m.child.target, m.child.printed(), m.op});
      emit(trace::CdMoveTo{cid});
      const Branch b = dfs(m.child, cid);
      if (b != Branch::failed) return b;
    }
    return Branch::failed;
  }

  Branch bfs(const State& root) {
    struct Node {
      State state;
      trace::NodeId id;
      Rational score;
    };
    std::vector<Node> frontier{{root, trace::NodeId{0}, {}}};
    bool first = true;
    const bool asc = policy_.order == ChildOrder::ascending;
    while (!frontier.empty()) {
      std::vector<Node> next;
      for (const Node& node : frontier) {
        if (!spend()) return Branch::aborted;
        if (!first) emit(trace::CdMoveTo{node.id});
        first = false;
        emit_state(node.state);
        const auto kids = scored_children(node.state, policy_);
        for (std::size_t i = 0; i < kids.size(); ++i) {
          const Move& m = kids[i].move;
          if (explore(m)) return Branch::found;
          if (m.child.is_leaf()) continue;
          trace::NodeId cid = node.id;
          cid.push_back(static_cast<std::uint32_t>(i));
          emit(trace::CdGenerated{cid, m.child.target, m.child.printed(), m.op});
          next.push_back({m.child, std::move(cid), kids[i].score});
        }
      }
      std::stable_sort(next.begin(), next.end(), [asc](const Node& a, const Node& b) {
        return asc ? a.score < b.score : b.score < a.score;
      });
      if (next.size() > static_cast<std::size_t>(policy_.beam_width))
        next.resize(static_cast<std::size_t>(policy_.beam_width));
      frontier = std::move(next);
    }
    return Branch::failed;
  }

 public:
  State reached;

 private:
  const Policy& policy_;
  const trace::SearchBudget& budget_;
  bool record_;
};

Outcome run_search(const countdown::Puzzle& puzzle, const Policy& policy, const trace::SearchBudget& budget,
                   bool record) {
  puzzle.validate();
  policy.validate();
  Runner runner(policy, budget, record);
  State root = countdown::initial_state(puzzle);
  Branch b = runner.phase(root);
  std::vector<Operation> solution;
  if (b == Branch::found && !root.tail.empty()) {
    solution = runner.reached.operations;
    b = runner.phase(countdown::next_phase(root));
  }
  Outcome out = std::move(runner.out);
  switch (b) {
    case Branch::found:
      out.status = Status::solved;
      solution.insert(solution.end(), runner.reached.operations.begin(), runner.reached.operations.end());
      out.solution = std::move(solution);
      break;
    case Branch::failed:
      out.status = Status::failed;
      break;
    case Branch::aborted:
      out.status = Status::budget_exhausted;
      break;
  }
  return out;
}

}  // namespace

std::vector<Move> ordered_children(const State& state, const Policy& policy) {
  std::vector<Move> out;
  for (auto& s : scored_children(state, policy)) out.push_back(std::move(s.move));
  return out;
}

Outcome search(const countdown::Puzzle& puzzle, const Policy& policy, const trace::SearchBudget& budget) {
  return run_search(puzzle, policy, budget, true);
}

Calibration calibrate_prune_multiplier(const std::vector<countdown::Puzzle>& puzzles, Policy base,
                                       double target_rate, const trace::SearchBudget& budget) {
  if (puzzles.empty()) throw ConfigError("calibration needs at least one puzzle");
  base.prune.enabled = true;
  std::vector<Rational> grid;
  for (int k = 5; k <= 40; ++k) grid.push_back(Rational{k, 20}.reduced());  // 0.25 .. 2.0
  for (int k : {3, 4, 6, 8}) grid.push_back(Rational{k, 1});
  Calibration out;
  double best_gap = 2.0;
  for (const Rational& m : grid) {
    base.prune.multiplier = m;
    std::size_t solved = 0;
    for (const auto& p : puzzles) {
      if (run_search(p, base, budget, false).status == Status::solved) ++solved;
    }
    const double rate = static_cast<double>(solved) / static_cast<double>(puzzles.size());
    out.sweep.emplace_back(m, rate);
    const double gap = std::abs(rate - target_rate);
    if (gap <= best_gap) {
      best_gap = gap;
      out.multiplier = m;
      out.solve_rate = rate;
    }
  }
  return out;
}

}  // namespace searchlab::search
