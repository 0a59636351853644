#include "searchlab/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <thread>

#include <nlohmann/json.hpp>

#include "searchlab/codec.hpp"
#include "searchlab/error.hpp"
#include "searchlab/hash.hpp"
#include "searchlab/tokenizer.hpp"

namespace searchlab::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') field = field.substr(1, field.size() - 2);
    out.push_back(std::move(field));
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

enum class ItemStatus { solved, unsolved, budget_exhausted };

struct Item {
  std::string line;  // serialized JSONL record including '\n'; empty when skipped
  std::string raw;
  ItemStatus status = ItemStatus::unsolved;
  bool brute_solvable = false;
};

json problem_json(const countdown::Puzzle& p) {
  return json{{"id", p.id}, {"target", p.target}, {"nums", p.candidates}, {"variant", countdown::to_string(p.variant())}};
}

struct Rendered {
  std::string text;
  std::uint64_t mistakes = 0;
  bool keep = true;
};

// Serializes in the dataset's dialect and applies the token cap.
Rendered render(const trace::SearchTrace& t, bool solved, const DatasetSpec& spec, ItemStatus& status) {
  Rendered r;
  const auto mode = spec.dialect.mode;
  trace::SearchTrace shown;
  if (mode == trace::Mode::direct) {
    if (!solved) {
      r.keep = false;
      return r;
    }
    // direct records mirror the backtracking records that fit the cap
    const trace::Dialect back{spec.dialect.game, trace::Mode::backtrack};
    if (spec.budget.max_tokens &&
        tokenizer::count_tokens(codec::serialize(t, back), tokenizer::build_vocab(back.game)) > spec.budget.max_tokens) {
      status = ItemStatus::budget_exhausted;
      r.keep = false;
      return r;
    }
    shown = codec::prune_to_direct(t);
  } else if (mode == trace::Mode::think) {
    shown = codec::shorten_think(t);
  } else {
    shown = t;
  }
  r.mistakes = codec::count_mistakes(shown);
  r.text = codec::serialize(shown, spec.dialect);
  const auto& vocab = tokenizer::build_vocab(spec.dialect.game);
  if (spec.budget.max_tokens && tokenizer::count_tokens(r.text, vocab) > spec.budget.max_tokens) {
    status = ItemStatus::budget_exhausted;
    if (mode == trace::Mode::direct) {
      r.keep = false;
      return r;
    }
    r.text = std::string(tokenizer::truncate_tokens(r.text, vocab, spec.budget.max_tokens));
  }
  return r;
}

Item finish(std::string id, json problem, const Rendered& r, ItemStatus status, const DatasetSpec& spec) {
  Item item;
  item.status = status;
  if (!r.keep) return item;
  const auto& vocab = tokenizer::build_vocab(spec.dialect.game);
  json rec{{"id", std::move(id)},
           {"problem", std::move(problem)},
           {"trace", r.text},
           {"dialect", spec.dialect.str()},
           {"solved", status == ItemStatus::solved},
           {"mistakes", r.mistakes},
           {"tokens", tokenizer::count_tokens(r.text, vocab)}};
  item.line = rec.dump() + "\n";
  if (spec.raw_text) item.raw = r.text + "\n";
  return item;
}

Item countdown_item(std::uint64_t index, const DatasetSpec& spec) {
  const auto puzzle =
      spec.stacked ? countdown::make_stacked(spec.seed, spec.gen, index) : countdown::generate_puzzle(spec.seed, spec.gen, index);
  const auto outcome = search::search(puzzle, spec.policy, {spec.budget.max_nodes, 0});
  ItemStatus status = outcome.status == search::Status::solved           ? ItemStatus::solved
                      : outcome.status == search::Status::budget_exhausted ? ItemStatus::budget_exhausted
                                                                          : ItemStatus::unsolved;
  const auto r = render(outcome.trace, outcome.status == search::Status::solved, spec, status);
  Item item = finish(puzzle.id, problem_json(puzzle), r, status, spec);
  item.brute_solvable = countdown::brute_force_solve(puzzle).has_value();
  return item;
}

Item sudoku_item(const SudokuRow& row, std::uint64_t index, const DatasetSpec& spec) {
  const auto outcome = sudoku::solve(row.puzzle, {spec.budget.max_nodes, 0}, sudoku::strategy_set(spec.strategies));
  ItemStatus status = outcome.status == sudoku::SolveStatus::solved           ? ItemStatus::solved
                      : outcome.status == sudoku::SolveStatus::budget_exhausted ? ItemStatus::budget_exhausted
                                                                               : ItemStatus::unsolved;
  const auto r = render(outcome.trace, outcome.status == sudoku::SolveStatus::solved, spec, status);
  json problem{{"puzzle", row.puzzle.str()}, {"line", row.line}};
  return finish("sd-" + std::to_string(index), std::move(problem), r, status, spec);
}

double round4(double x) { return std::round(x * 10000.0) / 10000.0; }

json issues_json(const std::vector<IngestIssue>& issues) {
  json out = json::array();
  for (const auto& i : issues) out.push_back(json{{"line", i.line}, {"message", i.message}});
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

// ---------------------------------------------------------------- ingestion

SudokuReader::SudokuReader(const std::string& path, std::size_t max_invalid)
    : in_(path, std::ios::binary), max_invalid_(max_invalid) {
  if (!in_) throw IoError("cannot read sudoku corpus " + path);
}

void SudokuReader::reject(std::size_t line, std::string message) {
  issues_.push_back({line, std::move(message)});
  if (issues_.size() > max_invalid_)
    throw ParseError("too many invalid rows in sudoku corpus; last at line " + std::to_string(line) + ": " +
                     issues_.back().message);
}

std::optional<SudokuRow> SudokuReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (!header_checked_) {
      header_checked_ = true;
      std::optional<std::size_t> puzzle, solution;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "puzzle" || fields[i] == "quizzes") puzzle = i;
        if (fields[i] == "solution" || fields[i] == "solutions") solution = i;
      }
      if (puzzle) {
        puzzle_col_ = *puzzle;
        solution_col_ = solution;
        continue;
      }
      if (fields.size() >= 2) solution_col_ = 1;
    }
    if (puzzle_col_ >= fields.size()) {
      reject(line_, "missing puzzle column");
      continue;
    }
    SudokuRow row;
    row.line = line_;
    const std::string& text = fields[puzzle_col_];
    if (text.size() != 81) {
      reject(line_, "puzzle has " + std::to_string(text.size()) + " characters, expected 81");
      continue;
    }
    try {
      row.puzzle = sudoku::Board::parse(text);
    } catch (const Error& e) {
      reject(line_, e.what());
      continue;
    }
    if (solution_col_ && *solution_col_ < fields.size() && !fields[*solution_col_].empty()) {
      const std::string& sol = fields[*solution_col_];
      try {
        auto s = sudoku::Board::parse(sol);
        bool agrees = s.solved();
        for (int i = 0; i < sudoku::kCells && agrees; ++i) {
          if (!row.puzzle.empty(i) && row.puzzle.value(i) != s.value(i)) agrees = false;
        }
        if (!agrees) {
          reject(line_, "solution is not a completion of the puzzle");
          continue;
        }
        row.solution = s;
      } catch (const Error& e) {
        reject(line_, std::string("bad solution: ") + e.what());
        continue;
      }
    }
    return row;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- manifest

std::string Manifest::json() const {
  pipeline::json j{{"schema_version", kManifestSchema},
                   {"generator_version", kGeneratorVersion},
                   {"name", name},
                   {"game", trace::to_string(dialect.game)},
                   {"dialect", dialect.str()},
                   {"seed", seed},
                   {"policy", policy},
                   {"counts",
                    {{"total", counts.total},
                     {"solved", counts.solved},
                     {"unsolved", counts.unsolved},
                     {"budget_exhausted", counts.budget_exhausted}}},
                   {"records", records},
                   {"solved_fraction", solved_fraction}};
  if (brute_force_solvable) j["brute_force_solvable"] = *brute_force_solvable;
  j["vocab"] = {{"version", vocab_version}, {"size", vocab_size}, {"sha256", vocab_hash}};
  j["budget"] = {{"max_tokens", max_tokens}, {"max_nodes", max_nodes}};
  j["file"] = file;
  j["sha256"] = sha256;
  if (!corpus_sha256.empty()) j["corpus_sha256"] = corpus_sha256;
  if (!ingest_issues.empty()) j["ingest_issues"] = issues_json(ingest_issues);
  if (!splits.empty()) {
    auto arr = pipeline::json::array();
    for (const auto& s : splits)
      arr.push_back({{"name", s.name}, {"begin", s.begin}, {"end", s.end}, {"file", s.file}, {"sha256", s.sha256}});
    j["splits"] = arr;
  }
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string& text) {
  try {
    const auto j = pipeline::json::parse(text);
    if (j.at("schema_version").get<int>() != kManifestSchema) throw ParseError("unsupported manifest schema");
    Manifest m;
    m.name = j.at("name").get<std::string>();
    m.dialect = trace::Dialect::parse(j.at("dialect").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.policy = j.at("policy").get<std::string>();
    const auto& c = j.at("counts");
    m.counts = {c.at("total").get<std::uint64_t>(), c.at("solved").get<std::uint64_t>(),
                c.at("unsolved").get<std::uint64_t>(), c.at("budget_exhausted").get<std::uint64_t>()};
    m.records = j.at("records").get<std::uint64_t>();
    m.solved_fraction = j.at("solved_fraction").get<double>();
    if (j.contains("brute_force_solvable")) m.brute_force_solvable = j["brute_force_solvable"].get<std::uint64_t>();
    m.vocab_version = j.at("vocab").at("version").get<std::string>();
    m.vocab_size = j.at("vocab").at("size").get<std::uint64_t>();
    m.vocab_hash = j.at("vocab").at("sha256").get<std::string>();
    m.max_tokens = j.at("budget").at("max_tokens").get<std::uint64_t>();
    m.max_nodes = j.at("budget").at("max_nodes").get<std::uint64_t>();
    m.file = j.at("file").get<std::string>();
    m.sha256 = j.at("sha256").get<std::string>();
    m.corpus_sha256 = j.value("corpus_sha256", std::string{});
    if (j.contains("ingest_issues")) {
      for (const auto& i : j["ingest_issues"])
        m.ingest_issues.push_back({i.at("line").get<std::size_t>(), i.at("message").get<std::string>()});
    }
    if (j.contains("splits")) {
      for (const auto& s : j["splits"])
        m.splits.push_back({s.at("name").get<std::string>(), s.at("begin").get<std::uint64_t>(),
                            s.at("end").get<std::uint64_t>(), s.at("file").get<std::string>(),
                            s.at("sha256").get<std::string>()});
    }
    return m;
  } catch (const pipeline::json::exception& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
}

// ---------------------------------------------------------------- generation

void DatasetSpec::validate() const {
  if (name.empty() || name.find('/') != std::string::npos) throw ConfigError("dataset name must be a plain file stem");
  if (workers < 1 || workers > 256) throw ConfigError("workers must be in 1..256");
  if (dialect.game == trace::Game::countdown) {
    policy.validate();
    gen.validate();
  } else {
    if (dialect.mode == trace::Mode::think) throw ConfigError("think mode is only defined for countdown");
    if (corpus.empty()) throw ConfigError("sudoku datasets need a corpus file");
    sudoku::strategy_set(strategies);
  }
}

Manifest generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  const fs::path dir(spec.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const fs::path data_path = dir / (spec.name + ".jsonl");
  const fs::path raw_path = dir / (spec.name + ".txt");

  const bool sudoku_game = spec.dialect.game == trace::Game::sudoku;
  std::optional<SudokuReader> reader;
  if (sudoku_game) reader.emplace(spec.corpus, spec.max_invalid_rows);

  std::ofstream out(data_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + data_path.string());
  std::ofstream raw;
  if (spec.raw_text) {
    raw.open(raw_path, std::ios::binary | std::ios::trunc);
    if (!raw) throw IoError("cannot write " + raw_path.string());
  }

  ReorderBuffer<Item> buffer(static_cast<std::size_t>(spec.workers) * 4 + 16);
  std::mutex source_mu;
  std::uint64_t claimed = 0;
  bool source_done = false;
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    try {
      while (!failed.load()) {
        std::uint64_t index = 0;
        std::optional<SudokuRow> row;
        {
          std::lock_guard lock(source_mu);
          if (source_done) return;
          if (sudoku_game) {
            if (claimed < spec.count) row = reader->next();
            if (!row) {
              source_done = true;
              buffer.finish_at(claimed);
              return;
            }
          } else if (claimed >= spec.count) {
            source_done = true;
            buffer.finish_at(claimed);
            return;
          }
          index = claimed++;
        }
        buffer.put(index, sudoku_game ? sudoku_item(*row, index, spec) : countdown_item(index, spec));
      }
    } catch (...) {
      std::lock_guard lock(error_mu);
      if (!error) error = std::current_exception();
      failed = true;
      buffer.close();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(spec.workers);
  for (unsigned i = 0; i < spec.workers; ++i) threads.emplace_back(worker);

  Manifest m;
  m.name = spec.name;
  m.dialect = spec.dialect;
  m.seed = spec.seed;
  m.policy = sudoku_game ? sudoku::strategy_set(spec.strategies).version : spec.policy.str();
  m.max_tokens = spec.budget.max_tokens;
  m.max_nodes = spec.budget.max_nodes;
  std::uint64_t brute = 0;
  Sha256 file_hash;
  while (auto item = buffer.take()) {
    ++m.counts.total;
    switch (item->status) {
      case ItemStatus::solved: ++m.counts.solved; break;
      case ItemStatus::unsolved: ++m.counts.unsolved; break;
      case ItemStatus::budget_exhausted: ++m.counts.budget_exhausted; break;
    }
    if (item->brute_solvable) ++brute;
    if (!item->line.empty()) {
      ++m.records;
      file_hash.update(item->line);
      out << item->line;
      if (spec.raw_text) raw << item->raw;
    }
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  out.close();
  if (!out) throw IoError("write failed for " + data_path.string());

  const auto& vocab = tokenizer::build_vocab(spec.dialect.game);
  m.solved_fraction = m.counts.total ? round4(static_cast<double>(m.counts.solved) / static_cast<double>(m.counts.total)) : 0.0;
  if (!sudoku_game) m.brute_force_solvable = brute;
  m.vocab_version = vocab.version();
  m.vocab_hash = vocab.content_hash();
  m.vocab_size = vocab.size();
  m.file = data_path.filename().string();
  m.sha256 = file_hash.hex_digest();
  if (sudoku_game) {
    m.corpus_sha256 = sha256_file(spec.corpus);
    m.ingest_issues = reader->issues();
  }
  write_file(dir / (spec.name + ".manifest.json"), m.json());
  return m;
}

Manifest split(const std::string& dir_name, const std::string& name, const SplitSpec& spec) {
  const fs::path dir(dir_name);
  const fs::path data_path = dir / (name + ".jsonl");
  const fs::path manifest_path = dir / (name + ".manifest.json");
  Manifest m = Manifest::from_json(read_file(manifest_path));

  std::uint64_t lines = 0;
  {
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw IoError("cannot read " + data_path.string());
    std::string line;
    while (std::getline(in, line)) ++lines;
  }
  if (spec.train + spec.val + spec.test > lines)
    throw ConfigError("split sizes " + std::to_string(spec.train + spec.val + spec.test) + " exceed " +
                      std::to_string(lines) + " records");

  std::vector<SplitRange> ranges{{"train", 0, spec.train, {}, {}},
                                 {"val", lines - spec.test - spec.val, lines - spec.test, {}, {}},
                                 {"test", lines - spec.test, lines, {}, {}}};
  std::ifstream in(data_path, std::ios::binary);
  std::vector<std::ofstream> outs;
  std::vector<Sha256> hashes(3);
  for (auto& r : ranges) {
    r.file = name + "." + r.name + ".jsonl";
    outs.emplace_back(dir / r.file, std::ios::binary | std::ios::trunc);
    if (!outs.back()) throw IoError("cannot write " + (dir / r.file).string());
  }
  std::string line;
  for (std::uint64_t i = 0; std::getline(in, line); ++i) {
    line += '\n';
    for (std::size_t k = 0; k < ranges.size(); ++k) {
      if (i >= ranges[k].begin && i < ranges[k].end) {
        outs[k] << line;
        hashes[k].update(line);
      }
    }
  }
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    outs[k].close();
    if (!outs[k]) throw IoError("write failed for " + ranges[k].file);
    ranges[k].sha256 = hashes[k].hex_digest();
  }
  m.splits = ranges;
  write_file(manifest_path, m.json());
  return m;
}

}  // namespace searchlab::pipeline
