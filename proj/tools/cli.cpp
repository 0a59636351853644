#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "searchlab/codec.hpp"
#include "searchlab/countdown.hpp"
#include "searchlab/error.hpp"
#include "searchlab/eval.hpp"
#include "searchlab/flops.hpp"
#include "searchlab/pipeline.hpp"
#include "searchlab/rng.hpp"
#include "searchlab/search.hpp"
#include "searchlab/sudoku.hpp"
#include "searchlab/tokenizer.hpp"

namespace searchlab::cli {

namespace {

using json = nlohmann::json;

std::string read_text(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
}

template <typename F>
void each_line(const std::string& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty()) f(line, n);
  }
}

std::vector<countdown::Number> parse_numbers(const std::string& text) {
  std::vector<countdown::Number> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw ConfigError("not a number: " + part);
    }
  }
  return out;
}

flops::ModelConfig model_from(const std::string& name, const std::string& file) {
  if (!file.empty()) return flops::config_from_text(read_text(file));
  return flops::named_config(name);
}

eval::Problem problem_from_record(const json& rec) {
  eval::Problem p;
  p.id = rec.at("id").get<std::string>();
  const auto& prob = rec.at("problem");
  if (prob.contains("puzzle")) {
    p.instance = sudoku::Board::parse(prob.at("puzzle").get<std::string>());
  } else {
    countdown::Puzzle cd;
    cd.id = p.id;
    cd.target = prob.at("target").get<countdown::Number>();
    cd.candidates = prob.at("nums").get<std::vector<countdown::Number>>();
    if (prob.value("variant", std::string("standard")) == "stacked") cd.partial_goal_index = countdown::kStackedPartialIndex;
    cd.validate();
    p.instance = cd;
  }
  return p;
}

std::string default_corpus() {
  if (const char* dir = std::getenv("SEARCHLAB_CORPUS_DIR")) return (std::filesystem::path(dir) / "sudoku.csv").string();
  return {};
}

void log_config(const CLI::App& sub, std::ostream& err) {
  err << "# searchlab " << sub.get_name() << "\n" << sub.config_to_str(true, false);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Search-trace generation, evaluation and compute accounting for CountDown and Sudoku"};
  app.name(args.empty() ? "searchlab" : std::filesystem::path(args[0]).filename().string());
  app.set_config("--conf", "", "Plain key=value config file; flags override it ([gen] sections or gen.key=value)");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a dataset: {name}.jsonl records and {name}.manifest.json");
  std::string g_game = "countdown", g_mode = "backtrack", g_policy = search::default_policy().str(), g_name = "dataset",
              g_out = ".", g_corpus = default_corpus(), g_split, g_target_mode = "reachable";
  std::uint64_t g_count = 0, g_seed = 0, g_nodes = 0, g_tokens = 4096, g_calibrate = 0;
  unsigned g_workers = 1;
  double g_rate = 0.57;
  bool g_stacked = false, g_raw = false;
  std::size_t g_invalid = 0;
  gen->add_option("--game", g_game, "countdown or sudoku")->check(CLI::IsMember({"countdown", "sudoku"}));
  gen->add_option("--dialect", g_mode, "backtrack, direct or think")->check(CLI::IsMember({"backtrack", "direct", "think"}));
  gen->add_option("--count", g_count, "Problems to generate (sudoku: rows to read)");
  gen->add_option("--seed", g_seed, "Seed for every random draw");
  gen->add_option("--policy", g_policy, "CountDown policy, e.g. dfs:sum:asc:prune@1x1.0 or bfs3:mult:desc:off");
  gen->add_option("--max-nodes", g_nodes, "Node cap per search (countdown states, sudoku guesses); 0 = none");
  gen->add_option("--max-tokens", g_tokens, "Token cap per trace; longer traces are cut and marked; 0 = none");
  gen->add_option("--workers", g_workers, "Worker threads; output does not depend on it")->check(CLI::Range(1u, 256u));
  gen->add_flag("--stacked", g_stacked, "Eight-number CountDown with an intermediate target");
  gen->add_option("--target-mode", g_target_mode, "reachable or uniform CountDown targets")
      ->check(CLI::IsMember({"reachable", "uniform"}));
  gen->add_option("--name", g_name, "Output file stem");
  gen->add_option("--out", g_out, "Output directory");
  gen->add_option("--corpus", g_corpus, "Sudoku CSV (default $SEARCHLAB_CORPUS_DIR/sudoku.csv)");
  gen->add_option("--max-invalid", g_invalid, "Invalid corpus rows tolerated before failing");
  gen->add_option("--split", g_split, "train,val,test sizes; contiguous, test taken from the tail");
  gen->add_option("--calibrate", g_calibrate, "Tune the pruning multiplier on this many fresh puzzles first");
  gen->add_option("--target-rate", g_rate, "Solve rate the calibration aims for")->check(CLI::Range(0.0, 1.0));
  gen->add_flag("--raw-text", g_raw, "Also write {name}.txt with bare traces");
  std::string g_strategies = sudoku::default_strategies().version;
  gen->add_option("--strategies", g_strategies, "Sudoku deduction set: seven-v1 or singles-v1");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one puzzle and print its trace");
  std::string s_game, s_nums, s_board, s_policy = search::default_policy().str(), s_mode = "backtrack";
  countdown::Number s_target = 0;
  std::uint64_t s_nodes = 0;
  solve->add_option("game", s_game, "countdown or sudoku")->required()->check(CLI::IsMember({"countdown", "sudoku"}));
  solve->add_option("--target", s_target, "CountDown target");
  solve->add_option("--nums", s_nums, "CountDown candidates, comma separated (8 makes a stacked puzzle)");
  solve->add_option("--board", s_board, "Sudoku board, 81 characters with 0 or . for blanks");
  solve->add_option("--policy", s_policy, "CountDown policy");
  solve->add_option("--dialect", s_mode, "backtrack, direct or think")->check(CLI::IsMember({"backtrack", "direct", "think"}));
  solve->add_option("--max-nodes", s_nodes, "Node cap; 0 = none");
  std::string s_strategies = sudoku::default_strategies().version;
  solve->add_option("--strategies", s_strategies, "Sudoku deduction set: seven-v1 or singles-v1");

  // trace
  auto* tr = app.add_subcommand("trace", "Validate or transform a trace file");
  std::string t_dialect = "countdown-backtrack", t_in = "-", t_op = "validate", t_out;
  tr->add_option("op", t_op, "validate, prune, think, mistakes or tokens")
      ->check(CLI::IsMember({"validate", "prune", "think", "mistakes", "tokens"}));
  tr->add_option("--dialect", t_dialect, "Dialect of the input, e.g. sudoku-backtrack");
  tr->add_option("--in", t_in, "Input file, - for stdin");
  tr->add_option("--out", t_out, "Output file, default stdout");

  // eval
  auto* ev = app.add_subcommand("eval", "Score generations {problem_id,sample_id,text} against a dataset");
  std::string e_dataset, e_gens, e_out, e_dialect = "countdown-backtrack", e_model = "17M", e_model_file;
  ev->add_option("--dataset", e_dataset, "Dataset JSONL holding the problems")->required();
  ev->add_option("--generations", e_gens, "Generations JSONL")->required();
  ev->add_option("--dialect", e_dialect, "Dialect of the generations");
  ev->add_option("--config", e_model, "Model config name for the flops column");
  ev->add_option("--config-file", e_model_file, "Custom model config (key=value)");
  ev->add_option("--out", e_out, "Records JSONL, default stdout");

  // flops
  auto* fl = app.add_subcommand("flops", "Inference FLOPs of a model config");
  std::string f_model = "17M", f_model_file;
  std::uint64_t f_tokens = 0, f_samples = 1;
  bool f_breakdown = false;
  fl->add_option("--config", f_model, "3M, 17M, 38M or 144M");
  fl->add_option("--config-file", f_model_file, "Custom config: name, d_model, layers, heads, kv_heads, d_ff");
  fl->add_option("--tokens", f_tokens, "Generated tokens per sequence")->required();
  fl->add_option("--samples", f_samples, "Number of sequences")->check(CLI::PositiveNumber);
  fl->add_flag("--breakdown", f_breakdown, "Print every term");

  // curve
  auto* cv = app.add_subcommand("curve", "Accuracy against FLOPs as CSV (flops,accuracy,mode,budget)");
  std::string c_records, c_mode = "sequential", c_model = "17M", c_model_file, c_budgets, c_out;
  std::uint64_t c_fixed = 4096;
  cv->add_option("--records", c_records, "Eval records JSONL")->required();
  cv->add_option("--mode", c_mode, "sequential (token budgets) or parallel (sample counts)")
      ->check(CLI::IsMember({"sequential", "parallel"}));
  cv->add_option("--budgets", c_budgets, "Comma-separated budgets")->required();
  cv->add_option("--config", c_model, "Model config name");
  cv->add_option("--config-file", c_model_file, "Custom model config");
  cv->add_option("--fixed-tokens", c_fixed, "Tokens per sample in parallel mode");
  cv->add_option("--out", c_out, "CSV path, default stdout");

  // ingest
  auto* in = app.add_subcommand("ingest", "Check a Sudoku corpus and report bad rows");
  std::string i_corpus = default_corpus();
  std::size_t i_invalid = SIZE_MAX;
  std::uint64_t i_check = 0;
  in->add_option("--corpus", i_corpus, "CSV or line file (default $SEARCHLAB_CORPUS_DIR/sudoku.csv)");
  in->add_option("--max-invalid", i_invalid, "Fail once more rows than this are bad");
  in->add_option("--oracle-check", i_check, "Compare this many provided solutions with a brute-force solve");

  // vocab
  auto* vo = app.add_subcommand("vocab", "Print a game vocabulary file");
  std::string v_game = "countdown";
  bool v_hash = false;
  vo->add_option("--game", v_game, "countdown or sudoku")->check(CLI::IsMember({"countdown", "sudoku"}));
  vo->add_flag("--hash", v_hash, "Print the content hash instead");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (gen->parsed()) {
      log_config(*gen, err);
      pipeline::DatasetSpec spec;
      spec.name = g_name;
      spec.out_dir = g_out;
      spec.dialect = trace::Dialect::parse(g_game + "-" + g_mode);
      spec.count = g_count;
      spec.seed = g_seed;
      spec.budget = {g_nodes, g_tokens};
      spec.workers = g_workers;
      spec.stacked = g_stacked;
      spec.corpus = g_corpus;
      spec.max_invalid_rows = g_invalid;
      spec.raw_text = g_raw;
      spec.strategies = g_strategies;
      spec.gen.target_mode = g_target_mode == "uniform" ? countdown::TargetMode::uniform : countdown::TargetMode::reachable;
      spec.policy = search::Policy::parse(g_policy);
      std::optional<pipeline::SplitSpec> split;
      if (!g_split.empty()) {
        const auto parts = parse_numbers(g_split);
        if (parts.size() != 3 || parts[0] < 0 || parts[1] < 0 || parts[2] < 0)
          throw ConfigError("--split takes three sizes: train,val,test");
        split = pipeline::SplitSpec{static_cast<std::uint64_t>(parts[0]), static_cast<std::uint64_t>(parts[1]),
                                    static_cast<std::uint64_t>(parts[2])};
      }
      spec.validate();
      if (g_calibrate > 0 && spec.dialect.game == trace::Game::countdown) {
        std::vector<countdown::Puzzle> sample;
        const std::uint64_t cal_seed = splitmix64(g_seed ^ 0xca11b7a7eULL);
        for (std::uint64_t i = 0; i < g_calibrate; ++i)
          sample.push_back(g_stacked ? countdown::make_stacked(cal_seed, spec.gen, i)
                                     : countdown::generate_puzzle(cal_seed, spec.gen, i));
        const auto cal = search::calibrate_prune_multiplier(sample, spec.policy, g_rate, {g_nodes, 0});
        for (const auto& [m, rate] : cal.sweep) err << "# calibrate multiplier=" << m.str() << " rate=" << rate << "\n";
        spec.policy.prune.enabled = true;
        spec.policy.prune.multiplier = cal.multiplier;
        err << "# calibrated policy " << spec.policy.str() << " (rate " << cal.solve_rate << ")\n";
      }
      err << "# seed=" << spec.seed << " policy=" << spec.policy.str() << "\n";
      auto m = pipeline::generate_dataset(spec);
      if (split) m = pipeline::split(spec.out_dir, spec.name, *split);
      out << m.json();
      return kOk;
    }

    if (solve->parsed()) {
      log_config(*solve, err);
      const auto dialect = trace::Dialect::parse(s_game + "-" + s_mode);
      trace::SearchTrace t;
      bool solved = false;
      if (s_game == "countdown") {
        if (s_nums.empty()) throw ConfigError("solve countdown needs --nums");
        countdown::Puzzle p;
        p.id = "cli";
        p.target = s_target;
        p.candidates = parse_numbers(s_nums);
        if (p.candidates.size() == countdown::kStackedCount) p.partial_goal_index = countdown::kStackedPartialIndex;
        p.validate();
        auto o = search::search(p, search::Policy::parse(s_policy), {s_nodes, 0});
        solved = o.status == search::Status::solved;
        t = std::move(o.trace);
        err << "# status " << search::to_string(o.status) << "\n";
      } else {
        if (s_board.empty()) throw ConfigError("solve sudoku needs --board");
        auto o = sudoku::solve(sudoku::Board::parse(s_board), {s_nodes, 0}, sudoku::strategy_set(s_strategies));
        solved = o.status == sudoku::SolveStatus::solved;
        t = std::move(o.trace);
        err << "# status " << sudoku::to_string(o.status) << "\n";
      }
      if (dialect.mode == trace::Mode::direct) {
        if (!solved) return kDomainFailure;
        t = codec::prune_to_direct(t);
      } else if (dialect.mode == trace::Mode::think) {
        t = codec::shorten_think(t);
      }
      out << codec::serialize(t, dialect);
      return solved ? kOk : kDomainFailure;
    }

    if (tr->parsed()) {
      log_config(*tr, err);
      const auto dialect = trace::Dialect::parse(t_dialect);
      const std::string text = read_text(t_in);
      const auto parsed = codec::parse(text, dialect);
      if (t_op == "validate") {
        std::string report;
        for (const auto& v : parsed.report.violations)
          report += "line " + std::to_string(v.line) + ": " + codec::to_string(v.kind) + ": " + v.message + "\n";
        report += std::string("goal: ") + (parsed.report.goal_present ? "yes" : "no") +
                  "\ntruncated: " + (parsed.report.truncated ? "yes" : "no") +
                  "\nviolations: " + std::to_string(parsed.report.violations.size()) + "\n";
        emit(t_out, report, out);
        return parsed.report.clean() ? kOk : kDomainFailure;
      }
      if (t_op == "mistakes") {
        emit(t_out, std::to_string(codec::count_mistakes(parsed.trace)) + "\n", out);
        return kOk;
      }
      if (t_op == "tokens") {
        emit(t_out, std::to_string(tokenizer::count_tokens(text, tokenizer::build_vocab(dialect.game))) + "\n", out);
        return kOk;
      }
      if (!parsed.report.clean()) {
        err << "input trace has " << parsed.report.violations.size() << " violations\n";
        return kDomainFailure;
      }
      if (t_op == "prune") {
        emit(t_out, codec::serialize(codec::prune_to_direct(parsed.trace), {dialect.game, trace::Mode::direct}), out);
      } else {
        emit(t_out, codec::serialize(codec::shorten_think(parsed.trace), {dialect.game, trace::Mode::think}), out);
      }
      return kOk;
    }

    if (ev->parsed()) {
      log_config(*ev, err);
      const auto dialect = trace::Dialect::parse(e_dialect);
      const auto model = model_from(e_model, e_model_file);
      eval::ProblemSet problems;
      each_line(e_dataset, [&](const std::string& line, std::size_t) { problems.add(problem_from_record(json::parse(line))); });
      std::string records;
      std::size_t total = 0, correct = 0;
      each_line(e_gens, [&](const std::string& line, std::size_t n) {
        const auto j = json::parse(line);
        if (!j.contains("problem_id") || !j.contains("sample_id") || !j.contains("text"))
          throw ParseError("generation line " + std::to_string(n) + " needs problem_id, sample_id and text");
        const auto r = eval::score(problems, j["problem_id"].get<std::string>(), j["sample_id"].get<std::uint64_t>(),
                                   j["text"].get<std::string>(), dialect, &model);
        ++total;
        correct += r.correct ? 1 : 0;
        records += eval::record_json(r) + "\n";
      });
      emit(e_out, records, out);
      err << "# scored " << total << " generations, " << correct << " correct\n";
      return kOk;
    }

    if (fl->parsed()) {
      log_config(*fl, err);
      const auto model = model_from(f_model, f_model_file);
      const auto b = flops::flops_breakdown(model, f_tokens, f_samples);
      if (f_breakdown) {
        out << "config " << model.name << "\nkv_dim " << flops::kv_dim(model) << "\nlinear_per_token "
            << b.linear_per_token << "\nattention_quadratic " << b.attention_quadratic << "\nper_sequence "
            << b.per_sequence << "\ntotal " << b.total << "\n";
      } else {
        out << b.total << "\n";
      }
      return kOk;
    }

    if (cv->parsed()) {
      log_config(*cv, err);
      const auto model = model_from(c_model, c_model_file);
      std::vector<eval::EvalRecord> records;
      std::vector<std::string> problems;
      std::set<std::string> seen;
      each_line(c_records, [&](const std::string& line, std::size_t) {
        records.push_back(eval::record_from_json(line));
        if (seen.insert(records.back().problem_id).second) problems.push_back(records.back().problem_id);
      });
      std::vector<std::uint64_t> budgets;
      for (auto v : parse_numbers(c_budgets)) {
        if (v < 0) throw ConfigError("budgets must be non-negative");
        budgets.push_back(static_cast<std::uint64_t>(v));
      }
      const auto mode = c_mode == "parallel" ? eval::CurveMode::parallel : eval::CurveMode::sequential;
      emit(c_out, eval::curve_csv(eval::build_curve(records, problems, model, budgets, mode, c_fixed)), out);
      return kOk;
    }

    if (in->parsed()) {
      log_config(*in, err);
      if (i_corpus.empty()) throw ConfigError("ingest needs --corpus or SEARCHLAB_CORPUS_DIR");
      pipeline::SudokuReader reader(i_corpus, i_invalid);
      std::uint64_t rows = 0, checked = 0, disagreements = 0;
      while (auto row = reader.next()) {
        ++rows;
        if (checked < i_check && row->solution) {
          ++checked;
          sudoku::Board oracle;
          if (sudoku::count_solutions(row->puzzle, 1, &oracle) != 1 || !(oracle == *row->solution)) {
            ++disagreements;
            err << "line " << row->line << ": provided solution differs from brute force\n";
          }
        }
      }
      for (const auto& issue : reader.issues()) out << "line " << issue.line << ": " << issue.message << "\n";
      out << "valid " << rows << "\ninvalid " << reader.issues().size() << "\n";
      if (i_check) out << "oracle_checked " << checked << "\noracle_disagreements " << disagreements << "\n";
      return disagreements ? kDomainFailure : kOk;
    }

    if (vo->parsed()) {
      log_config(*vo, err);
      const auto& vocab = tokenizer::build_vocab(trace::game_from_string(v_game));
      out << (v_hash ? vocab.content_hash() + "\n" : vocab.file_text());
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  return kUsage;
}

}  // namespace searchlab::cli
