#pragma once

#include <condition_variable>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "searchlab/countdown.hpp"
#include "searchlab/search.hpp"
#include "searchlab/sudoku.hpp"
#include "searchlab/trace.hpp"

namespace searchlab::pipeline {

inline constexpr int kManifestSchema = 1;
inline constexpr const char* kGeneratorVersion = "searchlab-gen-1";

/// Restores index order between parallel producers and one consumer.
/// put() blocks while the index is `capacity` or more ahead of the next
/// index to be taken, which bounds memory.
template <typename T>
class ReorderBuffer {
 public:
  explicit ReorderBuffer(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  void put(std::uint64_t index, T value) {
    std::unique_lock lock(mu_);
    room_.wait(lock, [&] { return closed_ || index < next_ + capacity_; });
    if (closed_) return;
    pending_.emplace(index, std::move(value));
    ready_.notify_all();
  }

  /// Next item in index order; nullopt once `end` items were taken or the
  /// buffer was closed.
  std::optional<T> take() {
    std::unique_lock lock(mu_);
    ready_.wait(lock, [&] { return closed_ || next_ == end_ || pending_.count(next_); });
    if (next_ == end_ || !pending_.count(next_)) return std::nullopt;
    auto node = pending_.extract(next_);
    ++next_;
    room_.notify_all();
    return std::move(node.mapped());
  }

  /// Declares how many items will be produced in total.
  void finish_at(std::uint64_t end) {
    std::lock_guard lock(mu_);
    end_ = end;
    ready_.notify_all();
  }

  /// Wakes everybody; used on failure.
  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    ready_.notify_all();
    room_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable ready_, room_;
  std::map<std::uint64_t, T> pending_;
  std::uint64_t next_ = 0;
  std::uint64_t end_ = UINT64_MAX;
  bool closed_ = false;
};

struct IngestIssue {
  std::size_t line = 0;
  std::string message;
};

struct SudokuRow {
  std::size_t line = 0;
  sudoku::Board puzzle;
  std::optional<sudoku::Board> solution;
};

/// Streams boards from an 81-character CSV or line file. Accepted headers
/// name a puzzle column ("puzzle" or "quizzes") and optionally a solution
/// column ("solution" or "solutions"); headerless rows are "puzzle" or
/// "puzzle,solution". Bad rows are recorded with their line number and
/// skipped; more than `max_invalid` of them throws ParseError.
class SudokuReader {
 public:
  explicit SudokuReader(const std::string& path, std::size_t max_invalid = 0);

  std::optional<SudokuRow> next();
  const std::vector<IngestIssue>& issues() const { return issues_; }

 private:
  void reject(std::size_t line, std::string message);

  std::ifstream in_;
  std::size_t max_invalid_;
  std::size_t line_ = 0;
  std::size_t puzzle_col_ = 0;
  std::optional<std::size_t> solution_col_;
  bool header_checked_ = false;
  std::vector<IngestIssue> issues_;
};

struct DatasetSpec {
  std::string name = "dataset";
  std::string out_dir = ".";
  trace::Dialect dialect;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  search::Policy policy = search::default_policy();
  trace::SearchBudget budget;
  unsigned workers = 1;
  countdown::GenConfig gen;
  bool stacked = false;
  std::string corpus;  // sudoku only
  std::string strategies = "seven-v1";  // sudoku only
  std::size_t max_invalid_rows = 0;
  bool raw_text = false;

  void validate() const;
};

struct Counts {
  std::uint64_t total = 0;
  std::uint64_t solved = 0;
  std::uint64_t unsolved = 0;
  std::uint64_t budget_exhausted = 0;
};

struct SplitRange {
  std::string name;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  std::string file;
  std::string sha256;
};

struct Manifest {
  std::string name;
  trace::Dialect dialect;
  std::uint64_t seed = 0;
  std::string policy;
  Counts counts;
  std::uint64_t records = 0;  // lines written (direct datasets keep solved only)
  double solved_fraction = 0.0;  // rounded to 4 places
  std::optional<std::uint64_t> brute_force_solvable;  // countdown only
  std::string vocab_version;
  std::string vocab_hash;
  std::uint64_t vocab_size = 0;
  std::uint64_t max_tokens = 0;
  std::uint64_t max_nodes = 0;
  std::string file;
  std::string sha256;
  std::string corpus_sha256;  // sudoku only
  std::vector<IngestIssue> ingest_issues;
  std::vector<SplitRange> splits;

  std::string json() const;
  static Manifest from_json(const std::string& text);
};

/// Writes {out_dir}/{name}.jsonl (and .txt when raw_text) plus
/// {name}.manifest.json. Output bytes depend only on the DatasetSpec and corpus
/// bytes, never on the worker count.
Manifest generate_dataset(const DatasetSpec& spec);

struct SplitSpec {
  std::uint64_t train = 0;
  std::uint64_t val = 0;
  std::uint64_t test = 0;
};

/// Contiguous split of {dir}/{name}.jsonl: train takes the head, test the
/// last records and val the records just before test. Writes
/// {name}.{train,val,test}.jsonl and records the ranges in the manifest.
Manifest split(const std::string& dir, const std::string& name, const SplitSpec& spec);

}  // namespace searchlab::pipeline
