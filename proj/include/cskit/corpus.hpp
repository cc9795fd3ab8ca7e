#pragma once
// Dialogue corpora: streaming readers/writers, the commonsense filter, and
// corpus statistics.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cskit/concepts.hpp"
#include "cskit/dialogue.hpp"
#include "cskit/kg_store.hpp"
#include "cskit/triple_match.hpp"

namespace cskit {

// Parse or schema failure; the message names the line or key.
class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CorpusFormat { keyed_json, jsonl };

std::string_view to_string(CorpusFormat f);
// "keyed-json" or "jsonl"; throws std::invalid_argument otherwise.
CorpusFormat parse_corpus_format(std::string_view name);

// Yields dialogues in file order. jsonl is read a line at a time; keyed-json
// is a single object and is parsed whole.
class CorpusReader {
 public:
  CorpusReader(std::unique_ptr<std::istream> in, CorpusFormat format, std::string source_name);
  ~CorpusReader();
  CorpusReader(CorpusReader&&) noexcept;
  CorpusReader& operator=(CorpusReader&&) noexcept;

  static CorpusReader open(const std::filesystem::path& path, CorpusFormat format);
  static CorpusReader from_string(std::string text, CorpusFormat format,
                                  std::string source_name = "<string>");

  std::optional<Dialogue> next();
  // Dialogues dropped because no turn had text.
  std::size_t skipped_empty() const { return skipped_empty_; }

 private:
  struct State;
  std::unique_ptr<State> state_;
  std::size_t skipped_empty_ = 0;
};

std::vector<Dialogue> read_corpus(const std::filesystem::path& path, CorpusFormat format);

// Re-emits dialogues in either corpus format.
class CorpusWriter {
 public:
  CorpusWriter(std::ostream& out, CorpusFormat format);
  void write(const Dialogue& d);
  // Closes the keyed-json object; no-op for jsonl. Must be called once.
  void finish();

 private:
  std::ostream& out_;
  CorpusFormat format_;
  bool first_ = true;
  bool finished_ = false;
};

nlohmann::ordered_json report_to_json(const DialogueMatchReport& report);

struct MatchSummary {
  std::uint64_t min = 0;
  double mean = 0.0;
  std::uint64_t max = 0;

  friend bool operator==(const MatchSummary&, const MatchSummary&) = default;
};

struct CorpusStats {
  std::uint64_t total = 0;
  std::uint64_t kept = 0;
  double kept_fraction = 0.0;
  std::uint64_t skipped_empty = 0;
  std::map<std::string, std::uint64_t> relation_histogram;
  MatchSummary matches_per_dialogue;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

// Order-independent accumulation of per-dialogue reports.
class StatsAccumulator {
 public:
  void add(const DialogueMatchReport& report);
  // Same, from a serialized report line.
  void add_json(const nlohmann::json& report);
  void add_skipped(std::uint64_t n) { skipped_empty_ += n; }
  void merge(const StatsAccumulator& other);
  CorpusStats finish() const;

 private:
  void add_counts(bool has_match, std::uint64_t matches);

  std::uint64_t total_ = 0;
  std::uint64_t kept_ = 0;
  std::uint64_t skipped_empty_ = 0;
  std::uint64_t match_sum_ = 0;
  std::uint64_t match_min_ = UINT64_MAX;
  std::uint64_t match_max_ = 0;
  std::map<std::string, std::uint64_t> histogram_;
};

nlohmann::ordered_json stats_to_json(const CorpusStats& stats);
CorpusStats stats_from_json(const nlohmann::json& j);
// "63.6%" style, one decimal.
std::string format_percent(double fraction);
// Aligned human-readable table.
std::string stats_table(const CorpusStats& stats);

struct FilterOptions {
  std::size_t jobs = 0;  // 0 = hardware concurrency
  std::size_t batch_size = 512;
  std::size_t progress_every = 0;  // 0 = no progress callbacks
  std::function<void(std::uint64_t processed, std::uint64_t kept)> progress;
};

using DialogueSource = std::function<std::optional<Dialogue>()>;
// Called in input order for every dialogue; kept iff report.has_match.
using FilterSink = std::function<void(const Dialogue&, const DialogueMatchReport&)>;

// Streams dialogues through annotate_dialogue on a worker pool, preserving
// input order. Only the statistics are accumulated in memory.
CorpusStats filter_corpus(const ConceptGraph& graph, const ConceptExtractor& extractor,
                          const DialogueSource& source, const FilterSink& sink,
                          const FilterOptions& options = {});

struct FilterResult {
  std::vector<Dialogue> kept;
  std::vector<DialogueMatchReport> reports;
  CorpusStats stats;
};

FilterResult filter_corpus(const ConceptGraph& graph, const ConceptExtractor& extractor,
                           const std::vector<Dialogue>& dialogues, const FilterOptions& options = {});

}  // namespace cskit
