#include "cskit/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include "cskit/parallel.hpp"
#include "cskit/text_util.hpp"

namespace cskit {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(CorpusFormat f) { return f == CorpusFormat::keyed_json ? "keyed-json" : "jsonl"; }

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "keyed-json") return CorpusFormat::keyed_json;
  if (name == "jsonl") return CorpusFormat::jsonl;
  throw std::invalid_argument("unknown corpus format '" + std::string(name) + "' (expected keyed-json or jsonl)");
}

namespace {

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Keeps only turns with non-blank text.
void add_turn(Dialogue& d, std::string speaker, const std::string& text) {
  if (trim(text).empty()) return;
  d.turns.push_back(Turn{std::move(speaker), text});
}

}  // namespace

struct CorpusReader::State {
  std::unique_ptr<std::istream> in;
  CorpusFormat format;
  std::string source;
  std::size_t line_no = 0;
  // keyed-json only
  bool loaded = false;
  ordered_json doc;
  ordered_json::const_iterator it;

  std::string where(std::size_t line) const { return source + ":" + std::to_string(line); }

  std::optional<Dialogue> next_jsonl(std::size_t& skipped) {
    std::string line;
    while (std::getline(*in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw CorpusError(where(line_no) + ": invalid JSON: " + e.what());
      }
      Dialogue d;
      try {
        if (!j.is_object()) throw CorpusError("expected an object");
        if (j.contains("id") && !j["id"].is_null()) {
          d.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
        } else {
          d.id = "line-" + std::to_string(line_no);
        }
        if (j.contains("context") && !j["context"].is_null()) d.context = j["context"].get<std::string>();
        if (!j.contains("turns") || !j["turns"].is_array()) throw CorpusError("missing \"turns\" array");
        for (const auto& t : j["turns"]) {
          if (!t.is_object() || !t.contains("text")) throw CorpusError("turn without \"text\"");
          std::string speaker = t.contains("speaker") && t["speaker"].is_string() ? t["speaker"].get<std::string>() : "";
          add_turn(d, std::move(speaker), t["text"].get<std::string>());
        }
      } catch (const json::exception& e) {
        throw CorpusError(where(line_no) + ": " + e.what());
      } catch (const CorpusError& e) {
        throw CorpusError(where(line_no) + ": " + e.what());
      }
      if (d.turns.empty()) {
        ++skipped;
        continue;
      }
      return d;
    }
    if (in->bad()) throw IoError("read error in " + source);
    return std::nullopt;
  }

  void load_keyed() {
    std::string text((std::istreambuf_iterator<char>(*in)), std::istreambuf_iterator<char>());
    if (in->bad()) throw IoError("read error in " + source);
    loaded = true;
    if (trim(text).empty()) {
      doc = ordered_json::object();
    } else {
      try {
        doc = ordered_json::parse(text);
      } catch (const json::parse_error& e) {
        throw CorpusError(where(line_of_byte(text, e.byte)) + ": invalid JSON: " + e.what());
      }
    }
    if (!doc.is_object()) throw CorpusError(source + ": keyed-json corpus must be a top-level object");
    it = doc.cbegin();
  }

  std::optional<Dialogue> next_keyed(std::size_t& skipped) {
    if (!loaded) load_keyed();
    for (; it != doc.cend(); ++it) {
      const std::string& key = it.key();
      const ordered_json& v = it.value();
      Dialogue d;
      d.id = key;
      try {
        if (!v.is_object()) throw CorpusError("entry is not an object");
        if (v.contains("context") && !v["context"].is_null()) d.context = v["context"].get<std::string>();
        std::string first = v.contains("speaker") && v["speaker"].is_string() ? v["speaker"].get<std::string>()
                                                                                : std::string("speaker");
        if (!v.contains("turns") || !v["turns"].is_array()) throw CorpusError("missing \"turns\" array");
        std::size_t i = 0;
        for (const auto& t : v["turns"]) {
          add_turn(d, i % 2 == 0 ? first : std::string("friend"), t.get<std::string>());
          ++i;
        }
      } catch (const json::exception& e) {
        throw CorpusError(source + ": key \"" + key + "\": " + e.what());
      } catch (const CorpusError& e) {
        throw CorpusError(source + ": key \"" + key + "\": " + e.what());
      }
      if (d.turns.empty()) {
        ++skipped;
        continue;
      }
      ++it;
      return d;
    }
    return std::nullopt;
  }
};

CorpusReader::CorpusReader(std::unique_ptr<std::istream> in, CorpusFormat format, std::string source_name)
    : state_(std::make_unique<State>()) {
  state_->in = std::move(in);
  state_->format = format;
  state_->source = std::move(source_name);
}

CorpusReader::~CorpusReader() = default;
CorpusReader::CorpusReader(CorpusReader&&) noexcept = default;
CorpusReader& CorpusReader::operator=(CorpusReader&&) noexcept = default;

CorpusReader CorpusReader::open(const std::filesystem::path& path, CorpusFormat format) {
  auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*in) throw IoError("cannot open " + path.string());
  return CorpusReader(std::move(in), format, path.string());
}

CorpusReader CorpusReader::from_string(std::string text, CorpusFormat format, std::string source_name) {
  return CorpusReader(std::make_unique<std::istringstream>(std::move(text)), format, std::move(source_name));
}

std::optional<Dialogue> CorpusReader::next() {
  return state_->format == CorpusFormat::jsonl ? state_->next_jsonl(skipped_empty_)
                                               : state_->next_keyed(skipped_empty_);
}

std::vector<Dialogue> read_corpus(const std::filesystem::path& path, CorpusFormat format) {
  auto reader = CorpusReader::open(path, format);
  std::vector<Dialogue> out;
  while (auto d = reader.next()) out.push_back(std::move(*d));
  return out;
}

CorpusWriter::CorpusWriter(std::ostream& out, CorpusFormat format) : out_(out), format_(format) {}

void CorpusWriter::write(const Dialogue& d) {
  if (format_ == CorpusFormat::jsonl) {
    ordered_json j;
    j["id"] = d.id;
    j["context"] = d.context ? json(*d.context) : json(nullptr);
    j["turns"] = ordered_json::array();
    for (const Turn& t : d.turns) j["turns"].push_back(ordered_json{{"speaker", t.speaker}, {"text", t.text}});
    out_ << j.dump() << '\n';
    return;
  }
  ordered_json v;
  v["context"] = d.context.value_or("");
  v["speaker"] = d.turns.empty() ? std::string("speaker") : d.turns.front().speaker;
  v["turns"] = ordered_json::array();
  for (const Turn& t : d.turns) v["turns"].push_back(t.text);
  out_ << (first_ ? "{\n  " : ",\n  ") << json(d.id).dump() << ": " << v.dump();
  first_ = false;
}

void CorpusWriter::finish() {
  if (finished_) return;
  finished_ = true;
  if (format_ == CorpusFormat::keyed_json) out_ << (first_ ? "{}\n" : "\n}\n");
}

ordered_json report_to_json(const DialogueMatchReport& report) {
  ordered_json j;
  j["dialogue_id"] = report.dialogue_id;
  j["pairs"] = ordered_json::array();
  for (const PairReport& p : report.pairs) {
    ordered_json pj;
    pj["index"] = p.index;
    pj["matches"] = ordered_json::array();
    for (const Match& m : p.matches.matches) {
      pj["matches"].push_back(ordered_json{{"head", m.triple.head},
                                           {"relation", m.triple.relation},
                                           {"tail", m.triple.tail},
                                           {"source", m.source},
                                           {"target", m.target},
                                           {"direction", to_string(m.direction)}});
    }
    pj["one_hop_count"] = p.matches.one_hop_count();
    j["pairs"].push_back(std::move(pj));
  }
  j["has_match"] = report.has_match;
  return j;
}

void StatsAccumulator::add_counts(bool has_match, std::uint64_t matches) {
  ++total_;
  if (has_match) ++kept_;
  match_sum_ += matches;
  match_min_ = std::min(match_min_, matches);
  match_max_ = std::max(match_max_, matches);
}

void StatsAccumulator::add(const DialogueMatchReport& report) {
  std::uint64_t n = 0;
  for (const PairReport& p : report.pairs) {
    for (const Match& m : p.matches.matches) ++histogram_[m.triple.relation];
    n += p.matches.one_hop_count();
  }
  add_counts(report.has_match, n);
}

void StatsAccumulator::add_json(const json& report) {
  std::uint64_t n = 0;
  for (const auto& p : report.at("pairs")) {
    for (const auto& m : p.at("matches")) ++histogram_[m.at("relation").get<std::string>()];
    n += p.at("matches").size();
  }
  add_counts(report.at("has_match").get<bool>(), n);
}

void StatsAccumulator::merge(const StatsAccumulator& o) {
  total_ += o.total_;
  kept_ += o.kept_;
  skipped_empty_ += o.skipped_empty_;
  match_sum_ += o.match_sum_;
  match_min_ = std::min(match_min_, o.match_min_);
  match_max_ = std::max(match_max_, o.match_max_);
  for (const auto& [k, v] : o.histogram_) histogram_[k] += v;
}

CorpusStats StatsAccumulator::finish() const {
  CorpusStats s;
  s.total = total_;
  s.kept = kept_;
  s.kept_fraction = total_ > 0 ? static_cast<double>(kept_) / static_cast<double>(total_) : 0.0;
  s.skipped_empty = skipped_empty_;
  s.relation_histogram = histogram_;
  if (total_ > 0) {
    s.matches_per_dialogue = {match_min_, static_cast<double>(match_sum_) / static_cast<double>(total_), match_max_};
  }
  return s;
}

ordered_json stats_to_json(const CorpusStats& s) {
  ordered_json j;
  j["total"] = s.total;
  j["kept"] = s.kept;
  j["kept_fraction"] = s.kept_fraction;
  j["skipped_empty"] = s.skipped_empty;
  j["relation_histogram"] = ordered_json::object();
  for (const auto& [k, v] : s.relation_histogram) j["relation_histogram"][k] = v;
  j["matches_per_dialogue"] = ordered_json{
      {"min", s.matches_per_dialogue.min}, {"mean", s.matches_per_dialogue.mean}, {"max", s.matches_per_dialogue.max}};
  return j;
}

CorpusStats stats_from_json(const json& j) {
  CorpusStats s;
  s.total = j.at("total").get<std::uint64_t>();
  s.kept = j.at("kept").get<std::uint64_t>();
  s.kept_fraction = j.at("kept_fraction").get<double>();
  s.skipped_empty = j.value("skipped_empty", std::uint64_t{0});
  for (const auto& [k, v] : j.at("relation_histogram").items()) s.relation_histogram[k] = v.get<std::uint64_t>();
  const auto& m = j.at("matches_per_dialogue");
  s.matches_per_dialogue = {m.at("min").get<std::uint64_t>(), m.at("mean").get<double>(),
                            m.at("max").get<std::uint64_t>()};
  return s;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
  return buf;
}

std::string stats_table(const CorpusStats& s) {
  std::ostringstream os;
  auto row = [&](std::string_view label, const std::string& value) {
    os << std::left << std::setw(22) << label << std::right << std::setw(12) << value << '\n';
  };
  row("dialogues total", std::to_string(s.total));
  row("dialogues kept", std::to_string(s.kept));
  row("kept fraction", format_percent(s.kept_fraction));
  if (s.skipped_empty > 0) row("skipped (no turns)", std::to_string(s.skipped_empty));
  char mean[32];
  std::snprintf(mean, sizeof mean, "%.3f", s.matches_per_dialogue.mean);
  row("matches/dialogue min", std::to_string(s.matches_per_dialogue.min));
  row("matches/dialogue mean", mean);
  row("matches/dialogue max", std::to_string(s.matches_per_dialogue.max));
  if (!s.relation_histogram.empty()) {
    os << '\n';
    row("relation", "matches");
    // Most frequent first, ties by name.
    std::vector<std::pair<std::string, std::uint64_t>> rows(s.relation_histogram.begin(), s.relation_histogram.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [rel, n] : rows) row(rel, std::to_string(n));
  }
  return os.str();
}

CorpusStats filter_corpus(const ConceptGraph& graph, const ConceptExtractor& extractor,
                          const DialogueSource& source, const FilterSink& sink, const FilterOptions& options) {
  const std::size_t jobs = resolve_jobs(options.jobs);
  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  StatsAccumulator acc;
  std::vector<Dialogue> batch;
  std::vector<DialogueMatchReport> reports;
  std::uint64_t processed = 0;
  std::uint64_t next_progress = options.progress_every;
  bool done = false;
  while (!done) {
    batch.clear();
    while (batch.size() < batch_size) {
      auto d = source();
      if (!d) {
        done = true;
        break;
      }
      batch.push_back(std::move(*d));
    }
    reports.assign(batch.size(), {});
    parallel_for(batch.size(), jobs, [&](std::size_t i) { reports[i] = annotate_dialogue(graph, extractor, batch[i]); });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      acc.add(reports[i]);
      if (sink) sink(batch[i], reports[i]);
    }
    processed += batch.size();
    if (options.progress && options.progress_every > 0 && processed >= next_progress) {
      options.progress(processed, acc.finish().kept);
      while (next_progress <= processed) next_progress += options.progress_every;
    }
  }
  return acc.finish();
}

FilterResult filter_corpus(const ConceptGraph& graph, const ConceptExtractor& extractor,
                           const std::vector<Dialogue>& dialogues, const FilterOptions& options) {
  FilterResult result;
  std::size_t i = 0;
  DialogueSource source = [&]() -> std::optional<Dialogue> {
    if (i >= dialogues.size()) return std::nullopt;
    return dialogues[i++];
  };
  result.stats = filter_corpus(
      graph, extractor, source,
      [&](const Dialogue& d, const DialogueMatchReport& r) {
        if (r.has_match) result.kept.push_back(d);
        result.reports.push_back(r);
      },
      options);
  return result;
}

}  // namespace cskit
