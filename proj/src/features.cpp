#include "cskit/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>

#include "cskit/corpus.hpp"
#include "cskit/parallel.hpp"
#include "cskit/text_util.hpp"

namespace cskit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {"one_hop", "two_hop", "resp_len", "lm_resp",
                                                                       "lm_concat"};

Turn turn_from_json(const json& j) {
  if (!j.is_object() || !j.contains("text")) throw CorpusError("turn must be an object with \"text\"");
  Turn t;
  if (j.contains("speaker") && j["speaker"].is_string()) t.speaker = j["speaker"].get<std::string>();
  t.text = j["text"].get<std::string>();
  return t;
}

double checked_score(const json& j) {
  double s = j.at("human_score").get<double>();
  if (!(s >= 1.0 && s <= 10.0)) throw CorpusError("human_score " + j.at("human_score").dump() + " is outside [1, 10]");
  return s;
}

template <typename Row, typename Parse>
std::vector<Row> read_lines(std::istream& in, const std::string& source, Parse&& parse) {
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      rows.push_back(parse(json::parse(line), line_no));
    } catch (const json::exception& e) {
      throw CorpusError(source + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const CorpusError& e) {
      throw CorpusError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("read error in " + source);
  return rows;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

ConceptSet history_concepts(const ConceptExtractor& extractor, const std::vector<Turn>& history, HistoryScope scope) {
  ConceptSet set;
  if (history.empty()) return set;
  if (scope == HistoryScope::last_turn) return extractor.extract(history.back().text);
  for (const Turn& t : history) set = merge_concepts(set, extractor.extract(t.text));
  return set;
}

}  // namespace

std::string_view to_string(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

Feature parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  throw std::invalid_argument("unknown feature '" + std::string(name) + "'");
}

std::string_view to_string(FeatureMask m) {
  switch (m) {
    case FeatureMask::symbolic: return "symbolic";
    case FeatureMask::neural: return "neural";
    case FeatureMask::all: return "all";
  }
  return "?";
}

FeatureMask parse_mask(std::string_view name) {
  if (name == "symbolic") return FeatureMask::symbolic;
  if (name == "neural") return FeatureMask::neural;
  if (name == "all") return FeatureMask::all;
  throw std::invalid_argument("unknown feature mask '" + std::string(name) + "' (expected symbolic, neural or all)");
}

std::vector<Feature> active_features(FeatureMask m) {
  switch (m) {
    case FeatureMask::symbolic: return {Feature::one_hop, Feature::two_hop, Feature::resp_len};
    case FeatureMask::neural: return {Feature::lm_resp, Feature::lm_concat};
    case FeatureMask::all: return {kAllFeatures.begin(), kAllFeatures.end()};
  }
  return {};
}

ordered_json features_to_json(const FeatureVector& f) {
  ordered_json j = ordered_json::object();
  for (Feature k : kAllFeatures) {
    double v = f[k];
    // Counts print as integers.
    if (k == Feature::one_hop || k == Feature::two_hop || k == Feature::resp_len) {
      j[std::string(to_string(k))] = static_cast<std::int64_t>(v);
    } else {
      j[std::string(to_string(k))] = v;
    }
  }
  return j;
}

FeatureVector features_from_json(const json& j) {
  FeatureVector f;
  for (Feature k : kAllFeatures) f[k] = j.at(std::string(to_string(k))).get<double>();
  return f;
}

FeatureVector symbolic_features(const ConceptGraph& graph, const ConceptExtractor& extractor,
                                const std::vector<Turn>& history, const Turn& response,
                                const FeaturizeOptions& options) {
  if (trim(response.text).empty()) throw std::invalid_argument("response text is empty");
  FeatureVector f;
  ConceptSet earlier = history_concepts(extractor, history, options.scope);
  ConceptSet later = extractor.extract(response.text);
  f[Feature::one_hop] = static_cast<double>(match_pair(graph, earlier, later).one_hop_count());
  f[Feature::two_hop] = static_cast<double>(two_hop_count(graph, earlier, later, options.two_hop_cap).count);
  f[Feature::resp_len] = static_cast<double>(tokenize(response.text).size());
  return f;
}

FeatureVector featurize(const ConceptGraph& graph, const ConceptExtractor& extractor, LmScorer& scorer,
                        const std::vector<Turn>& history, const Turn& response, const FeaturizeOptions& options) {
  FeatureVector f = symbolic_features(graph, extractor, history, response, options);
  if (!scorer.is_null()) {
    auto [resp, concat] = score_pair(scorer, history, response, options.separator);
    f[Feature::lm_resp] = resp.mean();
    f[Feature::lm_concat] = concat.mean();
  }
  return f;
}

std::vector<FeatureVector> featurize_all(const ConceptGraph& graph, const ConceptExtractor& extractor,
                                         LmScorer& scorer, std::span<const AnnotatedExample> examples,
                                         const FeaturizeOptions& options) {
  std::vector<FeatureVector> out(examples.size());
  parallel_for(examples.size(), options.jobs, [&](std::size_t i) {
    out[i] = symbolic_features(graph, extractor, examples[i].history, examples[i].response, options);
  });
  if (scorer.is_null()) return out;

  // Two texts per example: response, then history + response.
  const std::size_t per_batch = std::max<std::size_t>(1, options.scorer_batch / 2);
  std::vector<std::string> texts;
  for (std::size_t start = 0; start < examples.size(); start += per_batch) {
    const std::size_t end = std::min(examples.size(), start + per_batch);
    texts.clear();
    for (std::size_t i = start; i < end; ++i) {
      texts.push_back(examples[i].response.text);
      texts.push_back(concat_history(examples[i].history, examples[i].response, options.separator));
    }
    auto scores = scorer.score_batch(texts);
    for (std::size_t i = start; i < end; ++i) {
      out[i][Feature::lm_resp] = scores[2 * (i - start)].mean();
      out[i][Feature::lm_concat] = scores[2 * (i - start) + 1].mean();
    }
  }
  return out;
}

std::vector<AnnotatedExample> read_annotations(std::istream& in, const std::string& source_name) {
  return read_lines<AnnotatedExample>(in, source_name, [](const json& j, std::size_t line_no) {
    if (!j.is_object()) throw CorpusError("expected an object");
    AnnotatedExample e;
    e.dialogue_id = j.contains("dialogue_id") && j["dialogue_id"].is_string() ? j["dialogue_id"].get<std::string>()
                                                                              : "line-" + std::to_string(line_no);
    if (j.contains("history")) {
      for (const auto& t : j.at("history")) e.history.push_back(turn_from_json(t));
    }
    e.response = turn_from_json(j.at("response"));
    if (trim(e.response.text).empty()) throw CorpusError("response text is empty");
    e.human_score = checked_score(j);
    return e;
  });
}

std::vector<AnnotatedExample> read_annotations(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_annotations(in, path.string());
}

ordered_json annotation_to_json(const AnnotatedExample& e) {
  ordered_json j;
  j["dialogue_id"] = e.dialogue_id;
  j["history"] = ordered_json::array();
  for (const Turn& t : e.history) j["history"].push_back(ordered_json{{"speaker", t.speaker}, {"text", t.text}});
  j["response"] = ordered_json{{"speaker", e.response.speaker}, {"text", e.response.text}};
  j["human_score"] = e.human_score;
  return j;
}

std::vector<AnnotatedExample> average_annotations(const std::vector<AnnotatedExample>& rows) {
  std::vector<AnnotatedExample> out;
  std::vector<std::size_t> counts;
  std::map<std::string, std::size_t> index;
  for (const AnnotatedExample& r : rows) {
    json key = json::array({r.dialogue_id, r.response.speaker, r.response.text});
    for (const Turn& t : r.history) key.push_back(json::array({t.speaker, t.text}));
    auto [it, inserted] = index.emplace(key.dump(), out.size());
    if (inserted) {
      out.push_back(r);
      counts.push_back(1);
    } else {
      out[it->second].human_score += r.human_score;
      ++counts[it->second];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].human_score /= static_cast<double>(counts[i]);
  return out;
}

ordered_json featurized_to_json(const FeaturizedExample& e) {
  ordered_json j;
  j["dialogue_id"] = e.dialogue_id;
  j["features"] = features_to_json(e.features);
  j["human_score"] = e.human_score;
  return j;
}

std::vector<FeaturizedExample> read_featurized(std::istream& in, const std::string& source_name) {
  return read_lines<FeaturizedExample>(in, source_name, [](const json& j, std::size_t line_no) {
    if (!j.is_object()) throw CorpusError("expected an object");
    FeaturizedExample e;
    e.dialogue_id = j.contains("dialogue_id") && j["dialogue_id"].is_string() ? j["dialogue_id"].get<std::string>()
                                                                              : "line-" + std::to_string(line_no);
    e.features = features_from_json(j.at("features"));
    for (double v : e.features.values) {
      if (!std::isfinite(v)) throw CorpusError("non-finite feature value");
    }
    e.human_score = checked_score(j);
    return e;
  });
}

std::vector<FeaturizedExample> read_featurized(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_featurized(in, path.string());
}

}  // namespace cskit
