#pragma once
// (history, response) -> symbolic and language-model features, plus the
// annotated / featurized dataset formats.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cskit/concepts.hpp"
#include "cskit/dialogue.hpp"
#include "cskit/kg_store.hpp"
#include "cskit/lm_bridge.hpp"
#include "cskit/triple_match.hpp"

namespace cskit {

enum class Feature : std::uint8_t { one_hop, two_hop, resp_len, lm_resp, lm_concat };
inline constexpr std::size_t kNumFeatures = 5;
inline constexpr std::array<Feature, kNumFeatures> kAllFeatures = {Feature::one_hop, Feature::two_hop, Feature::resp_len,
                                                                   Feature::lm_resp, Feature::lm_concat};

std::string_view to_string(Feature f);
Feature parse_feature(std::string_view name);

struct FeatureVector {
  std::array<double, kNumFeatures> values{};

  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class FeatureMask : std::uint8_t { symbolic, neural, all };

std::string_view to_string(FeatureMask m);
// "symbolic", "neural" or "all".
FeatureMask parse_mask(std::string_view name);
std::vector<Feature> active_features(FeatureMask m);

nlohmann::ordered_json features_to_json(const FeatureVector& f);
FeatureVector features_from_json(const nlohmann::json& j);

enum class HistoryScope : std::uint8_t { all_turns, last_turn };

struct FeaturizeOptions {
  HistoryScope scope = HistoryScope::all_turns;
  std::uint64_t two_hop_cap = kDefaultTwoHopCap;
  std::string separator = "\n";
  std::size_t jobs = 0;            // symbolic features; 0 = hardware concurrency
  std::size_t scorer_batch = 64;   // texts per scorer request batch
};

struct AnnotatedExample {
  std::string dialogue_id;
  std::vector<Turn> history;
  Turn response;
  double human_score = 0.0;
};

// Graph and concept features only; lm fields left 0.
FeatureVector symbolic_features(const ConceptGraph& graph, const ConceptExtractor& extractor,
                                const std::vector<Turn>& history, const Turn& response,
                                const FeaturizeOptions& options = {});

FeatureVector featurize(const ConceptGraph& graph, const ConceptExtractor& extractor, LmScorer& scorer,
                        const std::vector<Turn>& history, const Turn& response, const FeaturizeOptions& options = {});

// Aligned with examples. Symbolic features run on a worker pool; scorer
// requests are batched.
std::vector<FeatureVector> featurize_all(const ConceptGraph& graph, const ConceptExtractor& extractor,
                                         LmScorer& scorer, std::span<const AnnotatedExample> examples,
                                         const FeaturizeOptions& options = {});

// Annotated dataset: one JSON object per line with dialogue_id, history,
// response and human_score in [1, 10]. Errors name the line.
std::vector<AnnotatedExample> read_annotations(std::istream& in, const std::string& source_name = "<input>");
std::vector<AnnotatedExample> read_annotations(const std::filesystem::path& path);
nlohmann::ordered_json annotation_to_json(const AnnotatedExample& e);

// Rows sharing dialogue id, history and response (e.g. one per annotator)
// collapse to one row with the mean score, in first-appearance order.
std::vector<AnnotatedExample> average_annotations(const std::vector<AnnotatedExample>& rows);

struct FeaturizedExample {
  std::string dialogue_id;
  FeatureVector features;
  double human_score = 0.0;
};

// Featurized dataset: {"dialogue_id", "features": {...}, "human_score"} per line.
nlohmann::ordered_json featurized_to_json(const FeaturizedExample& e);
std::vector<FeaturizedExample> read_featurized(std::istream& in, const std::string& source_name = "<input>");
std::vector<FeaturizedExample> read_featurized(const std::filesystem::path& path);

}  // namespace cskit
