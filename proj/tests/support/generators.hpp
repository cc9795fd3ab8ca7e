#pragma once
// Seeded generators for property tests and synthetic datasets.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "cskit/dialogue.hpp"
#include "cskit/features.hpp"
#include "cskit/kg_store.hpp"
#include "cskit/mlp.hpp"
#include "cskit/rng.hpp"
#include "oracles.hpp"

namespace testing_support {

// Distinct lowercase nonsense words (consonant-vowel patterns) that the
// default extractor maps to themselves.
std::vector<std::string> pseudo_words(std::size_t n, std::uint64_t seed);

// n distinct triples over `names` without self-loops.
std::vector<RawTriple> random_triples(cskit::Rng& rng, const std::vector<std::string>& names, std::size_t n,
                                      std::size_t relations = 4);

cskit::ConceptGraph build_graph(const std::vector<RawTriple>& triples);

std::set<std::string> random_subset(cskit::Rng& rng, const std::vector<std::string>& names, std::size_t max_size);

struct Sentence {
  std::string text;
  std::size_t tokens = 0;  // count under the documented tokenizer rules
};

// Text whose concept set is exactly `words`: the words in random order,
// separated by stopword fillers, maybe capitalized, with end punctuation.
Sentence sentence_from(cskit::Rng& rng, const std::vector<std::string>& words);

struct MiniCorpus {
  std::vector<cskit::Dialogue> dialogues;
  std::vector<std::vector<std::set<std::string>>> concepts;  // per dialogue, per turn
};

MiniCorpus random_corpus(cskit::Rng& rng, const std::vector<std::string>& vocab, std::size_t dialogues);

struct SyntheticAnnotated {
  std::vector<RawTriple> triples;
  std::vector<cskit::AnnotatedExample> examples;
  std::vector<cskit::FeatureVector> oracle_features;  // symbolic part, computed by the oracles
};

// Scores are 1 + 9 * sigmoid(z) + noise, z increasing in every symbolic
// feature (standardized over the dataset).
SyntheticAnnotated synthetic_annotated(std::size_t n, std::uint64_t seed, double noise = 0.2);

// Feature-level dataset: z = w_sym * (standardized symbolic mean) +
// w_neu * (standardized neural mean) + noise * N(0, 1).
std::vector<cskit::TrainExample> synthetic_features(std::size_t n, std::uint64_t seed, double w_sym, double w_neu,
                                                    double noise);

}  // namespace testing_support
