#pragma once
// One-hop matching and two-hop path counting between two concept sets.

#include <cstdint>
#include <string>
#include <vector>

#include "cskit/concepts.hpp"
#include "cskit/dialogue.hpp"
#include "cskit/kg_store.hpp"

namespace cskit {

enum class Direction : std::uint8_t {
  forward,   // source concept is the triple's head
  backward,  // source concept is the triple's tail
};

std::string_view to_string(Direction d);

struct Match {
  TripleId triple_id;
  Triple triple;
  std::string source;  // member of the earlier set
  std::string target;  // member of the later set
  Direction direction;
};

struct MatchSet {
  std::vector<Match> matches;  // ordered by (triple id, direction)

  std::size_t one_hop_count() const { return matches.size(); }
};

struct TwoHopCount {
  std::uint64_t count = 0;
  bool capped = false;

  friend bool operator==(const TwoHopCount&, const TwoHopCount&) = default;
};

inline constexpr std::uint64_t kDefaultTwoHopCap = 10'000;

// Every triple linking a concept of `earlier` to a different concept of
// `later`, in either orientation.
MatchSet match_pair(const ConceptGraph& graph, const ConceptSet& earlier, const ConceptSet& later);

// Number of ordered triple pairs (t1, t2) forming a path a - m - b with
// a in earlier, b in later, a != b and m distinct from both. Enumeration
// stops once `cap` paths are found, with capped = true. Throws
// std::invalid_argument when cap is 0.
TwoHopCount two_hop_count(const ConceptGraph& graph, const ConceptSet& earlier,
                          const ConceptSet& later, std::uint64_t cap = kDefaultTwoHopCap);

struct PairReport {
  std::size_t index = 0;  // pair (turn index, turn index + 1)
  ConceptSet earlier;
  ConceptSet later;
  MatchSet matches;
};

struct DialogueMatchReport {
  std::string dialogue_id;
  std::vector<PairReport> pairs;
  bool has_match = false;

  std::size_t total_matches() const;
};

DialogueMatchReport annotate_dialogue(const ConceptGraph& graph, const ConceptExtractor& extractor,
                                      const Dialogue& dialogue);

}  // namespace cskit
