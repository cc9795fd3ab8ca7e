#include "cskit/triple_match.hpp"

#include <algorithm>
#include <stdexcept>

namespace cskit {

namespace {

// Graph ids of the members of a concept set that exist in the graph, sorted.
std::vector<ConceptId> resolve(const ConceptGraph& graph, const ConceptSet& set) {
  std::vector<ConceptId> ids;
  ids.reserve(set.size());
  for (const std::string& c : set) {
    if (auto id = graph.find_concept(c)) ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

bool member(const std::vector<ConceptId>& sorted, ConceptId id) {
  return std::binary_search(sorted.begin(), sorted.end(), id);
}

ConceptId other_end(const TripleRecord& r, Role role) { return role == Role::subject ? r.tail : r.head; }

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

MatchSet match_pair(const ConceptGraph& graph, const ConceptSet& earlier, const ConceptSet& later) {
  MatchSet out;
  const auto sources = resolve(graph, earlier);
  const auto targets = resolve(graph, later);
  if (sources.empty() || targets.empty()) return out;

  for (ConceptId a : sources) {
    for (const Incidence& inc : graph.incident(a)) {
      const TripleRecord& r = graph.record(inc.triple);
      ConceptId b = other_end(r, inc.role);
      if (b == a || !member(targets, b)) continue;
      out.matches.push_back(Match{inc.triple, graph.triple(inc.triple), graph.concept_name(a),
                                  graph.concept_name(b),
                                  inc.role == Role::subject ? Direction::forward : Direction::backward});
    }
  }
  std::sort(out.matches.begin(), out.matches.end(), [](const Match& x, const Match& y) {
    if (x.triple_id != y.triple_id) return x.triple_id < y.triple_id;
    return x.direction < y.direction;
  });
  return out;
}

TwoHopCount two_hop_count(const ConceptGraph& graph, const ConceptSet& earlier,
                          const ConceptSet& later, std::uint64_t cap) {
  if (cap == 0) throw std::invalid_argument("two_hop_count: cap must be >= 1");
  TwoHopCount result;
  const auto sources = resolve(graph, earlier);
  const auto targets = resolve(graph, later);
  if (sources.empty() || targets.empty()) return result;

  // Each ordered pair (t1, t2) sharing exactly one concept m fixes a and b,
  // so walking a -> t1 -> m -> t2 -> b visits every path once.
  for (ConceptId a : sources) {
    for (const Incidence& first : graph.incident(a)) {
      ConceptId m = other_end(graph.record(first.triple), first.role);
      if (m == a) continue;
      for (const Incidence& second : graph.incident(m)) {
        if (second.triple == first.triple) continue;
        ConceptId b = other_end(graph.record(second.triple), second.role);
        if (b == a || b == m || !member(targets, b)) continue;
        if (++result.count >= cap) {
          result.capped = true;
          return result;
        }
      }
    }
  }
  return result;
}

std::size_t DialogueMatchReport::total_matches() const {
  std::size_t n = 0;
  for (const PairReport& p : pairs) n += p.matches.one_hop_count();
  return n;
}

DialogueMatchReport annotate_dialogue(const ConceptGraph& graph, const ConceptExtractor& extractor,
                                      const Dialogue& dialogue) {
  DialogueMatchReport report;
  report.dialogue_id = dialogue.id;
  if (dialogue.turns.size() < 2) return report;

  std::vector<ConceptSet> sets;
  sets.reserve(dialogue.turns.size());
  for (const Turn& t : dialogue.turns) sets.push_back(extractor.extract(t.text));

  for (std::size_t i = 0; i + 1 < sets.size(); ++i) {
    PairReport pair{i, sets[i], sets[i + 1], match_pair(graph, sets[i], sets[i + 1])};
    report.has_match = report.has_match || pair.matches.one_hop_count() > 0;
    report.pairs.push_back(std::move(pair));
  }
  return report;
}

}  // namespace cskit
