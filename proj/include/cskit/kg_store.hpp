#pragma once
// ConceptGraph: immutable, interned store of (head, relation, tail) triples
// with a per-concept incidence index (CSR layout) covering both roles.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cskit {

enum class ConceptId : std::uint32_t {};
enum class RelationId : std::uint32_t {};
enum class TripleId : std::uint32_t {};

enum class Role : std::uint8_t { subject, object };

std::string_view to_string(Role role);

// Resolved, self-contained view of one assertion.
struct Triple {
  std::string head;
  std::string relation;
  std::string tail;
  double weight = 1.0;

  friend bool operator==(const Triple& a, const Triple& b) = default;
  friend auto operator<=>(const Triple& a, const Triple& b) = default;
};

struct Neighbor {
  Triple triple;
  Role role;  // role the queried concept plays in the triple

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
  friend auto operator<=>(const Neighbor&, const Neighbor&) = default;
};

struct TripleRecord {
  ConceptId head;
  RelationId relation;
  ConceptId tail;
  double weight;
};

struct Incidence {
  TripleId triple;
  Role role;
};

// True when s is a valid concept lemma: non-empty, lowercase, and free of
// whitespace, '_' and '/'.
bool is_valid_concept(std::string_view s);

class ConceptGraph {
 public:
  ConceptGraph() = default;

  std::size_t num_concepts() const { return concept_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }
  std::size_t num_triples() const { return triples_.size(); }

  std::optional<ConceptId> find_concept(std::string_view name) const;
  const std::string& concept_name(ConceptId id) const;
  const std::string& relation_name(RelationId id) const;

  const TripleRecord& record(TripleId id) const { return triples_[static_cast<std::uint32_t>(id)]; }
  Triple triple(TripleId id) const;
  std::span<const TripleRecord> records() const { return triples_; }
  std::vector<Triple> triples() const;

  // Every triple touching the concept, ordered by triple id.
  std::span<const Incidence> incident(ConceptId id) const;

  // Every triple containing the concept with the role it plays; empty for
  // unknown concepts.
  std::vector<Neighbor> neighbors(std::string_view concept_name) const;

  // Triples whose {head, tail} equals {a, b} in either orientation; empty
  // when a == b.
  std::vector<Triple> connecting_triples(std::string_view a, std::string_view b) const;

  bool contains(std::string_view head, std::string_view relation, std::string_view tail) const;

 private:
  friend class GraphBuilder;

  std::vector<std::string> concept_names_;  // sorted; ConceptId is the index
  std::vector<std::string> relation_names_;  // sorted; RelationId is the index
  std::vector<TripleRecord> triples_;  // sorted by (head, relation, tail) names
  std::vector<std::uint32_t> offsets_;  // CSR offsets, size num_concepts + 1
  std::vector<Incidence> incidences_;
};

// Accumulates triples and produces a canonical ConceptGraph: triples sorted by
// (head, relation, tail), duplicates merged keeping the maximum weight.
class GraphBuilder {
 public:
  enum class AddResult { added, duplicate, self_loop, invalid };

  AddResult add(std::string_view head, std::string_view relation, std::string_view tail,
                double weight = 1.0);
  std::size_t size() const { return staged_.size(); }
  ConceptGraph build() &&;

 private:
  struct Key {
    std::uint32_t head, relation, tail;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  std::uint32_t intern(std::vector<std::string>& names,
                       std::unordered_map<std::string, std::uint32_t>& index, std::string_view s);

  std::vector<std::string> concepts_;
  std::unordered_map<std::string, std::uint32_t> concept_ids_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, std::uint32_t> relation_ids_;
  std::vector<std::pair<Key, double>> staged_;
  std::unordered_map<Key, std::size_t, KeyHash> staged_index_;
};

struct IngestConfig {
  std::string language = "en";
  std::optional<std::size_t> max_triples;
};

struct IngestSummary {
  std::size_t lines_read = 0;
  std::size_t skipped = 0;  // blank and comment lines
  std::size_t kept = 0;     // distinct triples in the graph
  std::size_t dropped_malformed = 0;
  std::size_t dropped_language = 0;
  std::size_t dropped_multiword = 0;
  std::size_t dropped_self_loop = 0;
  std::size_t dropped_duplicate = 0;
  bool truncated = false;  // stopped early at max_triples

  std::size_t dropped_total() const {
    return dropped_malformed + dropped_language + dropped_multiword + dropped_self_loop +
           dropped_duplicate;
  }
};

struct IngestResult {
  ConceptGraph graph;
  IngestSummary summary;
};

// Reads ConceptNet 5 assertion rows and simplified head/relation/tail rows,
// auto-detected per line. Bad lines are counted, never fatal.
IngestResult ingest_assertions(std::istream& in, const IngestConfig& config = {});
// Throws IoError when the file cannot be opened.
IngestResult ingest_assertions(const std::filesystem::path& path, const IngestConfig& config = {});

}  // namespace cskit
