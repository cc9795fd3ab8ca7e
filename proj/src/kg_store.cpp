#include "cskit/kg_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include <json.hpp>

#include "cskit/text_util.hpp"

namespace cskit {

namespace {

constexpr std::string_view kRelationPrefix = "/r/";
constexpr std::string_view kConceptPrefix = "/c/";

std::uint32_t raw(ConceptId id) { return static_cast<std::uint32_t>(id); }
std::uint32_t raw(RelationId id) { return static_cast<std::uint32_t>(id); }

enum class TermStatus { ok, malformed, language, multiword };

struct Term {
  TermStatus status = TermStatus::malformed;
  std::string lemma;
};

Term normalize_lemma(std::string_view text) {
  Term term;
  text = trim(text);
  if (text.empty()) return term;
  for (char c : text) {
    if (c == '_' || is_ascii_space(c)) {
      term.status = TermStatus::multiword;
      return term;
    }
    if (c == '/') return term;
  }
  term.lemma = to_lower(text);
  term.status = TermStatus::ok;
  return term;
}

// "/c/en/doctor/n/..." -> "doctor" when the language matches.
Term parse_concept_uri(std::string_view uri, std::string_view language) {
  Term term;
  if (!uri.starts_with(kConceptPrefix)) return term;
  uri.remove_prefix(kConceptPrefix.size());
  std::size_t slash = uri.find('/');
  if (slash == std::string_view::npos || slash == 0) return term;
  std::string_view lang = uri.substr(0, slash);
  std::string_view rest = uri.substr(slash + 1);
  std::string_view text = rest.substr(0, rest.find('/'));
  if (text.empty()) return term;
  if (lang != language) {
    term.status = TermStatus::language;
    return term;
  }
  return normalize_lemma(text);
}

Term parse_term(std::string_view field, std::string_view language) {
  field = trim(field);
  if (field.starts_with(kConceptPrefix)) return parse_concept_uri(field, language);
  return normalize_lemma(field);
}

std::string_view parse_relation(std::string_view field) {
  field = trim(field);
  if (field.starts_with(kRelationPrefix)) field.remove_prefix(kRelationPrefix.size());
  return field;
}

std::optional<double> parse_weight(std::string_view field) {
  field = trim(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  if (!std::isfinite(value) || value < 0.0) return std::nullopt;
  return value;
}

std::optional<double> parse_metadata_weight(std::string_view field) {
  auto meta = nlohmann::json::parse(field, nullptr, /*allow_exceptions=*/false);
  if (meta.is_discarded() || !meta.is_object()) return std::nullopt;
  auto it = meta.find("weight");
  if (it == meta.end()) return 1.0;
  if (!it->is_number()) return std::nullopt;
  double value = it->get<double>();
  if (!std::isfinite(value) || value < 0.0) return std::nullopt;
  return value;
}

bool looks_like_conceptnet_row(const std::vector<std::string_view>& fields) {
  return fields.size() == 5 && fields[1].starts_with(kRelationPrefix) &&
         fields[2].starts_with(kConceptPrefix) && fields[3].starts_with(kConceptPrefix);
}

}  // namespace

std::string_view to_string(Role role) { return role == Role::subject ? "subject" : "object"; }

bool is_valid_concept(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (is_ascii_space(c) || c == '_' || c == '/' || is_ascii_upper(c)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// ConceptGraph

std::optional<ConceptId> ConceptGraph::find_concept(std::string_view name) const {
  auto it = std::lower_bound(concept_names_.begin(), concept_names_.end(), name,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == concept_names_.end() || *it != name) return std::nullopt;
  return ConceptId{static_cast<std::uint32_t>(it - concept_names_.begin())};
}

const std::string& ConceptGraph::concept_name(ConceptId id) const {
  return concept_names_[raw(id)];
}

const std::string& ConceptGraph::relation_name(RelationId id) const {
  return relation_names_[raw(id)];
}

Triple ConceptGraph::triple(TripleId id) const {
  const TripleRecord& r = record(id);
  return Triple{concept_name(r.head), relation_name(r.relation), concept_name(r.tail), r.weight};
}

std::vector<Triple> ConceptGraph::triples() const {
  std::vector<Triple> out;
  out.reserve(triples_.size());
  for (std::uint32_t i = 0; i < triples_.size(); ++i) out.push_back(triple(TripleId{i}));
  return out;
}

std::span<const Incidence> ConceptGraph::incident(ConceptId id) const {
  std::uint32_t begin = offsets_[raw(id)];
  std::uint32_t end = offsets_[raw(id) + 1];
  return {incidences_.data() + begin, end - begin};
}

std::vector<Neighbor> ConceptGraph::neighbors(std::string_view concept_name) const {
  std::vector<Neighbor> out;
  auto id = find_concept(concept_name);
  if (!id) return out;
  for (const Incidence& inc : incident(*id)) out.push_back(Neighbor{triple(inc.triple), inc.role});
  return out;
}

std::vector<Triple> ConceptGraph::connecting_triples(std::string_view a, std::string_view b) const {
  std::vector<Triple> out;
  if (a == b) return out;
  auto ia = find_concept(a);
  auto ib = find_concept(b);
  if (!ia || !ib) return out;
  // walk the shorter incidence list
  if (incident(*ib).size() < incident(*ia).size()) std::swap(ia, ib);
  for (const Incidence& inc : incident(*ia)) {
    const TripleRecord& r = record(inc.triple);
    ConceptId other = inc.role == Role::subject ? r.tail : r.head;
    if (other == *ib) out.push_back(triple(inc.triple));
  }
  return out;
}

bool ConceptGraph::contains(std::string_view head, std::string_view relation,
                            std::string_view tail) const {
  auto ih = find_concept(head);
  auto it = find_concept(tail);
  if (!ih || !it) return false;
  for (const Incidence& inc : incident(*ih)) {
    if (inc.role != Role::subject) continue;
    const TripleRecord& r = record(inc.triple);
    if (r.tail == *it && relation_name(r.relation) == relation) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// GraphBuilder

std::size_t GraphBuilder::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = (static_cast<std::uint64_t>(k.head) << 32) ^ k.tail;
  h ^= static_cast<std::uint64_t>(k.relation) * 0x9E3779B97F4A7C15ull;
  h ^= h >> 29;
  h *= 0xBF58476D1CE4E5B9ull;
  h ^= h >> 32;
  return static_cast<std::size_t>(h);
}

std::uint32_t GraphBuilder::intern(std::vector<std::string>& names,
                                   std::unordered_map<std::string, std::uint32_t>& index,
                                   std::string_view s) {
  auto [it, inserted] = index.try_emplace(std::string(s), static_cast<std::uint32_t>(names.size()));
  if (inserted) names.emplace_back(s);
  return it->second;
}

GraphBuilder::AddResult GraphBuilder::add(std::string_view head, std::string_view relation,
                                          std::string_view tail, double weight) {
  if (!is_valid_concept(head) || !is_valid_concept(tail) || relation.empty() ||
      !std::isfinite(weight) || weight < 0.0) {
    return AddResult::invalid;
  }
  if (head == tail) return AddResult::self_loop;
  Key key{intern(concepts_, concept_ids_, head), intern(relations_, relation_ids_, relation),
          intern(concepts_, concept_ids_, tail)};
  auto [it, inserted] = staged_index_.try_emplace(key, staged_.size());
  if (!inserted) {
    double& w = staged_[it->second].second;
    w = std::max(w, weight);
    return AddResult::duplicate;
  }
  staged_.emplace_back(key, weight);
  return AddResult::added;
}

namespace {

// Sorts names in place and returns old-id -> new-id.
std::vector<std::uint32_t> sort_names(std::vector<std::string>& names) {
  std::vector<std::uint32_t> order(names.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return names[a] < names[b]; });
  std::vector<std::uint32_t> remap(names.size());
  std::vector<std::string> sorted;
  sorted.reserve(names.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) {
    remap[order[i]] = i;
    sorted.push_back(std::move(names[order[i]]));
  }
  names = std::move(sorted);
  return remap;
}

}  // namespace

ConceptGraph GraphBuilder::build() && {
  ConceptGraph g;
  auto concept_remap = sort_names(concepts_);
  auto relation_remap = sort_names(relations_);

  g.triples_.reserve(staged_.size());
  for (const auto& [key, weight] : staged_) {
    g.triples_.push_back(TripleRecord{ConceptId{concept_remap[key.head]},
                                      RelationId{relation_remap[key.relation]},
                                      ConceptId{concept_remap[key.tail]}, weight});
  }
  std::sort(g.triples_.begin(), g.triples_.end(), [](const TripleRecord& a, const TripleRecord& b) {
    if (a.head != b.head) return a.head < b.head;
    if (a.relation != b.relation) return a.relation < b.relation;
    return a.tail < b.tail;
  });

  g.concept_names_ = std::move(concepts_);
  g.relation_names_ = std::move(relations_);

  g.offsets_.assign(g.concept_names_.size() + 1, 0);
  for (const TripleRecord& r : g.triples_) {
    ++g.offsets_[raw(r.head) + 1];
    ++g.offsets_[raw(r.tail) + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.incidences_.resize(g.triples_.size() * 2);
  std::vector<std::uint32_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::uint32_t i = 0; i < g.triples_.size(); ++i) {
    const TripleRecord& r = g.triples_[i];
    g.incidences_[cursor[raw(r.head)]++] = Incidence{TripleId{i}, Role::subject};
    g.incidences_[cursor[raw(r.tail)]++] = Incidence{TripleId{i}, Role::object};
  }

  staged_.clear();
  staged_index_.clear();
  concept_ids_.clear();
  relation_ids_.clear();
  return g;
}

// ---------------------------------------------------------------------------
// Ingest

IngestResult ingest_assertions(std::istream& in, const IngestConfig& config) {
  IngestSummary summary;
  GraphBuilder builder;
  std::string line;

  while (std::getline(in, line)) {
    if (config.max_triples && builder.size() >= *config.max_triples) {
      if (trim(line).empty()) continue;
      summary.truncated = true;
      break;
    }
    ++summary.lines_read;
    std::string_view view = trim_right(line);
    if (trim(view).empty() || trim(view).front() == '#') {
      ++summary.skipped;
      continue;
    }

    auto fields = split(view, '\t');
    Term head, tail;
    std::string_view relation;
    std::optional<double> weight = 1.0;
    if (looks_like_conceptnet_row(fields)) {
      relation = parse_relation(fields[1]);
      head = parse_concept_uri(trim(fields[2]), config.language);
      tail = parse_concept_uri(trim(fields[3]), config.language);
      weight = parse_metadata_weight(fields[4]);
    } else if (fields.size() == 3 || fields.size() == 4) {
      relation = parse_relation(fields[1]);
      head = parse_term(fields[0], config.language);
      tail = parse_term(fields[2], config.language);
      if (fields.size() == 4) weight = parse_weight(fields[3]);
    } else {
      ++summary.dropped_malformed;
      continue;
    }

    if (relation.empty() || !weight || head.status == TermStatus::malformed ||
        tail.status == TermStatus::malformed) {
      ++summary.dropped_malformed;
      continue;
    }
    if (head.status == TermStatus::language || tail.status == TermStatus::language) {
      ++summary.dropped_language;
      continue;
    }
    if (head.status == TermStatus::multiword || tail.status == TermStatus::multiword) {
      ++summary.dropped_multiword;
      continue;
    }

    switch (builder.add(head.lemma, relation, tail.lemma, *weight)) {
      case GraphBuilder::AddResult::added:
        break;
      case GraphBuilder::AddResult::duplicate:
        ++summary.dropped_duplicate;
        break;
      case GraphBuilder::AddResult::self_loop:
        ++summary.dropped_self_loop;
        break;
      case GraphBuilder::AddResult::invalid:
        ++summary.dropped_malformed;
        break;
    }
  }
  if (in.bad()) throw IoError("error reading assertion stream");

  summary.kept = builder.size();
  return IngestResult{std::move(builder).build(), summary};
}

IngestResult ingest_assertions(const std::filesystem::path& path, const IngestConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open knowledge-graph file " + path.string());
  return ingest_assertions(in, config);
}

}  // namespace cskit
