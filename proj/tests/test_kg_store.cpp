#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "cskit/kg_store.hpp"
#include "cskit/text_util.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"

using namespace cskit;
using testing_support::RawTriple;

namespace {

IngestResult ingest_text(const std::string& text, IngestConfig cfg = {}) {
  std::istringstream in(text);
  return ingest_assertions(in, cfg);
}

const char* kDoctorTsv = "specialist\tTypeOf\tdoctor\ndoctor\tLocateAt\thospital\npatient\tRelatedTo\tdoctor\n";

std::set<testing_support::RawNeighbor> as_raw(const std::vector<Neighbor>& ns) {
  std::set<testing_support::RawNeighbor> out;
  for (const auto& n : ns) out.emplace(n.triple.head, n.triple.relation, n.triple.tail, std::string(to_string(n.role)));
  return out;
}

}  // namespace

TEST_CASE("doctor graph ingests to 4 concepts and 3 triples") {
  auto r = ingest_text(kDoctorTsv);
  CHECK(r.graph.num_concepts() == 4);
  CHECK(r.graph.num_triples() == 3);
  CHECK(r.summary.kept == 3);
  CHECK(r.summary.dropped_total() == 0);
}

TEST_CASE("empty stream gives an empty graph") {
  auto r = ingest_text("");
  CHECK(r.graph.num_concepts() == 0);
  CHECK(r.graph.num_triples() == 0);
  CHECK(r.summary.lines_read == 0);
}

TEST_CASE("multiword and self-loop lines are dropped with reasons") {
  auto r = ingest_text("ice_cream\tIsA\tdessert\n");
  CHECK(r.summary.kept == 0);
  CHECK(r.summary.dropped_multiword == 1);

  r = ingest_text("doctor\tRelatedTo\tdoctor\n");
  CHECK(r.summary.kept == 0);
  CHECK(r.summary.dropped_self_loop == 1);

  r = ingest_text("ice cream\tIsA\tdessert\n");
  CHECK(r.summary.dropped_multiword == 1);
}

TEST_CASE("malformed lines are counted, never fatal") {
  auto r = ingest_text("just-one-field\na\tb\nx\tR\ty\tnot-a-number\nx\tR\ty\t-1\nx\t\ty\ngood\tR\tline\n");
  CHECK(r.summary.kept == 1);
  CHECK(r.summary.dropped_malformed == 5);
  CHECK(r.graph.contains("good", "R", "line"));
}

TEST_CASE("comments and blank lines are skipped") {
  auto r = ingest_text("# header\n\n   \na\tR\tb\n");
  CHECK(r.summary.skipped == 3);
  CHECK(r.summary.kept == 1);
}

TEST_CASE("ConceptNet 5 rows: prefixes stripped, language filtered, weight from metadata") {
  std::string text =
      "/a/[/r/IsA/,/c/en/dog/n/,/c/en/animal/]\t/r/IsA\t/c/en/dog/n\t/c/en/animal\t{\"weight\": 2.5}\n"
      "/a/[x]\t/r/IsA\t/c/fr/chien\t/c/fr/animal\t{\"weight\": 1.0}\n"
      "/a/[y]\t/r/RelatedTo\t/c/en/ice_cream\t/c/en/dessert\t{}\n"
      "/a/[z]\t/r/AtLocation\t/c/en/Doctor\t/c/en/hospital\t{\"dataset\": \"x\"}\n";
  auto r = ingest_text(text);
  CHECK(r.summary.kept == 2);
  CHECK(r.summary.dropped_language == 1);
  CHECK(r.summary.dropped_multiword == 1);
  auto ts = r.graph.triples();
  REQUIRE(ts.size() == 2);
  CHECK(ts[0] == Triple{"doctor", "AtLocation", "hospital", 1.0});
  CHECK(ts[1] == Triple{"dog", "IsA", "animal", 2.5});

  IngestConfig fr;
  fr.language = "fr";
  CHECK(ingest_text(text, fr).summary.kept == 1);
}

TEST_CASE("simplified and ConceptNet rows mix; URIs allowed in simplified rows") {
  auto r = ingest_text("/c/en/cat\t/r/IsA\t/c/en/pet\t0.5\n/a/[q]\t/r/IsA\t/c/en/dog\t/c/en/pet\t{}\n");
  CHECK(r.summary.kept == 2);
  CHECK(r.graph.contains("cat", "IsA", "pet"));
  CHECK(r.graph.contains("dog", "IsA", "pet"));
}

TEST_CASE("duplicates keep the maximum weight regardless of order") {
  auto a = ingest_text("a\tR\tb\t0.5\na\tR\tb\t2\n");
  auto b = ingest_text("a\tR\tb\t2\na\tR\tb\t0.5\n");
  CHECK(a.summary.dropped_duplicate == 1);
  CHECK(a.graph.triples() == b.graph.triples());
  CHECK(a.graph.triples()[0].weight == 2.0);
}

TEST_CASE("max_triples truncates after N kept triples") {
  IngestConfig cfg;
  cfg.max_triples = 2;
  auto r = ingest_text("a\tR\tb\nb\tR\tc\nc\tR\td\n", cfg);
  CHECK(r.summary.kept == 2);
  CHECK(r.summary.truncated);
  cfg.max_triples = 3;
  CHECK_FALSE(ingest_text("a\tR\tb\nb\tR\tc\nc\tR\td\n", cfg).summary.truncated);
}

TEST_CASE("unreadable path throws IoError naming the path") {
  try {
    ingest_assertions(std::filesystem::path("/nonexistent/kg.tsv"));
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/kg.tsv") != std::string::npos);
  }
}

TEST_CASE("neighbors of doctor on the doctor graph") {
  auto g = ingest_text(kDoctorTsv).graph;
  std::set<testing_support::RawNeighbor> expect = {
      {"specialist", "TypeOf", "doctor", "object"},
      {"doctor", "LocateAt", "hospital", "subject"},
      {"patient", "RelatedTo", "doctor", "object"},
  };
  CHECK(as_raw(g.neighbors("doctor")) == expect);
  CHECK(g.neighbors("zebra").empty());
}

TEST_CASE("connecting_triples on the doctor graph") {
  auto g = ingest_text(kDoctorTsv).graph;
  auto c = g.connecting_triples("doctor", "specialist");
  REQUIRE(c.size() == 1);
  CHECK(c[0] == Triple{"specialist", "TypeOf", "doctor", 1.0});
  CHECK(g.connecting_triples("doctor", "doctor").empty());
  CHECK(g.connecting_triples("doctor", "zebra").empty());
}

TEST_CASE("neighbors and connecting_triples agree with linear scans on random graphs") {
  cskit::Rng rng(17);
  for (int round = 0; round < 40; ++round) {
    std::vector<std::string> names;
    const std::size_t k = 3 + rng.below(30);
    for (std::size_t i = 0; i < k; ++i) names.push_back("c" + std::to_string(i));
    const std::size_t n = round < 20 ? 50 : 1 + rng.below(1000);
    auto raw = testing_support::random_triples(rng, names, n);
    auto g = testing_support::build_graph(raw);
    for (const auto& c : names) {
      CHECK(as_raw(g.neighbors(c)) == testing_support::brute_neighbors(raw, c));
    }
    for (int q = 0; q < 30; ++q) {
      const auto& a = names[rng.below(names.size())];
      const auto& b = names[rng.below(names.size())];
      std::set<RawTriple> got;
      for (const auto& t : g.connecting_triples(a, b)) got.insert({t.head, t.relation, t.tail});
      CHECK(got == testing_support::brute_connecting(raw, a, b));
    }
  }
}

TEST_CASE("index consistency: every triple is indexed under head and tail") {
  cskit::Rng rng(5);
  std::vector<std::string> names;
  for (int i = 0; i < 40; ++i) names.push_back("n" + std::to_string(i));
  auto g = testing_support::build_graph(testing_support::random_triples(rng, names, 300));
  std::size_t indexed_concepts = 0;
  for (const auto& t : g.triples()) {
    const auto hn = g.neighbors(t.head);
    const auto tn = g.neighbors(t.tail);
    CHECK(std::count(hn.begin(), hn.end(), Neighbor{t, Role::subject}) == 1);
    CHECK(std::count(tn.begin(), tn.end(), Neighbor{t, Role::object}) == 1);
  }
  for (const auto& c : names) indexed_concepts += g.find_concept(c).has_value();
  CHECK(indexed_concepts == g.num_concepts());
  for (std::uint32_t i = 0; i < g.num_concepts(); ++i) CHECK_FALSE(g.incident(ConceptId{i}).empty());
}

TEST_CASE("ingest is deterministic and idempotent under duplication") {
  cskit::Rng rng(99);
  std::vector<std::string> names;
  for (int i = 0; i < 25; ++i) names.push_back("w" + std::to_string(i));
  std::string text;
  for (const auto& t : testing_support::random_triples(rng, names, 200)) {
    text += t.head + "\t" + t.relation + "\t" + t.tail + "\t" + std::to_string(rng.below(5)) + "\n";
  }
  auto a = ingest_text(text);
  auto b = ingest_text(text);
  auto doubled = ingest_text(text + text);
  CHECK(a.graph.triples() == b.graph.triples());
  CHECK(a.graph.triples() == doubled.graph.triples());
  CHECK(doubled.summary.dropped_duplicate == 200);
}

TEST_CASE("fixture file ingests") {
  auto r = ingest_assertions(testing_support::fixture("doctor_graph.tsv"));
  CHECK(r.summary.kept == 3);
  CHECK(r.summary.skipped == 1);
}

TEST_CASE("is_valid_concept") {
  CHECK(is_valid_concept("doctor"));
  CHECK_FALSE(is_valid_concept(""));
  CHECK_FALSE(is_valid_concept("ice_cream"));
  CHECK_FALSE(is_valid_concept("a b"));
  CHECK_FALSE(is_valid_concept("a/b"));
  CHECK_FALSE(is_valid_concept("Doctor"));
}
