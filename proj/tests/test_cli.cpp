#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "cskit/features.hpp"
#include "support/generators.hpp"
#include "support/paths.hpp"

using nlohmann::json;
using testing_support::fixture;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cskit::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Set CSKIT_UPDATE_GOLDEN=1 to rewrite the files, then review the diff.
void check_golden(const std::string& name, const std::string& actual) {
  const auto path = testing_support::golden(name);
  if (std::getenv("CSKIT_UPDATE_GOLDEN")) spit(path, actual);
  REQUIRE(fs::exists(path));
  CHECK(slurp(path) == actual);
}

std::vector<json> jsonl(const std::string& text) {
  std::vector<json> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) rows.push_back(json::parse(line));
  }
  return rows;
}

// Annotations plus the graph they were built against, both on disk.
struct AnnotatedFiles {
  std::string annotations;
  std::string kg;
};

AnnotatedFiles write_annotated(const TempDir& tmp, std::size_t n, std::uint64_t seed) {
  const auto data = testing_support::synthetic_annotated(n, seed);
  std::string ann, kg;
  for (const auto& e : data.examples) ann += cskit::annotation_to_json(e).dump() + "\n";
  for (const auto& t : data.triples) kg += t.head + "\t" + t.relation + "\t" + t.tail + "\n";
  spit(tmp / "ann.jsonl", ann);
  spit(tmp / "kg.tsv", kg);
  return {(tmp / "ann.jsonl").string(), (tmp / "kg.tsv").string()};
}

std::string write_features(const TempDir& tmp, std::size_t n, std::uint64_t seed) {
  const auto data = testing_support::synthetic_features(n, seed, 1.0, 0.5, 0.3);
  std::string text;
  for (std::size_t i = 0; i < data.size(); ++i) {
    text += cskit::featurized_to_json({"f" + std::to_string(i), data[i].features, data[i].score}).dump() + "\n";
  }
  spit(tmp / "features.jsonl", text);
  return (tmp / "features.jsonl").string();
}

}  // namespace

TEST_CASE("help text is frozen") {
  const auto top = cli({"--help"});
  CHECK(top.code == 0);
  check_golden("help.txt", top.out);
  for (std::string sub : {"ingest", "extract-concepts", "filter", "select-prompts", "featurize", "train", "score",
                          "evaluate", "stats"}) {
    CAPTURE(sub);
    const auto r = cli({sub, "--help"});
    CHECK(r.code == 0);
    check_golden("help_" + sub + ".txt", r.out);
  }
  const auto v = cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out == "cskit 0.1.0\n");
}

TEST_CASE("usage errors exit 2, runtime errors exit 1") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({"filter", "--kg", "x"}).code == 2);
  CHECK(cli({"filter", "--kg", "a", "--corpus", "b", "--format", "xml", "--out-kept", "k", "--out-reports", "r",
             "--out-stats", "s"})
            .code == 2);

  auto stats = cli({"stats"});
  CHECK(stats.code == 2);
  CHECK(stats.err.find("one of --reports or --stats is required") != std::string::npos);
  CHECK(stats.err.find("--help") != std::string::npos);

  auto no_kg = cli({"featurize", "--annotations", "a.jsonl", "-o", "f.jsonl"});
  CHECK(no_kg.code == 2);
  CHECK(no_kg.err.find("--annotations requires --kg") != std::string::npos);
  CHECK(cli({"featurize", "--features", "f.jsonl", "-o", "g.jsonl"}).code == 2);
  CHECK(cli({"train", "--features", "f", "--kg", "k", "--model", "m"}).code == 2);
  CHECK(cli({"train", "--model", "m"}).code == 2);

  TempDir tmp("cli-err");
  auto missing = cli({"ingest", (tmp / "nope.tsv").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("cskit: error:") == 0);
  CHECK(missing.err.find("nope.tsv") != std::string::npos);
}

TEST_CASE("ingest and extract-concepts") {
  TempDir tmp("cli-ingest");
  auto r = cli({"ingest", fixture("doctor_graph.tsv").string(), "-o", (tmp / "summary.json").string()});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["kept"] == 3);
  CHECK(j["concepts"] == 4);
  CHECK(slurp(tmp / "summary.json") == r.out);

  auto e = cli({"extract-concepts", "-t", "Hi, I want to find a doctor", "-t", "The cats were running"});
  REQUIRE(e.code == 0);
  const auto rows = jsonl(e.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["concepts"] == json{"doctor", "find", "want"});
  CHECK(rows[1]["concepts"] == json{"cat", "run"});
  CHECK_FALSE(rows[0].contains("tokens"));

  auto t = cli({"extract-concepts", "--tokens", "-t", "cats"});
  REQUIRE(t.code == 0);
  CHECK(jsonl(t.out)[0]["tokens"][0]["lemma"] == "cat");

  spit(tmp / "texts.txt", "a doctor\n\n   \nthe hospitals\n");
  auto f = cli({"extract-concepts", "-i", (tmp / "texts.txt").string(), "-o", (tmp / "c.jsonl").string()});
  REQUIRE(f.code == 0);
  CHECK(f.out.empty());
  const auto frows = jsonl(slurp(tmp / "c.jsonl"));
  REQUIRE(frows.size() == 2);
  CHECK(frows[1]["concepts"] == json{"hospital"});
  CHECK(cli({"extract-concepts", "-t", "x", "-i", "y"}).code == 2);
}

TEST_CASE("filter keeps the doctor dialogue; reruns and thread counts are byte-identical") {
  TempDir tmp("cli-filter");
  auto run_filter = [&](const std::string& tag, const std::string& jobs) {
    return cli({"--jobs", jobs, "filter", "--kg", fixture("doctor_graph.tsv").string(), "--corpus",
                fixture("mini_corpus.jsonl").string(), "--out-kept", (tmp / (tag + "kept.jsonl")).string(),
                "--out-reports", (tmp / (tag + "reports.jsonl")).string(), "--out-stats",
                (tmp / (tag + "stats.json")).string()});
  };
  const auto r = run_filter("a", "1");
  REQUIRE(r.code == 0);
  const auto summary = json::parse(r.out);
  CHECK(summary["total"] == 3);
  CHECK(summary["kept"] == 1);
  CHECK(summary["kept_percent"] == "33.3%");

  const auto kept = jsonl(slurp(tmp / "akept.jsonl"));
  REQUIRE(kept.size() == 1);
  CHECK(kept[0]["id"] == "doctor");
  CHECK(jsonl(slurp(tmp / "areports.jsonl")).size() == 3);
  const auto stats = json::parse(slurp(tmp / "astats.json"));
  CHECK(stats["relation_histogram"] == json{{"TypeOf", 1}});

  REQUIRE(run_filter("b", "1").code == 0);
  REQUIRE(run_filter("c", "4").code == 0);
  for (std::string f : {"kept.jsonl", "reports.jsonl", "stats.json"}) {
    CHECK(slurp(tmp / ("a" + f)) == slurp(tmp / ("b" + f)));
    CHECK(slurp(tmp / ("a" + f)) == slurp(tmp / ("c" + f)));
  }

  // stats renders the same numbers from either source.
  auto from_reports = cli({"stats", "--json", "--reports", (tmp / "areports.jsonl").string()});
  auto from_stats = cli({"stats", "--json", "--stats", (tmp / "astats.json").string()});
  REQUIRE(from_reports.code == 0);
  REQUIRE(from_stats.code == 0);
  CHECK(json::parse(from_reports.out)["relation_histogram"] == stats["relation_histogram"]);
  CHECK(json::parse(from_stats.out) == stats);
  auto table = cli({"stats", "--stats", (tmp / "astats.json").string()});
  CHECK(table.out.find("33.3%") != std::string::npos);
  CHECK(table.out.find("TypeOf") != std::string::npos);
}

TEST_CASE("a failing filter leaves no output files") {
  TempDir tmp("cli-partial");
  spit(tmp / "corpus.jsonl",
       slurp(fixture("mini_corpus.jsonl")) + "{\"id\": \"broken\", \"turns\": [{\"speaker\": \"a\"}]}\n");
  auto r = cli({"filter", "--kg", fixture("doctor_graph.tsv").string(), "--corpus", (tmp / "corpus.jsonl").string(),
                "--out-kept", (tmp / "kept.jsonl").string(), "--out-reports", (tmp / "reports.jsonl").string(),
                "--out-stats", (tmp / "stats.json").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("corpus.jsonl:4") != std::string::npos);
  for (const auto& entry : fs::directory_iterator(tmp.path())) {
    CHECK(entry.path().filename() == "corpus.jsonl");
  }
}

TEST_CASE("select-prompts on the context fixture") {
  TempDir tmp("cli-select");
  auto r = cli({"select-prompts", fixture("contexts.tsv").string(), "--out-kept", (tmp / "kept.tsv").string(),
                "--out-rejected", (tmp / "rejected.tsv").string()});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["total"] == 3);
  CHECK(j["kept"] == 1);
  CHECK(j["too_short"] == 1);
  CHECK(j["no_name"] == 1);
  CHECK(slurp(tmp / "kept.tsv").find("ctx-tracy\t") == 0);
  const auto rejected = slurp(tmp / "rejected.tsv");
  CHECK(rejected.find("ctx-robin\t") != std::string::npos);
  CHECK(rejected.find("too-short") != std::string::npos);
  CHECK(rejected.find("ctx-rain\t") != std::string::npos);
  CHECK(rejected.find("no-name") != std::string::npos);

  // Tracy opens the sentence, so only the name list can vouch for her.
  spit(tmp / "names.txt", "Casey\n");
  auto n = cli({"select-prompts", fixture("contexts.tsv").string(), "--out-kept", (tmp / "k2.tsv").string(),
                "--out-rejected", (tmp / "r2.tsv").string(), "--names", (tmp / "names.txt").string()});
  REQUIRE(n.code == 0);
  CHECK(json::parse(n.out)["kept"] == 0);
  CHECK(json::parse(n.out)["no_name"] == 2);
}

TEST_CASE("featurize, train, score and evaluate end to end") {
  TempDir tmp("cli-metric");
  const auto files = write_annotated(tmp, 90, 31);
  const std::vector<std::string> data = {"--annotations", files.annotations, "--kg", files.kg, "--null-scorer"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), data.begin(), data.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };

  auto f = cli(with({"featurize"}, {"-o", (tmp / "feat.jsonl").string()}));
  REQUIRE(f.code == 0);
  CHECK(json::parse(f.out)["examples"] == 90);
  const auto feat_rows = jsonl(slurp(tmp / "feat.jsonl"));
  REQUIRE(feat_rows.size() == 90);
  CHECK(feat_rows[0]["features"]["lm_resp"] == 0);

  // Same seed, same bytes; another seed, other weights.
  const std::vector<std::string> hyper = {"--epochs", "20"};
  auto train_to = [&](const std::string& name, const std::string& seed) {
    auto args = with({"--seed", seed, "train"}, {"--mask", "symbolic", "--model", (tmp / name).string()});
    args.insert(args.end(), hyper.begin(), hyper.end());
    return cli(args);
  };
  auto t1 = train_to("m1.json", "3");
  REQUIRE(t1.code == 0);
  const auto tj = json::parse(t1.out);
  CHECK(tj["train_examples"] == 81);
  CHECK(tj["dev_examples"] == 9);
  REQUIRE(train_to("m2.json", "3").code == 0);
  REQUIRE(train_to("m3.json", "4").code == 0);
  CHECK(slurp(tmp / "m1.json") == slurp(tmp / "m2.json"));
  CHECK(slurp(tmp / "m1.json") != slurp(tmp / "m3.json"));

  // Training from the featurized file gives the same model.
  auto tf = cli({"--seed", "3", "train", "--features", (tmp / "feat.jsonl").string(), "--mask", "symbolic",
                 "--model", (tmp / "m4.json").string(), "--epochs", "20"});
  REQUIRE(tf.code == 0);
  CHECK(slurp(tmp / "m1.json") == slurp(tmp / "m4.json"));

  auto s = cli(with({"score"}, {"--model", (tmp / "m1.json").string(), "-o", (tmp / "scored.jsonl").string()}));
  REQUIRE(s.code == 0);
  const auto scored = jsonl(slurp(tmp / "scored.jsonl"));
  REQUIRE(scored.size() == 90);
  CHECK(scored[0].contains("response"));
  CHECK(scored[0]["predicted_score"].is_number());

  auto e = cli({"evaluate", "--features", (tmp / "feat.jsonl").string(), "--folds", "3", "--mask", "symbolic",
                "--mask", "all", "--report", (tmp / "report.json").string(), "--epochs", "10"});
  REQUIRE(e.code == 0);
  CHECK(e.out.find("mask=symbolic pooled_rho=") == 0);
  CHECK(e.out.find("mask=all") != std::string::npos);
  const auto rep = json::parse(slurp(tmp / "report.json"));
  REQUIRE(rep.is_array());
  CHECK(rep.size() == 2);
  CHECK(rep[0]["pooled"]["n"] == 90);

  // Null-scorer LM features are constant, so neural-only predictions are too.
  auto flat = cli({"evaluate", "--features", (tmp / "feat.jsonl").string(), "--folds", "3", "--mask", "neural",
                   "--report", (tmp / "flat.json").string(), "--epochs", "5"});
  CHECK(flat.code == 1);
  CHECK(flat.err.find("constant") != std::string::npos);

  auto small = cli({"evaluate", "--features", (tmp / "feat.jsonl").string(), "--folds", "40", "--report",
                    (tmp / "small.json").string()});
  CHECK(small.code == 1);
  CHECK(small.err.find("at least 120") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "small.json"));
}

TEST_CASE("evaluate with one mask writes a single report object") {
  TempDir tmp("cli-eval");
  const auto feats = write_features(tmp, 60, 8);
  auto r = cli({"--jobs", "2", "evaluate", "--features", feats, "--folds", "4", "--report",
                (tmp / "r.json").string(), "--epochs", "10"});
  REQUIRE(r.code == 0);
  const auto rep = json::parse(slurp(tmp / "r.json"));
  CHECK(rep.is_object());
  CHECK(rep["mask"] == "all");
  CHECK(rep["folds"].size() == 4);
  auto again = cli({"--jobs", "1", "evaluate", "--features", feats, "--folds", "4", "--report",
                    (tmp / "r2.json").string(), "--epochs", "10"});
  CHECK(slurp(tmp / "r.json") == slurp(tmp / "r2.json"));
  CHECK(again.out == r.out);
}
