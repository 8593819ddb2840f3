#include "doctest.h"

#include <map>
#include <numeric>

#include "heterorep/corpus.hpp"
#include "heterorep/error.hpp"
#include "test_util.hpp"

using namespace heterorep;

namespace {

DatasetSplit make_split(const std::vector<std::pair<std::string, std::size_t>>& counts) {
  DatasetSplit s;
  int id = 0;
  for (const auto& [label, n] : counts)
    for (std::size_t i = 0; i < n; ++i) s.documents.push_back({"d" + std::to_string(id++), "text", label, {}});
  return s;
}

std::map<std::string, std::size_t> count_labels(const DatasetSplit& s) {
  std::map<std::string, std::size_t> m;
  for (const auto& d : s.documents) ++m[d.label];
  return m;
}

}  // namespace

TEST_CASE("tsv fixture carries metadata") {
  testutil::TempDir dir("corpus");
  testutil::write_file(dir / "train.tsv",
                       "id\ttext\tlabel\tspeaker\n"
                       "1\tSays the tax went up.\tfalse\tdwayne bohac\n"
                       "2\tJobs are up.\ttrue\tbarack obama\n"
                       "3\tNothing here\thalf-true\t\n");
  Schema schema;
  schema.metadata_columns = {"speaker"};
  const auto split = load_dataset(dir / "train.tsv", FileFormat::Tsv, schema, SplitName::Train);
  REQUIRE(split.size() == 3);
  CHECK(split.documents[0].id == "1");
  CHECK(*split.documents[0].field("speaker") == "dwayne bohac");
  CHECK(*split.documents[1].field("speaker") == "barack obama");
  REQUIRE(split.documents[2].field("speaker") != nullptr);
  CHECK(split.documents[2].field("speaker")->empty());
  CHECK(split.documents[1].label == "true");
}

TEST_CASE("empty file with header gives an empty split") {
  testutil::TempDir dir("corpus");
  testutil::write_file(dir / "e.tsv", "id\ttext\tlabel\n");
  testutil::write_file(dir / "e.csv", "id,text,label\r\n");
  CHECK(load_dataset(dir / "e.tsv", FileFormat::Tsv, {}, SplitName::Test).size() == 0);
  CHECK(load_dataset(dir / "e.csv", FileFormat::Csv, {}, SplitName::Test).size() == 0);
}

TEST_CASE("csv quoting") {
  testutil::TempDir dir("corpus");
  testutil::write_file(dir / "a.csv",
                       "label,id,text\r\n"
                       "fake,a,\"hello, \"\"world\"\"\"\r\n"
                       "real,b,\"two\nlines\"\r\n"
                       "real,c,plain\r\n");
  const auto s = load_dataset(dir / "a.csv", FileFormat::Csv, {}, SplitName::Train);
  REQUIRE(s.size() == 3);
  CHECK(s.documents[0].text == "hello, \"world\"");
  CHECK(s.documents[1].text == "two\nlines");
  CHECK(s.documents[2].id == "c");
}

TEST_CASE("jsonl ingestion") {
  testutil::TempDir dir("corpus");
  testutil::write_file(dir / "a.jsonl",
                       "{\"id\": 7, \"text\": \"x y\", \"label\": \"fake\", \"party\": \"republican\"}\n"
                       "\n"
                       "{\"id\": \"8\", \"text\": \"\", \"label\": \"real\", \"party\": null}\n");
  Schema schema;
  schema.metadata_columns = {"party"};
  const auto s = load_dataset(dir / "a.jsonl", FileFormat::Jsonl, schema, SplitName::Train);
  REQUIRE(s.size() == 2);
  CHECK(s.documents[0].id == "7");
  CHECK(*s.documents[0].field("party") == "republican");
  CHECK(s.documents[1].text.empty());
  CHECK(s.documents[1].field("party")->empty());
}

TEST_CASE("ingestion errors") {
  testutil::TempDir dir("corpus");
  testutil::write_file(dir / "nocol.tsv", "id\tbody\tlabel\n1\tx\ty\n");
  CHECK_THROWS_AS(load_dataset(dir / "nocol.tsv", FileFormat::Tsv, {}, SplitName::Train), SchemaError);

  testutil::write_file(dir / "dup.tsv", "id\ttext\tlabel\n1\tx\ta\n2\ty\tb\n1\tz\ta\n");
  try {
    load_dataset(dir / "dup.tsv", FileFormat::Tsv, {}, SplitName::Train);
    FAIL("expected duplicate id error");
  } catch (const IngestionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'1'") != std::string::npos);
    CHECK(msg.find("line 4") != std::string::npos);
  }

  testutil::write_file(dir / "bad.tsv", "id\ttext\tlabel\n1\tx\ta\n2\ty\n");
  try {
    load_dataset(dir / "bad.tsv", FileFormat::Tsv, {}, SplitName::Train);
    FAIL("expected malformed row error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  testutil::write_file(dir / "bad.jsonl", "{\"id\":1,\"text\":\"a\",\"label\":\"x\"}\n{oops\n");
  try {
    load_dataset(dir / "bad.jsonl", FileFormat::Jsonl, {}, SplitName::Train);
    FAIL("expected malformed json error");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(load_dataset(dir / "missing.tsv", FileFormat::Tsv, {}, SplitName::Train), IngestionError);
}

TEST_CASE("concat by id joins with a space") {
  testutil::TempDir dir("corpus");
  testutil::write_file(dir / "p.tsv", "id\ttext\tlabel\nu1\tfirst tweet\t1\nu2\tother\t0\nu1\tsecond tweet\t1\n");
  Schema schema;
  schema.concat_by_id = true;
  const auto s = load_dataset(dir / "p.tsv", FileFormat::Tsv, schema, SplitName::Train);
  REQUIRE(s.size() == 2);
  CHECK(s.documents[0].text == "first tweet second tweet");
}

TEST_CASE("splits must be disjoint") {
  auto a = make_split({{"x", 2}});
  auto b = make_split({{"y", 1}});
  b.name = SplitName::Test;
  const DatasetSplit* both[] = {&a, &b};
  CHECK_THROWS_AS(check_disjoint(both), IngestionError);
  b.documents[0].id = "other";
  CHECK_NOTHROW(check_disjoint(both));
}

TEST_CASE("label set order is first seen") {
  const auto s = make_split({{"real", 2}, {"fake", 3}});
  LabelSet labels;
  labels.register_split(s);
  CHECK(labels.labels() == std::vector<std::string>{"real", "fake"});
  CHECK(labels.id("fake") == 1);
  CHECK_THROWS_AS(labels.id("satire"), EvaluationError);
}

TEST_CASE("stratified sample apportions by largest remainder") {
  const auto s = make_split({{"real", 52}, {"fake", 48}});
  const auto sample = stratified_sample(s, 0.1, 7);
  auto counts = count_labels(sample);
  CHECK(sample.size() == 10);
  CHECK(counts["real"] == 5);
  CHECK(counts["fake"] == 5);

  const auto whole = stratified_sample(s, 1.0, 7);
  CHECK(whole.ids() == s.ids());

  const auto liar = make_split({{"a", 10}, {"b", 10}, {"c", 10}, {"d", 10}, {"e", 10}, {"f", 10}});
  for (const auto& [label, n] : count_labels(stratified_sample(liar, 0.5, 1))) CHECK(n == 5);

  CHECK_THROWS_AS(stratified_sample(s, 0.0, 1), ParameterError);
  CHECK_THROWS_AS(stratified_sample(s, 1.5, 1), ParameterError);
}

TEST_CASE("stratified sample properties") {
  const auto s = make_split({{"a", 37}, {"b", 101}, {"c", 5}, {"d", 64}});
  for (double f : {0.05, 0.1, 0.33, 0.5, 0.9}) {
    const auto x = stratified_sample(s, f, 99);
    const auto y = stratified_sample(s, f, 99);
    CHECK(x.ids() == y.ids());
    const auto full = count_labels(s);
    for (const auto& [label, n] : count_labels(x))
      CHECK(std::abs(static_cast<double>(n) - f * static_cast<double>(full.at(label))) < 1.0);
    // original relative order
    std::vector<int> positions;
    for (const auto& d : x.documents) positions.push_back(std::stoi(d.id.substr(1)));
    CHECK(std::is_sorted(positions.begin(), positions.end()));
  }
}

TEST_CASE("label distribution") {
  const auto test = make_split({{"real", 1120}, {"fake", 1020}});
  const auto dist = label_distribution(test);
  REQUIRE(dist.size() == 2);
  CHECK(dist[0].count == 1120);
  CHECK(dist[0].proportion == doctest::Approx(0.5234).epsilon(1e-3));
  CHECK(dist[1].count == 1020);

  const auto liar = make_split({{"half-true", 2114}, {"false", 1995}, {"mostly-true", 1962}, {"true", 1676},
                                {"barely-true", 1654}, {"pants-fire", 839}});
  double total = 0;
  std::size_t n = 0;
  for (const auto& s : label_distribution(liar)) {
    total += s.proportion;
    n += s.count;
    if (s.label == "barely-true") CHECK(s.proportion * 100 == doctest::Approx(16.15).epsilon(1e-3));
  }
  CHECK(n == 10240);
  CHECK(std::abs(total - 1.0) < 1e-12);

  const auto one = make_split({{"only", 1}});
  CHECK(label_distribution(one)[0].proportion == 1.0);
}
