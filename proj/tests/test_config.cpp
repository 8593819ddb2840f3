#include "doctest.h"

#include "cli_fixture.hpp"
#include "heterorep/config.hpp"
#include "heterorep/error.hpp"

using namespace heterorep;

TEST_CASE("config parsing") {
  testutil::TempDir dir("config");
  fixture::write_corpus(dir.path());
  testutil::write_file(dir / "c.json", fixture::config_json());
  const auto c = load_config(dir / "c.json");
  CHECK(c.seed == 42);
  CHECK(c.out == dir / "out");
  CHECK(c.dataset.splits[0] == dir / "train.tsv");
  CHECK(c.dataset.labels == std::vector<std::string>{"real", "fake"});
  REQUIRE(c.blocks.size() == 3);
  CHECK(c.blocks[0].builder == BuilderKind::Stylometric);
  CHECK(c.blocks[1].lsa.svd_dim == 8);
  CHECK(c.blocks[1].lsa.seed == 42);
  CHECK(c.blocks[2].kind == BlockKind::Kg);
  CHECK(c.blocks[2].entities == dir / "entities.txt");
  CHECK(c.learners.size() == 2);
  CHECK(c.learners[1].expand().size() == 2);
  CHECK(c.analysis.k == 5);
  CHECK(c.analysis.bins == 16);
  CHECK(c.scenarios.at("text") == std::vector<std::string>{"stylo", "lsa"});
  CHECK_NOTHROW(validate_config(c));
  CHECK(c.block_path(c.blocks[1], SplitName::Validation) == dir / "out" / "blocks" / "lsa.validation.drm");
}

TEST_CASE("config defaults and errors") {
  const std::string minimal = R"({"seed": 1, "dataset": {"train": "a", "validation": "b", "test": "c"}})";
  const auto c = parse_config(minimal);
  CHECK(c.learners.size() == 1);
  CHECK(c.learners[0].family == LearnerGrid::Family::LogReg);
  CHECK(c.analysis.k == 200);
  CHECK(c.analysis.sample_fraction == 0.1);

  CHECK_THROWS_AS(parse_config("{"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"dataset": {"train": "a", "validation": "b", "test": "c"}})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "dataset": {"train": "a", "validation": "b"}})"), ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "bogus": 2, "dataset": {"train": "a", "validation": "b", "test": "c"}})"),
                  ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "dataset": {"train": "a", "validation": "b", "test": "c"},
                                    "blocks": [{"name": "k", "builder": "kg"}]})"),
                  ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "dataset": {"train": "a", "validation": "b", "test": "c"},
                                    "learners": [{"family": "forest"}]})"),
                  ParameterError);
  CHECK_THROWS_AS(parse_config(R"({"seed": 1, "dataset": {"train": "a", "validation": "b", "test": "c"},
                                    "analysis": {"sample_fraction": 0}})"),
                  ParameterError);
  // a config naming a missing file is a config error
  CHECK_THROWS_AS(validate_config(c), ParameterError);
}

TEST_CASE("config validation") {
  testutil::TempDir dir("validate");
  fixture::write_corpus(dir.path());
  auto c = parse_config(fixture::config_json(), dir.path());
  c.blocks.push_back(c.blocks[0]);
  CHECK_THROWS_AS(validate_config(c), ParameterError);
  c.blocks.pop_back();
  c.scenarios["bad"] = {"stylo", "nope"};
  CHECK_THROWS_AS(validate_config(c), ParameterError);
}

TEST_CASE("block flag") {
  const auto b = parse_block_flag("bert=/data/bert.{split}.drm:text");
  CHECK(b.name == "bert");
  CHECK(b.path == "/data/bert.{split}.drm");
  CHECK(b.kind == BlockKind::Text);
  CHECK(b.builder == BuilderKind::External);
  ExperimentConfig c;
  CHECK(c.block_path(b, SplitName::Test) == "/data/bert.test.drm");
  const auto e = parse_block_flag("ent=C:/emb/ent:kg-entity");
  CHECK(e.path == "C:/emb/ent");
  CHECK(e.kind == BlockKind::KgEntity);
  CHECK(c.block_path(e, SplitName::Train) == "C:/emb/ent.train.drm");
  CHECK_THROWS_AS(parse_block_flag("noequals"), UsageError);
  CHECK_THROWS_AS(parse_block_flag("x=path"), UsageError);
  CHECK_THROWS_AS(parse_block_flag("x=path:weird"), UsageError);
}
