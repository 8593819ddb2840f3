#include "doctest.h"

#include <cstring>
#include <limits>

#include "heterorep/error.hpp"
#include "heterorep/rng.hpp"
#include "heterorep/stacking.hpp"
#include "test_util.hpp"

using namespace heterorep;

namespace {

Eigen::MatrixXf random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXf m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<float>(rng.normal());
  return m;
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back("doc" + std::to_string(i));
  return v;
}

RepresentationBlock block(std::string name, BlockKind kind, Eigen::Index dim, Eigen::Index rows = 4,
                          std::uint64_t seed = 1) {
  return {std::move(name), kind, random_block(rows, dim, seed), ids(static_cast<std::size_t>(rows))};
}

}  // namespace

TEST_CASE("drm round trip is bitwise") {
  testutil::TempDir dir("drm");
  const auto m = random_block(7, 5, 3);
  save_drm(dir / "m.drm", m, ids(7));
  std::vector<std::string> got_ids;
  const auto back = load_drm(dir / "m.drm", &got_ids);
  REQUIRE(back.rows() == 7);
  REQUIRE(back.cols() == 5);
  CHECK(std::memcmp(back.data(), m.data(), sizeof(float) * 35) == 0);
  CHECK(got_ids == ids(7));
  const auto h = read_drm_header(dir / "m.drm");
  CHECK(h.rows == 7);
  CHECK(h.cols == 5);

  // byte layout: magic, u64 rows, u64 cols, row-major f32
  const auto bytes = testutil::read_file(dir / "m.drm");
  CHECK(bytes.size() == 4 + 16 + 35 * 4);
  CHECK(bytes.substr(0, 4) == "DRM1");
  float second = 0;
  std::memcpy(&second, bytes.data() + 20 + 4, 4);
  CHECK(second == m(0, 1));
  CHECK(testutil::read_file(ids_sidecar(dir / "m.drm")).rfind("doc0\ndoc1\n", 0) == 0);
}

TEST_CASE("malformed drm files") {
  testutil::TempDir dir("drm");
  std::string zero = "DRM1";
  const std::uint64_t rows = 3, cols = 0;
  zero.append(reinterpret_cast<const char*>(&rows), 8).append(reinterpret_cast<const char*>(&cols), 8);
  testutil::write_file(dir / "zero.drm", zero);
  CHECK_THROWS_AS(read_drm_header(dir / "zero.drm"), FormatError);
  CHECK_THROWS_AS(save_drm(dir / "z.drm", Eigen::MatrixXf(3, 0), ids(3)), FormatError);

  save_drm(dir / "ok.drm", random_block(3, 2, 1), ids(3));
  auto bytes = testutil::read_file(dir / "ok.drm");
  testutil::write_file(dir / "trunc.drm", bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(read_drm_header(dir / "trunc.drm"), FormatError);
  testutil::write_file(dir / "magic.drm", "XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(read_drm_header(dir / "magic.drm"), FormatError);
}

TEST_CASE("load_matrix checks alignment") {
  testutil::TempDir dir("drm");
  save_drm(dir / "b.drm", random_block(4, 3, 2), ids(4));
  const auto expected = ids(4);
  const auto b = load_matrix(dir / "b.drm", "roBERTa", BlockKind::Text, expected);
  CHECK(b.dim() == 3);
  CHECK(b.kind == BlockKind::Text);

  auto shuffled = expected;
  std::swap(shuffled[1], shuffled[2]);
  try {
    load_matrix(dir / "b.drm", "roBERTa", BlockKind::Text, shuffled);
    FAIL("expected alignment error");
  } catch (const AlignmentError& e) {
    CHECK(std::string(e.what()).find("doc1") != std::string::npos);
  }
  CHECK_THROWS_AS(load_matrix(dir / "b.drm", "x", BlockKind::Text, ids(5)), AlignmentError);
}

TEST_CASE("registry rules") {
  BlockRegistry r;
  r.add(block("a", BlockKind::Text, 3));
  CHECK_THROWS_AS(r.add(block("a", BlockKind::Text, 2)), UsageError);
  CHECK_THROWS_AS(r.add(block("b", BlockKind::Text, 2, 5)), CompositionError);
  auto nan = block("n", BlockKind::Text, 2);
  nan.matrix(0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(r.add(nan), IntegrityError);
  r.freeze();
  CHECK_THROWS_AS(r.add(block("c", BlockKind::Kg, 2)), UsageError);
  CHECK(r.rows() == 4);
}

TEST_CASE("scenarios and composition") {
  BlockRegistry r;
  r.add(block("stylo", BlockKind::Text, 16, 4, 1));
  r.add(block("LSA", BlockKind::Text, 512, 4, 2));
  r.add(block("dBERT", BlockKind::Text, 768, 4, 3));
  r.add(block("XLM", BlockKind::Text, 768, 4, 4));
  r.add(block("roBERTa", BlockKind::Text, 768, 4, 5));
  const char* kg[] = {"transe", "rotate", "quate", "distmult", "simple", "complex"};
  for (int i = 0; i < 6; ++i) r.add(block(kg[i], BlockKind::Kg, 512, 4, static_cast<std::uint64_t>(10 + i)));
  r.add(block("entity", BlockKind::KgEntity, 512, 4, 20));
  r.freeze();

  CHECK(compose(resolve_scenario("LM", r), r).matrix.cols() == 2832);
  CHECK(compose(resolve_scenario("KG", r), r).matrix.cols() == 3072);
  CHECK(resolve_scenario("LM+KG", r).blocks.size() == 11);
  CHECK(resolve_scenario("LM+KG+KG-ENTITY", r).blocks.back() == "entity");
  CHECK_THROWS_AS(resolve_scenario("NOPE", r), UsageError);

  const std::map<std::string, std::vector<std::string>> custom{{"mine", {"transe", "LSA"}}, {"bad", {"ghost"}}};
  CHECK(resolve_scenario("mine", r, custom).blocks == std::vector<std::string>{"LSA", "transe"});
  CHECK_THROWS_AS(resolve_scenario("bad", r, custom), UsageError);

  const auto one = compose(resolve_scenario("mine", r, custom), r);
  CHECK(one.matrix.leftCols(512) == r.at("LSA").matrix);
  CHECK(one.matrix.rightCols(512) == r.at("transe").matrix);
  REQUIRE(one.attribution.size() == 2);
  CHECK(one.attribution[0].begin == 0);
  CHECK(one.attribution[0].end == 512);
  CHECK(one.attribution[1].begin == 512);
  CHECK(one.attribution[1].end == 1024);

  const auto sub = subset_scenario(0b101, r);
  CHECK(sub.blocks == std::vector<std::string>{"stylo", "dBERT"});
  const auto single = compose(subset_scenario(1, r), r);
  CHECK(single.matrix == r.at("stylo").matrix);
  CHECK(single.attribution.front().end == 16);

  // attribution partitions the columns
  const auto all = compose(resolve_scenario("LM+KG+KG-ENTITY", r), r);
  Eigen::Index at = 0;
  for (const auto& range : all.attribution) {
    CHECK(range.begin == at);
    at = range.end;
  }
  CHECK(at == all.matrix.cols());

  BlockRegistry other;
  other.add(block("x", BlockKind::Text, 2, 3));
  CHECK_THROWS_AS(compose(Scenario{"s", {"x", "y"}}, other), UsageError);
}

TEST_CASE("block kind names") {
  CHECK(parse_block_kind("kg-entity") == BlockKind::KgEntity);
  CHECK(to_string(BlockKind::Kg) == "kg");
  CHECK_THROWS_AS(parse_block_kind("graph"), UsageError);
}

TEST_CASE("standardizer") {
  Eigen::MatrixXd x(2, 2);
  x << 5, 0, 5, 2;
  const auto st = Standardizer<double>::fit(x);
  const auto z = st.apply(x);
  CHECK(z(0, 0) == 5);
  CHECK(z(1, 0) == 5);
  CHECK(z(0, 1) == -1);
  CHECK(z(1, 1) == 1);

  const Eigen::MatrixXf m = random_block(200, 6, 12) * 3.0f + Eigen::MatrixXf::Constant(200, 6, 4.0f);
  const auto sf = Standardizer<double>::fit(m);
  const Eigen::MatrixXd zm = sf.apply(m);
  for (Eigen::Index j = 0; j < 6; ++j) {
    const double mu = zm.col(j).mean();
    const double sd = std::sqrt((zm.col(j).array() - mu).square().mean());
    CHECK(std::abs(mu) < 1e-6);
    CHECK(std::abs(sd - 1) < 1e-6);
  }
  CHECK((sf.inverse(zm) - m.cast<double>()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS_AS(sf.apply(Eigen::MatrixXd(3, 5)), CompositionError);
  CHECK_THROWS_AS(Standardizer<double>::fit(Eigen::MatrixXd(0, 3)), DataError);
}
