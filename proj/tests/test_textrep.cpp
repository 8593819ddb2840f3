#include "doctest.h"

#include <algorithm>
#include <map>

#include "heterorep/error.hpp"
#include "heterorep/rng.hpp"
#include "heterorep/textrep.hpp"
#include "heterorep/unicode.hpp"
#include "test_util.hpp"

using namespace heterorep;

TEST_CASE("preprocess") {
  CHECK(preprocess("The Vaccine WORKS! #covid") == TokenList{"vaccine", "works"});
  CHECK(preprocess("").empty());
  CHECK(preprocess("a an the").empty());
  CHECK(preprocess("Don't  stop\tbelieving") == TokenList{"stop", "believing"});
  CHECK(preprocess("ÉCOLE, café!") == TokenList{"école", "café"});
}

TEST_CASE("stylometric examples") {
  const auto s = stylometric("Hello World");
  CHECK(s.max_word_len == 5);
  CHECK(s.min_word_len == 5);
  CHECK(s.mean_word_len == 5);
  CHECK(s.std_word_len == 0);
  CHECK(s.n_upper_start == 2);
  CHECK(s.n_lower_start == 0);
  CHECK(s.n_digits == 0);
  CHECK(s.n_letters == 10);
  CHECK(s.n_spaces == 1);
  CHECK(s.n_punct == 0);
  CHECK(s.n_hashtags == 0);
  CHECK(s.n_vowel == std::array<std::size_t, 5>{0, 1, 0, 2, 0});

  CHECK(stylometric("").to_vector().isZero());
  CHECK(stylometric("").to_vector(StyloProfile::Char10).size() == 10);

  const auto h = stylometric("#covid19 kills 9");
  CHECK(h.n_hashtags == 1);
  CHECK(h.n_digits == 3);
  CHECK(h.n_punct == 1);
  CHECK(stylometric("single").std_word_len == 0);
}

TEST_CASE("stylometric invariants") {
  Rng rng(5);
  const std::string alphabet = "aBcDeFgHiJ0123 .,!#?xyzUO";
  for (int trial = 0; trial < 200; ++trial) {
    auto make = [&] {
      std::string t;
      const auto n = 1 + rng.below(30);
      for (std::size_t i = 0; i < n; ++i) t.push_back(alphabet[rng.below(alphabet.size())]);
      return t;
    };
    const auto a = make(), b = make();
    const auto sa = stylometric(a), sb = stylometric(b), sab = stylometric(a + " " + b);
    CHECK(sab.n_digits == sa.n_digits + sb.n_digits);
    CHECK(sab.n_letters == sa.n_letters + sb.n_letters);
    CHECK(sab.n_punct == sa.n_punct + sb.n_punct);
    CHECK(sab.n_spaces == sa.n_spaces + sb.n_spaces + 1);
    for (int v = 0; v < 5; ++v) CHECK(sab.n_vowel[v] == sa.n_vowel[v] + sb.n_vowel[v]);
    if (sa.max_word_len > 0) {
      CHECK(sa.min_word_len <= sa.mean_word_len + 1e-12);
      CHECK(sa.mean_word_len <= sa.max_word_len + 1e-12);
    }
  }
  CHECK(StyloVector::feature_names().size() == 16);
  CHECK(StyloVector::feature_names(StyloProfile::Char10).size() == 10);
  CHECK_THROWS_AS(parse_stylo_profile("full17"), ParameterError);
}

TEST_CASE("ngram extraction") {
  const TokenList t{"aa", "ab", "c"};
  CHECK(word_ngrams(t, {1, 2}) == std::vector<std::string>{"aa", "aa ab", "ab", "ab c", "c"});
  CHECK(char_ngrams({"ab", "c"}, {1, 2}) == std::vector<std::string>{"a", "ab", "b", "b ", " ", " c", "c"});
  CHECK(char_ngrams({"é"}, {1, 1}) == std::vector<std::string>{"é"});
}

TEST_CASE("vocabulary by document frequency") {
  TfidfConfig cfg;
  cfg.word_range = {1, 1};
  cfg.n_word_features = 1;
  cfg.n_char_features = 0;
  const std::vector<TokenList> corpus{{"aa", "ab"}, {"aa"}};
  const auto m = fit_tfidf(corpus, cfg);
  REQUIRE(m.n_word() == 1);
  CHECK(m.words()[0] == "aa");
  CHECK(m.idf()(0) == doctest::Approx(std::log(3.0 / 3.0) + 1.0));

  // ties are lexicographic and order-free
  cfg.n_word_features = 3;
  const std::vector<TokenList> a{{"z", "y"}, {"x", "y"}, {"w"}};
  const std::vector<TokenList> b{{"w"}, {"x", "y"}, {"z", "y"}};
  CHECK(fit_tfidf(a, cfg).words() == fit_tfidf(b, cfg).words());
  CHECK(fit_tfidf(a, cfg).words() == std::vector<std::string>{"y", "w", "x"});
}

namespace {

std::vector<TokenList> random_corpus(std::size_t n_docs, std::uint64_t seed) {
  const std::vector<std::string> vocab{"vaccine", "virus", "mask", "trump", "covid", "lockdown", "cases", "death",
                                       "hospital", "news", "fake", "real", "cure", "test", "spread", "china"};
  Rng rng(seed);
  std::vector<TokenList> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    TokenList t;
    const auto len = 3 + rng.below(10);
    for (std::size_t i = 0; i < len; ++i) t.push_back(vocab[rng.below(vocab.size())]);
    docs.push_back(std::move(t));
  }
  return docs;
}

// Dense recomputation of a TF-IDF row by scanning every n-gram of the document.
Eigen::VectorXd oracle_tfidf(const TfidfModel& m, const TokenList& doc) {
  std::map<std::string, double> wc, cc;
  for (int n = m.config().word_range.min; n <= m.config().word_range.max; ++n)
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= doc.size(); ++i) {
      std::string g = doc[i];
      for (int k = 1; k < n; ++k) g += " " + doc[i + static_cast<std::size_t>(k)];
      wc[g] += 1;
    }
  std::string joined;
  for (std::size_t i = 0; i < doc.size(); ++i) joined += (i ? " " : "") + doc[i];
  const auto cps = unicode::decode(joined);
  for (int n = m.config().char_range.min; n <= m.config().char_range.max; ++n)
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cps.size(); ++i)
      cc[unicode::encode(std::u32string_view(cps).substr(i, static_cast<std::size_t>(n)))] += 1;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.size()));
  for (std::size_t c = 0; c < m.size(); ++c) {
    const auto& counts = m.kind(c) == NgramKind::Word ? wc : cc;
    if (auto it = counts.find(m.term(c)); it != counts.end())
      v(static_cast<Eigen::Index>(c)) = it->second * m.idf()(static_cast<Eigen::Index>(c));
  }
  const double norm = v.norm();
  return norm > 0 ? Eigen::VectorXd(v / norm) : v;
}

}  // namespace

TEST_CASE("lsa fit and transform") {
  const auto corpus = random_corpus(60, 3);
  LsaConfig cfg;
  cfg.tfidf.n_word_features = 80;
  cfg.tfidf.n_char_features = 120;
  cfg.svd_dim = 20;
  cfg.seed = 11;
  Eigen::MatrixXd train;
  const auto model = fit_lsa(corpus, cfg, &train);
  REQUIRE(model.dim() == 20);
  REQUIRE(train.rows() == 60);

  for (Eigen::Index i = 1; i < model.singular_values.size(); ++i)
    CHECK(model.singular_values(i) <= model.singular_values(i - 1));
  CHECK(model.singular_values.minCoeff() >= 0);
  const Eigen::MatrixXd gram = model.projection.transpose() * model.projection;
  CHECK((gram - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-8);

  const auto again = transform_lsa(model, corpus);
  CHECK((again - train).cwiseAbs().maxCoeff() < 1e-9);
  for (std::size_t d = 0; d < 5; ++d)
    CHECK((transform_lsa(model, corpus[d]) - train.row(static_cast<Eigen::Index>(d)).transpose()).cwiseAbs().maxCoeff() < 1e-9);

  CHECK(transform_lsa(model, TokenList{}).isZero());
  CHECK(transform_lsa(model, TokenList{"ÿþ"}).isZero());
  TfidfConfig words_only = cfg.tfidf;
  words_only.n_char_features = 0;
  CHECK(fit_tfidf(corpus, words_only).transform(TokenList{"oov"}).nonZeros() == 0);

  // concatenation of two train documents against the dense recomputation
  TokenList joined = corpus[0];
  joined.insert(joined.end(), corpus[1].begin(), corpus[1].end());
  const Eigen::VectorXd expected = model.projection.transpose() * oracle_tfidf(model.tfidf, joined);
  CHECK((transform_lsa(model, joined) - expected).cwiseAbs().maxCoeff() < 1e-12);
  for (std::size_t d = 0; d < 10; ++d) {
    const Eigen::VectorXd dense = model.tfidf.transform(corpus[d]);
    CHECK((dense - oracle_tfidf(model.tfidf, corpus[d])).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("lsa persistence and validation") {
  testutil::TempDir dir("lsa");
  const auto corpus = random_corpus(30, 9);
  LsaConfig cfg;
  cfg.tfidf.n_word_features = 40;
  cfg.tfidf.n_char_features = 40;
  cfg.svd_dim = 8;
  const auto model = fit_lsa(corpus, cfg);
  save_lsa(model, dir / "m.lsa");
  const auto loaded = load_lsa(dir / "m.lsa");
  CHECK(loaded.projection == model.projection);
  CHECK(loaded.singular_values == model.singular_values);
  CHECK(loaded.tfidf.words() == model.tfidf.words());
  CHECK(loaded.tfidf.chars() == model.tfidf.chars());
  CHECK(transform_lsa(loaded, corpus[3]) == transform_lsa(model, corpus[3]));

  testutil::write_file(dir / "bad.lsa", "LSA2xxxxxxxx");
  CHECK_THROWS_AS(load_lsa(dir / "bad.lsa"), FormatError);

  cfg.svd_dim = 81;
  CHECK_THROWS_AS(fit_lsa(corpus, cfg), ParameterError);
  cfg.svd_dim = 4;
  CHECK_THROWS_AS(fit_lsa(std::vector<TokenList>{{}, {}}, cfg), DataError);
}

TEST_CASE("lsa reduces dimension when the corpus is rank deficient") {
  const std::vector<TokenList> corpus{{"alpha", "beta"}, {"gamma"}, {"alpha", "beta"}};
  LsaConfig cfg;
  cfg.tfidf.word_range = {1, 1};
  cfg.tfidf.n_word_features = 10;
  cfg.tfidf.n_char_features = 0;
  cfg.svd_dim = 5;
  Eigen::MatrixXd train;
  const auto model = fit_lsa(corpus, cfg, &train);
  CHECK(model.dim() == 2);
  CHECK(!model.warnings.empty());
  CHECK(train.cols() == 2);
}
