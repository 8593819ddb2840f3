#include "heterorep/textrep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "heterorep/binary_io.hpp"
#include "heterorep/bundled_data.hpp"
#include "heterorep/error.hpp"
#include "heterorep/svd.hpp"
#include "heterorep/unicode.hpp"

namespace heterorep {

const std::unordered_set<std::string>& english_stopwords() {
  static const std::unordered_set<std::string> words = [] {
    std::unordered_set<std::string> s;
    std::string_view rest = bundled::kStopwordsEn;
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      std::string word(rest.substr(0, nl));
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      if (!word.empty() && word.back() == '\r') word.pop_back();
      if (word.empty()) continue;
      s.insert(unicode::strip_punct(word));
      s.insert(std::move(word));
    }
    return s;
  }();
  return words;
}

bool is_stopword(const std::string& token) { return english_stopwords().contains(token); }

TokenList preprocess(std::string_view text) {
  TokenList out;
  for (auto& raw : unicode::split_whitespace(text)) {
    if (raw.front() == '#') continue;
    auto token = unicode::strip_punct(unicode::lowercase(raw));
    if (token.empty() || is_stopword(token)) continue;
    out.push_back(std::move(token));
  }
  return out;
}

StyloProfile parse_stylo_profile(std::string_view s) {
  if (s == "full16") return StyloProfile::Full16;
  if (s == "char10") return StyloProfile::Char10;
  throw ParameterError("unknown stylometric profile: " + std::string(s));
}

Eigen::VectorXf StyloVector::to_vector(StyloProfile profile) const {
  std::vector<double> v;
  if (profile == StyloProfile::Full16) {
    v = {max_word_len, min_word_len, mean_word_len, std_word_len, static_cast<double>(n_upper_start),
         static_cast<double>(n_lower_start)};
  }
  for (auto c : {n_digits, n_letters, n_spaces, n_punct, n_hashtags}) v.push_back(static_cast<double>(c));
  for (auto c : n_vowel) v.push_back(static_cast<double>(c));
  Eigen::VectorXf out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = static_cast<float>(v[i]);
  return out;
}

std::vector<std::string> StyloVector::feature_names(StyloProfile profile) {
  std::vector<std::string> names;
  if (profile == StyloProfile::Full16)
    names = {"max_word_len", "min_word_len", "mean_word_len", "std_word_len", "n_upper_start", "n_lower_start"};
  for (const char* n : {"n_digits", "n_letters", "n_spaces", "n_punct", "n_hashtags", "n_a", "n_e", "n_i", "n_o", "n_u"})
    names.emplace_back(n);
  return names;
}

StyloVector stylometric(std::string_view text) {
  StyloVector s;
  const auto words = unicode::split_whitespace(text);
  if (!words.empty()) {
    std::vector<double> lens;
    lens.reserve(words.size());
    for (const auto& w : words) {
      const auto cps = unicode::decode(w);
      lens.push_back(static_cast<double>(cps.size()));
      if (unicode::is_upper(cps.front())) ++s.n_upper_start;
      if (unicode::is_lower(cps.front())) ++s.n_lower_start;
      if (cps.front() == U'#' && cps.size() > 1) ++s.n_hashtags;
    }
    s.max_word_len = *std::max_element(lens.begin(), lens.end());
    s.min_word_len = *std::min_element(lens.begin(), lens.end());
    const double n = static_cast<double>(lens.size());
    s.mean_word_len = std::accumulate(lens.begin(), lens.end(), 0.0) / n;
    double ss = 0.0;
    for (double l : lens) ss += (l - s.mean_word_len) * (l - s.mean_word_len);
    s.std_word_len = std::sqrt(ss / n);
  }
  for (char32_t cp : unicode::decode(text)) {
    if (unicode::is_digit(cp)) ++s.n_digits;
    if (unicode::is_letter(cp)) ++s.n_letters;
    if (unicode::is_space(cp)) ++s.n_spaces;
    if (unicode::is_punct(cp)) ++s.n_punct;
    switch (unicode::to_lower(cp)) {
      case U'a': ++s.n_vowel[0]; break;
      case U'e': ++s.n_vowel[1]; break;
      case U'i': ++s.n_vowel[2]; break;
      case U'o': ++s.n_vowel[3]; break;
      case U'u': ++s.n_vowel[4]; break;
      default: break;
    }
  }
  return s;
}

std::vector<std::string> word_ngrams(const TokenList& tokens, NgramRange range) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string gram;
    for (int n = 1; n <= range.max && i + static_cast<std::size_t>(n) <= tokens.size(); ++n) {
      if (n > 1) gram += ' ';
      gram += tokens[i + static_cast<std::size_t>(n) - 1];
      if (n >= range.min) out.push_back(gram);
    }
  }
  return out;
}

std::vector<std::string> char_ngrams(const TokenList& tokens, NgramRange range) {
  std::u32string joined;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) joined.push_back(U' ');
    joined += unicode::decode(tokens[i]);
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < joined.size(); ++i)
    for (int n = range.min; n <= range.max && i + static_cast<std::size_t>(n) <= joined.size(); ++n)
      out.push_back(unicode::encode(std::u32string_view(joined).substr(i, static_cast<std::size_t>(n))));
  return out;
}

TfidfModel::TfidfModel(TfidfConfig config, std::vector<std::string> words, std::vector<std::string> chars,
                       Eigen::VectorXd idf)
    : config_(config), words_(std::move(words)), chars_(std::move(chars)), idf_(std::move(idf)) {
  if (static_cast<std::size_t>(idf_.size()) != size()) throw FormatError("idf length does not match vocabulary");
  for (std::size_t i = 0; i < words_.size(); ++i) word_index_.emplace(words_[i], static_cast<int>(i));
  for (std::size_t i = 0; i < chars_.size(); ++i)
    char_index_.emplace(chars_[i], static_cast<int>(words_.size() + i));
}

Eigen::SparseVector<double> TfidfModel::transform(const TokenList& doc) const {
  std::unordered_map<int, double> counts;
  if (!words_.empty())
    for (const auto& g : word_ngrams(doc, config_.word_range))
      if (auto it = word_index_.find(g); it != word_index_.end()) counts[it->second] += 1.0;
  if (!chars_.empty())
    for (const auto& g : char_ngrams(doc, config_.char_range))
      if (auto it = char_index_.find(g); it != char_index_.end()) counts[it->second] += 1.0;

  std::vector<std::pair<int, double>> entries(counts.begin(), counts.end());
  std::sort(entries.begin(), entries.end());
  double norm = 0.0;
  for (auto& [col, v] : entries) {
    v *= idf_(col);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  Eigen::SparseVector<double> out(static_cast<Eigen::Index>(size()));
  out.reserve(static_cast<Eigen::Index>(entries.size()));
  for (const auto& [col, v] : entries) out.insertBack(col) = norm > 0 ? v / norm : 0.0;
  return out;
}

SparseRows TfidfModel::transform(std::span<const TokenList> corpus) const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    const auto row = transform(corpus[r]);
    for (Eigen::SparseVector<double>::InnerIterator it(row); it; ++it)
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.index()), it.value());
  }
  SparseRows x(static_cast<Eigen::Index>(corpus.size()), static_cast<Eigen::Index>(size()));
  x.setFromTriplets(triplets.begin(), triplets.end());
  return x;
}

namespace {

std::vector<std::string> top_by_df(const std::unordered_map<std::string, std::size_t>& df, std::size_t limit,
                                   std::vector<std::size_t>& df_out) {
  std::vector<std::pair<std::string, std::size_t>> items(df.begin(), df.end());
  const auto cmp = [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; };
  const std::size_t keep = std::min(limit, items.size());
  std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(keep), items.end(), cmp);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back(std::move(items[i].first));
    df_out.push_back(items[i].second);
  }
  return out;
}

}  // namespace

TfidfModel fit_tfidf(std::span<const TokenList> corpus, const TfidfConfig& config) {
  if (corpus.empty()) throw DataError("cannot fit TF-IDF on an empty corpus");
  std::unordered_map<std::string, std::size_t> word_df, char_df;
  for (const auto& doc : corpus) {
    if (config.n_word_features > 0) {
      auto grams = word_ngrams(doc, config.word_range);
      std::sort(grams.begin(), grams.end());
      grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
      for (auto& g : grams) ++word_df[std::move(g)];
    }
    if (config.n_char_features > 0) {
      auto grams = char_ngrams(doc, config.char_range);
      std::sort(grams.begin(), grams.end());
      grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
      for (auto& g : grams) ++char_df[std::move(g)];
    }
  }
  std::vector<std::size_t> df;
  auto words = top_by_df(word_df, config.n_word_features, df);
  auto chars = top_by_df(char_df, config.n_char_features, df);
  const double n = static_cast<double>(corpus.size());
  Eigen::VectorXd idf(static_cast<Eigen::Index>(df.size()));
  for (std::size_t i = 0; i < df.size(); ++i)
    idf(static_cast<Eigen::Index>(i)) = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
  return TfidfModel(config, std::move(words), std::move(chars), std::move(idf));
}

LsaModel fit_lsa(std::span<const TokenList> corpus, const LsaConfig& config, Eigen::MatrixXd* train_embedding) {
  if (config.svd_dim == 0 || config.tfidf.n_word_features + config.tfidf.n_char_features == 0)
    throw ParameterError("LSA dimensions must be positive");
  if (config.svd_dim > config.tfidf.n_word_features + config.tfidf.n_char_features)
    throw ParameterError("svd_dim exceeds the number of n-gram features");
  if (std::all_of(corpus.begin(), corpus.end(), [](const TokenList& d) { return d.empty(); }))
    throw DataError("cannot fit LSA: corpus has no non-empty document");

  LsaModel model;
  model.tfidf = fit_tfidf(corpus, config.tfidf);
  const SparseRows x = model.tfidf.transform(corpus);
  auto svd = truncated_svd(x, config.svd_dim, {config.seed, config.power_iterations, config.oversample});
  model.projection = std::move(svd.right);
  model.singular_values = std::move(svd.singular_values);
  model.warnings = std::move(svd.warnings);
  if (train_embedding) *train_embedding = x * model.projection;
  return model;
}

Eigen::VectorXd transform_lsa(const LsaModel& model, const TokenList& doc) {
  const Eigen::SparseVector<double> v = model.tfidf.transform(doc);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.projection.cols());
  for (Eigen::SparseVector<double>::InnerIterator it(v); it; ++it)
    out += it.value() * model.projection.row(it.index()).transpose();
  return out;
}

Eigen::MatrixXd transform_lsa(const LsaModel& model, std::span<const TokenList> corpus) {
  const SparseRows x = model.tfidf.transform(corpus);
  return x * model.projection;
}

namespace {
constexpr std::uint64_t kLsaVersion = 1;
}

// Layout: "LSA1", u64 version, u64 n_word, u64 n_char, u64 dim,
// u64 word_min, word_max, char_min, char_max, vocabulary strings,
// f64 idf[V], f64 singular_values[dim], f64 projection[V x dim] row-major.
void save_lsa(const LsaModel& model, const std::filesystem::path& path) {
  io::BinaryWriter w(path);
  w.magic("LSA1");
  const auto& cfg = model.tfidf.config();
  w.put<std::uint64_t>(kLsaVersion);
  w.put<std::uint64_t>(model.tfidf.n_word());
  w.put<std::uint64_t>(model.tfidf.n_char());
  w.put<std::uint64_t>(model.dim());
  for (int v : {cfg.word_range.min, cfg.word_range.max, cfg.char_range.min, cfg.char_range.max})
    w.put<std::uint64_t>(static_cast<std::uint64_t>(v));
  for (std::size_t i = 0; i < model.tfidf.size(); ++i) w.put_string(model.tfidf.term(i));
  w.put_array(model.tfidf.idf().data(), model.tfidf.size());
  w.put_array(model.singular_values.data(), model.dim());
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> proj = model.projection;
  w.put_array(proj.data(), static_cast<std::size_t>(proj.size()));
  w.close();
}

LsaModel load_lsa(const std::filesystem::path& path) {
  io::BinaryReader r(path);
  r.expect_magic("LSA1");
  if (r.get<std::uint64_t>() != kLsaVersion) throw FormatError(path.string() + ": unsupported LSA version");
  const auto n_word = r.get<std::uint64_t>();
  const auto n_char = r.get<std::uint64_t>();
  const auto dim = r.get<std::uint64_t>();
  TfidfConfig cfg;
  cfg.word_range.min = static_cast<int>(r.get<std::uint64_t>());
  cfg.word_range.max = static_cast<int>(r.get<std::uint64_t>());
  cfg.char_range.min = static_cast<int>(r.get<std::uint64_t>());
  cfg.char_range.max = static_cast<int>(r.get<std::uint64_t>());
  cfg.n_word_features = n_word;
  cfg.n_char_features = n_char;
  const std::uint64_t v = n_word + n_char;
  if (v > r.remaining() || dim > r.remaining()) throw FormatError(path.string() + ": corrupt LSA header");
  std::vector<std::string> words, chars;
  for (std::uint64_t i = 0; i < n_word; ++i) words.push_back(r.get_string());
  for (std::uint64_t i = 0; i < n_char; ++i) chars.push_back(r.get_string());
  if (r.remaining() != 8 * (v + dim + v * dim)) throw FormatError(path.string() + ": LSA payload size mismatch");
  Eigen::VectorXd idf(static_cast<Eigen::Index>(v));
  r.get_array(idf.data(), v);
  LsaModel model;
  model.tfidf = TfidfModel(cfg, std::move(words), std::move(chars), std::move(idf));
  model.singular_values.resize(static_cast<Eigen::Index>(dim));
  r.get_array(model.singular_values.data(), dim);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> proj(static_cast<Eigen::Index>(v),
                                                                              static_cast<Eigen::Index>(dim));
  r.get_array(proj.data(), v * dim);
  model.projection = proj;
  return model;
}

}  // namespace heterorep
