#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace heterorep {

using TokenList = std::vector<std::string>;

// Bundled English stopword list. Entries are stored both as listed and with
// punctuation removed ("don't" and "dont"), since lookups happen after
// punctuation stripping.
const std::unordered_set<std::string>& english_stopwords();
bool is_stopword(const std::string& token);

// Lowercase, drop #hashtag tokens, strip punctuation, drop stopwords.
TokenList preprocess(std::string_view text);

// ---------------------------------------------------------------------------
// Stylometric features

enum class StyloProfile { Full16, Char10 };
StyloProfile parse_stylo_profile(std::string_view s);

struct StyloVector {
  double max_word_len = 0, min_word_len = 0, mean_word_len = 0, std_word_len = 0;
  std::size_t n_upper_start = 0, n_lower_start = 0;
  std::size_t n_digits = 0, n_letters = 0, n_spaces = 0, n_punct = 0, n_hashtags = 0;
  std::array<std::size_t, 5> n_vowel{};  // a e i o u

  // full16: the four word-length stats, case starts, then the char10 block.
  // char10: digits, letters, spaces, punct, hashtags, a, e, i, o, u.
  Eigen::VectorXf to_vector(StyloProfile profile = StyloProfile::Full16) const;
  static std::vector<std::string> feature_names(StyloProfile profile = StyloProfile::Full16);
  static std::size_t dimension(StyloProfile profile) { return profile == StyloProfile::Full16 ? 16 : 10; }
};

// Word statistics use the whitespace-split raw text; lengths are code points.
StyloVector stylometric(std::string_view text);

// ---------------------------------------------------------------------------
// TF-IDF over word and character n-grams

enum class NgramKind : std::uint8_t { Word = 0, Char = 1 };

struct NgramRange {
  int min = 1;
  int max = 1;
};

// Space-joined word n-grams, lengths min..max, in order of position then length.
std::vector<std::string> word_ngrams(const TokenList& tokens, NgramRange range);
// Code-point n-grams over the tokens joined by single spaces.
std::vector<std::string> char_ngrams(const TokenList& tokens, NgramRange range);

struct TfidfConfig {
  NgramRange word_range{1, 2};
  NgramRange char_range{1, 3};
  std::size_t n_word_features = 2500;
  std::size_t n_char_features = 2500;
};

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Vocabulary = the most frequent word n-grams (by document frequency, ties
// lexicographic) followed by the most frequent char n-grams.
// idf = ln((1 + N) / (1 + df)) + 1; rows are L2 normalized.
class TfidfModel {
 public:
  TfidfModel() = default;
  TfidfModel(TfidfConfig config, std::vector<std::string> words, std::vector<std::string> chars, Eigen::VectorXd idf);

  const TfidfConfig& config() const { return config_; }
  std::size_t n_word() const { return words_.size(); }
  std::size_t n_char() const { return chars_.size(); }
  std::size_t size() const { return words_.size() + chars_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& chars() const { return chars_; }
  const Eigen::VectorXd& idf() const { return idf_; }
  NgramKind kind(std::size_t column) const { return column < words_.size() ? NgramKind::Word : NgramKind::Char; }
  const std::string& term(std::size_t column) const {
    return column < words_.size() ? words_[column] : chars_[column - words_.size()];
  }

  Eigen::SparseVector<double> transform(const TokenList& doc) const;
  SparseRows transform(std::span<const TokenList> corpus) const;

 private:
  TfidfConfig config_;
  std::vector<std::string> words_;
  std::vector<std::string> chars_;
  Eigen::VectorXd idf_;
  std::unordered_map<std::string, int> word_index_;
  std::unordered_map<std::string, int> char_index_;
};

TfidfModel fit_tfidf(std::span<const TokenList> corpus, const TfidfConfig& config);

// ---------------------------------------------------------------------------
// Latent semantic analysis

struct LsaConfig {
  TfidfConfig tfidf;
  std::size_t svd_dim = 512;
  std::uint64_t seed = 0;
  int power_iterations = 10;
  std::size_t oversample = 10;
};

struct LsaModel {
  TfidfModel tfidf;
  Eigen::MatrixXd projection;       // vocabulary x dim, orthonormal columns
  Eigen::VectorXd singular_values;  // non-increasing
  std::vector<std::string> warnings;

  std::size_t dim() const { return static_cast<std::size_t>(projection.cols()); }
};

// When `train_embedding` is given it receives the fitted N x dim matrix.
LsaModel fit_lsa(std::span<const TokenList> corpus, const LsaConfig& config,
                 Eigen::MatrixXd* train_embedding = nullptr);

Eigen::VectorXd transform_lsa(const LsaModel& model, const TokenList& doc);
Eigen::MatrixXd transform_lsa(const LsaModel& model, std::span<const TokenList> corpus);

void save_lsa(const LsaModel& model, const std::filesystem::path& path);
LsaModel load_lsa(const std::filesystem::path& path);

}  // namespace heterorep
