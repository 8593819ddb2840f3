#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heterorep/corpus.hpp"
#include "heterorep/textrep.hpp"

namespace heterorep {

// Bundled surface -> lemma table; identity for unknown words.
const std::unordered_map<std::string, std::string>& lemma_table();
const std::string& lemmatize(const std::string& token);

// Lowercase, delete punctuation inside tokens, drop stopwords, lemmatize.
// Aliases and documents must both go through this function.
TokenList preprocess_kg(std::string_view text);

using EntityMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Pretrained entity vectors, one row per alias line of the source file.
struct EntityEmbeddingStore {
  std::string method = "unknown";  // TransE, DistMult, ComplEx, RotatE, QuatE, SimplE
  std::vector<std::string> aliases;
  EntityMatrix vectors;

  std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
};

// Text: "#method=<tag> dim=<D> count=<N>" then N lines "alias<TAB>f1 ... fD".
EntityEmbeddingStore load_entities_text(const std::filesystem::path& path);
// Binary: "ENT1", u64 N, u64 D, N length-prefixed aliases, f32 N x D row-major.
EntityEmbeddingStore load_entities_binary(const std::filesystem::path& path, std::string method = "unknown");
// Dispatches on the leading magic bytes.
EntityEmbeddingStore load_entities(const std::filesystem::path& path);
void save_entities_text(const EntityEmbeddingStore& store, const std::filesystem::path& path);
void save_entities_binary(const EntityEmbeddingStore& store, const std::filesystem::path& path);

class AliasDictionary {
 public:
  static constexpr std::size_t kMaxNgram = 3;

  AliasDictionary() = default;
  // Aliases are run through preprocess_kg; on collision the first row wins.
  explicit AliasDictionary(const EntityEmbeddingStore& store);
  // Pre-normalized alias -> entity row.
  AliasDictionary(std::vector<std::pair<std::string, std::uint32_t>> aliases, std::size_t n_entities,
                  std::size_t dim);

  std::optional<std::uint32_t> find(const std::string& alias) const;
  std::size_t size() const { return index_.size(); }
  std::size_t n_entities() const { return n_entities_; }
  std::size_t dim() const { return dim_; }
  std::size_t collisions() const { return collisions_; }
  // First alias registered for the entity, or "#<row>" when none.
  std::string name(std::uint32_t entity) const;

 private:
  void insert(std::string alias, std::uint32_t entity);

  std::unordered_map<std::string, std::uint32_t> index_;
  std::unordered_map<std::uint32_t, std::string> names_;
  std::size_t n_entities_ = 0;
  std::size_t dim_ = 0;
  std::size_t collisions_ = 0;
};

struct ConceptSpan {
  std::size_t offset = 0;
  std::size_t length = 0;
  std::uint32_t entity = 0;
};

struct ConceptSet {
  std::string document_id;
  std::vector<std::uint32_t> concepts;  // ascending; unique unless multiset mode
  std::vector<ConceptSpan> spans;

  bool empty() const { return concepts.empty(); }
};

struct MatchOptions {
  // Longest match per position consumes its tokens instead of every
  // overlapping n-gram contributing.
  bool longest_only = false;
  // Keep repeated entities (frequency weighting in the average).
  bool multiset = false;
};

ConceptSet match_concepts(const TokenList& tokens, const AliasDictionary& dict, const MatchOptions& options = {});

// Mean of the concept embeddings, summed in ascending index order in double
// precision. Empty set -> zero vector.
template <typename Scalar = float>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> agg_average(const ConceptSet& concepts, const EntityEmbeddingStore& store);

extern template Eigen::VectorXf agg_average<float>(const ConceptSet&, const EntityEmbeddingStore&);
extern template Eigen::VectorXd agg_average<double>(const ConceptSet&, const EntityEmbeddingStore&);

// Entities matched in metadata values, each value matched as a whole string
// and by n-grams. Returns the matched set (empty means zero fallback).
ConceptSet match_metadata(std::span<const std::pair<std::string, std::string>> metadata, const AliasDictionary& dict);

Eigen::VectorXf entity_repr(std::span<const std::pair<std::string, std::string>> metadata,
                            const AliasDictionary& dict, const EntityEmbeddingStore& store,
                            bool* no_concept = nullptr);

struct ConceptCount {
  std::uint32_t entity = 0;
  std::string alias;
  std::size_t documents = 0;  // documents containing the concept
};

struct ConceptStats {
  std::string dataset;
  std::size_t n_documents = 0;
  std::size_t n_covered = 0;  // documents with at least one concept
  double coverage = 0.0;
  std::vector<ConceptCount> top;                    // by count desc, then entity asc
  std::map<std::size_t, std::size_t> histogram;     // concepts per document -> documents
};

ConceptStats concept_stats(std::span<const ConceptSet> sets, const AliasDictionary& dict, std::size_t top_k = 10,
                           std::string dataset = {});

// Matches every document of every split (text only) and reports per split.
std::vector<ConceptStats> concept_stats(std::span<const DatasetSplit> datasets, const AliasDictionary& dict,
                                        std::size_t top_k = 10, const MatchOptions& options = {});

}  // namespace heterorep
