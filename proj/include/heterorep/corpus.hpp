#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace heterorep {

struct Document {
  std::string id;
  std::string text;
  std::string label;
  // Insertion-ordered field -> value pairs.
  std::vector<std::pair<std::string, std::string>> metadata;

  const std::string* field(std::string_view name) const;
};

enum class SplitName { Train, Validation, Test };

std::string_view to_string(SplitName name);
SplitName parse_split_name(std::string_view s);

struct DatasetSplit {
  SplitName name = SplitName::Train;
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  std::vector<std::string> ids() const;
};

// Contiguous ids 0..L-1 in first-seen order.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  // Registers labels of `split` that are not yet known (train first).
  void register_split(const DatasetSplit& split);
  int add(const std::string& label);

  int id(const std::string& label) const;  // throws EvaluationError when unknown
  std::optional<int> find(const std::string& label) const;
  const std::string& name(int id) const { return labels_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::vector<int> encode(const DatasetSplit& split) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

enum class FileFormat { Tsv, Csv, Jsonl };
FileFormat parse_file_format(std::string_view s);

struct Schema {
  std::string id_column = "id";
  std::string text_column = "text";
  std::string label_column = "label";
  std::vector<std::string> metadata_columns;
  // Rows sharing an id are merged into one document, texts joined by a
  // single space (author-profiling corpora ship one row per post).
  bool concat_by_id = false;
};

DatasetSplit load_dataset(const std::filesystem::path& path, FileFormat format, const Schema& schema,
                          SplitName name = SplitName::Train);

// Throws IngestionError naming the first id found in two splits.
void check_disjoint(std::span<const DatasetSplit* const> splits);

// Per-class counts by largest-remainder apportionment of round(fraction * n);
// ties in the remainder go to the lower class id.
std::vector<std::size_t> apportion(std::span<const std::size_t> class_sizes, double fraction);

// Row indices (ascending) of a stratified sample of `labels`.
std::vector<std::size_t> stratified_indices(std::span<const int> labels, double fraction, std::uint64_t seed);

DatasetSplit stratified_sample(const DatasetSplit& split, double fraction, std::uint64_t seed);

struct LabelShare {
  std::string label;
  std::size_t count = 0;
  double proportion = 0.0;
};

// Labels in first-seen order within the split.
std::vector<LabelShare> label_distribution(const DatasetSplit& split);

}  // namespace heterorep
