#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heterorep/learners.hpp"
#include "heterorep/metrics.hpp"
#include "heterorep/stacking.hpp"
#include "heterorep/textrep.hpp"

namespace heterorep {

// ---------------------------------------------------------------------------
// Mutual information

// Equal-frequency bin ids (0-based, at most `bins` distinct values). Tied
// values always share a bin: each value takes the bin of its first rank.
std::vector<int> equal_frequency_bins(std::span<const double> column, int bins);

// Plug-in MI in nats between two discrete variables.
double discrete_mutual_information(std::span<const int> a, std::span<const int> b);

// Bins the column, then plug-in MI against the labels.
double mutual_information(std::span<const double> column, std::span<const int> labels, int bins = 16);

struct FeatureRanking {
  std::vector<double> scores;        // per column
  std::vector<Eigen::Index> order;   // descending score, ties by column index
};

struct SubspaceCount {
  std::string block;
  std::size_t count = 0;
};

struct RankingResult {
  FeatureRanking ranking;
  std::size_t k = 0;  // after clamping
  std::vector<SubspaceCount> counts;  // attribution order
  std::vector<std::string> warnings;
};

RankingResult rank_and_attribute(const Eigen::MatrixXf& composed, std::span<const ColumnRange> attribution,
                                 std::span<const int> labels, std::size_t k = 200, int bins = 16,
                                 std::size_t threads = 1);

// block,count
void write_ranking_radial(const RankingResult& result, const std::filesystem::path& path);
// rank, column, block, score for the top-k columns
void write_ranking_table(const RankingResult& result, std::span<const ColumnRange> attribution,
                         const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Exhaustive subset ablation

struct AblationOptions {
  double sample_fraction = 0.1;
  std::vector<double> c_grid{1.0, 0.1, 0.01, 0.001};
  // Training splits smaller than this are used whole.
  std::size_t min_rows_for_sampling = 1000;
  std::uint64_t seed = 0;
  Averaging averaging = Averaging::Weighted;
  int positive_class = 1;
  std::size_t threads = 1;
  LinearModelSpec logreg{.max_epochs = 300, .tol = 1e-5};
};

struct AblationRecord {
  std::uint64_t mask = 0;
  std::vector<std::string> blocks;
  Eigen::Index dimension = 0;
  MetricsRecord validation;
  double best_c = 0.0;
  bool flagged = false;
  std::string error;
};

// Every non-empty mask over n blocks, ascending.
std::vector<std::uint64_t> enumerate_subsets(std::size_t n_blocks);

// F1 desc, then accuracy desc, then mask asc. Flagged records sort last.
void sort_ablation_records(std::vector<AblationRecord>& records);

// Logistic regression over the C grid for every block subset; C maps to
// l2_lambda = 1 / (C * n_train). Returned records are sorted.
std::vector<AblationRecord> ablate(const BlockRegistry& train, const BlockRegistry& validation,
                                   std::span<const int> y_train, std::span<const int> y_valid, std::size_t n_classes,
                                   const AblationOptions& options = {});

void write_ablation_table(std::span<const AblationRecord> records, const std::filesystem::path& path);
void write_ablation_scatter(std::span<const AblationRecord> records, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Class-wise TF-IDF variance

struct VarianceWord {
  std::string word;
  double variance = 0.0;
};

struct ClassVarianceWords {
  std::string label;
  std::vector<VarianceWord> words;  // variance desc, ties lexicographic; zero variance excluded
  bool flagged = false;             // fewer than two documents
};

// Population variance of each column within each class. Every label in
// `label_names` must own at least one row.
std::vector<ClassVarianceWords> class_variance_words(const SparseRows& tfidf, std::span<const std::string> vocabulary,
                                                     std::span<const int> labels,
                                                     std::span<const std::string> label_names, std::size_t top_k);

// class, word, variance
void write_variance_words(std::span<const ClassVarianceWords> words, const std::filesystem::path& path);

}  // namespace heterorep
