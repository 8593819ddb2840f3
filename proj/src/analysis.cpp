#include "heterorep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>

#include "heterorep/corpus.hpp"
#include "heterorep/error.hpp"
#include "heterorep/parallel.hpp"

namespace heterorep {

std::vector<int> equal_frequency_bins(std::span<const double> column, int bins) {
  if (bins < 2) throw ParameterError("need at least two bins");
  const std::size_t n = column.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<int> out(n);
  int current = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == 0 || column[order[r]] != column[order[r - 1]])
      current = static_cast<int>((r * static_cast<std::size_t>(bins)) / n);
    out[order[r]] = current;
  }
  return out;
}

double discrete_mutual_information(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ParameterError("mutual information inputs differ in length");
  if (a.empty()) return 0.0;
  std::map<std::pair<int, int>, std::size_t> joint;
  std::map<int, std::size_t> pa, pb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++pa[a[i]];
    ++pb[b[i]];
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (const auto& [key, count] : joint) {
    const double pxy = static_cast<double>(count) / n;
    const double px = static_cast<double>(pa[key.first]) / n;
    const double py = static_cast<double>(pb[key.second]) / n;
    mi += pxy * std::log(pxy / (px * py));
  }
  return std::max(0.0, mi);
}

double mutual_information(std::span<const double> column, std::span<const int> labels, int bins) {
  if (column.size() != labels.size()) throw ParameterError("column and labels differ in length");
  if (column.size() < 2) throw ParameterError("mutual information needs at least two rows");
  const auto binned = equal_frequency_bins(column, bins);
  return discrete_mutual_information(binned, labels);
}

RankingResult rank_and_attribute(const Eigen::MatrixXf& composed, std::span<const ColumnRange> attribution,
                                 std::span<const int> labels, std::size_t k, int bins, std::size_t threads) {
  const auto cols = static_cast<std::size_t>(composed.cols());
  std::vector<bool> covered(cols, false);
  for (const auto& r : attribution)
    for (Eigen::Index c = r.begin; c < r.end; ++c) covered[static_cast<std::size_t>(c)] = true;
  if (std::find(covered.begin(), covered.end(), false) != covered.end())
    throw CompositionError("attribution map does not cover every column");

  RankingResult result;
  result.ranking.scores.assign(cols, 0.0);
  parallel_for(
      cols,
      [&](std::size_t c) {
        std::vector<double> column(static_cast<std::size_t>(composed.rows()));
        for (Eigen::Index i = 0; i < composed.rows(); ++i)
          column[static_cast<std::size_t>(i)] = composed(i, static_cast<Eigen::Index>(c));
        result.ranking.scores[c] = mutual_information(column, labels, bins);
      },
      threads);
  auto& order = result.ranking.order;
  order.resize(cols);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return result.ranking.scores[static_cast<std::size_t>(a)] > result.ranking.scores[static_cast<std::size_t>(b)];
  });

  if (k > cols) {
    result.warnings.push_back("k=" + std::to_string(k) + " exceeds " + std::to_string(cols) +
                              " columns; clamped");
    k = cols;
  }
  result.k = k;
  if (k == 0) return result;
  for (const auto& r : attribution) result.counts.push_back({r.block, 0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = order[i];
    for (std::size_t b = 0; b < attribution.size(); ++b)
      if (col >= attribution[b].begin && col < attribution[b].end) ++result.counts[b].count;
  }
  return result;
}

void write_ranking_radial(const RankingResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "block,count\n";
  for (const auto& c : result.counts) out << c.block << ',' << c.count << '\n';
}

void write_ranking_table(const RankingResult& result, std::span<const ColumnRange> attribution,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.precision(10);
  out << "rank\tcolumn\tblock\tmi_nats\n";
  for (std::size_t i = 0; i < result.k; ++i) {
    const auto col = result.ranking.order[i];
    std::string block;
    for (const auto& r : attribution)
      if (col >= r.begin && col < r.end) block = r.block;
    out << i + 1 << '\t' << col << '\t' << block << '\t' << result.ranking.scores[static_cast<std::size_t>(col)] << '\n';
  }
}

std::vector<std::uint64_t> enumerate_subsets(std::size_t n_blocks) {
  if (n_blocks == 0) throw ParameterError("ablation needs at least one block");
  if (n_blocks > 20) throw ParameterError("refusing to enumerate 2^" + std::to_string(n_blocks) + " subsets");
  std::vector<std::uint64_t> masks((std::uint64_t{1} << n_blocks) - 1);
  std::iota(masks.begin(), masks.end(), std::uint64_t{1});
  return masks;
}

void sort_ablation_records(std::vector<AblationRecord>& records) {
  std::sort(records.begin(), records.end(), [](const AblationRecord& a, const AblationRecord& b) {
    if (a.flagged != b.flagged) return !a.flagged;
    if (a.validation.f1 != b.validation.f1) return a.validation.f1 > b.validation.f1;
    if (a.validation.accuracy != b.validation.accuracy) return a.validation.accuracy > b.validation.accuracy;
    return a.mask < b.mask;
  });
}

std::vector<AblationRecord> ablate(const BlockRegistry& train, const BlockRegistry& validation,
                                   std::span<const int> y_train, std::span<const int> y_valid, std::size_t n_classes,
                                   const AblationOptions& options) {
  if (train.size() != validation.size()) throw CompositionError("train and validation registries differ in blocks");
  for (std::size_t b = 0; b < train.size(); ++b) {
    const auto& tb = train.blocks()[b];
    const auto& vb = validation.blocks()[b];
    if (tb.name != vb.name || tb.dim() != vb.dim())
      throw CompositionError("train and validation block '" + tb.name + "' do not match");
  }
  if (options.c_grid.empty()) throw ParameterError("ablation C grid is empty");
  const auto masks = enumerate_subsets(train.size());

  std::vector<std::size_t> rows(y_train.size());
  std::iota(rows.begin(), rows.end(), 0);
  if (y_train.size() >= options.min_rows_for_sampling && options.sample_fraction < 1.0)
    rows = stratified_indices(y_train, options.sample_fraction, options.seed);
  std::vector<int> y_sample;
  for (auto r : rows) y_sample.push_back(y_train[r]);
  const std::vector<Eigen::Index> row_index(rows.begin(), rows.end());

  // Standardization is per column, so standardizing blocks once equals
  // standardizing every composed subset.
  std::vector<Eigen::MatrixXd> tr_blocks, va_blocks;
  for (std::size_t b = 0; b < train.size(); ++b) {
    const Eigen::MatrixXf sampled = train.blocks()[b].matrix(row_index, Eigen::all);
    const auto st = Standardizer<double>::fit(sampled);
    tr_blocks.push_back(st.apply(sampled));
    va_blocks.push_back(st.apply(validation.blocks()[b].matrix));
  }

  std::vector<AblationRecord> records(masks.size());
  parallel_for(
      masks.size(),
      [&](std::size_t i) {
        auto& rec = records[i];
        rec.mask = masks[i];
        Eigen::Index dim = 0;
        for (std::size_t b = 0; b < train.size(); ++b)
          if (rec.mask >> b & 1U) {
            rec.blocks.push_back(train.blocks()[b].name);
            dim += train.blocks()[b].dim();
          }
        rec.dimension = dim;
        Eigen::MatrixXd xtr(tr_blocks.front().rows(), dim), xva(va_blocks.front().rows(), dim);
        Eigen::Index at = 0;
        for (std::size_t b = 0; b < train.size(); ++b)
          if (rec.mask >> b & 1U) {
            xtr.middleCols(at, tr_blocks[b].cols()) = tr_blocks[b];
            xva.middleCols(at, va_blocks[b].cols()) = va_blocks[b];
            at += tr_blocks[b].cols();
          }
        bool have = false;
        try {
          for (double c : options.c_grid) {
            if (!(c > 0)) throw ParameterError("C must be positive");
            const double lambda = 1.0 / (c * static_cast<double>(xtr.rows()));
            const auto model = train_logreg(xtr, y_sample, n_classes, lambda, options.logreg);
            const auto m = evaluate(model, xva, y_valid, options.averaging, options.positive_class);
            if (!have || m.f1 > rec.validation.f1 ||
                (m.f1 == rec.validation.f1 && m.accuracy > rec.validation.accuracy)) {
              rec.validation = m;
              rec.best_c = c;
              have = true;
            }
          }
        } catch (const Error& e) {
          rec.flagged = true;
          rec.error = e.what();
        }
      },
      options.threads);
  sort_ablation_records(records);
  return records;
}

void write_ablation_table(std::span<const AblationRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.precision(10);
  out << "bitmask\tblocks\tdimension\taccuracy\tf1\tprecision\trecall\tbest_c\tstatus\n";
  for (const auto& r : records) {
    out << r.mask << '\t';
    for (std::size_t i = 0; i < r.blocks.size(); ++i) out << (i ? "+" : "") << r.blocks[i];
    out << '\t' << r.dimension << '\t' << r.validation.accuracy << '\t' << r.validation.f1 << '\t'
        << r.validation.precision << '\t' << r.validation.recall << '\t' << r.best_c << '\t'
        << (r.flagged ? "flagged" : "ok") << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void write_ablation_scatter(std::span<const AblationRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.precision(10);
  out << "dimension,f1\n";
  for (const auto& r : records)
    if (!r.flagged) out << r.dimension << ',' << r.validation.f1 << '\n';
}

std::vector<ClassVarianceWords> class_variance_words(const SparseRows& tfidf, std::span<const std::string> vocabulary,
                                                     std::span<const int> labels,
                                                     std::span<const std::string> label_names, std::size_t top_k) {
  if (vocabulary.empty()) throw ParameterError("vocabulary is empty");
  if (static_cast<std::size_t>(tfidf.cols()) != vocabulary.size())
    throw ParameterError("TF-IDF columns do not match the vocabulary");
  if (static_cast<std::size_t>(tfidf.rows()) != labels.size()) throw ParameterError("TF-IDF rows do not match labels");
  const std::size_t L = label_names.size();
  const std::size_t V = vocabulary.size();
  std::vector<std::size_t> count(L, 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= L) throw ParameterError("label id out of range");
    ++count[static_cast<std::size_t>(y)];
  }
  for (std::size_t c = 0; c < L; ++c)
    if (count[c] == 0) throw DataError("class '" + label_names[c] + "' has no documents");

  // Two passes: class means, then squared deviations (zeros contribute mean^2).
  std::vector<Eigen::VectorXd> mean(L, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(V)));
  std::vector<Eigen::VectorXd> nnz(L, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(V)));
  for (Eigen::Index r = 0; r < tfidf.outerSize(); ++r) {
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(r)]);
    for (SparseRows::InnerIterator it(tfidf, r); it; ++it) {
      mean[c](it.col()) += it.value();
      nnz[c](it.col()) += 1.0;
    }
  }
  for (std::size_t c = 0; c < L; ++c) mean[c] /= static_cast<double>(count[c]);
  std::vector<Eigen::VectorXd> ss(L, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(V)));
  for (Eigen::Index r = 0; r < tfidf.outerSize(); ++r) {
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(r)]);
    for (SparseRows::InnerIterator it(tfidf, r); it; ++it) {
      const double d = it.value() - mean[c](it.col());
      ss[c](it.col()) += d * d;
    }
  }

  std::vector<ClassVarianceWords> out;
  for (std::size_t c = 0; c < L; ++c) {
    ClassVarianceWords cw{label_names[c], {}, count[c] < 2};
    if (!cw.flagged) {
      const double n = static_cast<double>(count[c]);
      std::vector<VarianceWord> all;
      for (std::size_t w = 0; w < V; ++w) {
        const auto j = static_cast<Eigen::Index>(w);
        const double var = (ss[c](j) + (n - nnz[c](j)) * mean[c](j) * mean[c](j)) / n;
        if (var > 0.0) all.push_back({vocabulary[w], var});
      }
      const std::size_t keep = std::min(top_k, all.size());
      std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                        [](const VarianceWord& a, const VarianceWord& b) {
                          return a.variance != b.variance ? a.variance > b.variance : a.word < b.word;
                        });
      all.resize(keep);
      cw.words = std::move(all);
    }
    out.push_back(std::move(cw));
  }
  return out;
}

void write_variance_words(std::span<const ClassVarianceWords> words, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out.precision(10);
  out << "class\tword\tvariance\n";
  for (const auto& cw : words)
    for (const auto& w : cw.words) out << cw.label << '\t' << w.word << '\t' << w.variance << '\n';
}

}  // namespace heterorep
