#include "heterorep/kgrep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "heterorep/binary_io.hpp"
#include "heterorep/bundled_data.hpp"
#include "heterorep/error.hpp"
#include "heterorep/unicode.hpp"

namespace heterorep {

const std::unordered_map<std::string, std::string>& lemma_table() {
  static const std::unordered_map<std::string, std::string> table = [] {
    std::unordered_map<std::string, std::string> t;
    std::string_view rest = bundled::kLemmasEn;
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos) continue;
      std::string lemma(line.substr(tab + 1));
      if (!lemma.empty() && lemma.back() == '\r') lemma.pop_back();
      t.emplace(std::string(line.substr(0, tab)), std::move(lemma));
    }
    return t;
  }();
  return table;
}

const std::string& lemmatize(const std::string& token) {
  const auto& t = lemma_table();
  auto it = t.find(token);
  return it == t.end() ? token : it->second;
}

TokenList preprocess_kg(std::string_view text) {
  TokenList out;
  for (auto& raw : unicode::split_whitespace(text)) {
    auto token = unicode::strip_punct(unicode::lowercase(raw));
    if (token.empty() || is_stopword(token)) continue;
    out.push_back(lemmatize(token));
  }
  return out;
}

namespace {

std::string join(const TokenList& tokens, std::size_t begin, std::size_t end) {
  std::string s;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) s += ' ';
    s += tokens[i];
  }
  return s;
}

void check_finite(const EntityEmbeddingStore& store, const std::filesystem::path& path) {
  if (!store.vectors.allFinite()) throw IntegrityError(path.string() + ": entity embeddings contain NaN or Inf");
}

}  // namespace

EntityEmbeddingStore load_entities_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open entity file: " + path.string());
  std::string header;
  std::getline(in, header);
  if (header.rfind("#method=", 0) != 0) throw FormatError(path.string() + ": missing '#method=' header");
  EntityEmbeddingStore store;
  std::size_t dim = 0, count = 0;
  {
    std::istringstream hs(header.substr(1));
    std::string kv;
    bool have_dim = false, have_count = false;
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw FormatError(path.string() + ": bad header field '" + kv + "'");
      const auto key = kv.substr(0, eq);
      const auto value = kv.substr(eq + 1);
      if (key == "method") {
        store.method = value;
      } else if (key == "dim") {
        dim = std::stoull(value);
        have_dim = true;
      } else if (key == "count") {
        count = std::stoull(value);
        have_count = true;
      }
    }
    if (!have_dim || !have_count || dim == 0) throw FormatError(path.string() + ": header needs dim and count");
  }
  store.vectors.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  store.aliases.reserve(count);
  std::string line;
  std::size_t row = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row >= count) throw FormatError(path.string() + ": more rows than header count on line " + std::to_string(lineno));
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(path.string() + ": missing TAB on line " + std::to_string(lineno));
    store.aliases.push_back(line.substr(0, tab));
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    for (std::size_t j = 0; j < dim; ++j) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      float v = 0.0f;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc())
        throw FormatError(path.string() + ": bad float on line " + std::to_string(lineno) + ", column " + std::to_string(j));
      store.vectors(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = v;
      p = next;
    }
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p != end) throw FormatError(path.string() + ": too many values on line " + std::to_string(lineno));
    ++row;
  }
  if (row != count) throw FormatError(path.string() + ": header count " + std::to_string(count) + " but " + std::to_string(row) + " rows");
  check_finite(store, path);
  return store;
}

EntityEmbeddingStore load_entities_binary(const std::filesystem::path& path, std::string method) {
  io::BinaryReader r(path);
  r.expect_magic("ENT1");
  const auto n = r.get<std::uint64_t>();
  const auto d = r.get<std::uint64_t>();
  if (d == 0 || n > r.remaining()) throw FormatError(path.string() + ": corrupt entity header");
  EntityEmbeddingStore store;
  store.method = std::move(method);
  store.aliases.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) store.aliases.push_back(r.get_string());
  if (r.remaining() != n * d * sizeof(float)) throw FormatError(path.string() + ": entity payload size mismatch");
  store.vectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  r.get_array(store.vectors.data(), n * d);
  check_finite(store, path);
  return store;
}

EntityEmbeddingStore load_entities(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open entity file: " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::string_view(magic, 4) == "ENT1") return load_entities_binary(path);
  return load_entities_text(path);
}

void save_entities_text(const EntityEmbeddingStore& store, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "#method=" << store.method << " dim=" << store.dim() << " count=" << store.size() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < store.size(); ++i) {
    out << store.aliases[i] << '\t';
    for (std::size_t j = 0; j < store.dim(); ++j) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf),
                                   store.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      if (j) out << ' ';
      out.write(buf, p - buf);
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void save_entities_binary(const EntityEmbeddingStore& store, const std::filesystem::path& path) {
  io::BinaryWriter w(path);
  w.magic("ENT1");
  w.put<std::uint64_t>(store.size());
  w.put<std::uint64_t>(store.dim());
  for (const auto& a : store.aliases) w.put_string(a);
  w.put_array(store.vectors.data(), static_cast<std::size_t>(store.vectors.size()));
  w.close();
}

AliasDictionary::AliasDictionary(const EntityEmbeddingStore& store) : n_entities_(store.size()), dim_(store.dim()) {
  for (std::size_t row = 0; row < store.aliases.size(); ++row) {
    const auto tokens = preprocess_kg(store.aliases[row]);
    if (tokens.empty()) continue;
    insert(join(tokens, 0, tokens.size()), static_cast<std::uint32_t>(row));
  }
  if (collisions_ > 0)
    std::clog << "[kg] " << collisions_ << " alias collision(s) in " << store.method
              << " dictionary resolved to the first entity\n";
}

AliasDictionary::AliasDictionary(std::vector<std::pair<std::string, std::uint32_t>> aliases, std::size_t n_entities,
                                 std::size_t dim)
    : n_entities_(n_entities), dim_(dim) {
  for (auto& [alias, entity] : aliases) insert(std::move(alias), entity);
}

void AliasDictionary::insert(std::string alias, std::uint32_t entity) {
  auto [it, inserted] = index_.emplace(std::move(alias), entity);
  if (!inserted) {
    ++collisions_;
    return;
  }
  names_.emplace(entity, it->first);
}

std::optional<std::uint32_t> AliasDictionary::find(const std::string& alias) const {
  auto it = index_.find(alias);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string AliasDictionary::name(std::uint32_t entity) const {
  auto it = names_.find(entity);
  return it == names_.end() ? "#" + std::to_string(entity) : it->second;
}

ConceptSet match_concepts(const TokenList& tokens, const AliasDictionary& dict, const MatchOptions& options) {
  ConceptSet set;
  const std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n;) {
    std::string gram;
    std::size_t advance = 1;
    std::optional<ConceptSpan> longest;
    for (std::size_t len = 1; len <= AliasDictionary::kMaxNgram && i + len <= n; ++len) {
      if (len > 1) gram += ' ';
      gram += tokens[i + len - 1];
      if (auto e = dict.find(gram)) {
        if (options.longest_only)
          longest = ConceptSpan{i, len, *e};
        else
          set.spans.push_back({i, len, *e});
      }
    }
    if (longest) {
      set.spans.push_back(*longest);
      advance = longest->length;
    }
    i += advance;
  }
  for (const auto& s : set.spans) set.concepts.push_back(s.entity);
  std::sort(set.concepts.begin(), set.concepts.end());
  if (!options.multiset) set.concepts.erase(std::unique(set.concepts.begin(), set.concepts.end()), set.concepts.end());
  return set;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> agg_average(const ConceptSet& concepts, const EntityEmbeddingStore& store) {
  const auto dim = static_cast<Eigen::Index>(store.dim());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  if (concepts.concepts.empty()) return sum.cast<Scalar>();
  std::vector<std::uint32_t> order = concepts.concepts;
  std::sort(order.begin(), order.end());
  for (auto c : order) {
    if (c >= store.size())
      throw IntegrityError("entity index " + std::to_string(c) + " out of range for store of " +
                           std::to_string(store.size()) + " entities");
    sum += store.vectors.row(static_cast<Eigen::Index>(c)).transpose().cast<double>();
  }
  sum /= static_cast<double>(order.size());
  return sum.cast<Scalar>();
}

template Eigen::VectorXf agg_average<float>(const ConceptSet&, const EntityEmbeddingStore&);
template Eigen::VectorXd agg_average<double>(const ConceptSet&, const EntityEmbeddingStore&);

ConceptSet match_metadata(std::span<const std::pair<std::string, std::string>> metadata, const AliasDictionary& dict) {
  ConceptSet set;
  for (const auto& [field, value] : metadata) {
    const auto tokens = preprocess_kg(value);
    if (tokens.empty()) continue;
    if (auto e = dict.find(join(tokens, 0, tokens.size()))) set.concepts.push_back(*e);
    auto grams = match_concepts(tokens, dict);
    set.concepts.insert(set.concepts.end(), grams.concepts.begin(), grams.concepts.end());
    set.spans.insert(set.spans.end(), grams.spans.begin(), grams.spans.end());
  }
  std::sort(set.concepts.begin(), set.concepts.end());
  set.concepts.erase(std::unique(set.concepts.begin(), set.concepts.end()), set.concepts.end());
  return set;
}

Eigen::VectorXf entity_repr(std::span<const std::pair<std::string, std::string>> metadata,
                            const AliasDictionary& dict, const EntityEmbeddingStore& store, bool* no_concept) {
  const auto set = match_metadata(metadata, dict);
  if (no_concept) *no_concept = set.empty();
  return agg_average<float>(set, store);
}

ConceptStats concept_stats(std::span<const ConceptSet> sets, const AliasDictionary& dict, std::size_t top_k,
                           std::string dataset) {
  ConceptStats stats;
  stats.dataset = std::move(dataset);
  stats.n_documents = sets.size();
  std::unordered_map<std::uint32_t, std::size_t> df;
  for (const auto& s : sets) {
    std::vector<std::uint32_t> unique = s.concepts;
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    ++stats.histogram[unique.size()];
    if (!unique.empty()) ++stats.n_covered;
    for (auto c : unique) ++df[c];
  }
  stats.coverage = sets.empty() ? 0.0 : static_cast<double>(stats.n_covered) / static_cast<double>(sets.size());
  std::vector<std::pair<std::uint32_t, std::size_t>> items(df.begin(), df.end());
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
  for (std::size_t i = 0; i < std::min(top_k, items.size()); ++i)
    stats.top.push_back({items[i].first, dict.name(items[i].first), items[i].second});
  return stats;
}

std::vector<ConceptStats> concept_stats(std::span<const DatasetSplit> datasets, const AliasDictionary& dict,
                                        std::size_t top_k, const MatchOptions& options) {
  std::vector<ConceptStats> out;
  for (const auto& split : datasets) {
    std::vector<ConceptSet> sets;
    sets.reserve(split.size());
    for (const auto& d : split.documents) {
      auto s = match_concepts(preprocess_kg(d.text), dict, options);
      s.document_id = d.id;
      sets.push_back(std::move(s));
    }
    out.push_back(concept_stats(sets, dict, top_k, std::string(to_string(split.name))));
  }
  return out;
}

}  // namespace heterorep
