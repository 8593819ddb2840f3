#include "heterorep/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "heterorep/error.hpp"
#include "heterorep/rng.hpp"

namespace heterorep {

const std::string* Document::field(std::string_view name) const {
  for (const auto& [k, v] : metadata)
    if (k == name) return &v;
  return nullptr;
}

std::string_view to_string(SplitName name) {
  switch (name) {
    case SplitName::Train: return "train";
    case SplitName::Validation: return "validation";
    case SplitName::Test: return "test";
  }
  return "?";
}

SplitName parse_split_name(std::string_view s) {
  if (s == "train") return SplitName::Train;
  if (s == "validation" || s == "valid" || s == "dev") return SplitName::Validation;
  if (s == "test") return SplitName::Test;
  throw ParameterError("unknown split name: " + std::string(s));
}

std::vector<std::string> DatasetSplit::ids() const {
  std::vector<std::string> out;
  out.reserve(documents.size());
  for (const auto& d : documents) out.push_back(d.id);
  return out;
}

LabelSet::LabelSet(std::vector<std::string> labels) {
  for (auto& l : labels) add(l);
}

int LabelSet::add(const std::string& label) {
  if (auto it = index_.find(label); it != index_.end()) return it->second;
  const int id = static_cast<int>(labels_.size());
  labels_.push_back(label);
  index_.emplace(label, id);
  return id;
}

void LabelSet::register_split(const DatasetSplit& split) {
  for (const auto& d : split.documents) add(d.label);
}

int LabelSet::id(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw EvaluationError("label not in label set: " + label);
  return it->second;
}

std::optional<int> LabelSet::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> LabelSet::encode(const DatasetSplit& split) const {
  std::vector<int> y;
  y.reserve(split.size());
  for (const auto& d : split.documents) y.push_back(id(d.label));
  return y;
}

FileFormat parse_file_format(std::string_view s) {
  if (s == "tsv") return FileFormat::Tsv;
  if (s == "csv") return FileFormat::Csv;
  if (s == "jsonl") return FileFormat::Jsonl;
  throw ParameterError("unknown dataset format: " + std::string(s));
}

namespace {

struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

std::vector<Record> read_tsv(std::istream& in) {
  std::vector<Record> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    Record r{lineno, {}};
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      r.fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// RFC 4180: quoted fields may hold commas, doubled quotes and line breaks.
std::vector<Record> read_csv(std::istream& in) {
  std::vector<Record> rows;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t i = 0;
  std::size_t line = 1;
  const std::size_t n = content.size();
  while (i < n) {
    Record r{line, {}};
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool done = false;
    while (!done) {
      if (i >= n) {
        if (in_quotes) throw IngestionError("unterminated quoted field starting on line " + std::to_string(r.line));
        r.fields.push_back(std::move(field));
        done = true;
        break;
      }
      const char c = content[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && content[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        continue;
      }
      if (c == '"') {
        if (!field.empty() || field_was_quoted)
          throw IngestionError("malformed quoting on line " + std::to_string(line));
        in_quotes = true;
        field_was_quoted = true;
        ++i;
      } else if (c == ',') {
        r.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        ++i;
      } else if (c == '\r' || c == '\n') {
        r.fields.push_back(std::move(field));
        if (c == '\r' && i + 1 < n && content[i + 1] == '\n') ++i;
        ++i;
        ++line;
        done = true;
      } else {
        if (field_was_quoted) throw IngestionError("malformed quoting on line " + std::to_string(line));
        field.push_back(c);
        ++i;
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

struct ColumnIndex {
  std::size_t id, text, label;
  std::vector<std::size_t> metadata;
};

ColumnIndex resolve_columns(const std::vector<std::string>& header, const Schema& schema,
                            const std::filesystem::path& path) {
  auto find = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  ColumnIndex idx{find(schema.id_column), find(schema.text_column), find(schema.label_column), {}};
  for (const auto& m : schema.metadata_columns) idx.metadata.push_back(find(m));
  return idx;
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

DatasetSplit load_dataset(const std::filesystem::path& path, FileFormat format, const Schema& schema,
                          SplitName name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open dataset file: " + path.string());

  DatasetSplit split;
  split.name = name;
  std::unordered_map<std::string, std::size_t> seen;

  auto add = [&](Document doc, std::size_t line) {
    if (auto it = seen.find(doc.id); it != seen.end()) {
      if (!schema.concat_by_id)
        throw IngestionError(path.string() + ": duplicate document id '" + doc.id + "' on line " +
                             std::to_string(line));
      auto& target = split.documents[it->second];
      if (target.label != doc.label)
        throw IngestionError(path.string() + ": conflicting labels for id '" + doc.id + "' on line " +
                             std::to_string(line));
      target.text += ' ';
      target.text += doc.text;
      return;
    }
    seen.emplace(doc.id, split.documents.size());
    split.documents.push_back(std::move(doc));
  };

  if (format == FileFormat::Jsonl) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      strip_cr(line);
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw IngestionError(path.string() + ": malformed JSON on line " + std::to_string(lineno));
      }
      if (!obj.is_object()) throw IngestionError(path.string() + ": line " + std::to_string(lineno) + " is not an object");
      auto get = [&](const std::string& col) -> std::string {
        if (!obj.contains(col)) throw SchemaError(path.string() + ": missing column '" + col + "' on line " + std::to_string(lineno));
        return json_scalar(obj[col]);
      };
      Document d{get(schema.id_column), get(schema.text_column), get(schema.label_column), {}};
      for (const auto& m : schema.metadata_columns) d.metadata.emplace_back(m, get(m));
      add(std::move(d), lineno);
    }
    return split;
  }

  const auto rows = format == FileFormat::Tsv ? read_tsv(in) : read_csv(in);
  if (rows.empty()) throw SchemaError(path.string() + ": missing header row");
  const auto cols = resolve_columns(rows.front().fields, schema, path);
  const std::size_t width = rows.front().fields.size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;  // blank line
    if (row.fields.size() != width)
      throw IngestionError(path.string() + ": malformed row on line " + std::to_string(row.line) + " (expected " +
                           std::to_string(width) + " fields, got " + std::to_string(row.fields.size()) + ")");
    Document d{row.fields[cols.id], row.fields[cols.text], row.fields[cols.label], {}};
    for (std::size_t m = 0; m < cols.metadata.size(); ++m)
      d.metadata.emplace_back(schema.metadata_columns[m], row.fields[cols.metadata[m]]);
    add(std::move(d), row.line);
  }
  return split;
}

void check_disjoint(std::span<const DatasetSplit* const> splits) {
  std::unordered_map<std::string, SplitName> owner;
  for (const auto* s : splits) {
    for (const auto& d : s->documents) {
      auto [it, inserted] = owner.emplace(d.id, s->name);
      if (!inserted)
        throw IngestionError("document id '" + d.id + "' appears in both " + std::string(to_string(it->second)) +
                             " and " + std::string(to_string(s->name)));
    }
  }
}

std::vector<std::size_t> apportion(std::span<const std::size_t> class_sizes, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw ParameterError("sample fraction must be in (0, 1]");
  const std::size_t total = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  std::vector<std::size_t> counts(class_sizes.size());
  std::vector<double> remainder(class_sizes.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    const double quota = fraction * static_cast<double>(class_sizes[c]);
    counts[c] = std::min(class_sizes[c], static_cast<std::size_t>(std::floor(quota)));
    remainder[c] = quota - static_cast<double>(counts[c]);
    assigned += counts[c];
  }
  std::vector<std::size_t> order(class_sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    const auto c = order[k];
    if (remainder[c] > 0.0 && counts[c] < class_sizes[c]) {
      ++counts[c];
      ++assigned;
    }
  }
  return counts;
}

std::vector<std::size_t> stratified_indices(std::span<const int> labels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) throw ParameterError("sample fraction must be in (0, 1]");
  int max_label = -1;
  for (int y : labels) max_label = std::max(max_label, y);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
  std::vector<std::size_t> sizes;
  for (const auto& m : members) sizes.push_back(m.size());
  const auto counts = apportion(sizes, fraction);

  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto pool = members[c];
    Rng rng(derive_seed(seed, c));
    // Partial Fisher-Yates: the first counts[c] slots are a uniform draw.
    for (std::size_t i = 0; i < counts[c]; ++i) {
      const std::size_t j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(counts[c]));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

DatasetSplit stratified_sample(const DatasetSplit& split, double fraction, std::uint64_t seed) {
  LabelSet local;
  local.register_split(split);
  const auto y = local.encode(split);
  DatasetSplit out;
  out.name = split.name;
  for (auto i : stratified_indices(y, fraction, seed)) out.documents.push_back(split.documents[i]);
  return out;
}

std::vector<LabelShare> label_distribution(const DatasetSplit& split) {
  std::vector<LabelShare> shares;
  std::unordered_map<std::string, std::size_t> pos;
  for (const auto& d : split.documents) {
    auto [it, inserted] = pos.emplace(d.label, shares.size());
    if (inserted) shares.push_back({d.label, 0, 0.0});
    ++shares[it->second].count;
  }
  for (auto& s : shares) s.proportion = static_cast<double>(s.count) / static_cast<double>(split.size());
  return shares;
}

}  // namespace heterorep
