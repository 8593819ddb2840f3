#include "heterorep/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "heterorep/analysis.hpp"
#include "heterorep/config.hpp"
#include "heterorep/corpus.hpp"
#include "heterorep/error.hpp"
#include "heterorep/kgrep.hpp"
#include "heterorep/learners.hpp"
#include "heterorep/parallel.hpp"
#include "heterorep/stacking.hpp"
#include "heterorep/textrep.hpp"

namespace heterorep {

namespace fs = std::filesystem;

namespace {

constexpr SplitName kSplits[] = {SplitName::Train, SplitName::Validation, SplitName::Test};

struct Options {
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> blocks;
  std::vector<std::string> files;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  ExperimentConfig config;
  std::size_t threads = 1;
};

struct Data {
  std::array<DatasetSplit, 3> splits;
  LabelSet labels;
  std::array<std::vector<int>, 3> y;
  int positive_class = 1;
};

ExperimentConfig prepare_config(const Options& o) {
  if (o.config.empty()) throw ParameterError("--config is required");
  auto c = load_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    for (auto& b : c.blocks) b.lsa.seed = *o.seed;
  }
  if (!o.out.empty()) c.out = o.out;
  for (const auto& flag : o.blocks) c.blocks.push_back(parse_block_flag(flag));
  validate_config(c);
  return c;
}

Data load_data(const ExperimentConfig& c) {
  Data d;
  for (std::size_t i = 0; i < 3; ++i)
    d.splits[i] = load_dataset(c.dataset.splits[i], c.dataset.format, c.dataset.schema, kSplits[i]);
  const DatasetSplit* ptrs[] = {&d.splits[0], &d.splits[1], &d.splits[2]};
  check_disjoint(ptrs);
  if (!c.dataset.labels.empty()) d.labels = LabelSet(c.dataset.labels);
  else d.labels.register_split(d.splits[0]);
  for (std::size_t i = 0; i < 3; ++i) d.y[i] = d.labels.encode(d.splits[i]);
  if (c.dataset.positive_label) d.positive_class = d.labels.id(*c.dataset.positive_label);
  else if (c.dataset.averaging == Averaging::Binary && d.labels.size() != 2)
    throw ParameterError("binary averaging needs two labels or dataset.positive_label");
  return d;
}

// Writes go to "<path>.tmp" first; commit() renames them all, otherwise
// the destructor removes them.
class StagedFiles {
 public:
  fs::path stage(const fs::path& target) {
    fs::create_directories(target.parent_path());
    targets_.push_back(target);
    return temp(target);
  }
  void commit() {
    for (const auto& t : targets_) fs::rename(temp(t), t);
    targets_.clear();
  }
  ~StagedFiles() {
    std::error_code ec;
    for (const auto& t : targets_) fs::remove(temp(t), ec);
  }

 private:
  static fs::path temp(const fs::path& p) { return fs::path(p.string() + ".tmp"); }
  std::vector<fs::path> targets_;
};

void stage_drm(StagedFiles& staged, const fs::path& target, const Eigen::MatrixXf& m, const DatasetSplit& split) {
  const auto tmp = staged.stage(target);
  staged.stage(ids_sidecar(target));
  // save_drm writes the sidecar next to the temp file; move it to the staged name.
  save_drm(tmp, m, split.ids());
  fs::rename(ids_sidecar(tmp), fs::path(ids_sidecar(target).string() + ".tmp"));
}

Eigen::MatrixXf stack_rows(const std::vector<Eigen::VectorXf>& rows, Eigen::Index dim) {
  Eigen::MatrixXf m(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

int cmd_featurize(Context& ctx) {
  const auto& c = ctx.config;
  std::vector<const BlockConfig*> todo;
  for (const auto& b : c.blocks)
    if (b.builder != BuilderKind::External) todo.push_back(&b);
  if (todo.empty()) {
    ctx.err << "warning: no built-in blocks declared; nothing to featurize\n";
    return 0;
  }
  const auto data = load_data(c);
  StagedFiles staged;
  std::map<fs::path, std::shared_ptr<EntityEmbeddingStore>> stores;
  auto store_for = [&](const fs::path& p) {
    auto& s = stores[p];
    if (!s) s = std::make_shared<EntityEmbeddingStore>(load_entities(p));
    return s;
  };

  for (const auto* b : todo) {
    std::array<Eigen::MatrixXf, 3> m;
    switch (b->builder) {
      case BuilderKind::Stylometric:
        for (std::size_t s = 0; s < 3; ++s) {
          std::vector<Eigen::VectorXf> rows;
          for (const auto& doc : data.splits[s].documents) rows.push_back(stylometric(doc.text).to_vector(b->profile));
          m[s] = stack_rows(rows, static_cast<Eigen::Index>(StyloVector::dimension(b->profile)));
        }
        break;
      case BuilderKind::Lsa: {
        std::array<std::vector<TokenList>, 3> tokens;
        for (std::size_t s = 0; s < 3; ++s)
          for (const auto& doc : data.splits[s].documents) tokens[s].push_back(preprocess(doc.text));
        Eigen::MatrixXd train;
        const auto model = fit_lsa(tokens[0], b->lsa, &train);
        for (const auto& w : model.warnings) ctx.err << "warning: block '" << b->name << "': " << w << '\n';
        m[0] = train.cast<float>();
        m[1] = transform_lsa(model, tokens[1]).cast<float>();
        m[2] = transform_lsa(model, tokens[2]).cast<float>();
        save_lsa(model, staged.stage(c.out / "models" / (b->name + ".lsa")));
        break;
      }
      case BuilderKind::Kg:
      case BuilderKind::KgEntity: {
        const auto store = store_for(b->entities);
        const AliasDictionary dict(*store);
        for (std::size_t s = 0; s < 3; ++s) {
          std::vector<Eigen::VectorXf> rows;
          std::size_t empty = 0;
          for (const auto& doc : data.splits[s].documents) {
            if (b->builder == BuilderKind::Kg) {
              const auto set = match_concepts(preprocess_kg(doc.text), dict, b->match);
              empty += set.empty();
              rows.push_back(agg_average<float>(set, *store));
            } else {
              bool none = false;
              rows.push_back(entity_repr(doc.metadata, dict, *store, &none));
              empty += none;
            }
          }
          m[s] = stack_rows(rows, static_cast<Eigen::Index>(store->dim()));
          if (empty)
            ctx.err << "note: block '" << b->name << "' " << to_string(kSplits[s]) << ": " << empty
                    << " documents without concepts (zero vector)\n";
        }
        break;
      }
      case BuilderKind::External: break;
    }
    for (std::size_t s = 0; s < 3; ++s) {
      const auto target = c.block_path(*b, kSplits[s]);
      stage_drm(staged, target, m[s], data.splits[s]);
      ctx.out << target.string() << '\t' << m[s].rows() << '\t' << m[s].cols() << '\n';
    }
  }
  staged.commit();
  return 0;
}

// Resolves scenario membership from the declarations alone, so unknown
// names fail before any data is read.
std::vector<std::string> scenario_block_names(const ExperimentConfig& c, const std::string& name) {
  BlockRegistry shape;
  for (const auto& b : c.blocks) shape.add({b.name, b.kind, Eigen::MatrixXf::Zero(1, 1), {}});
  return resolve_scenario(name, shape, c.scenarios).blocks;
}

std::array<BlockRegistry, 3> load_registries(const ExperimentConfig& c, const Data& d,
                                             const std::vector<std::string>& names) {
  for (const auto& n : names)
    for (auto split : kSplits) {
      const auto p = c.block_path(*c.find_block(n), split);
      if (!fs::exists(p)) throw DataError("block '" + n + "' missing: " + p.string());
    }
  std::array<BlockRegistry, 3> regs;
  for (std::size_t s = 0; s < 3; ++s) {
    const auto ids = d.splits[s].ids();
    for (const auto& n : names) {
      const auto* b = c.find_block(n);
      regs[s].add(load_matrix(c.block_path(*b, kSplits[s]), b->name, b->kind, ids));
    }
    regs[s].freeze();
  }
  return regs;
}

std::vector<std::string> all_block_names(const ExperimentConfig& c) {
  std::vector<std::string> names;
  for (const auto& b : c.blocks) names.push_back(b.name);
  if (names.empty()) throw ParameterError("no blocks declared");
  return names;
}

nlohmann::ordered_json metrics_json(const MetricsRecord& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["f1"] = m.f1;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  return j;
}

std::string file_safe(std::string s) {
  for (auto& ch : s)
    if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
  return s;
}

int cmd_train(Context& ctx, const std::string& scenario_name) {
  const auto& c = ctx.config;
  if (scenario_name.empty()) throw ParameterError("--scenario is required");
  const auto names = scenario_block_names(c, scenario_name);
  const auto data = load_data(c);
  const auto regs = load_registries(c, data, names);
  const Scenario scenario{scenario_name, names};

  std::array<Eigen::MatrixXd, 3> x;
  const auto train = compose(scenario, regs[0]);
  const auto st = Standardizer<double>::fit(train.matrix);
  x[0] = st.apply(train.matrix);
  for (std::size_t s = 1; s < 3; ++s) x[s] = st.apply(compose(scenario, regs[s]).matrix);

  const auto n_classes = data.labels.size();
  GridOptions go{c.dataset.averaging, data.positive_class, c.seed, ctx.threads, 0};
  std::vector<Trial> trials;
  std::vector<TrainedModel> bests;
  std::vector<std::size_t> best_ids;
  for (const auto& grid : c.learners) {
    try {
      auto r = grid_search(grid, x[0], data.y[0], x[1], data.y[1], n_classes, go);
      best_ids.push_back(r.best_trial);
      bests.push_back(std::move(r.best));
      trials.insert(trials.end(), r.trials.begin(), r.trials.end());
      go.trial_offset += r.trials.size();
    } catch (const TrainingError& e) {
      ctx.err << "warning: " << to_string(grid.family) << " grid: " << e.what() << '\n';
      go.trial_offset += grid.expand().size();
    }
  }
  const auto winner = select_best(trials);
  if (!winner) throw TrainingError("every trial failed");
  const auto best_trial = trials[*winner].id;
  const auto pos = std::find(best_ids.begin(), best_ids.end(), best_trial) - best_ids.begin();
  auto model = bests[static_cast<std::size_t>(pos)];
  model.labels = data.labels.labels();
  const auto test = evaluate(model, x[2], data.y[2], c.dataset.averaging, data.positive_class);

  const auto dir = c.out / "train" / file_safe(scenario_name);
  fs::create_directories(dir);
  nlohmann::ordered_json report;
  report["dataset"] = c.dataset.name;
  report["scenario"] = scenario_name;
  report["blocks"] = names;
  report["columns"] = x[0].cols();
  report["seed"] = c.seed;
  report["averaging"] = to_string(c.dataset.averaging);
  report["best_trial"] = best_trial;
  report["model"] = describe(model.spec);
  report["validation"] = metrics_json(trials[*winner].validation);
  report["test"] = metrics_json(test);
  {
    std::ofstream f(dir / "report.json", std::ios::binary | std::ios::trunc);
    f << report.dump(2) << '\n';
    if (!f) throw DataError("cannot write " + (dir / "report.json").string());
  }
  {
    std::ofstream f(dir / "report.tsv", std::ios::binary | std::ios::trunc);
    f << std::setprecision(10) << "split\taccuracy\tf1\tprecision\trecall\n";
    const auto& v = trials[*winner].validation;
    f << "validation\t" << v.accuracy << '\t' << v.f1 << '\t' << v.precision << '\t' << v.recall << '\n';
    f << "test\t" << test.accuracy << '\t' << test.f1 << '\t' << test.precision << '\t' << test.recall << '\n';
    if (!f) throw DataError("cannot write " + (dir / "report.tsv").string());
  }
  write_trial_table(trials, dir / "trials.tsv");
  save_model(model, dir / "model.mdl");

  ctx.out << std::setprecision(4) << std::fixed;
  ctx.out << "scenario " << scenario_name << " (" << x[0].cols() << " columns), best trial " << best_trial << ": "
          << describe(model.spec) << '\n';
  ctx.out << "test accuracy " << test.accuracy << " f1 " << test.f1 << " precision " << test.precision << " recall "
          << test.recall << '\n';
  return 0;
}

int cmd_ablate(Context& ctx) {
  const auto& c = ctx.config;
  const auto names = all_block_names(c);
  const auto data = load_data(c);
  const auto regs = load_registries(c, data, names);
  AblationOptions opt;
  opt.sample_fraction = c.analysis.sample_fraction;
  opt.c_grid = c.analysis.c_grid;
  opt.min_rows_for_sampling = c.analysis.min_rows_for_sampling;
  opt.seed = c.seed;
  opt.averaging = c.dataset.averaging;
  opt.positive_class = data.positive_class;
  opt.threads = ctx.threads;
  const auto records = ablate(regs[0], regs[1], data.y[0], data.y[1], data.labels.size(), opt);
  const auto dir = c.out / "ablation";
  fs::create_directories(dir);
  write_ablation_table(records, dir / "ablation.tsv");
  write_ablation_scatter(records, dir / "ablation_scatter.csv");

  std::size_t flagged = 0;
  for (const auto& r : records) flagged += r.flagged;
  const std::size_t ok = records.size() - flagged;
  auto line = [&](const AblationRecord& r) {
    ctx.out << std::setw(6) << r.mask << "  f1 " << std::fixed << std::setprecision(4) << r.validation.f1 << "  ";
    for (std::size_t i = 0; i < r.blocks.size(); ++i) ctx.out << (i ? "+" : "") << r.blocks[i];
    ctx.out << '\n';
  };
  ctx.out << "best " << std::min<std::size_t>(10, ok) << " of " << records.size() << ":\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(10, ok); ++i) line(records[i]);
  ctx.out << "worst " << std::min<std::size_t>(10, ok) << ":\n";
  for (std::size_t i = ok; i-- > ok - std::min<std::size_t>(10, ok);) line(records[i]);
  for (const auto& r : records)
    if (r.flagged) ctx.err << "flagged subset " << r.mask << ": " << r.error << '\n';
  return flagged ? 1 : 0;
}

int cmd_rank(Context& ctx, const std::string& scenario_name) {
  const auto& c = ctx.config;
  std::string name = scenario_name.empty() ? c.analysis.ranking_scenario : scenario_name;
  const auto names = name.empty() ? all_block_names(c) : scenario_block_names(c, name);
  const auto data = load_data(c);
  const auto regs = load_registries(c, data, names);
  const auto composed = compose(Scenario{name.empty() ? "all" : name, names}, regs[0]);
  const auto r = rank_and_attribute(composed.matrix, composed.attribution, data.y[0], c.analysis.k, c.analysis.bins,
                                    ctx.threads);
  for (const auto& w : r.warnings) ctx.err << "warning: " << w << '\n';
  const auto dir = c.out / "rank";
  fs::create_directories(dir);
  write_ranking_radial(r, dir / "ranking_radial.csv");
  write_ranking_table(r, composed.attribution, dir / "ranking.tsv");
  ctx.out << "top " << r.k << " of " << composed.matrix.cols() << " columns by mutual information:\n";
  for (const auto& sc : r.counts) ctx.out << sc.block << '\t' << sc.count << '\n';
  return 0;
}

int cmd_words(Context& ctx) {
  const auto& c = ctx.config;
  const auto data = load_data(c);
  TfidfConfig tf;
  for (const auto& b : c.blocks)
    if (b.builder == BuilderKind::Lsa) {
      tf = b.lsa.tfidf;
      break;
    }
  tf.n_char_features = 0;
  std::vector<TokenList> tokens;
  for (const auto& doc : data.splits[0].documents) tokens.push_back(preprocess(doc.text));
  const auto model = fit_tfidf(tokens, tf);
  const SparseRows m = model.transform(tokens);
  const auto words = class_variance_words(m, model.words(), data.y[0], data.labels.labels(), c.analysis.top_k_words);
  const auto dir = c.out / "words";
  fs::create_directories(dir);
  write_variance_words(words, dir / "variance_words.tsv");
  bool flagged = false;
  for (const auto& cw : words) {
    ctx.out << cw.label << ':';
    for (const auto& w : cw.words) ctx.out << ' ' << w.word;
    ctx.out << '\n';
    if (cw.flagged) {
      ctx.err << "flagged class '" << cw.label << "': fewer than two documents\n";
      flagged = true;
    }
  }
  return flagged ? 1 : 0;
}

int cmd_stats(Context& ctx) {
  const auto& c = ctx.config;
  fs::path entities = c.analysis.stats_entities;
  MatchOptions match;
  if (entities.empty())
    for (const auto& b : c.blocks)
      if (b.builder == BuilderKind::Kg) {
        entities = b.entities;
        match = b.match;
        break;
      }
  if (entities.empty()) throw ParameterError("stats needs analysis.stats_entities or a kg block");
  const auto data = load_data(c);
  const auto store = load_entities(entities);
  const AliasDictionary dict(store);
  std::vector<DatasetSplit> splits(data.splits.begin(), data.splits.end());
  auto stats = concept_stats(splits, dict, c.analysis.top_k_concepts, match);
  const auto dir = c.out / "stats";
  fs::create_directories(dir);
  std::ofstream top(dir / "concepts.tsv", std::ios::binary | std::ios::trunc);
  std::ofstream hist(dir / "histogram.tsv", std::ios::binary | std::ios::trunc);
  top << std::setprecision(10) << "split\trank\tentity\talias\tdocuments\n";
  hist << "split\tconcepts\tdocuments\n";
  for (std::size_t s = 0; s < stats.size(); ++s) {
    const auto& st = stats[s];
    const auto split = to_string(kSplits[s]);
    ctx.out << split << ": " << st.n_documents << " documents, " << st.n_covered << " with concepts ("
            << std::fixed << std::setprecision(2) << 100.0 * st.coverage << "%)\n";
    for (const auto& share : label_distribution(data.splits[s]))
      ctx.out << "  label " << share.label << ": " << share.count << '\n';
    for (std::size_t i = 0; i < st.top.size(); ++i) {
      const auto& t = st.top[i];
      top << split << '\t' << i + 1 << '\t' << t.entity << '\t' << t.alias << '\t' << t.documents << '\n';
      ctx.out << "  " << i + 1 << ". " << t.alias << " (" << t.documents << ")\n";
    }
    for (const auto& [k, v] : st.histogram) hist << split << '\t' << k << '\t' << v << '\n';
  }
  return 0;
}

int cmd_inspect(Context& ctx, const std::vector<std::string>& files) {
  if (files.empty()) throw ParameterError("inspect needs at least one DRM file");
  for (const auto& f : files) {
    const auto h = read_drm_header(f);
    ctx.out << f << "\trows=" << h.rows << "\tcols=" << h.cols;
    const auto side = ids_sidecar(f);
    if (fs::exists(side)) {
      const auto ids = read_ids(side);
      if (ids.size() != h.rows)
        throw IntegrityError(f + ": sidecar has " + std::to_string(ids.size()) + " ids for " +
                             std::to_string(h.rows) + " rows");
      ctx.out << "\tids=" << ids.size();
    } else {
      ctx.out << "\tids=missing";
    }
    ctx.out << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous document representations for fake-news detection"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool scenario) {
    sub->add_option("--config", o.config, "experiment config (JSON)");
    sub->add_option("--seed", o.seed, "override the global seed");
    sub->add_option("--out", o.out, "override the output directory");
    sub->add_option("--block", o.blocks, "extra external block name=path:kind");
    if (scenario) sub->add_option("--scenario", o.scenario, "scenario name");
  };
  auto* featurize = app.add_subcommand("featurize", "build stylometric, LSA and KG blocks");
  auto* train = app.add_subcommand("train", "grid search, select on validation, report on test");
  auto* ablation = app.add_subcommand("ablate", "evaluate every block subset");
  auto* rank = app.add_subcommand("rank", "mutual-information feature ranking");
  auto* words = app.add_subcommand("words", "highest-variance words per class");
  auto* stats = app.add_subcommand("stats", "concept coverage statistics");
  auto* inspect = app.add_subcommand("inspect", "print DRM headers");
  common(featurize, false);
  common(train, true);
  common(ablation, false);
  common(rank, true);
  common(words, false);
  common(stats, false);
  inspect->add_option("files", o.files, "DRM files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (inspect->parsed()) {
      Context ctx{out, err, {}, 1};
      return cmd_inspect(ctx, o.files);
    }
    Context ctx{out, err, prepare_config(o), worker_count()};
    if (featurize->parsed()) return cmd_featurize(ctx);
    if (train->parsed()) return cmd_train(ctx, o.scenario);
    if (ablation->parsed()) return cmd_ablate(ctx);
    if (rank->parsed()) return cmd_rank(ctx, o.scenario);
    if (words->parsed()) return cmd_words(ctx);
    if (stats->parsed()) return cmd_stats(ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace heterorep
