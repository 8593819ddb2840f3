#include <fstream>
#include <mutex>

#include "heterorep/error.hpp"
#include "heterorep/learners.hpp"
#include "heterorep/parallel.hpp"
#include "heterorep/rng.hpp"

namespace heterorep {

std::string_view to_string(LearnerGrid::Family f) {
  switch (f) {
    case LearnerGrid::Family::LogReg: return "logreg";
    case LearnerGrid::Family::Sgd: return "sgd";
    case LearnerGrid::Family::Mlp: return "mlp";
  }
  return "?";
}

LearnerGrid::Family parse_learner_family(std::string_view s) {
  if (s == "logreg") return LearnerGrid::Family::LogReg;
  if (s == "sgd") return LearnerGrid::Family::Sgd;
  if (s == "mlp") return LearnerGrid::Family::Mlp;
  throw ParameterError("unknown learner family: " + std::string(s));
}

std::vector<ModelSpec> LearnerGrid::expand() const {
  std::vector<ModelSpec> out;
  switch (family) {
    case Family::LogReg:
      for (double l : l2_lambda) {
        LinearModelSpec s = linear_base;
        s.family = LinearFamily::LogReg;
        s.l2_lambda = l;
        out.emplace_back(s);
      }
      break;
    case Family::Sgd:
      for (double r : l1_ratio)
        for (double p : power_t)
          for (double a : alpha)
            for (SgdLoss loss : losses) {
              LinearModelSpec s = linear_base;
              s.family = LinearFamily::Sgd;
              s.l1_ratio = r;
              s.power_t = p;
              s.alpha = a;
              s.loss = loss;
              out.emplace_back(s);
            }
      break;
    case Family::Mlp: {
      std::vector<MlpSpec> shapes;
      if (arch == MlpArch::SNN) {
        for (int w : snn_widths) {
          MlpSpec s = mlp_base;
          s.arch = arch;
          s.snn_width = w;
          shapes.push_back(s);
        }
      } else if (arch == MlpArch::LNN) {
        for (int n : lnn_n) {
          MlpSpec s = mlp_base;
          s.arch = arch;
          s.lnn_n = n;
          shapes.push_back(s);
        }
      } else {
        MlpSpec s = mlp_base;
        s.arch = arch;
        shapes.push_back(s);
      }
      for (const auto& shape : shapes)
        for (double l : lr)
          for (double d : dropout) {
            MlpSpec s = shape;
            s.lr = l;
            s.dropout = d;
            out.emplace_back(s);
          }
      break;
    }
  }
  if (out.empty()) throw ParameterError("learner grid for " + std::string(to_string(family)) + " is empty");
  return out;
}

namespace {

// True when a ranks strictly ahead of b.
bool better(const Trial& a, const Trial& b) {
  if (a.validation.f1 != b.validation.f1) return a.validation.f1 > b.validation.f1;
  if (a.parameters != b.parameters) return a.parameters < b.parameters;
  return a.id < b.id;
}

void set_seed(ModelSpec& spec, std::uint64_t seed) {
  std::visit([seed](auto& s) { s.seed = seed; }, spec);
}

}  // namespace

std::optional<std::size_t> select_best(std::span<const Trial> trials) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].failed) continue;
    if (!best || better(trials[i], trials[*best])) best = i;
  }
  return best;
}

GridResult grid_search(const LearnerGrid& grid, const Eigen::MatrixXd& x_train, std::span<const int> y_train,
                       const Eigen::MatrixXd& x_valid, std::span<const int> y_valid, std::size_t n_classes,
                       const GridOptions& options) {
  auto specs = grid.expand();
  GridResult result;
  result.trials.resize(specs.size());
  std::mutex best_mutex;
  std::optional<TrainedModel> best_model;
  std::optional<Trial> best_trial;

  parallel_for(
      specs.size(),
      [&](std::size_t i) {
        Trial& trial = result.trials[i];
        trial.id = options.trial_offset + i;
        set_seed(specs[i], derive_seed(options.seed, trial.id));
        trial.spec = specs[i];
        try {
          TrainedModel model;
          if (const auto* lin = std::get_if<LinearModelSpec>(&specs[i])) {
            model = lin->family == LinearFamily::LogReg ? train_logreg(x_train, y_train, n_classes, lin->l2_lambda, *lin)
                                                        : train_sgd(x_train, y_train, n_classes, *lin);
          } else {
            model = train_mlp(x_train, y_train, n_classes, std::get<MlpSpec>(specs[i]), {x_valid, y_valid});
          }
          trial.validation = evaluate(model, x_valid, y_valid, options.averaging, options.positive_class);
          trial.epochs = model.trained_epochs;
          trial.parameters = model.parameter_count();
          std::lock_guard lock(best_mutex);
          if (!best_trial || better(trial, *best_trial)) {
            best_trial = trial;
            best_model = std::move(model);
          }
        } catch (const Error& e) {
          trial.failed = true;
          trial.error = e.what();
        }
      },
      options.threads);

  const auto best = select_best(result.trials);
  if (!best) {
    std::string msg = "all " + std::to_string(specs.size()) + " " + std::string(to_string(grid.family)) + " trials failed";
    if (!result.trials.empty()) msg += "; first error: " + result.trials.front().error;
    throw TrainingError(msg);
  }
  result.best_trial = *best;
  result.best = std::move(*best_model);
  return result;
}

void write_trial_table(std::span<const Trial> trials, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "trial_id\tfamily\tparams\tval_accuracy\tval_f1\tval_precision\tval_recall\tepochs\tstatus\n";
  out.precision(10);
  for (const auto& t : trials) {
    std::string family = "mlp";
    if (const auto* l = std::get_if<LinearModelSpec>(&t.spec)) family = l->family == LinearFamily::LogReg ? "logreg" : "sgd";
    out << t.id << '\t' << family << '\t' << describe(t.spec) << '\t' << t.validation.accuracy << '\t'
        << t.validation.f1 << '\t' << t.validation.precision << '\t' << t.validation.recall << '\t' << t.epochs << '\t'
        << (t.failed ? "failed" : "ok") << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace heterorep
