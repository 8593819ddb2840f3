#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "heterorep/metrics.hpp"

namespace heterorep {

// ---------------------------------------------------------------------------
// Specs

enum class LinearFamily { LogReg, Sgd };
enum class SgdLoss { Log, Hinge };

struct LinearModelSpec {
  LinearFamily family = LinearFamily::LogReg;
  SgdLoss loss = SgdLoss::Log;
  double l2_lambda = 0.01;  // logreg
  double alpha = 1e-4;      // sgd elastic-net strength
  double l1_ratio = 0.15;
  double power_t = 0.5;
  double eta0 = 0.01;
  int max_epochs = 1000;
  double tol = 1e-6;  // logreg: gradient inf-norm; sgd: epoch objective improvement
  int n_iter_no_change = 5;
  std::uint64_t seed = 0;
};

enum class MlpArch { SNN, FiveNet, LNN };
std::string_view to_string(MlpArch arch);
MlpArch parse_mlp_arch(std::string_view s);

struct MlpSpec {
  MlpArch arch = MlpArch::SNN;
  int snn_width = 128;
  int lnn_n = 6;
  std::vector<int> fivenet_widths{1024, 512, 256, 128, 64};
  double lr = 1e-3;
  double dropout = 0.2;
  int batch_size = 32;
  int max_epochs = 1000;
  int patience = 10;
  std::uint64_t seed = 0;

  std::vector<int> hidden_sizes() const;
};

using ModelSpec = std::variant<LinearModelSpec, MlpSpec>;

// Readable "key=value key=value" rendering used in trial tables.
std::string describe(const ModelSpec& spec);

// [2^n, 2^(n-1), ..., 2]
std::vector<int> lnn_layer_sizes(int n);

// eta0 / t^power_t, t >= 1
double sgd_learning_rate(double eta0, double power_t, std::uint64_t t);

// ---------------------------------------------------------------------------
// Models

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

// Linear models hold one layer; MLPs hold hidden layers (SELU) followed by
// the output layer. Logits for class c are column c of decision().
struct TrainedModel {
  ModelSpec spec;
  std::vector<std::string> labels;
  std::vector<DenseLayer> layers;
  std::vector<double> loss_history;        // per accepted step (logreg) or epoch
  std::vector<double> validation_history;  // per epoch, MLP only
  int best_epoch = 0;
  int trained_epochs = 0;
  double best_validation_f1 = 0.0;

  bool is_mlp() const { return std::holds_alternative<MlpSpec>(spec); }
  std::size_t n_classes() const;
  std::size_t parameter_count() const;

  Eigen::MatrixXd decision(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
};

// Row-wise softmax with max subtraction.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

// ---------------------------------------------------------------------------
// Training

// Multinomial logistic regression: mean cross-entropy + lambda/2 |W|^2,
// full-batch gradient descent with Armijo backtracking.
TrainedModel train_logreg(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t n_classes,
                          double l2_lambda, const LinearModelSpec& base = {});

// Per-sample SGD with elastic-net penalty applied by proximal soft
// thresholding; binary problems fit one weight vector, multiclass one-vs-rest.
TrainedModel train_sgd(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t n_classes,
                       const LinearModelSpec& spec);

// LeCun-normal initialised layers for the given spec.
std::vector<DenseLayer> init_mlp(std::size_t inputs, std::size_t n_classes, const MlpSpec& spec);

// Mean cross-entropy of the deterministic (dropout-free) network and, when
// `gradient` is given, its exact gradient with the same layout as `layers`.
double mlp_loss_and_gradient(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x, std::span<const int> y,
                             std::vector<DenseLayer>* gradient);

struct Validation {
  const Eigen::MatrixXd& x;
  std::span<const int> y;
};

// Adam + minibatches, SELU hidden activations, dropout after each hidden
// layer; early stopping on validation weighted F1 with best-weight restore.
TrainedModel train_mlp(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t n_classes, const MlpSpec& spec,
                       Validation validation);

// ---------------------------------------------------------------------------
// Evaluation and selection

MetricsRecord evaluate(const TrainedModel& model, const Eigen::MatrixXd& x, std::span<const int> y,
                       Averaging averaging = Averaging::Weighted, int positive_class = 1);

struct LearnerGrid {
  enum class Family { LogReg, Sgd, Mlp } family = Family::LogReg;
  // logreg
  std::vector<double> l2_lambda{0.1, 0.01, 0.001};
  // sgd
  std::vector<double> l1_ratio{0.05, 0.25, 0.3, 0.6, 0.8, 0.95};
  std::vector<double> power_t{0.1, 0.5, 0.9};
  std::vector<double> alpha{0.01, 0.001, 0.0001, 0.0005};
  std::vector<SgdLoss> losses{SgdLoss::Log, SgdLoss::Hinge};
  LinearModelSpec linear_base;
  // mlp: widths for SNN, n for LNN; 5Net uses mlp_base.fivenet_widths
  MlpArch arch = MlpArch::SNN;
  std::vector<int> snn_widths{32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384};
  std::vector<int> lnn_n{6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  std::vector<double> lr{0.0001, 0.005, 0.001, 0.01, 0.05, 0.1};
  std::vector<double> dropout{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  MlpSpec mlp_base;

  // Cartesian product, trial order = nested loops in field order.
  std::vector<ModelSpec> expand() const;
};

std::string_view to_string(LearnerGrid::Family f);
LearnerGrid::Family parse_learner_family(std::string_view s);

struct Trial {
  std::size_t id = 0;
  ModelSpec spec;
  MetricsRecord validation;
  int epochs = 0;
  std::size_t parameters = 0;
  bool failed = false;
  std::string error;
};

// Max validation F1, then fewer parameters, then earlier trial. Failed
// trials never win; returns nullopt when every trial failed.
std::optional<std::size_t> select_best(std::span<const Trial> trials);

struct GridOptions {
  Averaging averaging = Averaging::Weighted;
  int positive_class = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t trial_offset = 0;  // first trial id, for merging several grids
};

struct GridResult {
  TrainedModel best;
  std::size_t best_trial = 0;
  std::vector<Trial> trials;
};

// Trains every grid point with seed derive_seed(seed, trial id). Throws
// TrainingError when all trials fail.
GridResult grid_search(const LearnerGrid& grid, const Eigen::MatrixXd& x_train, std::span<const int> y_train,
                       const Eigen::MatrixXd& x_valid, std::span<const int> y_valid, std::size_t n_classes,
                       const GridOptions& options = {});

// trial_id, family, params, val_accuracy, val_f1, val_precision, val_recall, epochs
void write_trial_table(std::span<const Trial> trials, const std::filesystem::path& path);

// "MDL1", u64 version, spec as JSON, labels, epochs, layers as f64.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace heterorep
