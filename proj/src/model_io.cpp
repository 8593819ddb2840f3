#include <json.hpp>

#include "heterorep/binary_io.hpp"
#include "heterorep/error.hpp"
#include "heterorep/learners.hpp"

namespace heterorep {
namespace {

constexpr std::uint64_t kModelVersion = 1;

nlohmann::json spec_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  if (const auto* l = std::get_if<LinearModelSpec>(&spec)) {
    j["type"] = "linear";
    j["family"] = l->family == LinearFamily::LogReg ? "logreg" : "sgd";
    j["loss"] = l->loss == SgdLoss::Log ? "log" : "hinge";
    j["l2_lambda"] = l->l2_lambda;
    j["alpha"] = l->alpha;
    j["l1_ratio"] = l->l1_ratio;
    j["power_t"] = l->power_t;
    j["eta0"] = l->eta0;
    j["max_epochs"] = l->max_epochs;
    j["tol"] = l->tol;
    j["n_iter_no_change"] = l->n_iter_no_change;
    j["seed"] = l->seed;
  } else {
    const auto& m = std::get<MlpSpec>(spec);
    j["type"] = "mlp";
    j["arch"] = std::string(to_string(m.arch));
    j["snn_width"] = m.snn_width;
    j["lnn_n"] = m.lnn_n;
    j["fivenet_widths"] = m.fivenet_widths;
    j["lr"] = m.lr;
    j["dropout"] = m.dropout;
    j["batch_size"] = m.batch_size;
    j["max_epochs"] = m.max_epochs;
    j["patience"] = m.patience;
    j["seed"] = m.seed;
  }
  return j;
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  if (j.at("type") == "linear") {
    LinearModelSpec l;
    l.family = j.at("family") == "logreg" ? LinearFamily::LogReg : LinearFamily::Sgd;
    l.loss = j.at("loss") == "log" ? SgdLoss::Log : SgdLoss::Hinge;
    l.l2_lambda = j.at("l2_lambda");
    l.alpha = j.at("alpha");
    l.l1_ratio = j.at("l1_ratio");
    l.power_t = j.at("power_t");
    l.eta0 = j.at("eta0");
    l.max_epochs = j.at("max_epochs");
    l.tol = j.at("tol");
    l.n_iter_no_change = j.at("n_iter_no_change");
    l.seed = j.at("seed");
    return l;
  }
  MlpSpec m;
  m.arch = parse_mlp_arch(j.at("arch").get<std::string>());
  m.snn_width = j.at("snn_width");
  m.lnn_n = j.at("lnn_n");
  m.fivenet_widths = j.at("fivenet_widths").get<std::vector<int>>();
  m.lr = j.at("lr");
  m.dropout = j.at("dropout");
  m.batch_size = j.at("batch_size");
  m.max_epochs = j.at("max_epochs");
  m.patience = j.at("patience");
  m.seed = j.at("seed");
  return m;
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  io::BinaryWriter w(path);
  w.magic("MDL1");
  w.put<std::uint64_t>(kModelVersion);
  w.put_string(spec_to_json(model.spec).dump());
  w.put<std::uint64_t>(model.labels.size());
  for (const auto& l : model.labels) w.put_string(l);
  w.put<std::int64_t>(model.best_epoch);
  w.put<std::int64_t>(model.trained_epochs);
  w.put<double>(model.best_validation_f1);
  w.put<std::uint64_t>(model.layers.size());
  for (const auto& layer : model.layers) {
    w.put<std::uint64_t>(static_cast<std::uint64_t>(layer.weights.rows()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(layer.weights.cols()));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = layer.weights;
    w.put_array(rm.data(), static_cast<std::size_t>(rm.size()));
    w.put_array(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  w.close();
}

TrainedModel load_model(const std::filesystem::path& path) {
  io::BinaryReader r(path);
  r.expect_magic("MDL1");
  if (r.get<std::uint64_t>() != kModelVersion) throw FormatError(path.string() + ": unsupported model version");
  TrainedModel model;
  try {
    model.spec = spec_from_json(nlohmann::json::parse(r.get_string()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad model spec: " + e.what());
  }
  const auto n_labels = r.get<std::uint64_t>();
  if (n_labels > r.remaining()) throw FormatError(path.string() + ": corrupt label count");
  for (std::uint64_t i = 0; i < n_labels; ++i) model.labels.push_back(r.get_string());
  model.best_epoch = static_cast<int>(r.get<std::int64_t>());
  model.trained_epochs = static_cast<int>(r.get<std::int64_t>());
  model.best_validation_f1 = r.get<double>();
  const auto n_layers = r.get<std::uint64_t>();
  if (n_layers > r.remaining()) throw FormatError(path.string() + ": corrupt layer count");
  for (std::uint64_t l = 0; l < n_layers; ++l) {
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (rows * cols * sizeof(double) > r.remaining()) throw FormatError(path.string() + ": truncated layer");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(static_cast<Eigen::Index>(rows),
                                                                              static_cast<Eigen::Index>(cols));
    r.get_array(rm.data(), rows * cols);
    Eigen::VectorXd bias(static_cast<Eigen::Index>(rows));
    r.get_array(bias.data(), rows);
    model.layers.push_back({rm, std::move(bias)});
  }
  if (r.remaining() != 0) throw FormatError(path.string() + ": trailing bytes after model");
  return model;
}

}  // namespace heterorep
