//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_MODELS_TRAIN_H_
#define SOLVFLOW_MODELS_TRAIN_H_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "solvflow/data.h"
#include "solvflow/descriptors.h"
#include "solvflow/models/deep.h"
#include "solvflow/models/gbdt.h"
#include "solvflow/models/gnn.h"

namespace solvflow::models {

class NonFiniteLoss: public Error {
public:
  NonFiniteLoss(int epoch, double value);
  int epoch() const { return epoch_; }

private:
  int epoch_;
};

enum class ModelKind { kGnn, kDeep, kMlp, kGbdt };

std::string to_string(ModelKind kind);
// Accepts gnn, deepmodel, mlp, gbdt. Throws Error otherwise.
ModelKind model_kind_from_string(std::string_view name);

struct TrainConfig {
  int max_epochs = 400;
  int batch_size = 128;
  double lr = 7e-4;
  double weight_decay = 1e-5;
  double clip_norm = 1.0;
  // Stop once the validation loss has not improved for this many epochs;
  // 0 disables.
  int early_stop_patience = 50;
  bool plateau = false;
  double plateau_factor = 0.7;
  int plateau_patience = 30;

  static TrainConfig gnn_defaults();
  static TrainConfig deep_defaults();

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json &j, TrainConfig defaults);
};

// Every hyperparameter of every method, addressable as a JSON tree.
struct ModelSettings {
  GnnConfig gnn;
  DeepModelConfig deep;
  DeepModelConfig mlp = [] {
    DeepModelConfig c;
    c.plain_mlp = true;
    return c;
  }();
  GbdtConfig gbdt;
  TrainConfig gnn_train = TrainConfig::gnn_defaults();
  TrainConfig deep_train = TrainConfig::deep_defaults();

  nlohmann::json to_json() const;
  static ModelSettings from_json(const nlohmann::json &j);

  // "gnn.hidden=128", "gnn_train.max_epochs=5"; the value is parsed as JSON
  // and falls back to a string. Throws Error on an unknown key.
  void apply_override(std::string_view assignment);

  // Config and training settings relevant to one method.
  nlohmann::json for_kind(ModelKind kind) const;
};

// Digest of ModelSettings::for_kind(kind).
std::string config_digest(const ModelSettings &settings, ModelKind kind);

// Per-row features of one dataset, computed once and shared by every fold.
struct PreparedData {
  const data::Dataset *dataset = nullptr;
  // [tau, T, spange mix, acs mix, fingerprint] per row
  Eigen::MatrixXd baseline;
  int fingerprint_width = 0;
  Eigen::MatrixXd targets;
  std::vector<const featurize::FeaturizedGraph *> solvent_a;
  // equals solvent_a for rows without a second solvent
  std::vector<const featurize::FeaturizedGraph *> solvent_b;
  std::array<const featurize::FeaturizedGraph *, 3> reactants {};
  featurize::RowMatrix conditions;  // T', tau', pct'

  int rows() const { return static_cast<int>(targets.rows()); }
};

// The fingerprint block is the record's own hex when present, else the
// mixed fingerprint table, else the DRFP of the dataset's reaction.
PreparedData prepare_data(const data::Dataset &ds,
                          const descriptors::TableSet &tables, GraphCache &graphs);

// Batch for the rows `rows` of `data`; drops blocks the config turns off.
GnnInputs gnn_inputs(const PreparedData &data, std::span<const int> rows,
                     const GnnConfig &config);

Eigen::MatrixXd select_rows(const Eigen::MatrixXd &m, std::span<const int> rows);

struct CurvePoint {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  // epoch 0 is the untrained model
  std::vector<CurvePoint> curve;
  int best_epoch = 0;
  double best_val = 0.0;
};

// Generic mini-batch loop. `batch_loss` builds the loss for a batch of
// training positions; `evaluate` returns (train loss, validation loss) in
// eval mode. Best-validation parameters are restored before returning.
TrainResult run_training(ad::ParameterStore<float> &store, int n_train,
                         const std::function<ad::Tensor<float>(
                             std::span<const int>, const DropoutContext &)> &batch_loss,
                         const std::function<std::pair<double, double>()> &evaluate,
                         const TrainConfig &config, std::uint64_t seed);

struct ModelBundle {
  ModelKind kind = ModelKind::kGbdt;
  ModelSettings settings;
  std::uint64_t seed = 0;
  std::unique_ptr<GnnModel<float>> gnn;
  std::unique_ptr<DeepModel<float>> deep;
  std::optional<GbdtModel> gbdt;
  descriptors::ColumnScaler scaler;
  TrainResult training;

  // rows x 3; neural nets run in eval mode without recording a graph.
  Eigen::MatrixXd predict(const PreparedData &data, std::span<const int> rows) const;

  std::string config_digest() const { return models::config_digest(settings, kind); }
};

// Builds an untrained bundle whose parameters are fully determined by
// (kind, settings, seed, input width).
ModelBundle make_bundle(ModelKind kind, const ModelSettings &settings,
                        std::uint64_t seed, int input_width);

// Fits a model on `train_rows`, early-stopping on `val_rows` (neural models;
// the GBDT trains on the union). An empty validation set monitors the
// training loss instead.
ModelBundle train_model(ModelKind kind, const ModelSettings &settings,
                        const PreparedData &data, std::span<const int> train_rows,
                        std::span<const int> val_rows, std::uint64_t seed);

}  // namespace solvflow::models

#endif  // SOLVFLOW_MODELS_TRAIN_H_
