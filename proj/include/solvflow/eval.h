//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_EVAL_H_
#define SOLVFLOW_EVAL_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "solvflow/data.h"
#include "solvflow/models/train.h"

namespace solvflow::eval {

class TooFewGroups: public Error {
public:
  using Error::Error;
};

enum class Protocol { kLoso, kLoro, kRandom };

std::string to_string(Protocol protocol);
Protocol protocol_from_string(std::string_view name);

struct Fold {
  std::string group;
  std::vector<int> train;
  std::vector<int> test;
};

struct SplitPlan {
  Protocol protocol = Protocol::kLoso;
  std::vector<Fold> folds;
};

// LOSO: one fold per roster solvent; its test rows are the rows using it as
// A or B and no training row uses it. LORO: one fold per ramp_id. Random:
// one seeded 80/20 fold. Throws TooFewGroups below two groups.
SplitPlan make_splits(const data::Dataset &ds, Protocol protocol, std::uint64_t seed);

// Moves whole ramps from `train` into a validation set until it holds at
// least `fraction` of the rows. Returns (train, validation); validation is
// empty when train has a single ramp.
std::pair<std::vector<int>, std::vector<int>> carve_validation(
    const data::Dataset &ds, const std::vector<int> &train, double fraction,
    std::uint64_t seed);

struct MseResult {
  std::array<double, 3> per_target {};
  double pooled = 0.0;
};

// Throws ShapeMismatch.
MseResult mse(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth);

inline constexpr double kEnsembleEpsilon = 1e-6;

// Inverse-variance weights w = 1/(var + eps) per row, shared by the three
// outputs. Variances are per row.
Eigen::MatrixXd ensemble_combine(const Eigen::MatrixXd &pred_a,
                                 const Eigen::MatrixXd &pred_b,
                                 const Eigen::VectorXd &var_a,
                                 const Eigen::VectorXd &var_b,
                                 double epsilon = kEnsembleEpsilon);

enum class VarianceMode { kPerRow, kPerFold };

// Population variance of each row's outputs, or of every prediction in the
// block repeated per row.
Eigen::VectorXd prediction_variance(const Eigen::MatrixXd &pred, VarianceMode mode);

// Unbiased sample standard deviation; 0 for fewer than two values.
double sample_std(const std::vector<double> &values);

// Display name used in report tables.
std::string method_label(std::string_view method);

struct BenchmarkOptions {
  Protocol protocol = Protocol::kLoso;
  std::vector<std::string> methods { "gbdt" };
  std::uint64_t seed = 0;
  int jobs = 1;
  VarianceMode variance = VarianceMode::kPerRow;
  double val_fraction = 0.15;
  models::ModelSettings settings;
  // run only the first n folds when > 0
  int max_folds = 0;
};

struct FoldResult {
  int fold = 0;
  std::string group;
  std::string method;
  bool completed = false;
  std::string error;
  MseResult mse;
  std::vector<int> test_rows;
  Eigen::MatrixXd predictions;  // clamped to [0, 1]
  Eigen::VectorXd variance;     // from the unclamped predictions
  int best_epoch = 0;
  int epochs = 0;
};

struct MethodSummary {
  std::string method;
  std::string label;
  std::string config_digest;
  int folds = 0;
  int completed = 0;
  double mean = 0.0;
  double std = 0.0;
  std::array<double, 3> per_target_mean {};
  // pooled MSE over every test row involving each solvent
  std::map<std::string, double> per_solvent;
};

struct BenchmarkReport {
  std::string dataset_digest;
  std::string subset;
  Protocol protocol = Protocol::kLoso;
  std::uint64_t seed = 0;
  nlohmann::json settings;
  std::vector<std::string> methods;
  std::vector<std::string> warnings;
  std::vector<MethodSummary> summaries;
  std::vector<FoldResult> folds;
  nlohmann::json metadata;
  // truth for every row, for residual output
  Eigen::MatrixXd truth;
  std::vector<std::string> row_solvent;

  bool complete() const;
  nlohmann::json to_json() const;
  std::string to_text() const;
  // true, predicted, residual, method, solvent, protocol, fold, row, target
  std::string residual_csv() const;
};

// Trains and scores every method on every fold. Fold failures are recorded,
// not thrown. The ensemble needs gbdt plus one of deepmodel, gnn, mlp (in
// that order of preference).
BenchmarkReport run_benchmark(const data::Dataset &ds, const models::PreparedData &data,
                              const BenchmarkOptions &options);

struct AblationVariant {
  std::string key;
  std::string label;
  models::GnnConfig config;
};

// Full GNN followed by the four single-switch ablations.
std::vector<AblationVariant> ablation_variants(const models::GnnConfig &base);

struct AblationRow {
  AblationVariant variant;
  std::string config_digest;
  MethodSummary summary;
  std::vector<double> fold_mse;
};

struct AblationReport {
  std::string dataset_digest;
  std::string subset;
  Protocol protocol = Protocol::kLoso;
  std::uint64_t seed = 0;
  std::vector<AblationRow> rows;
  std::vector<std::string> warnings;
  nlohmann::json metadata;

  bool complete() const;
  nlohmann::json to_json() const;
  std::string to_text() const;
};

AblationReport ablation_suite(const data::Dataset &ds, const models::PreparedData &data,
                              const BenchmarkOptions &options);

}  // namespace solvflow::eval

#endif  // SOLVFLOW_EVAL_H_
