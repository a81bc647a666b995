//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_MODELS_GBDT_H_
#define SOLVFLOW_MODELS_GBDT_H_

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "solvflow/error.h"

namespace solvflow::models {

class InsufficientData: public Error {
public:
  using Error::Error;
};

struct GbdtConfig {
  int iterations = 1200;
  double learning_rate = 0.025;
  int max_depth = 10;
  int min_samples_leaf = 5;
  double l2 = 0.05;
  int max_leaves = 100;
  int bins = 256;

  // Throws ConfigMismatch.
  void validate() const;

  nlohmann::json to_json() const;
  static GbdtConfig from_json(const nlohmann::json &j);
};

// Per-feature split thresholds. Features with at most `bins` distinct values
// get the midpoints between consecutive values; others get quantile cuts.
// bin(x) = number of thresholds strictly below x, so bin <= b <=> x <= t_b.
struct BinMapper {
  std::vector<std::vector<double>> thresholds;

  static BinMapper fit(const Eigen::MatrixXd &x, int bins);

  int features() const { return static_cast<int>(thresholds.size()); }
  int bin_count(int feature) const {
    return static_cast<int>(thresholds[feature].size()) + 1;
  }
  int bin(int feature, double value) const;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output before shrinkage
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const double *row) const;
  int leaves() const;
  int depth() const;
};

struct GbdtModel {
  GbdtConfig config;
  int width = 0;
  std::array<double, 3> base{};
  std::array<std::vector<RegressionTree>, 3> trees;
  // Mean training MSE over the three outputs after each iteration.
  std::vector<double> train_mse;

  // `iterations` < 0 uses every tree. Throws WidthMismatch.
  Eigen::MatrixXd predict(const Eigen::MatrixXd &x, int iterations = -1) const;

  nlohmann::json to_json() const;
  static GbdtModel from_json(const nlohmann::json &j);
};

// Three independent squared-error boosted ensembles, one per target column.
// Trees grow best-first on histogram bins.
GbdtModel gbdt_fit(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y,
                   const GbdtConfig &config);

inline Eigen::MatrixXd gbdt_predict(const GbdtModel &model,
                                    const Eigen::MatrixXd &x) {
  return model.predict(x);
}

}  // namespace solvflow::models

#endif  // SOLVFLOW_MODELS_GBDT_H_
