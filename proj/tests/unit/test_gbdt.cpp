//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <random>

#include "solvflow/models/gbdt.h"

using namespace solvflow;
using namespace solvflow::models;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64 &rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = u(rng);
  }
  return m;
}

Eigen::MatrixXd targets_for(const Eigen::MatrixXd &x, std::mt19937_64 &rng) {
  std::normal_distribution<double> noise(0.0, 0.05);
  Eigen::MatrixXd y(x.rows(), 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y(i, 0) = x(i, 0) > 0.2 ? 0.8 : 0.1 + 0.2 * x(i, 1) * x(i, 1);
    y(i, 1) = 0.5 + 0.3 * std::sin(3.0 * x(i, 2)) + noise(rng);
    y(i, 2) = 0.3 * x(i, 0) * x(i, 3) + noise(rng);
  }
  return y;
}

// Straightforward re-implementation: for each leaf scan every threshold by
// summing gradients row by row, grow best-first, no histograms.
class ReferenceBooster {
public:
  ReferenceBooster(const Eigen::MatrixXd &x, const GbdtConfig &config)
      : x_(x), config_(config), mapper_(BinMapper::fit(x, config.bins)) {}

  // Predictions after boosting one column.
  std::vector<double> fit_column(const Eigen::VectorXd &y) {
    const int n = static_cast<int>(x_.rows());
    std::vector<double> pred(n, y.mean());
    for (int it = 0; it < config_.iterations; ++it) {
      std::vector<double> g(n);
      for (int i = 0; i < n; ++i) {
        g[i] = pred[i] - y(i);
      }
      const auto update = tree(g);
      for (int i = 0; i < n; ++i) {
        pred[i] += config_.learning_rate * update[i];
      }
    }
    return pred;
  }

private:
  struct Node {
    std::vector<int> rows;
    int depth = 0;
    int id = 0;
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  void best_split(Node &node, const std::vector<double> &g) const {
    node.feature = -1;
    node.gain = 0.0;
    const int n = static_cast<int>(node.rows.size());
    if (node.depth >= config_.max_depth || n < 2 * config_.min_samples_leaf) {
      return;
    }
    double total = 0.0;
    for (const int r: node.rows) {
      total += g[r];
    }
    const double lambda = config_.l2;
    for (int f = 0; f < x_.cols(); ++f) {
      for (const double t: mapper_.thresholds[f]) {
        double gl = 0.0;
        int nl = 0;
        for (const int r: node.rows) {
          if (x_(r, f) <= t) {
            gl += g[r];
            ++nl;
          }
        }
        const int nr = n - nl;
        if (nl < config_.min_samples_leaf || nr < config_.min_samples_leaf) {
          continue;
        }
        const double gr = total - gl;
        const double gain = 0.5 * (gl * gl / (nl + lambda) + gr * gr / (nr + lambda)
                                   - total * total / (n + lambda));
        if (gain > 1e-12 && gain > node.gain) {
          node.gain = gain;
          node.feature = f;
          node.threshold = t;
        }
      }
    }
  }

  std::vector<double> tree(const std::vector<double> &g) const {
    const int n = static_cast<int>(x_.rows());
    std::vector<Node> leaves(1);
    for (int i = 0; i < n; ++i) {
      leaves[0].rows.push_back(i);
    }
    best_split(leaves[0], g);
    int next_id = 1;
    while (static_cast<int>(leaves.size()) < config_.max_leaves) {
      int pick = -1;
      for (int i = 0; i < static_cast<int>(leaves.size()); ++i) {
        if (leaves[i].feature >= 0
            && (pick < 0 || leaves[i].gain > leaves[pick].gain)) {
          pick = i;
        }
      }
      if (pick < 0) {
        break;
      }
      Node parent = leaves[pick];
      leaves.erase(leaves.begin() + pick);
      Node left;
      Node right;
      for (const int r: parent.rows) {
        (x_(r, parent.feature) <= parent.threshold ? left : right).rows.push_back(r);
      }
      left.depth = right.depth = parent.depth + 1;
      left.id = next_id++;
      right.id = next_id++;
      best_split(left, g);
      best_split(right, g);
      leaves.push_back(left);
      leaves.push_back(right);
    }
    std::vector<double> out(n);
    for (const Node &leaf: leaves) {
      double s = 0.0;
      for (const int r: leaf.rows) {
        s += g[r];
      }
      const double v = -s / (static_cast<double>(leaf.rows.size()) + config_.l2);
      for (const int r: leaf.rows) {
        out[r] = v;
      }
    }
    return out;
  }

  const Eigen::MatrixXd &x_;
  GbdtConfig config_;
  BinMapper mapper_;
};

GbdtConfig quick_config() {
  GbdtConfig c;
  c.iterations = 30;
  c.learning_rate = 0.1;
  c.max_depth = 4;
  c.min_samples_leaf = 3;
  c.max_leaves = 8;
  return c;
}

}  // namespace

TEST_CASE("bin mapper midpoints and quantiles") {
  Eigen::MatrixXd x(5, 2);
  x << 1, 0, 3, 0, 2, 0, 3, 0, 10, 0;
  const auto m = BinMapper::fit(x, 256);
  REQUIRE(m.thresholds[0].size() == 3);
  CHECK(m.thresholds[0][0] == 1.5);
  CHECK(m.thresholds[0][1] == 2.5);
  CHECK(m.thresholds[0][2] == 6.5);
  CHECK(m.thresholds[1].empty());
  CHECK(m.bin(0, 1.5) == 0);
  CHECK(m.bin(0, 1.6) == 1);
  CHECK(m.bin(0, 100.0) == 3);

  std::mt19937_64 rng(2);
  const auto big = random_matrix(rng, 1000, 1);
  const auto q = BinMapper::fit(big, 16);
  CHECK(q.bin_count(0) <= 16);
  // roughly equal occupancy
  std::vector<int> count(q.bin_count(0), 0);
  for (int i = 0; i < 1000; ++i) {
    ++count[q.bin(0, big(i, 0))];
  }
  for (const int c: count) {
    CHECK(c > 20);
    CHECK(c < 130);
  }
}

TEST_CASE("constant targets give constant predictions") {
  std::mt19937_64 rng(1);
  const auto x = random_matrix(rng, 40, 4);
  Eigen::MatrixXd y(40, 3);
  y.col(0).setConstant(0.25);
  y.col(1).setConstant(0.5);
  y.col(2).setConstant(0.0);
  const auto model = gbdt_fit(x, y, quick_config());
  const auto p = model.predict(random_matrix(rng, 7, 4));
  for (int t = 0; t < 3; ++t) {
    CHECK((p.col(t).array() - y(0, t)).abs().maxCoeff() < 1e-12);
    for (const auto &tree: model.trees[t]) {
      CHECK(tree.leaves() == 1);
    }
  }
}

TEST_CASE("zero iterations returns the target means") {
  std::mt19937_64 rng(3);
  const auto x = random_matrix(rng, 30, 3);
  const auto y = targets_for(random_matrix(rng, 30, 4), rng);
  const auto model = gbdt_fit(x, y, quick_config());
  const auto p = model.predict(x, 0);
  for (int t = 0; t < 3; ++t) {
    CHECK((p.col(t).array() - y.col(t).mean()).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("training error does not increase and trees respect limits") {
  std::mt19937_64 rng(4);
  const auto x = random_matrix(rng, 120, 5);
  const auto y = targets_for(x, rng);
  const auto c = quick_config();
  const auto model = gbdt_fit(x, y, c);
  REQUIRE(model.train_mse.size() == static_cast<std::size_t>(c.iterations));
  for (std::size_t i = 1; i < model.train_mse.size(); ++i) {
    CHECK(model.train_mse[i] <= model.train_mse[i - 1] + 1e-15);
  }
  for (const auto &per_target: model.trees) {
    for (const auto &tree: per_target) {
      CHECK(tree.leaves() <= c.max_leaves);
      CHECK(tree.depth() <= c.max_depth);
    }
  }
  // the step function in target 0 is recovered
  const auto p = model.predict(x);
  CHECK((p - y).col(0).squaredNorm() / 120.0 < 0.01);
}

TEST_CASE("matches an independent exact-greedy booster") {
  std::mt19937_64 rng(5);
  const auto x = random_matrix(rng, 50, 4);
  const auto y = targets_for(x, rng);
  auto c = quick_config();
  c.iterations = 15;
  const auto model = gbdt_fit(x, y, c);
  const auto p = model.predict(x);
  ReferenceBooster ref(x, c);
  for (int t = 0; t < 3; ++t) {
    CAPTURE(t);
    const auto expected = ref.fit_column(y.col(t));
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      worst = std::max(worst, std::abs(expected[i] - p(i, t)));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("errors") {
  std::mt19937_64 rng(6);
  const auto x = random_matrix(rng, 9, 2);
  const auto y = random_matrix(rng, 9, 3);
  auto c = quick_config();
  c.min_samples_leaf = 5;
  CHECK_THROWS_AS(gbdt_fit(x, y, c), InsufficientData);
  c.min_samples_leaf = 2;
  const auto model = gbdt_fit(x, y, c);
  CHECK_THROWS_AS(model.predict(Eigen::MatrixXd::Zero(2, 3)), WidthMismatch);
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigMismatch);
}

TEST_CASE("json round trip preserves predictions") {
  std::mt19937_64 rng(7);
  const auto x = random_matrix(rng, 60, 3);
  const auto y = targets_for(random_matrix(rng, 60, 4), rng);
  const auto model = gbdt_fit(x, y, quick_config());
  const auto back = GbdtModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  CHECK(back.predict(x) == model.predict(x));
  CHECK(back.config.to_json() == model.config.to_json());
}
