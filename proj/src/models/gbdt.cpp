//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/models/gbdt.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace solvflow::models {
namespace {

// Splits with a smaller gain are treated as noise.
constexpr double kMinGain = 1e-12;

struct Split {
  double gain = 0.0;
  int feature = -1;
  int bin = -1;
};

struct Leaf {
  int node = 0;
  int depth = 0;
  std::vector<int> rows;
  double grad_sum = 0.0;
  std::vector<double> hist_grad;  // flattened over active features
  std::vector<int> hist_count;
  Split best;
};

class TreeGrower {
public:
  TreeGrower(const GbdtConfig &config, const std::vector<std::vector<std::uint8_t>> &binned,
             const std::vector<int> &active, const std::vector<int> &bin_counts,
             const BinMapper &mapper)
      : config_(config), binned_(binned), active_(active),
        bin_counts_(bin_counts), mapper_(mapper) {
    offsets_.resize(active_.size() + 1, 0);
    for (std::size_t a = 0; a < active_.size(); ++a) {
      offsets_[a + 1] = offsets_[a] + bin_counts_[active_[a]];
    }
  }

  // Returns the tree and, through `leaf_of_row`, the leaf node of each row.
  RegressionTree grow(const std::vector<double> &grad, std::vector<int> &leaf_of_row) {
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<Leaf> leaves;
    Leaf root;
    root.rows.resize(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
      root.rows[i] = static_cast<int>(i);
    }
    build_histogram(root, grad);
    find_split(root);
    leaves.push_back(std::move(root));

    while (static_cast<int>(leaves.size()) < config_.max_leaves) {
      int pick = -1;
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].best.feature < 0) {
          continue;
        }
        if (pick < 0 || leaves[i].best.gain > leaves[pick].best.gain
            || (leaves[i].best.gain == leaves[pick].best.gain
                && leaves[i].node < leaves[pick].node)) {
          pick = static_cast<int>(i);
        }
      }
      if (pick < 0) {
        break;
      }
      Leaf parent = std::move(leaves[pick]);
      leaves.erase(leaves.begin() + pick);

      const int f = parent.best.feature;
      const int b = parent.best.bin;
      Leaf left;
      Leaf right;
      for (const int r: parent.rows) {
        (binned_[f][r] <= b ? left : right).rows.push_back(r);
      }
      left.depth = right.depth = parent.depth + 1;
      left.node = static_cast<int>(tree.nodes.size());
      right.node = left.node + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode &split = tree.nodes[parent.node];
      split.feature = f;
      split.threshold = mapper_.thresholds[f][b];
      split.left = left.node;
      split.right = right.node;

      Leaf &small = left.rows.size() <= right.rows.size() ? left : right;
      Leaf &large = &small == &left ? right : left;
      build_histogram(small, grad);
      large.hist_grad = std::move(parent.hist_grad);
      large.hist_count = std::move(parent.hist_count);
      for (std::size_t k = 0; k < large.hist_grad.size(); ++k) {
        large.hist_grad[k] -= small.hist_grad[k];
        large.hist_count[k] -= small.hist_count[k];
      }
      large.grad_sum = 0.0;
      for (const int r: large.rows) {
        large.grad_sum += grad[r];
      }
      find_split(left);
      find_split(right);
      leaves.push_back(std::move(left));
      leaves.push_back(std::move(right));
    }

    for (const Leaf &leaf: leaves) {
      const double n = static_cast<double>(leaf.rows.size());
      tree.nodes[leaf.node].value = -leaf.grad_sum / (n + config_.l2);
      for (const int r: leaf.rows) {
        leaf_of_row[r] = leaf.node;
      }
    }
    return tree;
  }

private:
  void build_histogram(Leaf &leaf, const std::vector<double> &grad) const {
    leaf.hist_grad.assign(offsets_.back(), 0.0);
    leaf.hist_count.assign(offsets_.back(), 0);
    leaf.grad_sum = 0.0;
    for (const int r: leaf.rows) {
      leaf.grad_sum += grad[r];
    }
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const auto &column = binned_[active_[a]];
      double *hg = leaf.hist_grad.data() + offsets_[a];
      int *hc = leaf.hist_count.data() + offsets_[a];
      for (const int r: leaf.rows) {
        hg[column[r]] += grad[r];
        ++hc[column[r]];
      }
    }
  }

  void find_split(Leaf &leaf) const {
    leaf.best = Split{};
    const int n = static_cast<int>(leaf.rows.size());
    if (leaf.depth >= config_.max_depth || n < 2 * config_.min_samples_leaf) {
      return;
    }
    const double lambda = config_.l2;
    const double g = leaf.grad_sum;
    const double parent_score = g * g / (n + lambda);
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const int bins = bin_counts_[active_[a]];
      const double *hg = leaf.hist_grad.data() + offsets_[a];
      const int *hc = leaf.hist_count.data() + offsets_[a];
      double gl = 0.0;
      int nl = 0;
      for (int b = 0; b + 1 < bins; ++b) {
        gl += hg[b];
        nl += hc[b];
        const int nr = n - nl;
        if (nl < config_.min_samples_leaf) {
          continue;
        }
        if (nr < config_.min_samples_leaf) {
          break;
        }
        const double gr = g - gl;
        const double gain =
            0.5 * (gl * gl / (nl + lambda) + gr * gr / (nr + lambda) - parent_score);
        if (gain > kMinGain && gain > leaf.best.gain) {
          leaf.best = { gain, active_[a], b };
        }
      }
    }
  }

  const GbdtConfig &config_;
  const std::vector<std::vector<std::uint8_t>> &binned_;
  const std::vector<int> &active_;
  const std::vector<int> &bin_counts_;
  const BinMapper &mapper_;
  std::vector<int> offsets_;
};

}  // namespace

void GbdtConfig::validate() const {
  if (iterations < 0 || !(learning_rate > 0.0) || max_depth < 1
      || min_samples_leaf < 1 || !(l2 >= 0.0) || max_leaves < 2 || bins < 2
      || bins > 256) {
    throw ConfigMismatch("invalid GBDT configuration");
  }
}

nlohmann::json GbdtConfig::to_json() const {
  return {
    { "iterations", iterations },
    { "learning_rate", learning_rate },
    { "max_depth", max_depth },
    { "min_samples_leaf", min_samples_leaf },
    { "l2", l2 },
    { "max_leaves", max_leaves },
    { "bins", bins },
  };
}

GbdtConfig GbdtConfig::from_json(const nlohmann::json &j) {
  GbdtConfig c;
  c.iterations = j.value("iterations", c.iterations);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.min_samples_leaf = j.value("min_samples_leaf", c.min_samples_leaf);
  c.l2 = j.value("l2", c.l2);
  c.max_leaves = j.value("max_leaves", c.max_leaves);
  c.bins = j.value("bins", c.bins);
  return c;
}

BinMapper BinMapper::fit(const Eigen::MatrixXd &x, int bins) {
  BinMapper mapper;
  mapper.thresholds.resize(x.cols());
  std::vector<double> column(x.rows());
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      column[i] = x(i, f);
    }
    std::sort(column.begin(), column.end());
    std::vector<double> unique = column;
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    auto &t = mapper.thresholds[f];
    if (static_cast<int>(unique.size()) <= bins) {
      for (std::size_t k = 0; k + 1 < unique.size(); ++k) {
        t.push_back(0.5 * (unique[k] + unique[k + 1]));
      }
      continue;
    }
    const std::size_t n = column.size();
    for (int j = 1; j < bins; ++j) {
      const double q = column[j * n / bins];
      const auto next = std::upper_bound(unique.begin(), unique.end(), q);
      if (next == unique.end()) {
        break;
      }
      const double cut = 0.5 * (q + *next);
      if (t.empty() || cut > t.back()) {
        t.push_back(cut);
      }
    }
  }
  return mapper;
}

int BinMapper::bin(int feature, double value) const {
  const auto &t = thresholds[feature];
  return static_cast<int>(std::lower_bound(t.begin(), t.end(), value) - t.begin());
}

double RegressionTree::predict(const double *row) const {
  int k = 0;
  while (nodes[k].feature >= 0) {
    k = row[nodes[k].feature] <= nodes[k].threshold ? nodes[k].left : nodes[k].right;
  }
  return nodes[k].value;
}

int RegressionTree::leaves() const {
  int n = 0;
  for (const auto &node: nodes) {
    n += node.feature < 0 ? 1 : 0;
  }
  return n;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].feature >= 0) {
      d[nodes[k].left] = d[nodes[k].right] = d[k] + 1;
    }
    best = std::max(best, d[k]);
  }
  return best;
}

Eigen::MatrixXd GbdtModel::predict(const Eigen::MatrixXd &x, int iterations) const {
  if (x.cols() != width) {
    throw WidthMismatch("GBDT was trained on " + std::to_string(width)
                        + " features, got " + std::to_string(x.cols()));
  }
  Eigen::MatrixXd out(x.rows(), 3);
  std::vector<double> row(width);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int f = 0; f < width; ++f) {
      row[f] = x(i, f);
    }
    for (int t = 0; t < 3; ++t) {
      const int n = iterations < 0
                        ? static_cast<int>(trees[t].size())
                        : std::min<int>(iterations, static_cast<int>(trees[t].size()));
      double p = base[t];
      for (int k = 0; k < n; ++k) {
        p += config.learning_rate * trees[t][k].predict(row.data());
      }
      out(i, t) = p;
    }
  }
  return out;
}

GbdtModel gbdt_fit(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y,
                   const GbdtConfig &config) {
  config.validate();
  if (y.cols() != 3 || y.rows() != x.rows()) {
    throw ShapeMismatch("GBDT targets must be (rows x 3) matching the features");
  }
  const int n = static_cast<int>(x.rows());
  if (n < 2 * config.min_samples_leaf) {
    throw InsufficientData("GBDT needs at least "
                           + std::to_string(2 * config.min_samples_leaf)
                           + " rows, got " + std::to_string(n));
  }

  GbdtModel model;
  model.config = config;
  model.width = static_cast<int>(x.cols());

  const BinMapper mapper = BinMapper::fit(x, config.bins);
  std::vector<std::vector<std::uint8_t>> binned(x.cols());
  std::vector<int> bin_counts(x.cols());
  std::vector<int> active;
  for (int f = 0; f < model.width; ++f) {
    bin_counts[f] = mapper.bin_count(f);
    if (bin_counts[f] < 2) {
      continue;
    }
    active.push_back(f);
    binned[f].resize(n);
    for (int i = 0; i < n; ++i) {
      binned[f][i] = static_cast<std::uint8_t>(mapper.bin(f, x(i, f)));
    }
  }

  TreeGrower grower(config, binned, active, bin_counts, mapper);
  std::array<std::vector<double>, 3> pred;
  for (int t = 0; t < 3; ++t) {
    model.base[t] = y.col(t).mean();
    pred[t].assign(n, model.base[t]);
    model.trees[t].reserve(config.iterations);
  }
  std::vector<double> grad(n);
  std::vector<int> leaf_of_row(n);
  for (int it = 0; it < config.iterations; ++it) {
    double mse = 0.0;
    for (int t = 0; t < 3; ++t) {
      for (int i = 0; i < n; ++i) {
        grad[i] = pred[t][i] - y(i, t);
      }
      RegressionTree tree = grower.grow(grad, leaf_of_row);
      for (int i = 0; i < n; ++i) {
        pred[t][i] += config.learning_rate * tree.nodes[leaf_of_row[i]].value;
        const double r = pred[t][i] - y(i, t);
        mse += r * r;
      }
      model.trees[t].push_back(std::move(tree));
    }
    model.train_mse.push_back(mse / (3.0 * n));
  }
  return model;
}

nlohmann::json GbdtModel::to_json() const {
  nlohmann::json j;
  j["config"] = config.to_json();
  j["width"] = width;
  j["base"] = base;
  j["train_mse"] = train_mse;
  nlohmann::json ensembles = nlohmann::json::array();
  for (const auto &list: trees) {
    nlohmann::json jt = nlohmann::json::array();
    for (const auto &tree: list) {
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto &node: tree.nodes) {
        nodes.push_back({ node.feature, node.threshold, node.left, node.right,
                          node.value });
      }
      jt.push_back(std::move(nodes));
    }
    ensembles.push_back(std::move(jt));
  }
  j["trees"] = std::move(ensembles);
  return j;
}

GbdtModel GbdtModel::from_json(const nlohmann::json &j) {
  GbdtModel m;
  m.config = GbdtConfig::from_json(j.at("config"));
  m.width = j.at("width").get<int>();
  m.base = j.at("base").get<std::array<double, 3>>();
  m.train_mse = j.value("train_mse", std::vector<double>{});
  const auto &ensembles = j.at("trees");
  if (ensembles.size() != 3) {
    throw Error("GBDT model must hold three ensembles");
  }
  for (int t = 0; t < 3; ++t) {
    for (const auto &jt: ensembles[t]) {
      RegressionTree tree;
      for (const auto &node: jt) {
        tree.nodes.push_back({ node.at(0).get<int>(), node.at(1).get<double>(),
                               node.at(2).get<int>(), node.at(3).get<int>(),
                               node.at(4).get<double>() });
      }
      m.trees[t].push_back(std::move(tree));
    }
  }
  return m;
}

}  // namespace solvflow::models
