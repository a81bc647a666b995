//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_MODELS_GNN_H_
#define SOLVFLOW_MODELS_GNN_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "solvflow/autodiff.h"
#include "solvflow/featurize.h"
#include "solvflow/models/nn.h"

namespace solvflow::models {

class EmptyGraphInBatch: public Error {
public:
  using Error::Error;
};

struct GnnConfig {
  int hidden = 256;
  int gat_layers = 4;
  int heads = 8;
  double dropout = 0.15;
  double negative_slope = 0.2;
  int mixture_hidden = 256;
  int fusion_hidden1 = 512;
  int fusion_hidden2 = 128;
  int drfp_width = 2048;

  bool use_drfp = true;
  bool use_reactant_product_graphs = true;
  bool use_mixture_encoder = true;
  bool use_attention = true;

  // Throws ConfigMismatch on inconsistent sizes.
  void validate() const;

  nlohmann::json to_json() const;
  static GnnConfig from_json(const nlohmann::json &j);
};

// Width of the fused vector fed to the output head:
// [e_SM, e_P2, e_P3, e_A, e_B, e_mix, drfp, T', tau', pct'] minus the blocks
// switched off by the ablation flags.
int fusion_width(const GnnConfig &config);

// Directed edges plus one self loop per node (zero edge features), as
// consumed by the attention layers.
struct GatTopology {
  std::vector<int> source;
  std::vector<int> target;
  featurize::RowMatrix edge_features;
  int num_nodes = 0;
};

GatTopology make_topology(const featurize::GraphBatch &batch);

// [mean; max] over the nodes of each graph -> (num_graphs x 2*width).
// Throws EmptyGraphInBatch if a graph owns no node.
template <class T>
ad::Tensor<T> global_pool(const ad::Tensor<T> &node_states,
                          std::span<const int> membership, int num_graphs);

// Featurised molecules keyed by SMILES; each molecule is parsed and
// featurised once and then shared by every batch and fold.
class GraphCache {
public:
  const featurize::FeaturizedGraph &get(const std::string &smiles);

private:
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<featurize::FeaturizedGraph>> graphs_;
};

// One mini-batch. Graph pointers are the distinct molecules it touches;
// per-row vectors index into them.
struct GnnInputs {
  std::vector<const featurize::FeaturizedGraph *> reactant_graphs;
  std::vector<const featurize::FeaturizedGraph *> solvent_graphs;
  std::vector<int> sm;
  std::vector<int> p2;
  std::vector<int> p3;
  std::vector<int> solvent_a;
  std::vector<int> solvent_b;
  featurize::RowMatrix drfp;        // rows x drfp_width, or empty
  featurize::RowMatrix conditions;  // rows x 3: T', tau', pct'

  int rows() const { return static_cast<int>(solvent_a.size()); }
};

template <class T>
class GnnModel {
public:
  GnnModel(const GnnConfig &config, std::uint64_t seed);

  const GnnConfig &config() const { return config_; }
  ad::ParameterStore<T> &parameters() { return store_; }
  const ad::ParameterStore<T> &parameters() const { return store_; }

  // rows x 3 sigmoid outputs. Throws ConfigMismatch when the inputs do not
  // match the ablation flags.
  ad::Tensor<T> forward(const GnnInputs &inputs, const DropoutContext &ctx) const;

  // Residual attention layer. `attention`, when given, receives the
  // (edges x heads) coefficients, self loops last.
  ad::Tensor<T> gat_layer(int layer, const ad::Tensor<T> &h,
                          const GatTopology &topology, const DropoutContext &ctx,
                          std::uint64_t dropout_site,
                          ad::Tensor<T> *attention = nullptr) const;

  // Projection, attention stack and pooling for a set of molecules.
  ad::Tensor<T> encode(std::span<const featurize::FeaturizedGraph *const> graphs,
                       bool solvent, const DropoutContext &ctx) const;

  // Two-layer mixture network over [e_A; e_B; pct'; T'; tau'].
  // `conditions` holds T', tau', pct' columns.
  ad::Tensor<T> mixture_encode(const ad::Tensor<T> &e_a, const ad::Tensor<T> &e_b,
                               const ad::Tensor<T> &conditions) const;

private:
  struct GatWeights {
    ad::Parameter<T> *weight = nullptr;
    ad::Parameter<T> *bias = nullptr;
    ad::Parameter<T> *att_src = nullptr;
    ad::Parameter<T> *att_dst = nullptr;
    ad::Parameter<T> *edge = nullptr;
  };

  GnnConfig config_;
  ad::ParameterStore<T> store_;
  Linear<T> reactant_proj_;
  Linear<T> solvent_proj_;
  std::vector<GatWeights> gat_;
  Linear<T> mix1_;
  Linear<T> mix2_;
  Linear<T> head1_;
  Linear<T> head2_;
  Linear<T> head3_;
};

}  // namespace solvflow::models

#endif  // SOLVFLOW_MODELS_GNN_H_
