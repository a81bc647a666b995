//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/models/gnn.h"

#include <cmath>

#include "solvflow/smiles.h"

namespace solvflow::models {
namespace {

// dropout site ids
constexpr std::uint64_t kHeadDropout1 = 1;
constexpr std::uint64_t kHeadDropout2 = 2;
constexpr std::uint64_t kReactantGat = 100;
constexpr std::uint64_t kSolventGat = 200;

template <class T>
ad::Tensor<T> constant(const featurize::RowMatrix &m) {
  return ad::Tensor<T>(ad::Mat<T>(m.template cast<T>()));
}

}  // namespace

void GnnConfig::validate() const {
  if (hidden <= 0 || heads <= 0 || hidden % heads != 0) {
    throw ConfigMismatch("hidden width " + std::to_string(hidden)
                         + " must be a positive multiple of heads ("
                         + std::to_string(heads) + ")");
  }
  if (gat_layers < 0 || mixture_hidden <= 0 || fusion_hidden1 <= 0
      || fusion_hidden2 <= 0 || drfp_width <= 0) {
    throw ConfigMismatch("layer sizes must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigMismatch("dropout must lie in [0, 1)");
  }
}

nlohmann::json GnnConfig::to_json() const {
  return {
    { "hidden", hidden },
    { "gat_layers", gat_layers },
    { "heads", heads },
    { "dropout", dropout },
    { "negative_slope", negative_slope },
    { "mixture_hidden", mixture_hidden },
    { "fusion_hidden1", fusion_hidden1 },
    { "fusion_hidden2", fusion_hidden2 },
    { "drfp_width", drfp_width },
    { "use_drfp", use_drfp },
    { "use_reactant_product_graphs", use_reactant_product_graphs },
    { "use_mixture_encoder", use_mixture_encoder },
    { "use_attention", use_attention },
  };
}

GnnConfig GnnConfig::from_json(const nlohmann::json &j) {
  GnnConfig c;
  c.hidden = j.value("hidden", c.hidden);
  c.gat_layers = j.value("gat_layers", c.gat_layers);
  c.heads = j.value("heads", c.heads);
  c.dropout = j.value("dropout", c.dropout);
  c.negative_slope = j.value("negative_slope", c.negative_slope);
  c.mixture_hidden = j.value("mixture_hidden", c.mixture_hidden);
  c.fusion_hidden1 = j.value("fusion_hidden1", c.fusion_hidden1);
  c.fusion_hidden2 = j.value("fusion_hidden2", c.fusion_hidden2);
  c.drfp_width = j.value("drfp_width", c.drfp_width);
  c.use_drfp = j.value("use_drfp", c.use_drfp);
  c.use_reactant_product_graphs =
      j.value("use_reactant_product_graphs", c.use_reactant_product_graphs);
  c.use_mixture_encoder = j.value("use_mixture_encoder", c.use_mixture_encoder);
  c.use_attention = j.value("use_attention", c.use_attention);
  return c;
}

int fusion_width(const GnnConfig &config) {
  const int pooled = 2 * config.hidden;
  int width = 2 * pooled + 3;  // e_A, e_B, conditions
  if (config.use_reactant_product_graphs) {
    width += 3 * pooled;
  }
  if (config.use_mixture_encoder) {
    width += config.mixture_hidden;
  }
  if (config.use_drfp) {
    width += config.drfp_width;
  }
  return width;
}

GatTopology make_topology(const featurize::GraphBatch &batch) {
  GatTopology t;
  t.num_nodes = batch.num_nodes();
  const int e = batch.num_edges();
  t.source = batch.edge_source;
  t.target = batch.edge_target;
  t.source.reserve(e + t.num_nodes);
  t.target.reserve(e + t.num_nodes);
  for (int v = 0; v < t.num_nodes; ++v) {
    t.source.push_back(v);
    t.target.push_back(v);
  }
  t.edge_features = featurize::RowMatrix::Zero(e + t.num_nodes,
                                               featurize::kEdgeWidth);
  if (e > 0) {
    t.edge_features.topRows(e) = batch.edges;
  }
  return t;
}

template <class T>
ad::Tensor<T> global_pool(const ad::Tensor<T> &node_states,
                          std::span<const int> membership, int num_graphs) {
  std::vector<int> count(num_graphs, 0);
  for (const int g: membership) {
    if (g < 0 || g >= num_graphs) {
      throw ShapeMismatch("membership id " + std::to_string(g)
                          + " outside [0, " + std::to_string(num_graphs) + ")");
    }
    ++count[g];
  }
  for (int g = 0; g < num_graphs; ++g) {
    if (count[g] == 0) {
      throw EmptyGraphInBatch("graph " + std::to_string(g)
                              + " has no nodes in the batch");
    }
  }
  const ad::Tensor<T> parts[] = {
    ad::segment_mean(node_states, membership, num_graphs),
    ad::segment_max(node_states, membership, num_graphs),
  };
  return ad::concat_cols<T>(parts);
}

const featurize::FeaturizedGraph &GraphCache::get(const std::string &smiles) {
  std::lock_guard lock(mutex_);
  auto it = graphs_.find(smiles);
  if (it == graphs_.end()) {
    auto graph = std::make_unique<featurize::FeaturizedGraph>(
        featurize::featurize_graph(smiles::parse_smiles(smiles)));
    it = graphs_.emplace(smiles, std::move(graph)).first;
  }
  return *it->second;
}

template <class T>
GnnModel<T>::GnnModel(const GnnConfig &config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  const int d = config_.hidden;
  const int head_dim = d / config_.heads;

  if (config_.use_reactant_product_graphs) {
    reactant_proj_ = make_linear(store_, "reactant_proj", featurize::kNodeWidth,
                                 d, rng);
  }
  solvent_proj_ = make_linear(store_, "solvent_proj", featurize::kNodeWidth, d,
                              rng);

  const double w_bound = 1.0 / std::sqrt(static_cast<double>(d));
  const double a_bound = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const double e_bound = 1.0 / std::sqrt(static_cast<double>(featurize::kEdgeWidth));
  for (int l = 0; l < config_.gat_layers; ++l) {
    const std::string p = "gat" + std::to_string(l);
    GatWeights w;
    w.weight = &store_.uniform(p + ".weight", d, d, w_bound, rng);
    w.bias = &store_.uniform(p + ".bias", 1, d, w_bound, rng);
    if (config_.use_attention) {
      w.att_src = &store_.uniform(p + ".att_src", 1, d, a_bound, rng);
      w.att_dst = &store_.uniform(p + ".att_dst", 1, d, a_bound, rng);
      w.edge = &store_.uniform(p + ".edge", featurize::kEdgeWidth, config_.heads,
                               e_bound, rng);
    }
    gat_.push_back(w);
  }

  if (config_.use_mixture_encoder) {
    mix1_ = make_linear(store_, "mixture.0", 4 * d + 3, config_.mixture_hidden,
                        rng);
    mix2_ = make_linear(store_, "mixture.1", config_.mixture_hidden,
                        config_.mixture_hidden, rng);
  }
  head1_ = make_linear(store_, "head.0", fusion_width(config_),
                       config_.fusion_hidden1, rng);
  head2_ = make_linear(store_, "head.1", config_.fusion_hidden1,
                       config_.fusion_hidden2, rng);
  head3_ = make_linear(store_, "head.2", config_.fusion_hidden2, 3, rng);
}

template <class T>
ad::Tensor<T> GnnModel<T>::gat_layer(int layer, const ad::Tensor<T> &h,
                                     const GatTopology &topology,
                                     const DropoutContext &ctx,
                                     std::uint64_t dropout_site,
                                     ad::Tensor<T> *attention) const {
  const GatWeights &w = gat_.at(layer);
  const Eigen::Index d = config_.hidden;
  if (h.cols() != d || h.rows() != topology.num_nodes) {
    throw ShapeMismatch("gat_layer expects (" + std::to_string(topology.num_nodes)
                        + ", " + std::to_string(d) + ") node states, got ("
                        + std::to_string(h.rows()) + ", "
                        + std::to_string(h.cols()) + ")");
  }
  const int heads = config_.heads;
  const int head_dim = static_cast<int>(d) / heads;

  const ad::Tensor<T> z = ad::matmul(h, w.weight->tensor);
  const ad::Tensor<T> z_src = ad::gather_rows(z, topology.source);

  ad::Tensor<T> aggregated;
  if (config_.use_attention) {
    const auto s_src = ad::group_sum_cols(ad::mul(z, w.att_src->tensor), heads);
    const auto s_dst = ad::group_sum_cols(ad::mul(z, w.att_dst->tensor), heads);
    const auto e_feat = ad::matmul(constant<T>(topology.edge_features),
                                   w.edge->tensor);
    auto score = ad::add(ad::add(ad::gather_rows(s_src, topology.source),
                                 ad::gather_rows(s_dst, topology.target)),
                         e_feat);
    score = ad::leaky_relu(score, static_cast<T>(config_.negative_slope));
    const auto alpha = ad::segment_softmax(score, topology.target,
                                           topology.num_nodes);
    if (attention != nullptr) {
      *attention = alpha;
    }
    aggregated = ad::segment_sum(ad::mul(z_src, ad::repeat_cols(alpha, head_dim)),
                                 topology.target, topology.num_nodes);
  } else {
    // uniform weights over in-neighbours and self
    aggregated = ad::segment_mean(z_src, topology.target, topology.num_nodes);
  }

  auto update = ad::silu(ad::add(aggregated, w.bias->tensor));
  update = ad::dropout(update, config_.dropout, ctx.key(dropout_site + layer),
                       ctx.training);
  return ad::add(h, update);
}

template <class T>
ad::Tensor<T> GnnModel<T>::encode(
    std::span<const featurize::FeaturizedGraph *const> graphs, bool solvent,
    const DropoutContext &ctx) const {
  std::vector<featurize::FeaturizedGraph> copies;
  copies.reserve(graphs.size());
  for (const auto *g: graphs) {
    copies.push_back(*g);
  }
  const auto batch = featurize::batch_graphs(copies);
  const auto topology = make_topology(batch);

  const Linear<T> &proj = solvent ? solvent_proj_ : reactant_proj_;
  ad::Tensor<T> h = proj(constant<T>(batch.nodes));
  const std::uint64_t site = solvent ? kSolventGat : kReactantGat;
  for (int l = 0; l < config_.gat_layers; ++l) {
    h = gat_layer(l, h, topology, ctx, site);
  }
  return global_pool(h, batch.membership, batch.num_graphs());
}

template <class T>
ad::Tensor<T> GnnModel<T>::mixture_encode(const ad::Tensor<T> &e_a,
                                          const ad::Tensor<T> &e_b,
                                          const ad::Tensor<T> &conditions) const {
  if (!config_.use_mixture_encoder) {
    throw ConfigMismatch("mixture encoder is disabled in this configuration");
  }
  // [e_A; e_B; pct'; T'; tau']
  const ad::Tensor<T> parts[] = {
    e_a, e_b, ad::slice_cols(conditions, 2, 1), ad::slice_cols(conditions, 0, 2),
  };
  const auto x = ad::concat_cols<T>(parts);
  return mix2_(ad::silu(mix1_(x)));
}

template <class T>
ad::Tensor<T> GnnModel<T>::forward(const GnnInputs &in,
                                   const DropoutContext &ctx) const {
  const int n = in.rows();
  if (n == 0) {
    throw ShapeMismatch("empty batch");
  }
  if (static_cast<int>(in.solvent_b.size()) != n || in.conditions.rows() != n
      || in.conditions.cols() != 3) {
    throw ShapeMismatch("per-row inputs disagree on the batch size");
  }
  if (config_.use_drfp) {
    if (in.drfp.rows() != n || in.drfp.cols() != config_.drfp_width) {
      throw ConfigMismatch("configuration expects a (" + std::to_string(n) + ", "
                           + std::to_string(config_.drfp_width)
                           + ") fingerprint block");
    }
  } else if (in.drfp.size() > 0) {
    throw ConfigMismatch("fingerprints supplied but use_drfp is off");
  }
  if (config_.use_reactant_product_graphs) {
    if (in.reactant_graphs.empty() || static_cast<int>(in.sm.size()) != n
        || static_cast<int>(in.p2.size()) != n
        || static_cast<int>(in.p3.size()) != n) {
      throw ConfigMismatch("configuration expects reactant and product graphs");
    }
  } else if (!in.reactant_graphs.empty()) {
    throw ConfigMismatch(
        "reactant/product graphs supplied but use_reactant_product_graphs is off");
  }

  const auto solvent_emb = encode(in.solvent_graphs, true, ctx);
  const auto e_a = ad::gather_rows(solvent_emb, in.solvent_a);
  const auto e_b = ad::gather_rows(solvent_emb, in.solvent_b);
  const auto cond = constant<T>(in.conditions);

  std::vector<ad::Tensor<T>> parts;
  if (config_.use_reactant_product_graphs) {
    const auto reactant_emb = encode(in.reactant_graphs, false, ctx);
    parts.push_back(ad::gather_rows(reactant_emb, in.sm));
    parts.push_back(ad::gather_rows(reactant_emb, in.p2));
    parts.push_back(ad::gather_rows(reactant_emb, in.p3));
  }
  parts.push_back(e_a);
  parts.push_back(e_b);
  if (config_.use_mixture_encoder) {
    parts.push_back(mixture_encode(e_a, e_b, cond));
  }
  if (config_.use_drfp) {
    parts.push_back(constant<T>(in.drfp));
  }
  parts.push_back(cond);
  const auto fused = ad::concat_cols<T>(parts);

  auto x = ad::silu(head1_(fused));
  x = ad::dropout(x, config_.dropout, ctx.key(kHeadDropout1), ctx.training);
  x = ad::silu(head2_(x));
  x = ad::dropout(x, config_.dropout, ctx.key(kHeadDropout2), ctx.training);
  return ad::sigmoid(head3_(x));
}

template ad::Tensor<float> global_pool<float>(const ad::Tensor<float> &,
                                              std::span<const int>, int);
template ad::Tensor<double> global_pool<double>(const ad::Tensor<double> &,
                                                std::span<const int>, int);
template class GnnModel<float>;
template class GnnModel<double>;

}  // namespace solvflow::models
