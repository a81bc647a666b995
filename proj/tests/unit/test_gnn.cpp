//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "gradcheck.h"
#include "solvflow/models/gnn.h"
#include "solvflow/smiles.h"

using namespace solvflow;
using namespace solvflow::models;
using solvflow::testing::MatD;
using solvflow::testing::TensorD;
using solvflow::testing::gradcheck;
using solvflow::testing::random_mat;

namespace {

constexpr double kTol = 1e-4;

featurize::FeaturizedGraph graph_of(const char *smiles) {
  return featurize::featurize_graph(smiles::parse_smiles(smiles));
}

GnnConfig small_config() {
  GnnConfig c;
  c.hidden = 8;
  c.heads = 2;
  c.gat_layers = 2;
  c.mixture_hidden = 6;
  c.fusion_hidden1 = 8;
  c.fusion_hidden2 = 4;
  c.drfp_width = 5;
  return c;
}

// Relabels nodes with perm[old] = new and shuffles the directed edge rows.
featurize::FeaturizedGraph permute(const featurize::FeaturizedGraph &g,
                                   const std::vector<int> &perm,
                                   std::mt19937_64 &rng) {
  featurize::FeaturizedGraph out;
  out.nodes.resize(g.nodes.rows(), g.nodes.cols());
  for (int i = 0; i < g.num_nodes(); ++i) {
    out.nodes.row(perm[i]) = g.nodes.row(i);
  }
  std::vector<int> order(g.num_edges());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  out.edges.resize(g.edges.rows(), g.edges.cols());
  for (int k = 0; k < g.num_edges(); ++k) {
    const int e = order[k];
    out.edges.row(k) = g.edges.row(e);
    out.edge_index.push_back({ perm[g.edge_index[e][0]], perm[g.edge_index[e][1]] });
  }
  return out;
}

GatTopology topology_of(const featurize::FeaturizedGraph &g) {
  const featurize::FeaturizedGraph one[] = { g };
  return make_topology(featurize::batch_graphs(one));
}

// Two rows: a pure solvent and a 30/70 mixture.
struct Batch {
  std::vector<featurize::FeaturizedGraph> graphs;
  GnnInputs inputs;
};

Batch make_batch(const GnnConfig &config, std::mt19937_64 &rng) {
  Batch b;
  b.graphs = { graph_of("CCO"), graph_of("O"), graph_of("c1ccccc1C"),
               graph_of("CC(=O)C"), graph_of("C1CCOC1") };
  auto &in = b.inputs;
  if (config.use_reactant_product_graphs) {
    in.reactant_graphs = { &b.graphs[2], &b.graphs[3], &b.graphs[4] };
    in.sm = { 0, 0 };
    in.p2 = { 1, 1 };
    in.p3 = { 2, 2 };
  }
  in.solvent_graphs = { &b.graphs[0], &b.graphs[1] };
  in.solvent_a = { 0, 0 };
  in.solvent_b = { 0, 1 };
  if (config.use_drfp) {
    in.drfp = featurize::RowMatrix::Zero(2, config.drfp_width);
    for (Eigen::Index i = 0; i < in.drfp.size(); ++i) {
      in.drfp.data()[i] = static_cast<double>(rng() % 2);
    }
  }
  in.conditions.resize(2, 3);
  in.conditions << 0.5, 0.2, 0.0, 0.9, 0.7, 0.7;
  return b;
}

}  // namespace

TEST_CASE("config validation and json round trip") {
  GnnConfig c;
  CHECK_NOTHROW(c.validate());
  c.hidden = 250;
  CHECK_THROWS_AS(c.validate(), ConfigMismatch);
  c = GnnConfig {};
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigMismatch);
  CHECK_THROWS_AS(GnnModel<float>(c, 0), ConfigMismatch);

  GnnConfig d = small_config();
  d.use_attention = false;
  const auto back = GnnConfig::from_json(d.to_json());
  CHECK(back.to_json() == d.to_json());
}

TEST_CASE("fusion widths follow the ablation switches") {
  GnnConfig c;
  CHECK(fusion_width(c) == 4867);
  auto off = c;
  off.use_drfp = false;
  CHECK(fusion_width(off) == 4867 - 2048);
  off = c;
  off.use_reactant_product_graphs = false;
  CHECK(fusion_width(off) == 4867 - 3 * 512);
  off = c;
  off.use_mixture_encoder = false;
  CHECK(fusion_width(off) == 4867 - 256);
  off = c;
  off.use_attention = false;
  CHECK(fusion_width(off) == 4867);

  GnnModel<float> full(small_config(), 1);
  auto nc = small_config();
  nc.use_attention = false;
  GnnModel<float> plain(nc, 1);
  CHECK(full.parameters().find("gat0.att_src") != nullptr);
  CHECK(plain.parameters().find("gat0.att_src") == nullptr);
  CHECK(plain.parameters().num_scalars() < full.parameters().num_scalars());
}

TEST_CASE("topology appends self loops with zero edge features") {
  const auto g = graph_of("CCO");
  const auto t = topology_of(g);
  const int e = g.num_edges();
  REQUIRE(t.source.size() == static_cast<std::size_t>(e + 3));
  for (int v = 0; v < 3; ++v) {
    CHECK(t.source[e + v] == v);
    CHECK(t.target[e + v] == v);
    CHECK(t.edge_features.row(e + v).isZero());
  }
  CHECK(t.edge_features.topRows(e) == g.edges);
}

TEST_CASE("global pool") {
  MatD h(3, 2);
  h << 0, 5, 2, 1, 7, -1;
  const std::vector<int> membership { 0, 0, 1 };
  const auto p = global_pool(TensorD(h), membership, 2);
  MatD expected(2, 4);
  expected << 1, 3, 2, 5, 7, -1, 7, -1;
  CHECK(p.value() == expected);

  const std::vector<int> gap { 0, 0, 2 };
  CHECK_THROWS_AS(global_pool(TensorD(h), gap, 3), EmptyGraphInBatch);
}

TEST_CASE("single node attends to itself with weight one") {
  GnnModel<double> model(small_config(), 3);
  const auto g = graph_of("C");
  const auto t = topology_of(g);
  REQUIRE(t.source.size() == 1);
  std::mt19937_64 rng(4);
  TensorD alpha;
  const TensorD h(random_mat(rng, 1, 8));
  model.gat_layer(0, h, t, {}, 0, &alpha);
  CHECK(alpha.rows() == 1);
  for (int k = 0; k < alpha.cols(); ++k) {
    CHECK(alpha.value()(0, k) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("attention weights sum to one per target node") {
  GnnModel<double> model(small_config(), 3);
  const auto g = graph_of("CC(C)(C)O");
  const auto t = topology_of(g);
  std::mt19937_64 rng(5);
  TensorD alpha;
  model.gat_layer(1, TensorD(random_mat(rng, g.num_nodes(), 8)), t, {}, 0, &alpha);
  MatD sums = MatD::Zero(g.num_nodes(), alpha.cols());
  for (std::size_t e = 0; e < t.target.size(); ++e) {
    sums.row(t.target[e]) += alpha.value().row(static_cast<Eigen::Index>(e));
  }
  for (Eigen::Index i = 0; i < sums.size(); ++i) {
    CHECK(sums.data()[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("zeroed attention weights make every layer the identity") {
  for (const bool attention: { true, false }) {
    CAPTURE(attention);
    auto c = small_config();
    c.gat_layers = 4;
    c.use_attention = attention;
    GnnModel<double> model(c, 9);
    for (auto *p: model.parameters().all()) {
      if (p->name.rfind("gat", 0) == 0) {
        p->tensor.mutable_value().setZero();
      }
    }
    const auto g = graph_of("c1ccncc1");
    const auto t = topology_of(g);
    std::mt19937_64 rng(6);
    const TensorD h0(random_mat(rng, g.num_nodes(), 8));
    TensorD h = h0;
    for (int l = 0; l < 4; ++l) {
      h = model.gat_layer(l, h, t, {}, 0);
    }
    CHECK(h.value() == h0.value());
  }
}

TEST_CASE("mean aggregation without attention") {
  auto c = small_config();
  c.use_attention = false;
  c.gat_layers = 1;
  GnnModel<double> model(c, 2);
  const auto g = graph_of("CCO");
  const auto t = topology_of(g);
  std::mt19937_64 rng(8);
  const MatD h = random_mat(rng, 3, 8);
  const MatD w = model.parameters().at("gat0.weight").tensor.value();
  const MatD b = model.parameters().at("gat0.bias").tensor.value();
  const MatD z = h * w;
  // CCO: neighbours of 0 {1}, of 1 {0, 2}, of 2 {1}; plus self
  MatD agg(3, 8);
  agg.row(0) = (z.row(0) + z.row(1)) / 2.0;
  agg.row(1) = (z.row(0) + z.row(1) + z.row(2)) / 3.0;
  agg.row(2) = (z.row(1) + z.row(2)) / 2.0;
  MatD expected = h;
  for (Eigen::Index i = 0; i < agg.size(); ++i) {
    const Eigen::Index r = i / 8;
    const Eigen::Index k = i % 8;
    const double x = agg(r, k) + b(0, k);
    expected(r, k) += x / (1.0 + std::exp(-x));
  }
  const auto out = model.gat_layer(0, TensorD(h), t, {}, 0);
  CHECK((out.value() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("node relabeling permutes states and leaves pooling unchanged") {
  std::mt19937_64 rng(21);
  for (const bool attention: { true, false }) {
    CAPTURE(attention);
    auto c = small_config();
    c.use_attention = attention;
    GnnModel<double> model(c, 17);
    for (const char *s: { "CC(=O)OCC", "c1ccc2ccccc2c1", "ClC(Cl)Cl", "CS(C)=O" }) {
      CAPTURE(s);
      const auto g = graph_of(s);
      const int n = g.num_nodes();
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto gp = permute(g, perm, rng);

      const MatD h = random_mat(rng, n, 8);
      MatD hp(n, 8);
      for (int i = 0; i < n; ++i) {
        hp.row(perm[i]) = h.row(i);
      }
      const auto out = model.gat_layer(0, TensorD(h), topology_of(g), {}, 0);
      const auto outp = model.gat_layer(0, TensorD(hp), topology_of(gp), {}, 0);
      double worst = 0.0;
      for (int i = 0; i < n; ++i) {
        worst = std::max(worst, (out.value().row(i) - outp.value().row(perm[i]))
                                    .cwiseAbs().maxCoeff());
      }
      CHECK(worst < 1e-6);

      const featurize::FeaturizedGraph *a[] = { &g };
      const featurize::FeaturizedGraph *b[] = { &gp };
      const auto ea = model.encode(a, true, {});
      const auto eb = model.encode(b, true, {});
      CHECK((ea.value() - eb.value()).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("forward output shape, range and determinism") {
  std::mt19937_64 rng(1);
  const auto c = small_config();
  auto batch = make_batch(c, rng);
  GnnModel<float> a(c, 5);
  GnnModel<float> b(c, 5);
  DropoutContext train { true, 11, 3 };
  const auto ya = a.forward(batch.inputs, train);
  const auto yb = b.forward(batch.inputs, train);
  REQUIRE(ya.rows() == 2);
  REQUIRE(ya.cols() == 3);
  CHECK(ya.value() == yb.value());
  CHECK(ya.value().minCoeff() > 0.0f);
  CHECK(ya.value().maxCoeff() < 1.0f);

  const auto e1 = a.forward(batch.inputs, {});
  const auto e2 = a.forward(batch.inputs, {});
  CHECK(e1.value() == e2.value());
}

TEST_CASE("inputs that disagree with the switches are rejected") {
  std::mt19937_64 rng(2);
  auto c = small_config();
  auto batch = make_batch(c, rng);

  auto no_drfp = c;
  no_drfp.use_drfp = false;
  CHECK_THROWS_AS(GnnModel<float>(no_drfp, 1).forward(batch.inputs, {}),
                  ConfigMismatch);

  auto missing = batch.inputs;
  missing.drfp.resize(0, 0);
  CHECK_THROWS_AS(GnnModel<float>(c, 1).forward(missing, {}), ConfigMismatch);

  auto no_graphs = c;
  no_graphs.use_reactant_product_graphs = false;
  CHECK_THROWS_AS(GnnModel<float>(no_graphs, 1).forward(batch.inputs, {}),
                  ConfigMismatch);
  missing = batch.inputs;
  missing.reactant_graphs.clear();
  CHECK_THROWS_AS(GnnModel<float>(c, 1).forward(missing, {}), ConfigMismatch);

  auto no_mix = c;
  no_mix.use_mixture_encoder = false;
  GnnModel<float> m(no_mix, 1);
  CHECK_NOTHROW(m.forward(batch.inputs, {}));
  const ad::Tensor<float> e(ad::Mat<float>::Zero(2, 16));
  const ad::Tensor<float> cond(ad::Mat<float>::Zero(2, 3));
  CHECK_THROWS_AS(m.mixture_encode(e, e, cond), ConfigMismatch);
}

TEST_CASE("mixture encoding is differentiable in the composition") {
  const auto c = small_config();
  GnnModel<double> model(c, 4);
  std::mt19937_64 rng(12);
  const TensorD ea(random_mat(rng, 3, 16));
  const TensorD eb(random_mat(rng, 3, 16));
  MatD cond = random_mat(rng, 3, 3, 0.3);
  std::vector<TensorD> leaves { TensorD(cond, true) };
  const TensorD w(random_mat(rng, 3, c.mixture_hidden));
  const auto loss = [&] {
    return ad::sum(ad::mul(model.mixture_encode(ea, eb, leaves[0]), w));
  };
  CHECK(gradcheck(leaves, loss) < kTol);
  CHECK(leaves[0].grad().col(2).norm() > 0.0);
}

TEST_CASE("forward gradients match finite differences") {
  std::mt19937_64 rng(13);
  for (const bool attention: { true, false }) {
    CAPTURE(attention);
    auto c = small_config();
    c.use_attention = attention;
    auto batch = make_batch(c, rng);
    GnnModel<double> model(c, 6);
    std::vector<TensorD> leaves;
    for (auto *p: model.parameters().all()) {
      leaves.push_back(p->tensor);
    }
    const TensorD w(random_mat(rng, 2, 3));
    const DropoutContext ctx { true, 99, 1 };
    const auto loss = [&] {
      return ad::sum(ad::mul(model.forward(batch.inputs, ctx), w));
    };
    CHECK(gradcheck(leaves, loss) < kTol);
  }
}
