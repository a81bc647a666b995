//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_TESTS_FIXTURES_H_
#define SOLVFLOW_TESTS_FIXTURES_H_

#include <memory>

#include "solvflow/models/train.h"
#include "solvflow/synthetic.h"

namespace solvflow::testing {

// Synthetic dataset with structure descriptors, prepared for training.
struct SyntheticWorld {
  data::Dataset ds;
  descriptors::DescriptorTable table;
  descriptors::TableSet tables;
  models::GraphCache graphs;
  models::PreparedData prepared;
};

inline std::unique_ptr<SyntheticWorld> make_world(const synthetic::SyntheticOptions &o) {
  auto w = std::make_unique<SyntheticWorld>();
  w->ds = synthetic::make_dataset(o);
  w->table = synthetic::structure_table(w->ds.roster, "structure");
  w->tables.spange = &w->table;
  w->prepared = models::prepare_data(w->ds, w->tables, w->graphs);
  return w;
}

inline std::unique_ptr<SyntheticWorld> make_world(int solvents, int points,
                                                  bool mixtures = false,
                                                  std::uint64_t seed = 7) {
  synthetic::SyntheticOptions o;
  o.solvents = solvents;
  o.points_per_ramp = points;
  o.mixtures = mixtures;
  o.seed = seed;
  return make_world(o);
}

// Small, fast neural settings for tests.
inline models::ModelSettings tiny_settings(int epochs) {
  models::ModelSettings s;
  s.gnn.hidden = 16;
  s.gnn.heads = 2;
  s.gnn.gat_layers = 2;
  s.gnn.mixture_hidden = 8;
  s.gnn.fusion_hidden1 = 16;
  s.gnn.fusion_hidden2 = 8;
  s.deep.hidden = 32;
  s.deep.tokens = 4;
  s.deep.heads = 2;
  s.deep.swiglu_blocks = 1;
  s.deep.head_hidden = 16;
  s.mlp.hidden = 32;
  s.mlp.tokens = 4;
  s.mlp.heads = 2;
  s.mlp.head_hidden = 16;
  s.gbdt.iterations = 40;
  s.gbdt.learning_rate = 0.1;
  s.gbdt.max_depth = 4;
  s.gbdt.min_samples_leaf = 2;
  s.gbdt.max_leaves = 8;
  s.gnn_train.max_epochs = epochs;
  s.deep_train.max_epochs = epochs;
  return s;
}

}  // namespace solvflow::testing

#endif  // SOLVFLOW_TESTS_FIXTURES_H_
