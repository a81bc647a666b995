//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_FEATURIZE_H_
#define SOLVFLOW_FEATURIZE_H_

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "solvflow/error.h"
#include "solvflow/smiles.h"

namespace solvflow::featurize {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Node layout, left to right:
//   element one-hot {H B C N O F Si P S Cl Br I other}   13
//   degree one-hot 0..6 (6 absorbs larger)               7
//   formal charge as a raw integer                       1
//   hybridization one-hot {sp sp2 sp3 other}             4
//   aromatic flag                                        1
//   total hydrogen one-hot 0..4 (4 absorbs larger)       5
inline constexpr int kElementSlots = 13;
inline constexpr int kDegreeSlots = 7;
inline constexpr int kHybridSlots = 4;
inline constexpr int kHydrogenSlots = 5;

inline constexpr int kElementOffset = 0;
inline constexpr int kDegreeOffset = kElementOffset + kElementSlots;
inline constexpr int kChargeOffset = kDegreeOffset + kDegreeSlots;
inline constexpr int kHybridOffset = kChargeOffset + 1;
inline constexpr int kAromaticOffset = kHybridOffset + kHybridSlots;
inline constexpr int kHydrogenOffset = kAromaticOffset + 1;
inline constexpr int kNodeWidth = kHydrogenOffset + kHydrogenSlots;

// Edge layout: bond-type one-hot {single double triple aromatic}, conjugated,
// in ring.
inline constexpr int kBondTypeSlots = 4;
inline constexpr int kConjugatedOffset = kBondTypeSlots;
inline constexpr int kRingOffset = kConjugatedOffset + 1;
inline constexpr int kEdgeWidth = kRingOffset + 1;

// Slot index in the element one-hot; the last slot is "other".
int element_slot(int atomic_number);

class EmptyMolecule: public Error {
public:
  using Error::Error;
};

struct FeaturizedGraph {
  RowMatrix nodes;                       // num_atoms x kNodeWidth
  RowMatrix edges;                       // 2*num_bonds x kEdgeWidth
  std::vector<std::array<int, 2>> edge_index;  // (source, target) per row

  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_edges() const { return static_cast<int>(edge_index.size()); }
};

// Each bond becomes rows 2k (begin -> end) and 2k+1 (end -> begin).
FeaturizedGraph featurize_graph(const smiles::MolecularGraph &graph);

struct GraphBatch {
  RowMatrix nodes;
  RowMatrix edges;
  std::vector<int> edge_source;
  std::vector<int> edge_target;
  // graph id per node, non-decreasing
  std::vector<int> membership;
  // node_offsets[g] .. node_offsets[g+1] are graph g's nodes
  std::vector<int> node_offsets;
  std::vector<int> edge_offsets;

  int num_graphs() const { return static_cast<int>(node_offsets.size()) - 1; }
  int num_nodes() const { return static_cast<int>(nodes.rows()); }
  int num_edges() const { return static_cast<int>(edge_source.size()); }
};

GraphBatch batch_graphs(std::span<const FeaturizedGraph> graphs);

// Inverse of batch_graphs.
std::vector<FeaturizedGraph> unbatch(const GraphBatch &batch);

}  // namespace solvflow::featurize

#endif  // SOLVFLOW_FEATURIZE_H_
