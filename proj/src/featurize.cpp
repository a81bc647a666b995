//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/featurize.h"

#include <algorithm>
#include <string>

namespace solvflow::featurize {

int element_slot(int atomic_number) {
  switch (atomic_number) {
  case 1:
    return 0;
  case 5:
    return 1;
  case 6:
    return 2;
  case 7:
    return 3;
  case 8:
    return 4;
  case 9:
    return 5;
  case 14:
    return 6;
  case 15:
    return 7;
  case 16:
    return 8;
  case 17:
    return 9;
  case 35:
    return 10;
  case 53:
    return 11;
  default:
    return kElementSlots - 1;
  }
}

namespace {

int hybrid_slot(smiles::Hybridization h) {
  switch (h) {
  case smiles::Hybridization::kSP:
    return 0;
  case smiles::Hybridization::kSP2:
    return 1;
  case smiles::Hybridization::kSP3:
    return 2;
  case smiles::Hybridization::kOther:
    return 3;
  }
  return 3;
}

int bond_slot(smiles::BondOrder order) {
  switch (order) {
  case smiles::BondOrder::kSingle:
    return 0;
  case smiles::BondOrder::kDouble:
    return 1;
  case smiles::BondOrder::kTriple:
    return 2;
  case smiles::BondOrder::kAromatic:
    return 3;
  }
  return 0;
}

}  // namespace

FeaturizedGraph featurize_graph(const smiles::MolecularGraph &graph) {
  if (graph.empty()) {
    throw EmptyMolecule("cannot featurize a molecule with zero atoms");
  }

  FeaturizedGraph out;
  out.nodes = RowMatrix::Zero(graph.num_atoms(), kNodeWidth);
  for (int i = 0; i < graph.num_atoms(); ++i) {
    const smiles::Atom &a = graph.atom(i);
    auto row = out.nodes.row(i);
    row(kElementOffset + element_slot(a.element)) = 1.0;
    row(kDegreeOffset + std::min(a.degree, kDegreeSlots - 1)) = 1.0;
    row(kChargeOffset) = static_cast<double>(a.formal_charge);
    row(kHybridOffset + hybrid_slot(a.hybridization)) = 1.0;
    row(kAromaticOffset) = a.aromatic ? 1.0 : 0.0;
    row(kHydrogenOffset + std::min(a.total_h(), kHydrogenSlots - 1)) = 1.0;
  }

  out.edges = RowMatrix::Zero(2 * graph.num_bonds(), kEdgeWidth);
  out.edge_index.reserve(2 * graph.num_bonds());
  for (int k = 0; k < graph.num_bonds(); ++k) {
    const smiles::Bond &b = graph.bond(k);
    for (int dir = 0; dir < 2; ++dir) {
      auto row = out.edges.row(2 * k + dir);
      row(bond_slot(b.order)) = 1.0;
      row(kConjugatedOffset) = b.conjugated ? 1.0 : 0.0;
      row(kRingOffset) = b.in_ring ? 1.0 : 0.0;
    }
    out.edge_index.push_back({ b.begin, b.end });
    out.edge_index.push_back({ b.end, b.begin });
  }
  return out;
}

GraphBatch batch_graphs(std::span<const FeaturizedGraph> graphs) {
  if (graphs.empty()) {
    throw Error("batch_graphs needs at least one graph");
  }
  int total_nodes = 0;
  int total_edges = 0;
  for (const FeaturizedGraph &g: graphs) {
    total_nodes += g.num_nodes();
    total_edges += g.num_edges();
  }

  GraphBatch batch;
  batch.nodes.resize(total_nodes, kNodeWidth);
  batch.edges.resize(total_edges, kEdgeWidth);
  batch.edge_source.reserve(total_edges);
  batch.edge_target.reserve(total_edges);
  batch.membership.reserve(total_nodes);
  batch.node_offsets.push_back(0);
  batch.edge_offsets.push_back(0);

  int node_base = 0;
  int edge_base = 0;
  for (int gi = 0; gi < static_cast<int>(graphs.size()); ++gi) {
    const FeaturizedGraph &g = graphs[gi];
    batch.nodes.middleRows(node_base, g.num_nodes()) = g.nodes;
    if (g.num_edges() > 0) {
      batch.edges.middleRows(edge_base, g.num_edges()) = g.edges;
    }
    for (const auto &[src, dst]: g.edge_index) {
      batch.edge_source.push_back(src + node_base);
      batch.edge_target.push_back(dst + node_base);
    }
    batch.membership.insert(batch.membership.end(), g.num_nodes(), gi);
    node_base += g.num_nodes();
    edge_base += g.num_edges();
    batch.node_offsets.push_back(node_base);
    batch.edge_offsets.push_back(edge_base);
  }
  return batch;
}

std::vector<FeaturizedGraph> unbatch(const GraphBatch &batch) {
  std::vector<FeaturizedGraph> out;
  out.reserve(batch.num_graphs());
  for (int gi = 0; gi < batch.num_graphs(); ++gi) {
    const int n0 = batch.node_offsets[gi];
    const int n1 = batch.node_offsets[gi + 1];
    const int e0 = batch.edge_offsets[gi];
    const int e1 = batch.edge_offsets[gi + 1];
    FeaturizedGraph g;
    g.nodes = batch.nodes.middleRows(n0, n1 - n0);
    g.edges = batch.edges.middleRows(e0, e1 - e0);
    for (int e = e0; e < e1; ++e) {
      g.edge_index.push_back(
          { batch.edge_source[e] - n0, batch.edge_target[e] - n0 });
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace solvflow::featurize
