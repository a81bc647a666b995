//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "solvflow/featurize.h"
#include "solvflow/smiles.h"

using namespace solvflow;
using namespace solvflow::featurize;

namespace {

FeaturizedGraph feat(const char *s) {
  return featurize_graph(smiles::parse_smiles(s));
}

void check_one_hot_blocks(const RowMatrix &nodes) {
  for (Eigen::Index r = 0; r < nodes.rows(); ++r) {
    CHECK(nodes.row(r).segment(kElementOffset, kElementSlots).sum() == 1.0);
    CHECK(nodes.row(r).segment(kDegreeOffset, kDegreeSlots).sum() == 1.0);
    CHECK(nodes.row(r).segment(kHybridOffset, kHybridSlots).sum() == 1.0);
    CHECK(nodes.row(r).segment(kHydrogenOffset, kHydrogenSlots).sum() == 1.0);
  }
}

const char *const kRoster[] = {
  "CO", "CCO", "CC(C)O", "CC(C)(C)O", "CCCCCCCCCCO", "OCCO", "OCC(F)(F)F",
  "OC(C(F)(F)F)C(F)(F)F", "CC#N", "CC#N.CC(=O)O", "O.CC#N", "O.OCC(F)(F)F",
  "C1CCOC1", "CC1CCCO1", "CCOCC", "COC(C)(C)C", "CCOC(C)=O", "CCC(=O)OC",
  "COC(=O)OC", "CCOC(=O)C(C)O", "CCC(C)=O", "CC(=O)N(C)C", "C1CCCCC1",
  "O=C1CCC2OCC1O2", "C=CCOc1ccccc1O", "C=CCc1cccc(O)c1O", "C=CCc1ccc(O)c(O)c1",
};

}  // namespace

TEST_CASE("widths") {
  CHECK(kNodeWidth == 31);
  CHECK(kEdgeWidth == 6);
  for (const char *s: kRoster) {
    CAPTURE(s);
    const auto g = feat(s);
    CHECK(g.nodes.cols() == kNodeWidth);
    CHECK(g.edges.cols() == kEdgeWidth);
    check_one_hot_blocks(g.nodes);
  }
}

TEST_CASE("ammonium charge") {
  const auto g = feat("[NH4+]");
  REQUIRE(g.nodes.rows() == 1);
  CHECK(g.nodes(0, kChargeOffset) == 1.0);
  CHECK(g.nodes(0, kElementOffset + element_slot(7)) == 1.0);
  CHECK(g.edges.rows() == 0);
}

TEST_CASE("methane positions") {
  const auto g = feat("C");
  CHECK(g.nodes(0, kDegreeOffset + 0) == 1.0);
  CHECK(g.nodes(0, kHydrogenOffset + 4) == 1.0);
  CHECK(g.nodes(0, kHybridOffset + 2) == 1.0);
}

TEST_CASE("benzene rows are identical") {
  const auto g = feat("c1ccccc1");
  REQUIRE(g.nodes.rows() == 6);
  REQUIRE(g.edges.rows() == 12);
  for (int r = 1; r < 6; ++r) {
    CHECK(g.nodes.row(r) == g.nodes.row(0));
  }
  for (int r = 0; r < 12; ++r) {
    CHECK(g.edges.row(r) == g.edges.row(0));
  }
  CHECK(g.edges(0, 3) == 1.0);
  CHECK(g.edges(0, kRingOffset) == 1.0);
  CHECK(g.nodes(0, kAromaticOffset) == 1.0);
}

TEST_CASE("directed edge rows come in equal pairs") {
  for (const char *s: kRoster) {
    const auto g = feat(s);
    for (int k = 0; 2 * k < g.num_edges(); ++k) {
      CHECK(g.edges.row(2 * k) == g.edges.row(2 * k + 1));
      CHECK(g.edge_index[2 * k][0] == g.edge_index[2 * k + 1][1]);
      CHECK(g.edge_index[2 * k][1] == g.edge_index[2 * k + 1][0]);
    }
  }
}

TEST_CASE("element vocabulary and caps") {
  CHECK(element_slot(6) == 2);
  CHECK(element_slot(11) == kElementSlots - 1);
  const auto g = feat("[Na+]");
  CHECK(g.nodes(0, kElementOffset + kElementSlots - 1) == 1.0);
  // sulfur hexafluoride: degree 6 lands in the last bin
  const auto sf6 = feat("FS(F)(F)(F)(F)F");
  CHECK(sf6.nodes(1, kDegreeOffset + 6) == 1.0);
}

TEST_CASE("empty molecule") {
  CHECK_THROWS_AS(featurize_graph(smiles::MolecularGraph()), EmptyMolecule);
}

TEST_CASE("batching offsets and round trip") {
  const std::vector<FeaturizedGraph> two_methane { feat("C"), feat("C") };
  const auto b = batch_graphs(two_methane);
  CHECK(b.num_nodes() == 2);
  CHECK(b.membership == std::vector<int> { 0, 1 });

  const std::vector<FeaturizedGraph> mixed { feat("CCO"), feat("c1ccccc1") };
  const auto batch = batch_graphs(mixed);
  CHECK(batch.num_nodes() == 9);
  CHECK(batch.num_graphs() == 2);
  CHECK(std::is_sorted(batch.membership.begin(), batch.membership.end()));
  for (int e = batch.edge_offsets[1]; e < batch.num_edges(); ++e) {
    CHECK(batch.edge_source[e] >= 3);
    CHECK(batch.edge_target[e] >= 3);
    CHECK(batch.edge_source[e] - 3 == mixed[1].edge_index[e - 4][0]);
  }

  const auto parts = unbatch(batch);
  REQUIRE(parts.size() == 2);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    CHECK(parts[i].nodes == mixed[i].nodes);
    CHECK(parts[i].edges == mixed[i].edges);
    CHECK(parts[i].edge_index == mixed[i].edge_index);
  }
  const auto again = batch_graphs(parts);
  CHECK(again.nodes == batch.nodes);
  CHECK(again.edges == batch.edges);
  CHECK(again.edge_source == batch.edge_source);
  CHECK(again.edge_target == batch.edge_target);

  CHECK_THROWS(batch_graphs(std::span<const FeaturizedGraph>()));
}

TEST_CASE("atom relabeling permutes rows and preserves edge tuples") {
  std::mt19937_64 rng(11);
  for (const char *s: kRoster) {
    CAPTURE(s);
    const auto g = smiles::parse_smiles(s);
    const int n = g.num_atoms();
    std::vector<int> perm(n);  // old index -> new index
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<smiles::Atom> atoms(n);
    for (int i = 0; i < n; ++i) {
      atoms[perm[i]] = g.atom(i);
    }
    std::vector<smiles::Bond> bonds = g.bonds();
    std::shuffle(bonds.begin(), bonds.end(), rng);
    for (auto &b: bonds) {
      b.begin = perm[b.begin];
      b.end = perm[b.end];
      if (rng() % 2) {
        std::swap(b.begin, b.end);
      }
    }
    smiles::MolecularGraph h(atoms, bonds);
    h = smiles::perceive_rings(std::move(h));
    h = smiles::assign_conjugation(std::move(h));
    h = smiles::assign_hybridization(std::move(h));

    const auto fa = featurize_graph(g);
    const auto fb = featurize_graph(h);
    for (int i = 0; i < n; ++i) {
      CHECK(fa.nodes.row(i) == fb.nodes.row(perm[i]));
    }

    auto tuples = [](const FeaturizedGraph &f) {
      std::vector<std::vector<double>> out;
      for (int e = 0; e < f.num_edges(); ++e) {
        std::vector<double> t(f.edges.row(e).begin(), f.edges.row(e).end());
        const auto src = f.nodes.row(f.edge_index[e][0]);
        const auto dst = f.nodes.row(f.edge_index[e][1]);
        t.insert(t.end(), src.begin(), src.end());
        t.insert(t.end(), dst.begin(), dst.end());
        out.push_back(std::move(t));
      }
      std::sort(out.begin(), out.end());
      return out;
    };
    CHECK(tuples(fa) == tuples(fb));
  }
}
