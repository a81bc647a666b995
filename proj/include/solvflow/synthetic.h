//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_SYNTHETIC_H_
#define SOLVFLOW_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "solvflow/data.h"
#include "solvflow/descriptors.h"
#include "solvflow/record.h"

namespace solvflow::synthetic {

// The 24 solvents of the benchmark, from resources/solvents.csv order.
const std::vector<Solvent> &benchmark_roster();

// Counts read off a solvent's molecular graph: heavy atoms, heteroatom
// fraction, H-bond donors, H-bond acceptors, aromatic fraction, halogen
// fraction.
std::vector<double> structure_features(const std::string &smiles);

// Descriptor tables computed from structure_features. They stand in for
// measured solvent parameters when none are supplied.
descriptors::DescriptorTable structure_table(const std::vector<Solvent> &roster,
                                             std::string id);

struct SyntheticOptions {
  // Taken from the front of benchmark_roster().
  int solvents = 6;
  // Single solvents when false; otherwise neighbouring roster pairs scanned
  // at each entry of `pct_levels`.
  bool mixtures = false;
  std::vector<double> pct_levels { 0.0, 50.0, 100.0 };
  // (temperature, residence time) points per ramp
  int points_per_ramp = 10;
  double noise = 0.005;
  std::uint64_t seed = 7;
};

// Two parallel first-order pathways SM -> P2 and SM -> P3 whose rates depend
// on temperature and on the (non-linearly mixed) solvent features. Yields are
// fractions and sum to one up to noise.
data::Dataset make_dataset(const SyntheticOptions &options);

}  // namespace solvflow::synthetic

#endif  // SOLVFLOW_SYNTHETIC_H_
