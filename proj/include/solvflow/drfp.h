//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_DRFP_H_
#define SOLVFLOW_DRFP_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "solvflow/smiles.h"

namespace solvflow::drfp {

inline constexpr int kDefaultWidth = 2048;
inline constexpr int kDefaultRadius = 3;

// Fixed-width binary vector. Width is a power of two.
class Fingerprint {
public:
  Fingerprint() = default;
  Fingerprint(int width, int radius);

  int width() const { return static_cast<int>(bits_.size()); }
  int radius() const { return radius_; }
  bool empty() const { return bits_.empty(); }

  bool test(int i) const { return bits_[i] != 0; }
  void set(int i) { bits_[i] = 1; }
  int popcount() const;

  // Nibble k holds bits 4k..4k+3, bit 4k being the most significant. The
  // string therefore has width/4 lower-case hex digits.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view hex, int radius = kDefaultRadius);

  const std::vector<std::uint8_t> &bits() const { return bits_; }

  friend bool operator==(const Fingerprint &, const Fingerprint &) = default;

private:
  std::vector<std::uint8_t> bits_;
  int radius_ = kDefaultRadius;
};

// Invariant string for one atom: element (lower case when aromatic), total
// hydrogens, charge, heavy degree and a ring marker.
std::string atom_label(const smiles::MolecularGraph &graph, int atom);

// Canonical key of the subgraph induced by all atoms within `radius` bonds
// of `center`. Atoms are ordered center first; each position contributes a
// row "d<distance><label>|" followed by one bond symbol per earlier
// position ('.' when unbonded). The key is the lexicographically smallest
// row sequence over all such orderings, rows joined by ';'.
std::string environment_key(const smiles::MolecularGraph &graph, int center,
                            int radius);

// One key per (atom, r) for r = 0..radius, sorted. Duplicates are kept;
// callers wanting the set deduplicate.
std::vector<std::string> circular_substructures(
    const smiles::MolecularGraph &graph, int radius);

// Bit position of a key: 64-bit FNV-1a modulo width.
int key_bit(std::string_view key, int width);

// Keys of every molecule on one reaction side, merged.
std::set<std::string> side_keys(std::span<const std::string> smiles_list,
                                int radius);

// Bits at key_bit(k) for every k in the symmetric difference of the two
// sides' key sets. Parse errors propagate as smiles::ParseError.
Fingerprint drfp_fingerprint(std::span<const std::string> reactants,
                             std::span<const std::string> products,
                             int radius = kDefaultRadius,
                             int width = kDefaultWidth);

// Splits "A.B>>C.D" into its two sides, each a list of dot-separated
// molecules.
std::pair<std::vector<std::string>, std::vector<std::string>>
split_reaction_smiles(std::string_view reaction);

// Per-molecule key sets shared across threads. Lookups after warm-up only
// take a shared read path.
class SubstructureCache {
public:
  explicit SubstructureCache(int radius = kDefaultRadius): radius_(radius) { }

  std::shared_ptr<const std::set<std::string>> get(const std::string &smiles);

  Fingerprint fingerprint(std::span<const std::string> reactants,
                          std::span<const std::string> products,
                          int width = kDefaultWidth);

private:
  int radius_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const std::set<std::string>>> cache_;
};

}  // namespace solvflow::drfp

#endif  // SOLVFLOW_DRFP_H_
