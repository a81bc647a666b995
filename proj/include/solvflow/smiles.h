//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_SMILES_H_
#define SOLVFLOW_SMILES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "solvflow/error.h"

namespace solvflow::smiles {

enum class BondOrder : std::uint8_t {
  kSingle,
  kDouble,
  kTriple,
  kAromatic,
};

enum class Hybridization : std::uint8_t {
  kSP,
  kSP2,
  kSP3,
  kOther,
};

struct Atom {
  int element = 0;
  int formal_charge = 0;
  // Bracket atoms carry an explicit hydrogen count; organic-subset atoms get
  // theirs from the valence table instead (implicit_h).
  std::optional<int> explicit_h;
  bool aromatic = false;
  bool in_ring = false;
  int degree = 0;
  int implicit_h = 0;
  Hybridization hybridization = Hybridization::kOther;

  int total_h() const { return explicit_h.value_or(0) + implicit_h; }
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::kSingle;
  bool conjugated = false;
  bool in_ring = false;

  int other(int atom) const { return atom == begin ? end : begin; }
};

// Undirected simple graph of heavy atoms. The constructor rebuilds the
// adjacency lists and degrees from the bond list and rejects self loops,
// duplicate bonds and dangling endpoints, so every instance is consistent.
class MolecularGraph {
public:
  MolecularGraph() = default;
  MolecularGraph(std::vector<Atom> atoms, std::vector<Bond> bonds,
                 std::string source = {});

  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  const Atom &atom(int i) const { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }

  // Incident bond indices of atom i, in bond-creation order.
  const std::vector<int> &incident(int i) const { return adjacency_[i]; }
  const std::vector<std::vector<int>> &adjacency() const { return adjacency_; }

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const std::string &source() const { return source_; }

  // Index of the bond joining a and b, or -1.
  int find_bond(int a, int b) const;

  // Number of independent cycles (|E| - |V| + components).
  int cycle_rank() const;

  // Annotation passes rewrite per-atom / per-bond flags in place. Topology is
  // never touched, so the invariants checked at construction still hold.
  std::vector<Atom> &mutable_atoms() { return atoms_; }
  std::vector<Bond> &mutable_bonds() { return bonds_; }

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adjacency_;
  std::string source_;
};

enum class ParseErrorKind {
  kUnbalancedParenthesis,
  kUnclosedRingBond,
  kUnknownElement,
  kValenceOverflow,
  kInvalidAromatic,
  kSyntax,
};

std::string_view to_string(ParseErrorKind kind);

class ParseError: public Error {
public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string &what);

  ParseErrorKind kind() const { return kind_; }
  // Character offset into the input where the problem was detected.
  std::size_t offset() const { return offset_; }

private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

struct ParseOptions {
  // Stereo markers (/ \ @) are dropped. When set, one message per marker is
  // appended here.
  std::vector<std::string> *warnings = nullptr;
};

// Parses a SMILES string into a fully annotated graph: bond orders, implicit
// hydrogens, ring flags, conjugation and hybridization. Dots separate
// disconnected components, which stay in one graph.
MolecularGraph parse_smiles(std::string_view text,
                            const ParseOptions &options = {});

// Sets in_ring on every atom and bond lying on a cycle (union of a
// fundamental cycle basis). Safe to call repeatedly.
MolecularGraph perceive_rings(MolecularGraph graph);

// sp for a triple bond or two double bonds, sp2 for one double bond or
// aromatic membership, sp3 for saturated atoms with neighbours or hydrogens,
// other for bare isolated atoms.
MolecularGraph assign_hybridization(MolecularGraph graph);

// Marks aromatic bonds, and multiple bonds or single bonds bridging two
// unsaturated centres, as conjugated.
MolecularGraph assign_conjugation(MolecularGraph graph);

std::string_view element_symbol(int atomic_number);

// Atomic number for a case-sensitive symbol such as "Cl", or 0.
int atomic_number(std::string_view symbol);

}  // namespace solvflow::smiles

#endif  // SOLVFLOW_SMILES_H_
