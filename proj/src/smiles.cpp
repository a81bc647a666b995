//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/smiles.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <map>
#include <numeric>
#include <queue>
#include <string>
#include <utility>

namespace solvflow::smiles {
namespace {

constexpr std::array<std::string_view, 119> kSymbols = {
  "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
  "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
  "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
  "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
  "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
  "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
  "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
  "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
  "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};

// Allowed valences for implicit-hydrogen filling, ascending. Elements not
// listed here get no implicit hydrogens and no overflow check.
const std::vector<int> &allowed_valences(int z) {
  static const std::map<int, std::vector<int>> kTable = {
    { 5, { 3 } },          // B
    { 6, { 4 } },          // C
    { 7, { 3, 5 } },       // N
    { 8, { 2 } },          // O
    { 9, { 1 } },          // F
    { 15, { 3, 5 } },      // P
    { 16, { 2, 4, 6 } },   // S
    { 17, { 1 } },         // Cl
    { 35, { 1 } },         // Br
    { 53, { 1 } },         // I
  };
  static const std::vector<int> kNone;
  auto it = kTable.find(z);
  return it == kTable.end() ? kNone : it->second;
}

int bond_valence(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
  case BondOrder::kAromatic:
    return 1;
  case BondOrder::kDouble:
    return 2;
  case BondOrder::kTriple:
    return 3;
  }
  return 1;
}

bool is_aromatic_symbol_allowed(int z) {
  // b c n o p s, plus se / as inside brackets
  return z == 5 || z == 6 || z == 7 || z == 8 || z == 15 || z == 16
         || z == 33 || z == 34;
}

struct PendingBond {
  std::optional<BondOrder> order;
  std::size_t offset = 0;
};

struct RingOpening {
  int atom;
  std::optional<BondOrder> order;
  std::size_t offset;
};

class Parser {
public:
  Parser(std::string_view text, const ParseOptions &options)
      : text_(text), options_(options) { }

  MolecularGraph run();

private:
  [[noreturn]] void fail(ParseErrorKind kind, std::size_t offset,
                         const std::string &msg) const {
    throw ParseError(kind, offset, msg);
  }

  void warn(std::size_t offset, const std::string &msg) {
    if (options_.warnings != nullptr) {
      options_.warnings->push_back("offset " + std::to_string(offset) + ": "
                                   + msg);
    }
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void parse_organic_atom();
  void parse_bracket_atom();
  void parse_ring_closure();
  void add_atom(Atom atom, std::size_t offset, bool bracket);
  void add_bond(int a, int b, std::optional<BondOrder> order,
                std::size_t offset);

  void fill_implicit_hydrogens();

  std::string_view text_;
  const ParseOptions &options_;
  std::size_t pos_ = 0;

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::size_t> atom_offsets_;
  std::vector<bool> bracket_;

  int prev_ = -1;
  PendingBond pending_;
  bool has_pending_ = false;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::map<int, RingOpening> rings_;
};

MolecularGraph Parser::run() {
  if (text_.empty()) {
    fail(ParseErrorKind::kSyntax, 0, "empty SMILES");
  }

  while (!at_end()) {
    const char c = peek();
    const std::size_t here = pos_;
    if (static_cast<unsigned char>(c) > 0x7F) {
      fail(ParseErrorKind::kSyntax, here, "non-ASCII character");
    }

    switch (c) {
    case '(':
      if (prev_ < 0 || has_pending_) {
        fail(ParseErrorKind::kSyntax, here, "branch without a preceding atom");
      }
      branches_.emplace_back(prev_, here);
      ++pos_;
      continue;
    case ')':
      if (branches_.empty()) {
        fail(ParseErrorKind::kUnbalancedParenthesis, here,
             "')' without matching '('");
      }
      if (has_pending_) {
        fail(ParseErrorKind::kSyntax, here, "bond symbol before ')'");
      }
      prev_ = branches_.back().first;
      branches_.pop_back();
      ++pos_;
      continue;
    case '.':
      if (has_pending_) {
        fail(ParseErrorKind::kSyntax, here, "bond symbol before '.'");
      }
      if (!branches_.empty()) {
        fail(ParseErrorKind::kUnbalancedParenthesis, branches_.back().second,
             "'.' inside an open branch");
      }
      prev_ = -1;
      ++pos_;
      continue;
    case '-':
    case '=':
    case '#':
    case ':':
    case '/':
    case '\\': {
      if (has_pending_) {
        fail(ParseErrorKind::kSyntax, here, "two consecutive bond symbols");
      }
      has_pending_ = true;
      pending_.offset = here;
      if (c == '=') {
        pending_.order = BondOrder::kDouble;
      } else if (c == '#') {
        pending_.order = BondOrder::kTriple;
      } else if (c == ':') {
        pending_.order = BondOrder::kAromatic;
      } else {
        if (c != '-') {
          warn(here, std::string("directional bond '") + c
                         + "' ignored (no stereo support)");
        }
        pending_.order = BondOrder::kSingle;
      }
      ++pos_;
      continue;
    }
    case '$':
      fail(ParseErrorKind::kSyntax, here, "quadruple bonds are not supported");
    case '[':
      parse_bracket_atom();
      continue;
    case '%':
      parse_ring_closure();
      continue;
    default:
      break;
    }

    if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
      parse_ring_closure();
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '*') {
      parse_organic_atom();
      continue;
    }
    fail(ParseErrorKind::kSyntax, here,
         std::string("unexpected character '") + c + "'");
  }

  if (!branches_.empty()) {
    fail(ParseErrorKind::kUnbalancedParenthesis, branches_.back().second,
         "unclosed '('");
  }
  if (!rings_.empty()) {
    const auto &[digit, open] = *rings_.begin();
    fail(ParseErrorKind::kUnclosedRingBond, open.offset,
         "ring bond " + std::to_string(digit) + " never closed");
  }
  if (has_pending_) {
    fail(ParseErrorKind::kSyntax, pending_.offset, "dangling bond symbol");
  }

  fill_implicit_hydrogens();

  MolecularGraph graph(std::move(atoms_), std::move(bonds_),
                       std::string(text_));
  graph = perceive_rings(std::move(graph));

  // Aromatic atoms must sit on a ring. Aromatic-by-default bonds that link
  // two separate aromatic systems (biphenyl written without '-') are single.
  for (int i = 0; i < graph.num_atoms(); ++i) {
    if (graph.atom(i).aromatic && !graph.atom(i).in_ring) {
      fail(ParseErrorKind::kInvalidAromatic, atom_offsets_[i],
           "aromatic atom outside any ring");
    }
  }
  for (Bond &b: graph.mutable_bonds()) {
    if (b.order == BondOrder::kAromatic && !b.in_ring) {
      b.order = BondOrder::kSingle;
    }
  }

  graph = assign_conjugation(std::move(graph));
  return assign_hybridization(std::move(graph));
}

void Parser::parse_organic_atom() {
  const std::size_t here = pos_;
  const char c = peek();
  Atom atom;
  std::size_t len = 1;

  switch (c) {
  case 'B':
    if (peek(1) == 'r') {
      atom.element = 35;
      len = 2;
    } else {
      atom.element = 5;
    }
    break;
  case 'C':
    if (peek(1) == 'l') {
      atom.element = 17;
      len = 2;
    } else {
      atom.element = 6;
    }
    break;
  case 'N':
    atom.element = 7;
    break;
  case 'O':
    atom.element = 8;
    break;
  case 'P':
    atom.element = 15;
    break;
  case 'S':
    atom.element = 16;
    break;
  case 'F':
    atom.element = 9;
    break;
  case 'I':
    atom.element = 53;
    break;
  case 'b':
    atom.element = 5;
    atom.aromatic = true;
    break;
  case 'c':
    atom.element = 6;
    atom.aromatic = true;
    break;
  case 'n':
    atom.element = 7;
    atom.aromatic = true;
    break;
  case 'o':
    atom.element = 8;
    atom.aromatic = true;
    break;
  case 'p':
    atom.element = 15;
    atom.aromatic = true;
    break;
  case 's':
    atom.element = 16;
    atom.aromatic = true;
    break;
  default:
    fail(ParseErrorKind::kUnknownElement, here,
         std::string("'") + c + "' is not an organic-subset element");
  }

  pos_ += len;
  add_atom(atom, here, false);
}

void Parser::parse_bracket_atom() {
  const std::size_t open = pos_;
  ++pos_;  // '['

  while (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
    ++pos_;  // isotope, dropped
  }

  Atom atom;
  const std::size_t sym_at = pos_;
  if (std::islower(static_cast<unsigned char>(peek())) != 0) {
    // aromatic: two-letter forms first
    std::string two { peek(), peek(1) };
    if (two == "se" || two == "as") {
      two[0] = static_cast<char>(std::toupper(two[0]));
      atom.element = atomic_number(two);
      pos_ += 2;
    } else {
      std::string one(1, static_cast<char>(std::toupper(peek())));
      atom.element = atomic_number(one);
      if (atom.element == 0 || !is_aromatic_symbol_allowed(atom.element)) {
        fail(ParseErrorKind::kUnknownElement, sym_at,
             "unknown aromatic symbol '" + std::string(1, peek()) + "'");
      }
      ++pos_;
    }
    atom.aromatic = true;
  } else if (std::isupper(static_cast<unsigned char>(peek())) != 0) {
    const std::string two { peek(), peek(1) };
    const std::string one(1, peek());
    if (std::islower(static_cast<unsigned char>(peek(1))) != 0
        && atomic_number(two) > 0) {
      atom.element = atomic_number(two);
      pos_ += 2;
    } else if (atomic_number(one) > 0) {
      atom.element = atomic_number(one);
      ++pos_;
    } else {
      fail(ParseErrorKind::kUnknownElement, sym_at,
           "unknown element symbol at '" + std::string(1, peek()) + "'");
    }
  } else if (peek() == '*') {
    fail(ParseErrorKind::kUnknownElement, sym_at, "wildcard atom '*'");
  } else {
    fail(ParseErrorKind::kSyntax, sym_at, "bracket atom without element");
  }

  if (peek() == '@') {
    warn(pos_, "chirality marker ignored (no stereo support)");
    while (peek() == '@') {
      ++pos_;
    }
    // @TH1, @SP2 style classes
    while (std::isupper(static_cast<unsigned char>(peek())) != 0
           && peek() != 'H') {
      ++pos_;
    }
    while (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
      ++pos_;
    }
  }

  int hcount = 0;
  if (peek() == 'H') {
    ++pos_;
    hcount = 1;
    if (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
      hcount = peek() - '0';
      ++pos_;
    }
  }
  atom.explicit_h = hcount;

  if (peek() == '+' || peek() == '-') {
    const char sign = peek();
    const int unit = sign == '+' ? 1 : -1;
    ++pos_;
    if (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
      int mag = 0;
      while (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
        mag = mag * 10 + (peek() - '0');
        ++pos_;
      }
      atom.formal_charge = unit * mag;
    } else {
      atom.formal_charge = unit;
      while (peek() == sign) {
        atom.formal_charge += unit;
        ++pos_;
      }
    }
  }

  if (peek() == ':') {
    ++pos_;
    while (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
      ++pos_;
    }
  }

  if (peek() != ']') {
    fail(ParseErrorKind::kSyntax, at_end() ? open : pos_,
         "malformed bracket atom");
  }
  ++pos_;
  add_atom(atom, open, true);
}

void Parser::parse_ring_closure() {
  const std::size_t here = pos_;
  int digit = 0;
  if (peek() == '%') {
    if (std::isdigit(static_cast<unsigned char>(peek(1))) == 0
        || std::isdigit(static_cast<unsigned char>(peek(2))) == 0) {
      fail(ParseErrorKind::kSyntax, here, "'%' must be followed by two digits");
    }
    digit = (peek(1) - '0') * 10 + (peek(2) - '0');
    pos_ += 3;
  } else {
    digit = peek() - '0';
    ++pos_;
  }

  if (prev_ < 0) {
    fail(ParseErrorKind::kSyntax, here, "ring bond without a preceding atom");
  }

  std::optional<BondOrder> order;
  if (has_pending_) {
    order = pending_.order;
    has_pending_ = false;
  }

  auto it = rings_.find(digit);
  if (it == rings_.end()) {
    rings_.emplace(digit, RingOpening { prev_, order, here });
    return;
  }

  const RingOpening open = it->second;
  rings_.erase(it);
  if (open.order && order && *open.order != *order) {
    fail(ParseErrorKind::kSyntax, here, "conflicting ring-closure bond orders");
  }
  if (open.atom == prev_) {
    fail(ParseErrorKind::kSyntax, here, "ring bond closes on its own atom");
  }
  add_bond(open.atom, prev_, open.order ? open.order : order, here);
}

void Parser::add_atom(Atom atom, std::size_t offset, bool bracket) {
  const int idx = static_cast<int>(atoms_.size());
  atoms_.push_back(atom);
  atom_offsets_.push_back(offset);
  bracket_.push_back(bracket);
  if (prev_ >= 0) {
    add_bond(prev_, idx, has_pending_ ? pending_.order : std::nullopt,
             has_pending_ ? pending_.offset : offset);
  } else if (has_pending_) {
    fail(ParseErrorKind::kSyntax, pending_.offset,
         "bond symbol without a preceding atom");
  }
  has_pending_ = false;
  prev_ = idx;
}

void Parser::add_bond(int a, int b, std::optional<BondOrder> order,
                      std::size_t offset) {
  for (const Bond &existing: bonds_) {
    if ((existing.begin == a && existing.end == b)
        || (existing.begin == b && existing.end == a)) {
      fail(ParseErrorKind::kSyntax, offset, "duplicate bond between atoms");
    }
  }

  const bool both_aromatic = atoms_[a].aromatic && atoms_[b].aromatic;
  BondOrder resolved = both_aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
  if (order) {
    resolved = *order;
    // an explicit '-' between aromatic atoms stays single
  }
  if (resolved == BondOrder::kAromatic && !both_aromatic) {
    fail(ParseErrorKind::kInvalidAromatic, offset,
         "aromatic bond between non-aromatic atoms");
  }
  bonds_.push_back(Bond { a, b, resolved, false, false });
}

void Parser::fill_implicit_hydrogens() {
  std::vector<int> valence(atoms_.size(), 0);
  for (const Bond &b: bonds_) {
    const int v = bond_valence(b.order);
    valence[b.begin] += v;
    valence[b.end] += v;
  }

  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    Atom &atom = atoms_[i];
    const std::vector<int> &allowed = allowed_valences(atom.element);

    if (bracket_[i]) {
      atom.implicit_h = 0;
      if (!allowed.empty()) {
        const int total = valence[i] + atom.explicit_h.value_or(0);
        if (total > allowed.back() + std::abs(atom.formal_charge)) {
          fail(ParseErrorKind::kValenceOverflow, atom_offsets_[i],
               "bracket atom exceeds its maximum valence");
        }
      }
      continue;
    }

    if (valence[i] > allowed.back()) {
      fail(ParseErrorKind::kValenceOverflow, atom_offsets_[i],
           "explicit bonds exceed the maximum valence of "
               + std::string(element_symbol(atom.element)));
    }

    if (atom.aromatic) {
      // one valence unit is taken by the delocalised pi system when the
      // atom can afford it (c, pyridine n); lone-pair donors (o, s) get none
      atom.implicit_h = std::max(0, allowed.front() - valence[i] - 1);
      continue;
    }

    const auto target = std::lower_bound(allowed.begin(), allowed.end(),
                                         valence[i]);
    atom.implicit_h = *target - valence[i];
  }
}

}  // namespace

MolecularGraph::MolecularGraph(std::vector<Atom> atoms, std::vector<Bond> bonds,
                               std::string source)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)),
      adjacency_(atoms_.size()), source_(std::move(source)) {
  const int n = static_cast<int>(atoms_.size());
  for (int i = 0; i < static_cast<int>(bonds_.size()); ++i) {
    const Bond &b = bonds_[i];
    if (b.begin < 0 || b.begin >= n || b.end < 0 || b.end >= n) {
      throw Error("bond " + std::to_string(i) + " has an invalid endpoint");
    }
    if (b.begin == b.end) {
      throw Error("bond " + std::to_string(i) + " is a self loop");
    }
    for (const int other: adjacency_[b.begin]) {
      if (bonds_[other].other(b.begin) == b.end) {
        throw Error("duplicate bond between atoms " + std::to_string(b.begin)
                    + " and " + std::to_string(b.end));
      }
    }
    adjacency_[b.begin].push_back(i);
    adjacency_[b.end].push_back(i);
  }
  for (int i = 0; i < n; ++i) {
    atoms_[i].degree = static_cast<int>(adjacency_[i].size());
  }
}

int MolecularGraph::find_bond(int a, int b) const {
  for (const int bi: adjacency_[a]) {
    if (bonds_[bi].other(a) == b) {
      return bi;
    }
  }
  return -1;
}

int MolecularGraph::cycle_rank() const {
  std::vector<int> parent(atoms_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  int components = num_atoms();
  for (const Bond &b: bonds_) {
    const int ra = find(b.begin);
    const int rb = find(b.end);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return num_bonds() - num_atoms() + components;
}

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
  case ParseErrorKind::kUnbalancedParenthesis:
    return "UnbalancedParenthesis";
  case ParseErrorKind::kUnclosedRingBond:
    return "UnclosedRingBond";
  case ParseErrorKind::kUnknownElement:
    return "UnknownElement";
  case ParseErrorKind::kValenceOverflow:
    return "ValenceOverflow";
  case ParseErrorKind::kInvalidAromatic:
    return "InvalidAromatic";
  case ParseErrorKind::kSyntax:
    return "Syntax";
  }
  return "Unknown";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset,
                       const std::string &what)
    : Error(std::string(to_string(kind)) + " at offset "
            + std::to_string(offset) + ": " + what),
      kind_(kind), offset_(offset) { }

MolecularGraph parse_smiles(std::string_view text, const ParseOptions &options) {
  return Parser(text, options).run();
}

MolecularGraph perceive_rings(MolecularGraph graph) {
  const int n = graph.num_atoms();
  for (Atom &a: graph.mutable_atoms()) {
    a.in_ring = false;
  }
  for (Bond &b: graph.mutable_bonds()) {
    b.in_ring = false;
  }

  // BFS spanning forest; every non-tree bond closes one fundamental cycle,
  // which is the tree path between its endpoints plus the bond itself.
  std::vector<int> parent(n, -1);
  std::vector<int> parent_bond(n, -1);
  std::vector<int> depth(n, -1);
  std::vector<bool> tree_bond(graph.num_bonds(), false);
  for (int root = 0; root < n; ++root) {
    if (depth[root] >= 0) {
      continue;
    }
    depth[root] = 0;
    std::queue<int> queue;
    queue.push(root);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (const int bi: graph.incident(u)) {
        const int v = graph.bond(bi).other(u);
        if (depth[v] < 0) {
          depth[v] = depth[u] + 1;
          parent[v] = u;
          parent_bond[v] = bi;
          tree_bond[bi] = true;
          queue.push(v);
        }
      }
    }
  }

  auto &atoms = graph.mutable_atoms();
  auto &bonds = graph.mutable_bonds();
  for (int bi = 0; bi < graph.num_bonds(); ++bi) {
    if (tree_bond[bi]) {
      continue;
    }
    bonds[bi].in_ring = true;
    int u = bonds[bi].begin;
    int v = bonds[bi].end;
    atoms[u].in_ring = true;
    atoms[v].in_ring = true;
    while (u != v) {
      if (depth[u] < depth[v]) {
        std::swap(u, v);
      }
      bonds[parent_bond[u]].in_ring = true;
      u = parent[u];
      atoms[u].in_ring = true;
    }
  }
  return graph;
}

MolecularGraph assign_conjugation(MolecularGraph graph) {
  const int n = graph.num_atoms();
  // count of multiple/aromatic bonds per atom
  std::vector<int> unsaturation(n, 0);
  for (const Bond &b: graph.bonds()) {
    if (b.order != BondOrder::kSingle) {
      ++unsaturation[b.begin];
      ++unsaturation[b.end];
    }
  }
  for (Bond &b: graph.mutable_bonds()) {
    if (b.order == BondOrder::kAromatic) {
      b.conjugated = true;
    } else if (b.order == BondOrder::kSingle) {
      b.conjugated = unsaturation[b.begin] > 0 && unsaturation[b.end] > 0;
    } else {
      // this bond accounts for one unit at each end
      b.conjugated = unsaturation[b.begin] > 1 || unsaturation[b.end] > 1;
      if (!b.conjugated) {
        for (const int end: { b.begin, b.end }) {
          for (const int bi: graph.incident(end)) {
            const Bond &other = graph.bond(bi);
            if (other.order == BondOrder::kSingle
                && unsaturation[other.other(end)] > 0) {
              b.conjugated = true;
            }
          }
        }
      }
    }
  }
  return graph;
}

MolecularGraph assign_hybridization(MolecularGraph graph) {
  const int n = graph.num_atoms();
  std::vector<int> doubles(n, 0);
  std::vector<int> triples(n, 0);
  std::vector<int> aromatic(n, 0);
  for (const Bond &b: graph.bonds()) {
    for (const int end: { b.begin, b.end }) {
      switch (b.order) {
      case BondOrder::kDouble:
        ++doubles[end];
        break;
      case BondOrder::kTriple:
        ++triples[end];
        break;
      case BondOrder::kAromatic:
        ++aromatic[end];
        break;
      case BondOrder::kSingle:
        break;
      }
    }
  }

  auto &atoms = graph.mutable_atoms();
  for (int i = 0; i < n; ++i) {
    Atom &a = atoms[i];
    if (triples[i] > 0 || doubles[i] >= 2) {
      a.hybridization = Hybridization::kSP;
    } else if (doubles[i] == 1 || a.aromatic || aromatic[i] > 0) {
      a.hybridization = Hybridization::kSP2;
    } else if (a.element != 1 && (a.degree > 0 || a.total_h() > 0)) {
      a.hybridization = Hybridization::kSP3;
    } else {
      a.hybridization = Hybridization::kOther;
    }
  }
  return graph;
}

std::string_view element_symbol(int atomic_number) {
  if (atomic_number < 0 || atomic_number >= static_cast<int>(kSymbols.size())) {
    return "?";
  }
  return kSymbols[atomic_number];
}

int atomic_number(std::string_view symbol) {
  for (std::size_t z = 1; z < kSymbols.size(); ++z) {
    if (kSymbols[z] == symbol) {
      return static_cast<int>(z);
    }
  }
  return 0;
}

}  // namespace solvflow::smiles
