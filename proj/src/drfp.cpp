//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/drfp.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <queue>

#include "solvflow/digest.h"
#include "solvflow/error.h"

namespace solvflow::drfp {
namespace {

char bond_symbol(smiles::BondOrder order) {
  switch (order) {
  case smiles::BondOrder::kSingle:
    return '-';
  case smiles::BondOrder::kDouble:
    return '=';
  case smiles::BondOrder::kTriple:
    return '#';
  case smiles::BondOrder::kAromatic:
    return ':';
  }
  return '-';
}

// Highly symmetric balls (CF3 groups, cyclohexane) branch on every tie. The
// bound only matters for pathological inputs; the first minimum found is
// kept once it is hit.
constexpr long kMaxLeaves = 200000;

class Canonicalizer {
public:
  Canonicalizer(const smiles::MolecularGraph &graph, int center, int radius)
      : graph_(graph) {
    std::vector<int> dist(graph.num_atoms(), -1);
    dist[center] = 0;
    std::queue<int> queue;
    queue.push(center);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      ball_.push_back(u);
      if (dist[u] == radius) {
        continue;
      }
      for (const int bi: graph.incident(u)) {
        const int v = graph.bond(bi).other(u);
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push(v);
        }
      }
    }
    prefix_.resize(graph.num_atoms());
    for (const int a: ball_) {
      prefix_[a] = "d" + std::to_string(dist[a]) + atom_label(graph, a) + "|";
    }
  }

  std::string run() {
    std::vector<int> order { ball_.front() };
    std::vector<std::string> rows { prefix_[ball_.front()] };
    std::vector<bool> used(graph_.num_atoms(), false);
    used[ball_.front()] = true;
    search(order, rows, used);

    std::string key;
    for (std::size_t i = 0; i < best_.size(); ++i) {
      if (i > 0) {
        key += ';';
      }
      key += best_[i];
    }
    return key;
  }

private:
  std::string row_for(int atom, const std::vector<int> &order) const {
    std::string row = prefix_[atom];
    for (const int prev: order) {
      const int bi = graph_.find_bond(atom, prev);
      row += bi < 0 ? '.' : bond_symbol(graph_.bond(bi).order);
    }
    return row;
  }

  // -1, 0, 1 comparing rows[0..k] with best_[0..k]
  int compare_prefix(const std::vector<std::string> &rows) const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const int c = rows[i].compare(best_[i]);
      if (c != 0) {
        return c < 0 ? -1 : 1;
      }
    }
    return 0;
  }

  void search(std::vector<int> &order, std::vector<std::string> &rows,
              std::vector<bool> &used) {
    if (leaves_ >= kMaxLeaves) {
      return;
    }
    if (order.size() == ball_.size()) {
      ++leaves_;
      if (best_.empty() || rows < best_) {
        best_ = rows;
      }
      return;
    }

    std::string min_row;
    std::vector<int> candidates;
    for (const int a: ball_) {
      if (used[a]) {
        continue;
      }
      std::string row = row_for(a, order);
      if (candidates.empty() || row < min_row) {
        min_row = std::move(row);
        candidates.assign(1, a);
      } else if (row == min_row) {
        candidates.push_back(a);
      }
    }

    rows.push_back(min_row);
    if (!best_.empty() && compare_prefix(rows) > 0) {
      rows.pop_back();
      return;
    }
    for (const int a: candidates) {
      order.push_back(a);
      used[a] = true;
      search(order, rows, used);
      used[a] = false;
      order.pop_back();
    }
    rows.pop_back();
  }

  const smiles::MolecularGraph &graph_;
  std::vector<int> ball_;
  std::vector<std::string> prefix_;
  std::vector<std::string> best_;
  long leaves_ = 0;
};

}  // namespace

Fingerprint::Fingerprint(int width, int radius): radius_(radius) {
  if (width <= 0 || !std::has_single_bit(static_cast<unsigned>(width))) {
    throw Error("fingerprint width must be a positive power of two, got "
                + std::to_string(width));
  }
  bits_.assign(width, 0);
}

int Fingerprint::popcount() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), 1));
}

std::string Fingerprint::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bits_.size() / 4);
  for (std::size_t i = 0; i + 3 < bits_.size(); i += 4) {
    const int nibble = (bits_[i] << 3) | (bits_[i + 1] << 2)
                       | (bits_[i + 2] << 1) | bits_[i + 3];
    out += kDigits[nibble];
  }
  return out;
}

Fingerprint Fingerprint::from_hex(std::string_view hex, int radius) {
  Fingerprint fp(static_cast<int>(hex.size() * 4), radius);
  for (std::size_t k = 0; k < hex.size(); ++k) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(hex[k])));
    int nibble = 0;
    if (c >= '0' && c <= '9') {
      nibble = c - '0';
    } else if (c >= 'a' && c <= 'f') {
      nibble = c - 'a' + 10;
    } else {
      throw Error("invalid hex digit in fingerprint at position "
                  + std::to_string(k));
    }
    for (int b = 0; b < 4; ++b) {
      if ((nibble >> (3 - b)) & 1) {
        fp.set(static_cast<int>(4 * k) + b);
      }
    }
  }
  return fp;
}

std::string atom_label(const smiles::MolecularGraph &graph, int atom) {
  const smiles::Atom &a = graph.atom(atom);
  std::string label(smiles::element_symbol(a.element));
  if (a.aromatic) {
    for (char &c: label) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  label += "H" + std::to_string(a.total_h());
  if (a.formal_charge > 0) {
    label += "+" + std::to_string(a.formal_charge);
  } else if (a.formal_charge < 0) {
    label += std::to_string(a.formal_charge);
  }
  label += "D" + std::to_string(a.degree);
  if (a.in_ring) {
    label += "R";
  }
  return label;
}

std::string environment_key(const smiles::MolecularGraph &graph, int center,
                            int radius) {
  return Canonicalizer(graph, center, radius).run();
}

std::vector<std::string> circular_substructures(
    const smiles::MolecularGraph &graph, int radius) {
  if (radius < 0) {
    throw Error("radius must be non-negative");
  }
  std::vector<std::string> keys;
  keys.reserve(static_cast<std::size_t>(graph.num_atoms()) * (radius + 1));
  for (int a = 0; a < graph.num_atoms(); ++a) {
    for (int r = 0; r <= radius; ++r) {
      keys.push_back(environment_key(graph, a, r));
    }
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

int key_bit(std::string_view key, int width) {
  return static_cast<int>(fnv1a64(key) % static_cast<std::uint64_t>(width));
}

std::set<std::string> side_keys(std::span<const std::string> smiles_list,
                                int radius) {
  std::set<std::string> keys;
  for (const std::string &s: smiles_list) {
    const auto graph = smiles::parse_smiles(s);
    for (std::string &k: circular_substructures(graph, radius)) {
      keys.insert(std::move(k));
    }
  }
  return keys;
}

namespace {

Fingerprint fold(const std::set<std::string> &left,
                 const std::set<std::string> &right, int radius, int width) {
  Fingerprint fp(width, radius);
  std::vector<std::string> diff;
  std::set_symmetric_difference(left.begin(), left.end(), right.begin(),
                                right.end(), std::back_inserter(diff));
  for (const std::string &k: diff) {
    fp.set(key_bit(k, width));
  }
  return fp;
}

}  // namespace

Fingerprint drfp_fingerprint(std::span<const std::string> reactants,
                             std::span<const std::string> products, int radius,
                             int width) {
  return fold(side_keys(reactants, radius), side_keys(products, radius), radius,
              width);
}

std::pair<std::vector<std::string>, std::vector<std::string>>
split_reaction_smiles(std::string_view reaction) {
  const auto arrow = reaction.find(">>");
  if (arrow == std::string_view::npos) {
    throw Error("reaction SMILES needs '>>': " + std::string(reaction));
  }
  auto split = [](std::string_view side) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= side.size()) {
      const auto dot = side.find('.', start);
      const auto end = dot == std::string_view::npos ? side.size() : dot;
      if (end > start) {
        out.emplace_back(side.substr(start, end - start));
      }
      if (dot == std::string_view::npos) {
        break;
      }
      start = dot + 1;
    }
    return out;
  };
  return { split(reaction.substr(0, arrow)), split(reaction.substr(arrow + 2)) };
}

std::shared_ptr<const std::set<std::string>>
SubstructureCache::get(const std::string &smiles) {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(smiles);
    if (it != cache_.end()) {
      return it->second;
    }
  }
  const std::string one[] = { smiles };
  auto keys = std::make_shared<const std::set<std::string>>(
      side_keys(one, radius_));
  std::lock_guard lock(mutex_);
  return cache_.emplace(smiles, std::move(keys)).first->second;
}

Fingerprint SubstructureCache::fingerprint(
    std::span<const std::string> reactants,
    std::span<const std::string> products, int width) {
  std::set<std::string> left;
  std::set<std::string> right;
  for (const std::string &s: reactants) {
    const auto keys = get(s);
    left.insert(keys->begin(), keys->end());
  }
  for (const std::string &s: products) {
    const auto keys = get(s);
    right.insert(keys->begin(), keys->end());
  }
  return fold(left, right, radius_, width);
}

}  // namespace solvflow::drfp
