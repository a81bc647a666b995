//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_RECORD_H_
#define SOLVFLOW_RECORD_H_

#include <array>
#include <optional>
#include <string>

namespace solvflow {

struct Solvent {
  std::string name;
  std::string smiles;

  friend bool operator==(const Solvent &, const Solvent &) = default;
};

// Indices into ReactionRecord::yields.
enum Target : int {
  kYieldSM = 0,
  kYieldP2 = 1,
  kYieldP3 = 2,
};
inline constexpr int kNumTargets = 3;

// One experimental row. A missing solvent_b is a single (possibly premixed)
// solvent; pct_b is then 0.
struct ReactionRecord {
  Solvent solvent_a;
  std::optional<Solvent> solvent_b;
  double pct_b = 0.0;
  double temperature_c = 0.0;
  double residence_time_s = 0.0;
  std::array<double, kNumTargets> yields {};
  std::string ramp_id;
  // Per-row fingerprint supplied with the data file (hex); empty if absent.
  std::string drfp_hex;

  bool involves(const std::string &solvent_name) const {
    return solvent_a.name == solvent_name
           || (solvent_b && solvent_b->name == solvent_name);
  }

  friend bool operator==(const ReactionRecord &,
                         const ReactionRecord &) = default;
};

}  // namespace solvflow

#endif  // SOLVFLOW_RECORD_H_
