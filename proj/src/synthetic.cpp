//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/synthetic.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "solvflow/digest.h"
#include "solvflow/models/nn.h"
#include "solvflow/smiles.h"

namespace solvflow::synthetic {

const std::vector<Solvent> &benchmark_roster() {
  static const std::vector<Solvent> roster {
    { "Methanol", "CO" },
    { "Ethanol", "CCO" },
    { "IPA [Propan-2-ol]", "CC(C)O" },
    { "tert-Butanol [2-Methylpropan-2-ol]", "CC(C)(C)O" },
    { "Decanol", "CCCCCCCCCCO" },
    { "Ethylene Glycol [1,2-Ethanediol]", "OCCO" },
    { "2,2,2-Trifluoroethanol", "OCC(F)(F)F" },
    { "1,1,1,3,3,3-Hexafluoropropan-2-ol", "OC(C(F)(F)F)C(F)(F)F" },
    { "Acetonitrile", "CC#N" },
    { "Acetonitrile.Acetic Acid", "CC#N.CC(=O)O" },
    { "Water.Acetonitrile", "O.CC#N" },
    { "Water.2,2,2-Trifluoroethanol", "O.OCC(F)(F)F" },
    { "THF [Tetrahydrofuran]", "C1CCOC1" },
    { "2-Methyltetrahydrofuran [2-MeTHF]", "CC1CCCO1" },
    { "Diethyl Ether [Ether]", "CCOCC" },
    { "MTBE [tert-Butylmethylether]", "COC(C)(C)C" },
    { "Ethyl Acetate", "CCOC(C)=O" },
    { "Methyl Propionate", "CCC(=O)OC" },
    { "Dimethyl Carbonate", "COC(=O)OC" },
    { "Ethyl Lactate", "CCOC(=O)C(C)O" },
    { "Butanone [MEK]", "CCC(C)=O" },
    { "DMA [N,N-Dimethylacetamide]", "CC(=O)N(C)C" },
    { "Cyclohexane", "C1CCCCC1" },
    { "Dihydrolevoglucosenone (Cyrene)", "O=C1CCC2OCC1O2" },
  };
  return roster;
}

std::vector<double> structure_features(const std::string &smiles) {
  const auto g = smiles::parse_smiles(smiles);
  const double n = std::max(1, g.num_atoms());
  double hetero = 0.0;
  double donors = 0.0;
  double acceptors = 0.0;
  double aromatic = 0.0;
  double halogen = 0.0;
  for (const auto &a: g.atoms()) {
    const bool n_or_o = a.element == 7 || a.element == 8;
    hetero += a.element != 6 && a.element != 1 ? 1.0 : 0.0;
    donors += n_or_o && a.total_h() > 0 ? 1.0 : 0.0;
    acceptors += n_or_o ? 1.0 : 0.0;
    aromatic += a.aromatic ? 1.0 : 0.0;
    halogen += a.element == 9 || a.element == 17 || a.element == 35 ? 1.0 : 0.0;
  }
  return { n / 10.0, hetero / n, donors / n, acceptors / n, aromatic / n,
           halogen / n };
}

descriptors::DescriptorTable structure_table(const std::vector<Solvent> &roster,
                                             std::string id) {
  descriptors::DescriptorTable table(
      std::move(id), { "size", "hetero", "donor", "acceptor", "aromatic", "halogen" });
  for (const auto &s: roster) {
    table.add(s.name, structure_features(s.smiles));
  }
  return table;
}

namespace {

std::vector<double> mixed_features(const std::vector<double> &a,
                                   const std::vector<double> &b, double pct_b) {
  const double x = pct_b / 100.0;
  std::vector<double> m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    m[i] = (1.0 - x) * a[i] + x * b[i] + 2.0 * x * (1.0 - x) * d * d;
  }
  return m;
}

std::array<double, 3> kinetic_yields(const std::vector<double> &f, double t_c,
                                     double tau_s) {
  const double t = models::normalize_temperature(t_c);
  const double k2 = 0.01 * std::exp(1.5 * t + 1.5 * f[1] + 2.0 * f[2] - 1.0 * f[5]);
  const double k3 =
      0.004 * std::exp(1.2 * t + 2.5 * f[3] - 0.5 * f[0] + 1.5 * f[5]);
  const double sm = std::exp(-(k2 + k3) * tau_s);
  const double converted = 1.0 - sm;
  return { sm, converted * k2 / (k2 + k3), converted * k3 / (k2 + k3) };
}

}  // namespace

data::Dataset make_dataset(const SyntheticOptions &options) {
  const auto &all = benchmark_roster();
  if (options.solvents < 1 || options.solvents > static_cast<int>(all.size())) {
    throw Error("synthetic solvents must lie in [1, "
                + std::to_string(all.size()) + "]");
  }
  if (options.points_per_ramp < 1) {
    throw Error("points_per_ramp must be positive");
  }
  std::vector<Solvent> roster(all.begin(), all.begin() + options.solvents);
  std::vector<std::vector<double>> features;
  for (const auto &s: roster) {
    features.push_back(structure_features(s.smiles));
  }

  models::Rng rng(options.seed);
  std::uniform_real_distribution<double> temp(60.0, 120.0);
  std::uniform_real_distribution<double> tau(30.0, 300.0);
  std::normal_distribution<double> noise(0.0, options.noise);

  data::Dataset ds;
  ds.subset = data::Subset::kCustom;
  auto emit = [&](int a, std::optional<int> b, double pct) {
    const auto f = b ? mixed_features(features[a], features[*b], pct) : features[a];
    for (int p = 0; p < options.points_per_ramp; ++p) {
      ReactionRecord r;
      r.solvent_a = roster[a];
      if (b) {
        r.solvent_b = roster[*b];
        r.pct_b = pct;
      }
      r.temperature_c = std::round(temp(rng) * 10.0) / 10.0;
      r.residence_time_s = std::round(tau(rng) * 10.0) / 10.0;
      const auto y = kinetic_yields(f, r.temperature_c, r.residence_time_s);
      for (int t = 0; t < kNumTargets; ++t) {
        const double v = y[t] + (options.noise > 0.0 ? noise(rng) : 0.0);
        r.yields[t] = std::clamp(v, 0.0, 1.0);
      }
      r.ramp_id = data::ramp_key(r);
      ds.records.push_back(std::move(r));
    }
  };
  if (options.mixtures && options.solvents >= 2) {
    for (int a = 0; a < options.solvents; ++a) {
      const int b = (a + 1) % options.solvents;
      for (const double pct: options.pct_levels) {
        emit(a, b, pct);
      }
    }
  } else {
    for (int a = 0; a < options.solvents; ++a) {
      emit(a, std::nullopt, 0.0);
    }
  }
  ds.roster = data::roster_of(ds.records);
  ds.digest = digest_string(data::to_csv(ds));
  return ds;
}

}  // namespace solvflow::synthetic
