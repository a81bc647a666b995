//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "solvflow/csv.h"
#include "solvflow/digest.h"
#include "solvflow/smiles.h"

namespace solvflow::data {
namespace {

// shortest round-trip form
std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

MissingColumn::MissingColumn(std::string column)
    : Error("missing required column '" + column + "'"), column_(std::move(column)) {}

RowParseError::RowParseError(int row, std::string column, const std::string &message)
    : Error("row " + std::to_string(row) + ", column '" + column + "': " + message),
      row_(row), column_(std::move(column)) {}

std::string to_string(Subset subset) {
  switch (subset) {
  case Subset::kMixtures:
    return "mixtures";
  case Subset::kSingleSolvents:
    return "single_solvents";
  case Subset::kEtherTransfer:
    return "ether_transfer";
  case Subset::kCustom:
    break;
  }
  return "custom";
}

Subset subset_from_string(std::string_view name) {
  for (const Subset s: { Subset::kMixtures, Subset::kSingleSolvents,
                         Subset::kEtherTransfer, Subset::kCustom }) {
    if (to_string(s) == name) {
      return s;
    }
  }
  throw Error("unknown subset '" + std::string(name) + "'");
}

std::optional<ExpectedShape> expected_shape(Subset subset) {
  switch (subset) {
  case Subset::kMixtures:
    return ExpectedShape { 1227, 24 };
  case Subset::kSingleSolvents:
    return ExpectedShape { 656, 24 };
  case Subset::kEtherTransfer:
    return ExpectedShape { 283, 11 };
  case Subset::kCustom:
    break;
  }
  return std::nullopt;
}

ColumnMapping ColumnMapping::parse(std::string_view text) {
  ColumnMapping m;
  std::istringstream in { std::string(text) };
  std::string line;
  int line_no = 0;
  const auto &known = canonical_columns();
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.resize(hash);
    }
    line = csv::trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("mapping line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = csv::trim(std::string_view(line).substr(0, eq));
    const std::string value = csv::trim(std::string_view(line).substr(eq + 1));
    if (key == "yield_units") {
      if (value != "auto" && value != "percent" && value != "fraction") {
        throw Error("mapping line " + std::to_string(line_no)
                    + ": yield_units must be auto, percent or fraction");
      }
      m.yield_units = value;
    } else if (key.rfind("scale.", 0) == 0) {
      double factor = 0.0;
      if (!csv::parse_double(value, factor)) {
        throw Error("mapping line " + std::to_string(line_no) + ": bad scale factor");
      }
      m.scales[key.substr(6)] = factor;
    } else if (std::find(known.begin(), known.end(), key) != known.end()) {
      m.columns[key] = value;
    } else {
      throw Error("mapping line " + std::to_string(line_no) + ": unknown key '"
                  + key + "'");
    }
  }
  return m;
}

ColumnMapping ColumnMapping::load(const std::filesystem::path &path) {
  return parse(read_text(path));
}

std::string ColumnMapping::header_for(const std::string &canonical) const {
  const auto it = columns.find(canonical);
  return it == columns.end() ? canonical : it->second;
}

nlohmann::json ReactionSpec::to_json() const {
  return { { "starting_material", starting_material },
           { "product_2", product_2 },
           { "product_3", product_3 } };
}

std::string ramp_key(const ReactionRecord &record) {
  std::string key = record.solvent_a.name;
  key += '|';
  if (record.solvent_b) {
    key += record.solvent_b->name;
  }
  key += '|';
  key += format_number(record.pct_b);
  return key;
}

std::vector<Solvent> roster_of(std::span<const ReactionRecord> records) {
  std::map<std::string, Solvent> by_name;
  for (const auto &r: records) {
    by_name.emplace(r.solvent_a.name, r.solvent_a);
    if (r.solvent_b) {
      by_name.emplace(r.solvent_b->name, *r.solvent_b);
    }
  }
  std::vector<Solvent> out;
  for (auto &[name, s]: by_name) {
    out.push_back(s);
  }
  return out;
}

Dataset parse_dataset(std::string_view text, Subset subset,
                      const LoadOptions &options) {
  const ColumnMapping default_mapping;
  const ColumnMapping &mapping = options.mapping ? *options.mapping : default_mapping;
  const auto rows = csv::parse(text);

  std::map<std::string, int> index;
  if (!rows.empty()) {
    for (std::size_t c = 0; c < rows[0].size(); ++c) {
      index.emplace(csv::trim(rows[0][c]), static_cast<int>(c));
    }
  }
  auto column = [&](const std::string &canonical) -> int {
    const auto it = index.find(mapping.header_for(canonical));
    return it == index.end() ? -1 : it->second;
  };
  auto require = [&](const std::string &canonical) {
    const int c = column(canonical);
    if (c < 0) {
      throw MissingColumn(mapping.header_for(canonical));
    }
    return c;
  };

  const int c_a_name = require("solvent_a_name");
  const int c_a_smiles = options.smiles_lookup ? column("solvent_a_smiles")
                                               : require("solvent_a_smiles");
  const int c_b_name = column("solvent_b_name");
  const int c_b_smiles = column("solvent_b_smiles");
  const int c_pct = column("pct_b");
  const int c_t = require("temperature_c");
  const int c_tau = require("residence_time_s");
  const int c_y[3] = {
    require("yield_sm"), require("yield_p2"),
    subset == Subset::kEtherTransfer ? column("yield_p3") : require("yield_p3"),
  };
  const int c_ramp = column("ramp_id");
  const int c_drfp = column("drfp_hex");

  static const char *kYieldNames[3] = { "yield_sm", "yield_p2", "yield_p3" };

  Dataset ds;
  ds.subset = subset;
  ds.digest = digest_string(text);

  // first row and column of every SMILES, for error reporting
  std::map<std::string, std::pair<int, std::string>> smiles_seen;

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int row_no = static_cast<int>(i);
    const auto &row = rows[i];
    auto field = [&](int c, const char *canonical) -> std::string {
      if (c < 0) {
        return {};
      }
      if (c >= static_cast<int>(row.size())) {
        throw RowParseError(row_no, mapping.header_for(canonical), "field missing");
      }
      return csv::trim(row[c]);
    };
    auto number = [&](int c, const char *canonical) -> double {
      const std::string s = field(c, canonical);
      double v = 0.0;
      if (!csv::parse_double(s, v) || !std::isfinite(v)) {
        throw RowParseError(row_no, mapping.header_for(canonical),
                            "expected a number, got '" + s + "'");
      }
      const auto scale = mapping.scales.find(canonical);
      return scale == mapping.scales.end() ? v : v * scale->second;
    };
    auto smiles_for = [&](const std::string &name, int c, const char *canonical) {
      std::string s = field(c, canonical);
      if (s.empty() && options.smiles_lookup) {
        const auto it = options.smiles_lookup->find(name);
        if (it != options.smiles_lookup->end()) {
          s = it->second;
        }
      }
      if (s.empty()) {
        throw RowParseError(row_no, mapping.header_for(canonical),
                            "no SMILES for solvent '" + name + "'");
      }
      smiles_seen.emplace(s, std::make_pair(row_no, mapping.header_for(canonical)));
      return s;
    };

    ReactionRecord r;
    r.solvent_a.name = field(c_a_name, "solvent_a_name");
    if (r.solvent_a.name.empty()) {
      throw RowParseError(row_no, mapping.header_for("solvent_a_name"),
                          "empty solvent name");
    }
    r.solvent_a.smiles = smiles_for(r.solvent_a.name, c_a_smiles, "solvent_a_smiles");
    const std::string b_name = field(c_b_name, "solvent_b_name");
    if (!b_name.empty()) {
      r.solvent_b = Solvent { b_name,
                              smiles_for(b_name, c_b_smiles, "solvent_b_smiles") };
      if (c_pct < 0) {
        throw MissingColumn(mapping.header_for("pct_b"));
      }
      r.pct_b = number(c_pct, "pct_b");
    }
    r.temperature_c = number(c_t, "temperature_c");
    r.residence_time_s = number(c_tau, "residence_time_s");
    for (int t = 0; t < kNumTargets; ++t) {
      r.yields[t] = c_y[t] < 0 ? 0.0 : number(c_y[t], kYieldNames[t]);
    }
    r.ramp_id = field(c_ramp, "ramp_id");
    r.drfp_hex = field(c_drfp, "drfp_hex");
    ds.records.push_back(std::move(r));
  }

  for (const auto &[s, where]: smiles_seen) {
    try {
      smiles::parse_smiles(s);
    } catch (const Error &e) {
      throw RowParseError(where.first, where.second, e.what());
    }
  }

  double max_yield = 0.0;
  for (const auto &r: ds.records) {
    for (const double y: r.yields) {
      max_yield = std::max(max_yield, y);
    }
  }
  ds.yields_were_percent = mapping.yield_units == "percent"
                           || (mapping.yield_units == "auto" && max_yield > 1.5);
  for (auto &r: ds.records) {
    if (ds.yields_were_percent) {
      for (double &y: r.yields) {
        y /= 100.0;
      }
    }
    if (r.ramp_id.empty()) {
      r.ramp_id = ramp_key(r);
    }
  }
  ds.roster = roster_of(ds.records);

  if (const auto shape = expected_shape(subset)) {
    if (ds.size() != shape->rows
        || static_cast<int>(ds.roster.size()) != shape->solvents) {
      const std::string message =
          "RosterMismatch: " + to_string(subset) + " expects "
          + std::to_string(shape->rows) + " rows / " + std::to_string(shape->solvents)
          + " solvents, found " + std::to_string(ds.size()) + " / "
          + std::to_string(ds.roster.size());
      if (options.strict_roster) {
        throw RosterMismatch(message);
      }
      ds.warnings.push_back(message);
    }
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path &path, Subset subset,
                     const LoadOptions &options) {
  return parse_dataset(read_text(path), subset, options);
}

std::map<std::string, std::string> load_smiles_table(
    const std::filesystem::path &path) {
  const auto rows = csv::read_file(path);
  std::map<std::string, std::string> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 2) {
      throw RowParseError(static_cast<int>(i), "smiles", "expected name,smiles");
    }
    out[csv::trim(rows[i][0])] = csv::trim(rows[i][1]);
  }
  return out;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["clean"] = clean();
  j["range_violations"] = nlohmann::json::array();
  for (const auto &v: range_violations) {
    j["range_violations"].push_back(
        { { "row", v.row }, { "field", v.field }, { "message", v.message } });
  }
  j["duplicates"] = nlohmann::json::array();
  for (const auto &[a, b]: duplicates) {
    j["duplicates"].push_back({ { "first", a }, { "repeat", b } });
  }
  j["unknown_solvents"] = unknown_solvents;
  return j;
}

ValidationReport validate_dataset(
    const Dataset &ds, std::span<const descriptors::DescriptorTable *const> tables) {
  ValidationReport report;
  auto check = [&](int row, const char *field, double v, double lo, double hi) {
    if (!(v >= lo && v <= hi)) {
      report.range_violations.push_back(
          { row, field,
            format_number(v) + " outside [" + format_number(lo) + ", "
                + format_number(hi) + "]" });
    }
  };
  static const char *kYieldNames[3] = { "yield_sm", "yield_p2", "yield_p3" };
  std::map<std::string, int> first_seen;
  for (int i = 0; i < ds.size(); ++i) {
    const auto &r = ds.records[i];
    const int row = i + 1;
    check(row, "pct_b", r.pct_b, 0.0, 100.0);
    check(row, "temperature_c", r.temperature_c, 60.0, 120.0);
    check(row, "residence_time_s", r.residence_time_s, 30.0, 300.0);
    for (int t = 0; t < kNumTargets; ++t) {
      check(row, kYieldNames[t], r.yields[t], 0.0, 1.0);
    }
    const std::string key = ramp_key(r) + '|' + format_number(r.temperature_c) + '|'
                            + format_number(r.residence_time_s);
    const auto [it, inserted] = first_seen.emplace(key, row);
    if (!inserted) {
      report.duplicates.emplace_back(it->second, row);
    }
  }
  for (const auto *table: tables) {
    if (table == nullptr) {
      continue;
    }
    for (const auto &s: ds.roster) {
      if (!table->contains(s.name)) {
        report.unknown_solvents.push_back(table->id() + ": " + s.name);
      }
    }
  }
  return report;
}

std::string to_csv(const Dataset &ds) {
  std::string out = csv::join(canonical_columns()) + "\n";
  for (const auto &r: ds.records) {
    csv::Row row {
      r.solvent_a.name,
      r.solvent_a.smiles,
      r.solvent_b ? r.solvent_b->name : "",
      r.solvent_b ? r.solvent_b->smiles : "",
      format_number(r.pct_b),
      format_number(r.temperature_c),
      format_number(r.residence_time_s),
      format_number(r.yields[0]),
      format_number(r.yields[1]),
      format_number(r.yields[2]),
      r.ramp_id,
      r.drfp_hex,
    };
    out += csv::join(row) + "\n";
  }
  return out;
}

}  // namespace solvflow::data
