//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_DATA_H_
#define SOLVFLOW_DATA_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "solvflow/descriptors.h"
#include "solvflow/error.h"
#include "solvflow/record.h"

namespace solvflow::data {

class MissingColumn: public Error {
public:
  explicit MissingColumn(std::string column);
  const std::string &column() const { return column_; }

private:
  std::string column_;
};

// `row` is the 1-based data row (the header is row 0).
class RowParseError: public Error {
public:
  RowParseError(int row, std::string column, const std::string &message);
  int row() const { return row_; }
  const std::string &column() const { return column_; }

private:
  int row_;
  std::string column_;
};

// Raised only by strict loads; otherwise recorded in Dataset::warnings.
class RosterMismatch: public Error {
public:
  using Error::Error;
};

enum class Subset { kMixtures, kSingleSolvents, kEtherTransfer, kCustom };

std::string to_string(Subset subset);
// Throws Error on an unknown name.
Subset subset_from_string(std::string_view name);

struct ExpectedShape {
  int rows = 0;
  int solvents = 0;
};

// Row and roster sizes of the published benchmark files.
std::optional<ExpectedShape> expected_shape(Subset subset);

inline const std::vector<std::string> &canonical_columns() {
  static const std::vector<std::string> columns {
    "solvent_a_name", "solvent_a_smiles", "solvent_b_name", "solvent_b_smiles",
    "pct_b", "temperature_c", "residence_time_s", "yield_sm", "yield_p2",
    "yield_p3", "ramp_id", "drfp_hex",
  };
  return columns;
}

// key = value lines, '#' comments. Keys are canonical column names mapped to
// the file's header; `scale.<column> = factor` multiplies a numeric column;
// `yield_units = auto|percent|fraction`.
struct ColumnMapping {
  std::map<std::string, std::string> columns;
  std::map<std::string, double> scales;
  std::string yield_units = "auto";

  static ColumnMapping parse(std::string_view text);
  static ColumnMapping load(const std::filesystem::path &path);
  std::string header_for(const std::string &canonical) const;
};

// The transformation every row of a dataset shares.
struct ReactionSpec {
  std::string starting_material = "C=CCOc1ccccc1O";
  std::string product_2 = "C=CCc1cccc(O)c1O";
  std::string product_3 = "C=CCc1ccc(O)c(O)c1";

  nlohmann::json to_json() const;
  bool operator==(const ReactionSpec &) const = default;
};

struct Dataset {
  std::vector<ReactionRecord> records;
  Subset subset = Subset::kCustom;
  // distinct solvents by name, sorted
  std::vector<Solvent> roster;
  ReactionSpec reaction;
  bool yields_were_percent = false;
  std::string digest;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(records.size()); }
  bool operator==(const Dataset &) const = default;
};

struct LoadOptions {
  const ColumnMapping *mapping = nullptr;
  // name -> SMILES, used when the file has no SMILES column
  const std::map<std::string, std::string> *smiles_lookup = nullptr;
  bool strict_roster = false;
};

Dataset parse_dataset(std::string_view text, Subset subset,
                      const LoadOptions &options = {});
Dataset load_dataset(const std::filesystem::path &path, Subset subset,
                     const LoadOptions &options = {});

// Solvent name -> SMILES from a two-column CSV (name, smiles).
std::map<std::string, std::string> load_smiles_table(
    const std::filesystem::path &path);

// Rebuilds the sorted roster from the records.
std::vector<Solvent> roster_of(std::span<const ReactionRecord> records);

std::string ramp_key(const ReactionRecord &record);

struct Violation {
  int row = 0;  // 1-based data row
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> range_violations;
  // (first row, repeated row), 1-based
  std::vector<std::pair<int, int>> duplicates;
  // "table: solvent"
  std::vector<std::string> unknown_solvents;

  bool clean() const {
    return range_violations.empty() && duplicates.empty()
           && unknown_solvents.empty();
  }
  nlohmann::json to_json() const;
};

ValidationReport validate_dataset(
    const Dataset &ds, std::span<const descriptors::DescriptorTable *const> tables);

// Writes the dataset back out with canonical headers.
std::string to_csv(const Dataset &ds);

}  // namespace solvflow::data

#endif  // SOLVFLOW_DATA_H_
