//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_DESCRIPTORS_H_
#define SOLVFLOW_DESCRIPTORS_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "solvflow/drfp.h"
#include "solvflow/error.h"
#include "solvflow/record.h"

namespace solvflow::descriptors {

class UnknownSolvent: public Error {
public:
  UnknownSolvent(const std::string &solvent, const std::string &table);

  const std::string &solvent() const { return solvent_; }
  const std::string &table() const { return table_; }

private:
  std::string solvent_;
  std::string table_;
};

class PctOutOfRange: public Error {
public:
  using Error::Error;
};

class DegenerateInput: public Error {
public:
  using Error::Error;
};

// Lower-cased, surrounding whitespace removed.
std::string normalize_name(std::string_view name);

// Solvent name -> fixed-width descriptor vector.
class DescriptorTable {
public:
  DescriptorTable() = default;
  DescriptorTable(std::string id, std::vector<std::string> columns);

  // Header row = descriptor names, first column = solvent name.
  static DescriptorTable load_csv(const std::filesystem::path &path,
                                  std::string id);

  void add(std::string_view solvent, std::vector<double> values);

  bool contains(std::string_view solvent) const;
  // Throws UnknownSolvent.
  const std::vector<double> &at(std::string_view solvent) const;

  const std::string &id() const { return id_; }
  const std::vector<std::string> &columns() const { return columns_; }
  int width() const { return static_cast<int>(columns_.size()); }
  int size() const { return static_cast<int>(rows_.size()); }
  std::vector<std::string> names() const;

private:
  std::string id_;
  std::vector<std::string> columns_;
  std::map<std::string, std::vector<double>> rows_;
};

// (1 - pct_b/100) * f_a + (pct_b/100) * f_b.
std::vector<double> mix_descriptors(std::span<const double> f_a,
                                    std::span<const double> f_b, double pct_b);

struct PcaBasis {
  Eigen::VectorXd mean;
  // k x features, rows orthonormal, by descending explained variance
  Eigen::MatrixXd components;
  Eigen::VectorXd explained_variance;
  double total_variance = 0.0;

  int k() const { return static_cast<int>(components.rows()); }
  Eigen::MatrixXd transform(const Eigen::MatrixXd &x) const;
  Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd &z) const;
};

// Rows of `x` are samples. Component signs are fixed so that each
// component's largest-magnitude loading is positive.
PcaBasis pca_fit(const Eigen::MatrixXd &x, int k);

// Projects every solvent onto the first k principal components of the table.
DescriptorTable reduce_table(const DescriptorTable &table, int k,
                             std::string new_id);

struct TableSet {
  const DescriptorTable *spange = nullptr;
  const DescriptorTable *acs_pca = nullptr;
  // Optional per-solvent fingerprint table; mixed like the descriptors and
  // used instead of the reaction fingerprint when present.
  const DescriptorTable *drfp = nullptr;
};

struct BaselineFeatureVector {
  std::vector<double> values;
  int n_spange = 0;
  int n_acs = 0;
  int n_drfp = 0;

  int width() const { return static_cast<int>(values.size()); }
};

// Layout [tau, T, spange mix, acs mix, drfp bits]. A non-empty
// record.drfp_hex overrides both the table and `fp`.
BaselineFeatureVector assemble_baseline_features(const ReactionRecord &record,
                                                 const TableSet &tables,
                                                 const drfp::Fingerprint &fp);

// Column z-scoring fitted on training rows only. Constant columns are
// centred but not scaled.
class ColumnScaler {
public:
  void fit(const Eigen::MatrixXd &x);
  // Restores a fitted scaler; throws ShapeMismatch on unequal lengths.
  static ColumnScaler from_values(Eigen::RowVectorXd mean,
                                  Eigen::RowVectorXd scale);
  Eigen::MatrixXd transform(const Eigen::MatrixXd &x) const;

  const Eigen::RowVectorXd &mean() const { return mean_; }
  const Eigen::RowVectorXd &scale() const { return scale_; }

private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

}  // namespace solvflow::descriptors

#endif  // SOLVFLOW_DESCRIPTORS_H_
