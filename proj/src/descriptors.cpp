//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/descriptors.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "solvflow/csv.h"

namespace solvflow::descriptors {

UnknownSolvent::UnknownSolvent(const std::string &solvent,
                               const std::string &table)
    : Error("solvent '" + solvent + "' is missing from descriptor table '"
            + table + "'"),
      solvent_(solvent), table_(table) { }

std::string normalize_name(std::string_view name) {
  std::string out = csv::trim(name);
  for (char &c: out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

DescriptorTable::DescriptorTable(std::string id, std::vector<std::string> columns)
    : id_(std::move(id)), columns_(std::move(columns)) { }

DescriptorTable DescriptorTable::load_csv(const std::filesystem::path &path,
                                          std::string id) {
  const auto rows = csv::read_file(path);
  if (rows.empty() || rows.front().size() < 2) {
    throw Error(path.string() + ": descriptor table needs a header with at "
                                "least one descriptor column");
  }
  std::vector<std::string> columns(rows.front().begin() + 1, rows.front().end());
  for (auto &c: columns) {
    c = csv::trim(c);
  }
  DescriptorTable table(std::move(id), std::move(columns));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    if (row.size() != table.columns_.size() + 1) {
      throw Error(path.string() + ": row " + std::to_string(r + 1) + " has "
                  + std::to_string(row.size()) + " fields, expected "
                  + std::to_string(table.columns_.size() + 1));
    }
    std::vector<double> values(table.columns_.size());
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (!csv::parse_double(row[c + 1], values[c])) {
        throw Error(path.string() + ": row " + std::to_string(r + 1)
                    + ", column '" + table.columns_[c] + "' is not numeric");
      }
    }
    table.add(row[0], std::move(values));
  }
  return table;
}

void DescriptorTable::add(std::string_view solvent, std::vector<double> values) {
  if (static_cast<int>(values.size()) != width()) {
    throw WidthMismatch("descriptor row for '" + std::string(solvent)
                        + "' has width " + std::to_string(values.size())
                        + ", table '" + id_ + "' has "
                        + std::to_string(width()));
  }
  auto [it, inserted] = rows_.emplace(normalize_name(solvent), std::move(values));
  if (!inserted) {
    throw Error("duplicate solvent '" + std::string(solvent) + "' in table '"
                + id_ + "'");
  }
}

bool DescriptorTable::contains(std::string_view solvent) const {
  return rows_.contains(normalize_name(solvent));
}

const std::vector<double> &DescriptorTable::at(std::string_view solvent) const {
  auto it = rows_.find(normalize_name(solvent));
  if (it == rows_.end()) {
    throw UnknownSolvent(std::string(solvent), id_);
  }
  return it->second;
}

std::vector<std::string> DescriptorTable::names() const {
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto &[name, _]: rows_) {
    out.push_back(name);
  }
  return out;
}

std::vector<double> mix_descriptors(std::span<const double> f_a,
                                    std::span<const double> f_b, double pct_b) {
  if (f_a.size() != f_b.size()) {
    throw WidthMismatch("cannot mix descriptors of widths "
                        + std::to_string(f_a.size()) + " and "
                        + std::to_string(f_b.size()));
  }
  if (!(pct_b >= 0.0 && pct_b <= 100.0)) {
    throw PctOutOfRange("%B must lie in [0, 100], got " + std::to_string(pct_b));
  }
  const double w = pct_b / 100.0;
  std::vector<double> out(f_a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - w) * f_a[i] + w * f_b[i];
  }
  return out;
}

Eigen::MatrixXd PcaBasis::transform(const Eigen::MatrixXd &x) const {
  return (x.rowwise() - mean.transpose()) * components.transpose();
}

Eigen::MatrixXd PcaBasis::inverse_transform(const Eigen::MatrixXd &z) const {
  return (z * components).rowwise() + mean.transpose();
}

PcaBasis pca_fit(const Eigen::MatrixXd &x, int k) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (k < 1 || k > std::min(n, d)) {
    throw Error("PCA component count " + std::to_string(k)
                + " must lie in [1, min(samples, features)]");
  }

  PcaBasis basis;
  basis.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - basis.mean.transpose();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Eigen::MatrixXd cov = centered.transpose() * centered / denom;

  basis.total_variance = cov.trace();
  if (!(basis.total_variance > 1e-300)) {
    throw DegenerateInput("PCA input has zero variance in every direction");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  // eigenvalues come out ascending
  basis.components.resize(k, d);
  basis.explained_variance.resize(k);
  for (int i = 0; i < k; ++i) {
    const auto col = d - 1 - i;
    Eigen::VectorXd v = solver.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) {
      v = -v;
    }
    basis.components.row(i) = v.transpose();
    basis.explained_variance(i) = std::max(0.0, solver.eigenvalues()(col));
  }
  return basis;
}

DescriptorTable reduce_table(const DescriptorTable &table, int k,
                             std::string new_id) {
  const auto names = table.names();
  Eigen::MatrixXd x(names.size(), table.width());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto &row = table.at(names[i]);
    for (int j = 0; j < table.width(); ++j) {
      x(static_cast<Eigen::Index>(i), j) = row[j];
    }
  }
  const PcaBasis basis = pca_fit(x, k);
  const Eigen::MatrixXd z = basis.transform(x);

  std::vector<std::string> columns;
  for (int i = 0; i < k; ++i) {
    columns.push_back("PC" + std::to_string(i + 1));
  }
  DescriptorTable out(std::move(new_id), std::move(columns));
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::vector<double> values(k);
    for (int j = 0; j < k; ++j) {
      values[j] = z(static_cast<Eigen::Index>(i), j);
    }
    out.add(names[i], std::move(values));
  }
  return out;
}

namespace {

std::vector<double> mixed_row(const DescriptorTable &table,
                              const ReactionRecord &record) {
  const auto &a = table.at(record.solvent_a.name);
  if (!record.solvent_b) {
    return a;
  }
  return mix_descriptors(a, table.at(record.solvent_b->name), record.pct_b);
}

}  // namespace

BaselineFeatureVector assemble_baseline_features(const ReactionRecord &record,
                                                 const TableSet &tables,
                                                 const drfp::Fingerprint &fp) {
  BaselineFeatureVector out;
  out.values.push_back(record.residence_time_s);
  out.values.push_back(record.temperature_c);

  if (tables.spange != nullptr) {
    const auto block = mixed_row(*tables.spange, record);
    out.n_spange = static_cast<int>(block.size());
    out.values.insert(out.values.end(), block.begin(), block.end());
  }
  if (tables.acs_pca != nullptr) {
    const auto block = mixed_row(*tables.acs_pca, record);
    out.n_acs = static_cast<int>(block.size());
    out.values.insert(out.values.end(), block.begin(), block.end());
  }

  if (!record.drfp_hex.empty()) {
    const auto row_fp = drfp::Fingerprint::from_hex(record.drfp_hex);
    out.n_drfp = row_fp.width();
    for (const auto bit: row_fp.bits()) {
      out.values.push_back(bit);
    }
  } else if (tables.drfp != nullptr) {
    const auto block = mixed_row(*tables.drfp, record);
    out.n_drfp = static_cast<int>(block.size());
    out.values.insert(out.values.end(), block.begin(), block.end());
  } else {
    out.n_drfp = fp.width();
    for (const auto bit: fp.bits()) {
      out.values.push_back(bit);
    }
  }
  return out;
}

void ColumnScaler::fit(const Eigen::MatrixXd &x) {
  mean_ = x.colwise().mean();
  scale_.resize(x.cols());
  const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - mean_(j)).square().sum() / denom;
    const double sd = std::sqrt(var);
    scale_(j) = sd > 1e-12 ? sd : 1.0;
  }
}

ColumnScaler ColumnScaler::from_values(Eigen::RowVectorXd mean,
                                       Eigen::RowVectorXd scale) {
  if (mean.size() != scale.size()) {
    throw ShapeMismatch("scaler mean and scale lengths differ");
  }
  ColumnScaler s;
  s.mean_ = std::move(mean);
  s.scale_ = std::move(scale);
  return s;
}

Eigen::MatrixXd ColumnScaler::transform(const Eigen::MatrixXd &x) const {
  if (x.cols() != mean_.size()) {
    throw WidthMismatch("scaler fitted on " + std::to_string(mean_.size())
                        + " columns, got " + std::to_string(x.cols()));
  }
  return (x.rowwise() - mean_).array().rowwise() / scale_.array();
}

}  // namespace solvflow::descriptors
