//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/eval.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "solvflow/csv.h"
#include "solvflow/digest.h"

namespace solvflow::eval {
namespace {

const std::vector<std::string> &known_methods() {
  static const std::vector<std::string> m { "gbdt", "deepmodel", "ensemble", "gnn",
                                            "mlp" };
  return m;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string &s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string row_solvent_label(const ReactionRecord &r) {
  return r.solvent_b ? r.solvent_a.name + " / " + r.solvent_b->name : r.solvent_a.name;
}

std::uint64_t task_seed(std::uint64_t seed, int fold, std::string_view method) {
  return ad::mix64(seed ^ ad::mix64(static_cast<std::uint64_t>(fold) + 1)
                   ^ fnv1a64(method));
}

nlohmann::json mse_json(const MseResult &m) {
  return { { "sm", m.per_target[0] },
           { "p2", m.per_target[1] },
           { "p3", m.per_target[2] },
           { "pooled", m.pooled } };
}

// Text table with left-aligned columns.
std::string render_table(const std::vector<std::vector<std::string>> &rows) {
  std::vector<std::size_t> width;
  for (const auto &row: rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      line += c + 1 == rows[r].size() ? rows[r][c] : pad(rows[r][c], width[c] + 2);
    }
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (const auto w: width) {
        total += w + 2;
      }
      out += std::string(total - 2, '-') + "\n";
    }
  }
  return out;
}

MethodSummary summarize(const std::string &method, const std::string &digest,
                        const std::vector<const FoldResult *> &folds,
                        const data::Dataset &ds) {
  MethodSummary s;
  s.method = method;
  s.label = method_label(method);
  s.config_digest = digest;
  s.folds = static_cast<int>(folds.size());
  std::vector<double> pooled;
  std::map<std::string, std::pair<double, long>> by_solvent;
  for (const auto *f: folds) {
    if (!f->completed) {
      continue;
    }
    ++s.completed;
    pooled.push_back(f->mse.pooled);
    for (int t = 0; t < 3; ++t) {
      s.per_target_mean[t] += f->mse.per_target[t];
    }
    for (std::size_t k = 0; k < f->test_rows.size(); ++k) {
      const auto &r = ds.records[f->test_rows[k]];
      double se = 0.0;
      for (int t = 0; t < 3; ++t) {
        const double d = f->predictions(k, t) - r.yields[t];
        se += d * d;
      }
      for (const auto *name: { &r.solvent_a.name,
                               r.solvent_b ? &r.solvent_b->name : nullptr }) {
        if (name != nullptr) {
          auto &acc = by_solvent[*name];
          acc.first += se;
          acc.second += 3;
        }
      }
    }
  }
  if (s.completed > 0) {
    s.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / s.completed;
    s.std = sample_std(pooled);
    for (double &v: s.per_target_mean) {
      v /= s.completed;
    }
  }
  for (const auto &[name, acc]: by_solvent) {
    s.per_solvent[name] = acc.first / static_cast<double>(acc.second);
  }
  return s;
}

nlohmann::json summary_json(const MethodSummary &s) {
  return { { "method", s.method },
           { "label", s.label },
           { "config_digest", s.config_digest },
           { "folds", s.folds },
           { "completed_folds", s.completed },
           { "mse_mean", s.mean },
           { "mse_std", s.std },
           { "per_target_mean",
             { { "sm", s.per_target_mean[0] },
               { "p2", s.per_target_mean[1] },
               { "p3", s.per_target_mean[2] } } },
           { "per_solvent", s.per_solvent } };
}

}  // namespace

std::string to_string(Protocol protocol) {
  switch (protocol) {
  case Protocol::kLoso:
    return "loso";
  case Protocol::kLoro:
    return "loro";
  case Protocol::kRandom:
    break;
  }
  return "random";
}

Protocol protocol_from_string(std::string_view name) {
  for (const Protocol p: { Protocol::kLoso, Protocol::kLoro, Protocol::kRandom }) {
    if (to_string(p) == name) {
      return p;
    }
  }
  throw Error("unknown protocol '" + std::string(name) + "'");
}

SplitPlan make_splits(const data::Dataset &ds, Protocol protocol, std::uint64_t seed) {
  SplitPlan plan;
  plan.protocol = protocol;
  const int n = ds.size();
  switch (protocol) {
  case Protocol::kLoso: {
    if (ds.roster.size() < 2) {
      throw TooFewGroups("leave-one-solvent-out needs two solvents, found "
                         + std::to_string(ds.roster.size()));
    }
    for (const auto &s: ds.roster) {
      Fold f;
      f.group = s.name;
      for (int i = 0; i < n; ++i) {
        (ds.records[i].involves(s.name) ? f.test : f.train).push_back(i);
      }
      plan.folds.push_back(std::move(f));
    }
    break;
  }
  case Protocol::kLoro: {
    std::set<std::string> ramps;
    for (const auto &r: ds.records) {
      ramps.insert(r.ramp_id);
    }
    if (ramps.size() < 2) {
      throw TooFewGroups("leave-one-ramp-out needs two ramps, found "
                         + std::to_string(ramps.size()));
    }
    for (const auto &ramp: ramps) {
      Fold f;
      f.group = ramp;
      for (int i = 0; i < n; ++i) {
        (ds.records[i].ramp_id == ramp ? f.test : f.train).push_back(i);
      }
      plan.folds.push_back(std::move(f));
    }
    break;
  }
  case Protocol::kRandom: {
    if (n < 2) {
      throw TooFewGroups("a random split needs two rows");
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    models::Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const int n_test = std::clamp(static_cast<int>(std::lround(0.2 * n)), 1, n - 1);
    Fold f;
    f.group = "random";
    f.test.assign(order.begin(), order.begin() + n_test);
    f.train.assign(order.begin() + n_test, order.end());
    std::sort(f.test.begin(), f.test.end());
    std::sort(f.train.begin(), f.train.end());
    plan.folds.push_back(std::move(f));
    break;
  }
  }
  return plan;
}

std::pair<std::vector<int>, std::vector<int>> carve_validation(
    const data::Dataset &ds, const std::vector<int> &train, double fraction,
    std::uint64_t seed) {
  std::map<std::string, std::vector<int>> by_ramp;
  for (const int i: train) {
    by_ramp[ds.records[i].ramp_id].push_back(i);
  }
  if (by_ramp.size() < 2 || fraction <= 0.0) {
    return { train, {} };
  }
  std::vector<const std::vector<int> *> groups;
  for (const auto &[ramp, rows]: by_ramp) {
    groups.push_back(&rows);
  }
  models::Rng rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);
  const double target = fraction * static_cast<double>(train.size());
  std::set<int> val;
  for (std::size_t g = 0; g + 1 < groups.size() && static_cast<double>(val.size()) < target;
       ++g) {
    val.insert(groups[g]->begin(), groups[g]->end());
  }
  std::vector<int> kept;
  for (const int i: train) {
    if (!val.count(i)) {
      kept.push_back(i);
    }
  }
  return { kept, std::vector<int>(val.begin(), val.end()) };
}

MseResult mse(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols() || pred.cols() != 3) {
    throw ShapeMismatch("mse expects two (n x 3) matrices");
  }
  MseResult m;
  if (pred.rows() == 0) {
    return m;
  }
  const Eigen::ArrayXXd sq = (pred - truth).array().square();
  for (int t = 0; t < 3; ++t) {
    m.per_target[t] = sq.col(t).mean();
  }
  m.pooled = sq.mean();
  return m;
}

Eigen::MatrixXd ensemble_combine(const Eigen::MatrixXd &pred_a,
                                 const Eigen::MatrixXd &pred_b,
                                 const Eigen::VectorXd &var_a,
                                 const Eigen::VectorXd &var_b, double epsilon) {
  if (pred_a.rows() != pred_b.rows() || pred_a.cols() != pred_b.cols()
      || var_a.size() != pred_a.rows() || var_b.size() != pred_a.rows()) {
    throw ShapeMismatch("ensemble inputs disagree in shape");
  }
  Eigen::MatrixXd out(pred_a.rows(), pred_a.cols());
  for (Eigen::Index i = 0; i < pred_a.rows(); ++i) {
    const double wa = 1.0 / (var_a(i) + epsilon);
    const double wb = 1.0 / (var_b(i) + epsilon);
    out.row(i) = (wa * pred_a.row(i) + wb * pred_b.row(i)) / (wa + wb);
  }
  return out;
}

Eigen::VectorXd prediction_variance(const Eigen::MatrixXd &pred, VarianceMode mode) {
  Eigen::VectorXd v(pred.rows());
  if (mode == VarianceMode::kPerFold) {
    const double mean = pred.size() > 0 ? pred.mean() : 0.0;
    const double var =
        pred.size() > 0 ? (pred.array() - mean).square().mean() : 0.0;
    v.setConstant(var);
    return v;
  }
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    const double mean = pred.row(i).mean();
    v(i) = (pred.row(i).array() - mean).square().mean();
  }
  return v;
}

double sample_std(const std::vector<double> &values) {
  if (values.size() < 2) {
    return 0.0;
  }
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v: values) {
    ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::string method_label(std::string_view method) {
  if (method == "gbdt") {
    return "GBDT (Multi-Output Descriptor)";
  }
  if (method == "deepmodel") {
    return "DeepModel (SwiGLU + Transformer)";
  }
  if (method == "ensemble") {
    return "Ensemble (Inverse-Variance Weighted)";
  }
  if (method == "mlp") {
    return "MLP (plain DeepModel)";
  }
  if (method == "gnn") {
    return "GNN (Graph Attention + DRFP)";
  }
  return std::string(method);
}

BenchmarkReport run_benchmark(const data::Dataset &ds, const models::PreparedData &data,
                              const BenchmarkOptions &options) {
  for (const auto &m: options.methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m)
        == known_methods().end()) {
      throw Error("unknown method '" + m + "'");
    }
  }
  if (options.jobs < 1) {
    throw Error("jobs must be at least 1");
  }
  BenchmarkReport report;
  report.dataset_digest = ds.digest;
  report.subset = data::to_string(ds.subset);
  report.protocol = options.protocol;
  report.seed = options.seed;
  report.settings = options.settings.to_json();
  report.truth = data.targets;
  for (const auto &r: ds.records) {
    report.row_solvent.push_back(row_solvent_label(r));
  }
  report.warnings = ds.warnings;

  std::vector<std::string> base;
  bool want_ensemble = false;
  for (const auto &m: options.methods) {
    if (m == "ensemble") {
      want_ensemble = true;
    } else if (std::find(base.begin(), base.end(), m) == base.end()) {
      base.push_back(m);
    }
  }
  std::string partner;
  if (want_ensemble) {
    const bool has_gbdt = std::find(base.begin(), base.end(), "gbdt") != base.end();
    for (const char *candidate: { "deepmodel", "gnn", "mlp" }) {
      if (std::find(base.begin(), base.end(), candidate) != base.end()) {
        partner = candidate;
        break;
      }
    }
    if (!has_gbdt || partner.empty()) {
      report.warnings.push_back(
          "ensemble skipped: it needs gbdt and one of deepmodel, gnn, mlp");
      partner.clear();
    }
  }
  report.methods = base;
  if (!partner.empty()) {
    report.methods.push_back("ensemble");
  }

  SplitPlan plan = make_splits(ds, options.protocol, options.seed);
  if (options.max_folds > 0 && static_cast<int>(plan.folds.size()) > options.max_folds) {
    plan.folds.resize(options.max_folds);
  }
  const int n_folds = static_cast<int>(plan.folds.size());
  const int n_methods = static_cast<int>(base.size());

  std::vector<std::pair<std::vector<int>, std::vector<int>>> carved(n_folds);
  for (int f = 0; f < n_folds; ++f) {
    carved[f] = carve_validation(ds, plan.folds[f].train, options.val_fraction,
                                 ad::mix64(options.seed + static_cast<std::uint64_t>(f)));
  }

  // task = fold * n_methods + method
  std::vector<FoldResult> results(static_cast<std::size_t>(n_folds) * n_methods);
  std::vector<Eigen::MatrixXd> raw(results.size());
  std::atomic<std::size_t> next { 0 };
  auto worker = [&]() {
    for (std::size_t task = next++; task < results.size(); task = next++) {
      const int f = static_cast<int>(task / n_methods);
      const std::string &method = base[task % n_methods];
      const Fold &fold = plan.folds[f];
      FoldResult &res = results[task];
      res.fold = f;
      res.group = fold.group;
      res.method = method;
      res.test_rows = fold.test;
      try {
        const auto bundle = models::train_model(
            models::model_kind_from_string(method), options.settings, data,
            carved[f].first, carved[f].second, task_seed(options.seed, f, method));
        raw[task] = bundle.predict(data, fold.test);
        res.predictions = raw[task].cwiseMax(0.0).cwiseMin(1.0);
        res.variance = prediction_variance(raw[task], options.variance);
        res.mse = mse(res.predictions, models::select_rows(data.targets, fold.test));
        res.best_epoch = bundle.training.best_epoch;
        res.epochs = bundle.training.curve.empty()
                         ? 0
                         : bundle.training.curve.back().epoch;
        res.completed = true;
      } catch (const std::exception &e) {
        res.error = e.what();
      }
    }
  };
  std::vector<std::thread> threads;
  const int n_threads = std::min<int>(options.jobs, static_cast<int>(results.size()));
  for (int t = 1; t < n_threads; ++t) {
    threads.emplace_back(worker);
  }
  worker();
  for (auto &t: threads) {
    t.join();
  }

  for (const auto &m: base) {
    const int mi = static_cast<int>(std::find(base.begin(), base.end(), m) - base.begin());
    for (int f = 0; f < n_folds; ++f) {
      report.folds.push_back(results[static_cast<std::size_t>(f) * n_methods + mi]);
    }
  }
  if (!partner.empty()) {
    const int gi = static_cast<int>(std::find(base.begin(), base.end(), "gbdt") - base.begin());
    const int pi = static_cast<int>(std::find(base.begin(), base.end(), partner) - base.begin());
    for (int f = 0; f < n_folds; ++f) {
      const std::size_t g = static_cast<std::size_t>(f) * n_methods + gi;
      const std::size_t p = static_cast<std::size_t>(f) * n_methods + pi;
      FoldResult res;
      res.fold = f;
      res.group = plan.folds[f].group;
      res.method = "ensemble";
      res.test_rows = plan.folds[f].test;
      if (results[g].completed && results[p].completed) {
        const auto combined = ensemble_combine(raw[g], raw[p], results[g].variance,
                                               results[p].variance);
        res.predictions = combined.cwiseMax(0.0).cwiseMin(1.0);
        res.variance = prediction_variance(combined, options.variance);
        res.mse = mse(res.predictions,
                      models::select_rows(data.targets, plan.folds[f].test));
        res.completed = true;
      } else {
        res.error = "ensemble member failed on this fold";
      }
      report.folds.push_back(std::move(res));
    }
  }

  for (const auto &m: report.methods) {
    std::vector<const FoldResult *> folds;
    for (const auto &f: report.folds) {
      if (f.method == m) {
        folds.push_back(&f);
      }
    }
    std::string digest;
    if (m == "ensemble") {
      nlohmann::json j { { "gbdt", options.settings.for_kind(models::ModelKind::kGbdt) },
                         { "partner", options.settings.for_kind(
                                          models::model_kind_from_string(partner)) },
                         { "epsilon", kEnsembleEpsilon },
                         { "variance", options.variance == VarianceMode::kPerRow
                                           ? "per_row"
                                           : "per_fold" } };
      digest = digest_string(j.dump());
    } else {
      digest = models::config_digest(options.settings, models::model_kind_from_string(m));
    }
    report.summaries.push_back(summarize(m, digest, folds, ds));
  }

  report.metadata = {
    { "tool_version", std::string(kToolVersion) },
    { "prediction_clamp", "baseline predictions clamped to [0, 1] before scoring" },
    { "ensemble_partner", partner },
    { "ensemble_epsilon", kEnsembleEpsilon },
    { "variance_mode",
      options.variance == VarianceMode::kPerRow ? "per_row" : "per_fold" },
    { "validation_fraction", options.val_fraction },
    { "yields_were_percent", ds.yields_were_percent },
    { "folds", n_folds },
    { "rows", ds.size() },
  };
  return report;
}

bool BenchmarkReport::complete() const {
  return std::all_of(folds.begin(), folds.end(),
                     [](const FoldResult &f) { return f.completed; });
}

nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json j;
  j["tool_version"] = std::string(kToolVersion);
  j["dataset_digest"] = dataset_digest;
  j["subset"] = subset;
  j["protocol"] = to_string(protocol);
  j["seed"] = seed;
  j["settings"] = settings;
  j["methods"] = methods;
  j["complete"] = complete();
  j["warnings"] = warnings;
  j["metadata"] = metadata;
  j["summary"] = nlohmann::json::array();
  for (const auto &s: summaries) {
    j["summary"].push_back(summary_json(s));
  }
  j["folds"] = nlohmann::json::array();
  for (const auto &f: folds) {
    nlohmann::json jf { { "fold", f.fold },
                        { "group", f.group },
                        { "method", f.method },
                        { "completed", f.completed },
                        { "test_rows", f.test_rows.size() } };
    if (f.completed) {
      jf["mse"] = mse_json(f.mse);
      jf["best_epoch"] = f.best_epoch;
      jf["epochs"] = f.epochs;
    } else {
      jf["error"] = f.error;
    }
    j["folds"].push_back(std::move(jf));
  }
  return j;
}

std::string BenchmarkReport::to_text() const {
  std::ostringstream out;
  out << "solvflow benchmark (" << kToolVersion << ")\n"
      << "dataset " << dataset_digest << "  subset " << subset << "  protocol "
      << to_string(protocol) << "  seed " << seed << "\n\n";
  std::vector<std::vector<std::string>> table {
    { "Method", "Folds", "MSE (mean +- std)", "SM", "P2", "P3", "Config" }
  };
  for (const auto &s: summaries) {
    table.push_back({ s.label, std::to_string(s.completed) + "/" + std::to_string(s.folds),
                      fixed(s.mean) + " +- " + fixed(s.std), fixed(s.per_target_mean[0]),
                      fixed(s.per_target_mean[1]), fixed(s.per_target_mean[2]),
                      s.config_digest });
  }
  out << render_table(table);

  if (!summaries.empty()) {
    std::set<std::string> solvents;
    for (const auto &s: summaries) {
      for (const auto &[name, v]: s.per_solvent) {
        solvents.insert(name);
      }
    }
    std::vector<std::vector<std::string>> by_solvent;
    std::vector<std::string> header { "Solvent" };
    for (const auto &s: summaries) {
      header.push_back(s.method);
    }
    by_solvent.push_back(header);
    for (const auto &name: solvents) {
      std::vector<std::string> row { name };
      for (const auto &s: summaries) {
        const auto it = s.per_solvent.find(name);
        row.push_back(it == s.per_solvent.end() ? "-" : fixed(it->second));
      }
      by_solvent.push_back(std::move(row));
    }
    out << "\nPer-solvent MSE\n" << render_table(by_solvent);
  }
  for (const auto &f: folds) {
    if (!f.completed) {
      out << "\nfold " << f.fold << " (" << f.group << ") " << f.method
          << " failed: " << f.error;
    }
  }
  for (const auto &w: warnings) {
    out << "\nwarning: " << w;
  }
  out << "\n";
  return out.str();
}

std::string BenchmarkReport::residual_csv() const {
  static const char *kTargets[3] = { "sm", "p2", "p3" };
  std::string out = "true,predicted,residual,method,solvent,protocol,fold,row,target\n";
  char buf[64];
  for (const auto &f: folds) {
    if (!f.completed) {
      continue;
    }
    for (std::size_t k = 0; k < f.test_rows.size(); ++k) {
      const int row = f.test_rows[k];
      for (int t = 0; t < 3; ++t) {
        const double truth_v = truth(row, t);
        const double pred = f.predictions(k, t);
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g", truth_v, pred, truth_v - pred);
        out += buf;
        out += ',' + f.method + ',' + csv::escape(row_solvent[row]) + ','
               + to_string(protocol) + ',' + std::to_string(f.fold) + ','
               + std::to_string(row + 1) + ',' + kTargets[t] + '\n';
      }
    }
  }
  return out;
}

std::vector<AblationVariant> ablation_variants(const models::GnnConfig &base) {
  std::vector<AblationVariant> v;
  v.push_back({ "full", "GNN (Full)", base });
  auto drfp = base;
  drfp.use_drfp = false;
  v.push_back({ "no_drfp", "without DRFP features", drfp });
  auto graphs = base;
  graphs.use_reactant_product_graphs = false;
  v.push_back({ "no_reactant_product_graphs", "without reactant/product graphs", graphs });
  auto mixture = base;
  mixture.use_mixture_encoder = false;
  v.push_back({ "no_mixture_encoder", "without learned mixture encoding", mixture });
  auto attention = base;
  attention.use_attention = false;
  v.push_back({ "no_attention", "without multi-head attention", attention });
  return v;
}

AblationReport ablation_suite(const data::Dataset &ds, const models::PreparedData &data,
                              const BenchmarkOptions &options) {
  AblationReport report;
  report.dataset_digest = ds.digest;
  report.subset = data::to_string(ds.subset);
  report.protocol = options.protocol;
  report.seed = options.seed;
  report.warnings = ds.warnings;
  for (const auto &variant: ablation_variants(options.settings.gnn)) {
    BenchmarkOptions o = options;
    o.methods = { "gnn" };
    o.settings.gnn = variant.config;
    const auto r = run_benchmark(ds, data, o);
    AblationRow row;
    row.variant = variant;
    row.summary = r.summaries.at(0);
    row.summary.label = variant.label;
    row.config_digest = row.summary.config_digest;
    for (const auto &f: r.folds) {
      row.fold_mse.push_back(f.completed ? f.mse.pooled : std::nan(""));
    }
    report.rows.push_back(std::move(row));
  }
  report.metadata = {
    { "tool_version", std::string(kToolVersion) },
    { "validation_fraction", options.val_fraction },
    { "yields_were_percent", ds.yields_were_percent },
    { "rows", ds.size() },
    { "settings", options.settings.to_json() },
  };
  return report;
}

bool AblationReport::complete() const {
  return std::all_of(rows.begin(), rows.end(), [](const AblationRow &r) {
    return r.summary.completed == r.summary.folds;
  });
}

nlohmann::json AblationReport::to_json() const {
  nlohmann::json j;
  j["tool_version"] = std::string(kToolVersion);
  j["dataset_digest"] = dataset_digest;
  j["subset"] = subset;
  j["protocol"] = to_string(protocol);
  j["seed"] = seed;
  j["complete"] = complete();
  j["warnings"] = warnings;
  j["metadata"] = metadata;
  j["variants"] = nlohmann::json::array();
  const double full = rows.empty() ? 0.0 : rows.front().summary.mean;
  for (const auto &r: rows) {
    nlohmann::json fold_mse = nlohmann::json::array();
    for (const double v: r.fold_mse) {
      fold_mse.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json());
    }
    nlohmann::json jr { { "key", r.variant.key },
                        { "label", r.variant.label },
                        { "config_digest", r.config_digest },
                        { "config", r.variant.config.to_json() },
                        { "fusion_width", models::fusion_width(r.variant.config) },
                        { "folds", r.summary.folds },
                        { "completed_folds", r.summary.completed },
                        { "mse_mean", r.summary.mean },
                        { "mse_std", r.summary.std },
                        { "fold_mse", fold_mse } };
    if (r.variant.key != "full") {
      jr["worse_than_full"] = r.summary.mean > full;
    }
    j["variants"].push_back(std::move(jr));
  }
  return j;
}

std::string AblationReport::to_text() const {
  std::ostringstream out;
  out << "solvflow ablation (" << kToolVersion << ")\n"
      << "dataset " << dataset_digest << "  subset " << subset << "  protocol "
      << to_string(protocol) << "  seed " << seed << "\n\n";
  std::vector<std::vector<std::string>> table {
    { "Model Variant", "Folds", "MSE (mean +- std)", "Fusion width", "Config" }
  };
  for (const auto &r: rows) {
    table.push_back({ r.variant.label,
                      std::to_string(r.summary.completed) + "/"
                          + std::to_string(r.summary.folds),
                      fixed(r.summary.mean) + " +- " + fixed(r.summary.std),
                      std::to_string(models::fusion_width(r.variant.config)),
                      r.config_digest });
  }
  out << render_table(table);
  for (const auto &w: warnings) {
    out << "\nwarning: " << w;
  }
  out << "\n";
  return out.str();
}

}  // namespace solvflow::eval
