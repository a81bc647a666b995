//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "commands.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "solvflow/checkpoint.h"
#include "solvflow/csv.h"
#include "solvflow/data.h"
#include "solvflow/descriptors.h"
#include "solvflow/digest.h"
#include "solvflow/drfp.h"
#include "solvflow/eval.h"
#include "solvflow/models/train.h"
#include "solvflow/synthetic.h"

namespace solvflow::cli {
namespace {

namespace fs = std::filesystem;

// Raised for invalid flag combinations found after parsing.
class UsageError: public Error {
public:
  using Error::Error;
};

struct DataOptions {
  std::string data;
  std::string mapping;
  std::string subset = "custom";
  std::string smiles_table;
  std::string spange;
  std::string acs;
  int acs_components = 5;
  std::string drfp_table;
  bool synthetic = false;
  int synthetic_solvents = 6;
  bool synthetic_mixtures = false;
  int synthetic_points = 10;
};

struct RunOptions {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string config;
  std::vector<std::string> sets;
};

void add_data_options(CLI::App &cmd, DataOptions &o) {
  cmd.add_option("--data", o.data, "Dataset CSV")->check(CLI::ExistingFile);
  cmd.add_option("--mapping", o.mapping, "Column mapping file (key = value)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--subset", o.subset,
                 "mixtures, single_solvents, ether_transfer or custom");
  cmd.add_option("--smiles-table", o.smiles_table,
                 "Solvent name,smiles table used when the data has no SMILES")
      ->check(CLI::ExistingFile);
  cmd.add_option("--spange", o.spange, "Spange descriptor table (CSV)")
      ->check(CLI::ExistingFile);
  cmd.add_option("--acs", o.acs, "ACS solvent descriptor table, reduced by PCA")
      ->check(CLI::ExistingFile);
  cmd.add_option("--acs-components", o.acs_components, "PCA components kept");
  cmd.add_option("--drfp-table", o.drfp_table, "Per-solvent fingerprint table")
      ->check(CLI::ExistingFile);
  cmd.add_flag("--synthetic", o.synthetic, "Use a generated kinetic dataset");
  cmd.add_option("--synthetic-solvents", o.synthetic_solvents);
  cmd.add_flag("--synthetic-mixtures", o.synthetic_mixtures);
  cmd.add_option("--synthetic-points", o.synthetic_points);
}

void add_run_options(CLI::App &cmd, RunOptions &o) {
  cmd.add_option("--seed", o.seed, "Random seed");
  cmd.add_option("--out", o.out, "Output directory");
  cmd.add_option("--config", o.config, "Settings JSON file")->check(CLI::ExistingFile);
  cmd.add_option("--set", o.sets, "Override a setting, e.g. gnn.hidden=128");
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << text;
}

fs::path prepare_out_dir(const std::string &dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

// Every loaded piece a command needs, kept at stable addresses.
struct Workspace {
  data::Dataset ds;
  std::optional<descriptors::DescriptorTable> spange;
  std::optional<descriptors::DescriptorTable> acs;
  std::optional<descriptors::DescriptorTable> drfp;
  descriptors::TableSet tables;
  models::GraphCache graphs;
  models::PreparedData prepared;
  nlohmann::json sources;
};

std::unique_ptr<Workspace> load_workspace(const DataOptions &o, std::uint64_t seed) {
  auto ws = std::make_unique<Workspace>();
  if (o.synthetic) {
    if (!o.data.empty()) {
      throw UsageError("--synthetic and --data are mutually exclusive");
    }
    synthetic::SyntheticOptions so;
    so.solvents = o.synthetic_solvents;
    so.mixtures = o.synthetic_mixtures;
    so.points_per_ramp = o.synthetic_points;
    so.seed = seed;
    ws->ds = synthetic::make_dataset(so);
    ws->sources["dataset"] = "synthetic";
  } else {
    if (o.data.empty()) {
      throw UsageError("--data is required (or --synthetic)");
    }
    std::optional<data::ColumnMapping> mapping;
    if (!o.mapping.empty()) {
      mapping = data::ColumnMapping::load(o.mapping);
    }
    const fs::path smiles_path = o.smiles_table.empty()
                                     ? fs::path(SOLVFLOW_RESOURCE_DIR) / "solvents.csv"
                                     : fs::path(o.smiles_table);
    std::map<std::string, std::string> lookup;
    if (fs::exists(smiles_path)) {
      lookup = data::load_smiles_table(smiles_path);
    }
    data::LoadOptions lo;
    lo.mapping = mapping ? &*mapping : nullptr;
    lo.smiles_lookup = &lookup;
    ws->ds = data::load_dataset(o.data, data::subset_from_string(o.subset), lo);
    ws->ds.digest = digest_file(o.data);
    ws->sources["dataset"] = o.data;
    ws->sources["mapping"] = o.mapping.empty() ? "" : digest_file(o.mapping);
  }
  if (!o.spange.empty()) {
    ws->spange = descriptors::DescriptorTable::load_csv(o.spange, "spange");
    ws->sources["spange"] = digest_file(o.spange);
  } else {
    ws->spange = synthetic::structure_table(ws->ds.roster, "structure");
    ws->sources["spange"] = "structure descriptors (no --spange table given)";
  }
  ws->tables.spange = &*ws->spange;
  if (!o.acs.empty()) {
    const auto raw = descriptors::DescriptorTable::load_csv(o.acs, "acs");
    ws->acs = descriptors::reduce_table(raw, o.acs_components, "acs_pca");
    ws->tables.acs_pca = &*ws->acs;
    ws->sources["acs"] = digest_file(o.acs);
  }
  if (!o.drfp_table.empty()) {
    ws->drfp = descriptors::DescriptorTable::load_csv(o.drfp_table, "drfp");
    ws->tables.drfp = &*ws->drfp;
    ws->sources["drfp_table"] = digest_file(o.drfp_table);
  }
  ws->sources["yields_were_percent"] = ws->ds.yields_were_percent;
  ws->prepared = models::prepare_data(ws->ds, ws->tables, ws->graphs);
  return ws;
}

models::ModelSettings load_settings(const RunOptions &o) {
  models::ModelSettings s;
  if (!o.config.empty()) {
    try {
      s = models::ModelSettings::from_json(nlohmann::json::parse(read_text(o.config)));
    } catch (const nlohmann::json::exception &e) {
      throw UsageError("bad --config file: " + std::string(e.what()));
    }
  }
  for (const auto &assignment: o.sets) {
    try {
      s.apply_override(assignment);
    } catch (const Error &e) {
      throw UsageError(e.what());
    }
  }
  return s;
}

std::string provenance_lines(std::uint64_t seed, const std::string &config_digest,
                             const std::string &dataset_digest) {
  return "# tool_version=" + std::string(kToolVersion) + "\n# seed="
         + std::to_string(seed) + "\n# config_digest=" + config_digest
         + "\n# dataset_digest=" + dataset_digest + "\n";
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = csv::trim(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

// --- fingerprint -----------------------------------------------------------

struct FingerprintOptions {
  std::string input;
  std::string output;
  int radius = drfp::kDefaultRadius;
  int width = drfp::kDefaultWidth;
};

int cmd_fingerprint(const FingerprintOptions &o, std::ostream &out) {
  const std::string text = read_text(o.input);
  const auto rows = csv::parse(text);
  int column = 0;
  std::size_t first = 0;
  if (!rows.empty()) {
    for (std::size_t c = 0; c < rows[0].size(); ++c) {
      if (csv::trim(rows[0][c]) == "reaction") {
        column = static_cast<int>(c);
        first = 1;
      }
    }
  }
  const std::string config = "radius=" + std::to_string(o.radius)
                             + ";width=" + std::to_string(o.width);
  std::string result = "# tool_version=" + std::string(kToolVersion)
                       + "\n# config_digest=" + digest_string(config)
                       + "\n# input_digest=" + digest_string(text) + "\n"
                       + "row,reaction,fingerprint\n";
  for (std::size_t i = first; i < rows.size(); ++i) {
    if (column >= static_cast<int>(rows[i].size())) {
      throw Error("row " + std::to_string(i + 1) + " has no reaction field");
    }
    const std::string reaction = csv::trim(rows[i][column]);
    const auto [lhs, rhs] = drfp::split_reaction_smiles(reaction);
    drfp::Fingerprint fp;
    try {
      fp = drfp::drfp_fingerprint(lhs, rhs, o.radius, o.width);
    } catch (const Error &e) {
      throw Error("row " + std::to_string(i + 1 - first) + ": " + e.what());
    }
    result += std::to_string(i + 1 - first) + "," + csv::escape(reaction) + ","
              + fp.to_hex() + "\n";
  }
  if (o.output.empty() || o.output == "-") {
    out << result;
  } else {
    write_text(o.output, result);
  }
  return kExitOk;
}

// --- validate --------------------------------------------------------------

int cmd_validate(const DataOptions &d, const RunOptions &r, std::ostream &out) {
  const auto ws = load_workspace(d, r.seed);
  std::vector<const descriptors::DescriptorTable *> tables { ws->tables.spange,
                                                             ws->tables.acs_pca,
                                                             ws->tables.drfp };
  const auto report = data::validate_dataset(ws->ds, tables);
  nlohmann::json j = report.to_json();
  j["tool_version"] = std::string(kToolVersion);
  j["dataset_digest"] = ws->ds.digest;
  j["rows"] = ws->ds.size();
  j["solvents"] = ws->ds.roster.size();
  j["warnings"] = ws->ds.warnings;
  j["sources"] = ws->sources;
  const std::string text = j.dump(2) + "\n";
  const fs::path dir = prepare_out_dir(r.out);
  write_text(dir / "validation.json", text);
  out << text;
  return kExitOk;
}

// --- train / predict -------------------------------------------------------

int cmd_train(const DataOptions &d, const RunOptions &r, const std::string &method,
              double val_fraction, std::ostream &out) {
  const auto settings = load_settings(r);
  const auto kind = models::model_kind_from_string(method);
  const auto ws = load_workspace(d, r.seed);
  std::vector<int> all(ws->ds.size());
  std::iota(all.begin(), all.end(), 0);
  const auto [train, val] = eval::carve_validation(ws->ds, all, val_fraction, r.seed);
  const auto bundle = models::train_model(kind, settings, ws->prepared, train, val, r.seed);

  const fs::path dir = prepare_out_dir(r.out);
  const std::string stem = method + "_seed" + std::to_string(r.seed);
  const std::string digest = bundle.config_digest();
  nlohmann::json metadata { { "seed", r.seed },
                            { "dataset_digest", ws->ds.digest },
                            { "tool_version", std::string(kToolVersion) },
                            { "sources", ws->sources },
                            { "train_rows", train.size() },
                            { "val_rows", val.size() } };
  save_checkpoint(bundle, static_cast<int>(ws->prepared.baseline.cols()), metadata,
                  dir / (stem + ".svck"));

  std::string curve = provenance_lines(r.seed, digest, ws->ds.digest)
                      + "epoch,train_loss,val_loss,lr\n";
  char buf[128];
  for (const auto &p: bundle.training.curve) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", p.epoch, p.train_loss,
                  p.val_loss, p.lr);
    curve += buf;
  }
  write_text(dir / (stem + "_curve.csv"), curve);

  const auto pred = bundle.predict(ws->prepared, train);
  const auto fit = eval::mse(pred, models::select_rows(ws->prepared.targets, train));
  nlohmann::json summary = metadata;
  summary["method"] = method;
  summary["config_digest"] = digest;
  summary["best_epoch"] = bundle.training.best_epoch;
  summary["epochs"] = bundle.training.curve.empty() ? 0 : bundle.training.curve.back().epoch;
  summary["train_mse"] = fit.pooled;
  summary["checkpoint"] = stem + ".svck";
  write_text(dir / (stem + "_train.json"), summary.dump(2) + "\n");
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_predict(const DataOptions &d, const RunOptions &r, const std::string &checkpoint,
                const std::string &expect_digest, std::ostream &out) {
  const auto loaded = load_checkpoint(
      checkpoint, expect_digest.empty() ? std::nullopt
                                        : std::optional<std::string>(expect_digest));
  const auto ws = load_workspace(d, r.seed);
  if (loaded.input_width != ws->prepared.baseline.cols()) {
    throw WidthMismatch("checkpoint expects " + std::to_string(loaded.input_width)
                        + " features, data provides "
                        + std::to_string(ws->prepared.baseline.cols()));
  }
  std::vector<int> all(ws->ds.size());
  std::iota(all.begin(), all.end(), 0);
  const auto pred = loaded.bundle.predict(ws->prepared, all);
  std::string text = provenance_lines(loaded.bundle.seed, loaded.bundle.config_digest(),
                                      ws->ds.digest)
                     + "row,yield_sm,yield_p2,yield_p3\n";
  char buf[128];
  for (int i = 0; i < pred.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", i + 1, pred(i, 0), pred(i, 1),
                  pred(i, 2));
    text += buf;
  }
  const fs::path dir = prepare_out_dir(r.out);
  write_text(dir / "predictions.csv", text);
  out << "wrote " << (dir / "predictions.csv").string() << "\n";
  return kExitOk;
}

// --- benchmark / ablate ----------------------------------------------------

struct EvalOptions {
  std::string protocol = "loso";
  std::string methods = "gbdt";
  int jobs = 1;
  int max_folds = 0;
  std::string variance = "per_row";
  double val_fraction = 0.15;
};

void add_eval_options(CLI::App &cmd, EvalOptions &o) {
  cmd.add_option("--protocol", o.protocol, "loso, loro or random")
      ->check(CLI::IsMember({ "loso", "loro", "random" }));
  cmd.add_option("--jobs", o.jobs, "Folds trained in parallel")->check(CLI::PositiveNumber);
  cmd.add_option("--max-folds", o.max_folds, "Run only the first N folds");
  cmd.add_option("--variance", o.variance, "Ensemble variance: per_row or per_fold")
      ->check(CLI::IsMember({ "per_row", "per_fold" }));
  cmd.add_option("--val-fraction", o.val_fraction, "Early-stopping validation share");
}

eval::BenchmarkOptions benchmark_options(const EvalOptions &e, const RunOptions &r) {
  eval::BenchmarkOptions b;
  b.protocol = eval::protocol_from_string(e.protocol);
  b.methods = split_list(e.methods);
  if (b.methods.empty()) {
    throw UsageError("--methods is empty");
  }
  for (const auto &m: b.methods) {
    if (m != "gbdt" && m != "deepmodel" && m != "ensemble" && m != "gnn" && m != "mlp") {
      throw UsageError("unknown method '" + m + "'");
    }
  }
  b.seed = r.seed;
  b.jobs = e.jobs;
  b.max_folds = e.max_folds;
  b.variance =
      e.variance == "per_fold" ? eval::VarianceMode::kPerFold : eval::VarianceMode::kPerRow;
  b.val_fraction = e.val_fraction;
  b.settings = load_settings(r);
  return b;
}

int cmd_benchmark(const DataOptions &d, const RunOptions &r, const EvalOptions &e,
                  std::ostream &out) {
  const auto options = benchmark_options(e, r);
  const auto ws = load_workspace(d, r.seed);
  auto report = eval::run_benchmark(ws->ds, ws->prepared, options);
  report.metadata["sources"] = ws->sources;
  const fs::path dir = prepare_out_dir(r.out);
  const std::string stem = e.protocol + "_seed" + std::to_string(r.seed);
  write_text(dir / ("benchmark_" + stem + ".json"), report.to_json().dump(2) + "\n");
  const std::string text = report.to_text();
  write_text(dir / ("benchmark_" + stem + ".txt"), text);
  std::string residuals = "# tool_version=" + std::string(kToolVersion) + "\n# seed="
                          + std::to_string(r.seed) + "\n# dataset_digest="
                          + ws->ds.digest + "\n";
  for (const auto &s: report.summaries) {
    residuals += "# config_digest[" + s.method + "]=" + s.config_digest + "\n";
  }
  residuals += report.residual_csv();
  write_text(dir / ("residuals_" + stem + ".csv"), residuals);
  out << text;
  return report.complete() ? kExitOk : kExitFailure;
}

int cmd_ablate(const DataOptions &d, const RunOptions &r, const EvalOptions &e,
               std::ostream &out) {
  EvalOptions copy = e;
  copy.methods = "gnn";
  const auto options = benchmark_options(copy, r);
  const auto ws = load_workspace(d, r.seed);
  auto report = eval::ablation_suite(ws->ds, ws->prepared, options);
  report.metadata["sources"] = ws->sources;
  const fs::path dir = prepare_out_dir(r.out);
  const std::string stem = e.protocol + "_seed" + std::to_string(r.seed);
  write_text(dir / ("ablation_" + stem + ".json"), report.to_json().dump(2) + "\n");
  const std::string text = report.to_text();
  write_text(dir / ("ablation_" + stem + ".txt"), text);
  out << text;
  return report.complete() ? kExitOk : kExitFailure;
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app { "solvflow: reaction yield prediction over solvent mixtures" };
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  FingerprintOptions fp;
  auto *fingerprint = app.add_subcommand("fingerprint", "DRFP fingerprints of reactions");
  fingerprint->add_option("--input", fp.input, "Reaction SMILES, one per row")
      ->required()
      ->check(CLI::ExistingFile);
  fingerprint->add_option("--output", fp.output, "Output CSV ('-' for stdout)");
  fingerprint->add_option("--radius", fp.radius)->check(CLI::Range(0, 8));
  fingerprint->add_option("--width", fp.width)
      ->check(CLI::Validator(
          [](const std::string &s) {
            const long v = std::strtol(s.c_str(), nullptr, 10);
            return v > 0 && (v & (v - 1)) == 0 ? std::string()
                                                : "width must be a power of two";
          },
          "POW2"));

  DataOptions data_opts;
  RunOptions run_opts;
  EvalOptions eval_opts;
  std::string method = "gnn";
  double train_val_fraction = 0.15;
  std::string checkpoint;
  std::string expect_digest;

  auto *validate = app.add_subcommand("validate", "Check a dataset");
  add_data_options(*validate, data_opts);
  add_run_options(*validate, run_opts);

  auto *train = app.add_subcommand("train", "Train one model on a dataset");
  add_data_options(*train, data_opts);
  add_run_options(*train, run_opts);
  train->add_option("--method", method, "gnn, deepmodel, mlp or gbdt")
      ->check(CLI::IsMember({ "gnn", "deepmodel", "mlp", "gbdt" }));
  train->add_option("--val-fraction", train_val_fraction);

  auto *predict = app.add_subcommand("predict", "Predict yields from a checkpoint");
  add_data_options(*predict, data_opts);
  add_run_options(*predict, run_opts);
  predict->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  predict->add_option("--expect-digest", expect_digest,
                      "Refuse checkpoints with another config digest");

  auto *benchmark = app.add_subcommand("benchmark", "Cross-validated comparison");
  add_data_options(*benchmark, data_opts);
  add_run_options(*benchmark, run_opts);
  add_eval_options(*benchmark, eval_opts);
  benchmark->add_option("--methods", eval_opts.methods,
                        "Comma list of gbdt, deepmodel, ensemble, gnn, mlp");

  auto *ablate = app.add_subcommand("ablate", "GNN component ablations");
  add_data_options(*ablate, data_opts);
  add_run_options(*ablate, run_opts);
  add_eval_options(*ablate, eval_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fingerprint) {
      return cmd_fingerprint(fp, out);
    }
    if (*validate) {
      return cmd_validate(data_opts, run_opts, out);
    }
    if (*train) {
      return cmd_train(data_opts, run_opts, method, train_val_fraction, out);
    }
    if (*predict) {
      return cmd_predict(data_opts, run_opts, checkpoint, expect_digest, out);
    }
    if (*benchmark) {
      return cmd_benchmark(data_opts, run_opts, eval_opts, out);
    }
    if (*ablate) {
      return cmd_ablate(data_opts, run_opts, eval_opts, out);
    }
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace solvflow::cli
