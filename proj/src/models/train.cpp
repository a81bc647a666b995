//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/models/train.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "solvflow/digest.h"
#include "solvflow/drfp.h"

namespace solvflow::models {
namespace {

constexpr int kEvalChunk = 256;

ad::Mat<float> to_float(const Eigen::MatrixXd &m) {
  return m.cast<float>();
}

double mse_of(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth) {
  return (pred - truth).array().square().mean();
}

template <class F>
Eigen::MatrixXd predict_chunked(std::span<const int> rows, F &&predict_chunk) {
  Eigen::MatrixXd out(rows.size(), 3);
  for (std::size_t start = 0; start < rows.size(); start += kEvalChunk) {
    const std::size_t n = std::min<std::size_t>(kEvalChunk, rows.size() - start);
    out.middleRows(start, n) = predict_chunk(rows.subspan(start, n));
  }
  return out;
}

}  // namespace

NonFiniteLoss::NonFiniteLoss(int epoch, double value)
    : Error("non-finite training loss " + std::to_string(value) + " at epoch "
            + std::to_string(epoch)),
      epoch_(epoch) {}

std::string to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::kGnn:
    return "gnn";
  case ModelKind::kDeep:
    return "deepmodel";
  case ModelKind::kMlp:
    return "mlp";
  case ModelKind::kGbdt:
    break;
  }
  return "gbdt";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (const ModelKind k: { ModelKind::kGnn, ModelKind::kDeep, ModelKind::kMlp,
                            ModelKind::kGbdt }) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw Error("unknown model kind '" + std::string(name) + "'");
}

TrainConfig TrainConfig::gnn_defaults() {
  TrainConfig c;
  c.lr = 3e-4;
  c.early_stop_patience = 0;
  c.plateau = true;
  return c;
}

TrainConfig TrainConfig::deep_defaults() {
  return TrainConfig {};
}

nlohmann::json TrainConfig::to_json() const {
  return {
    { "max_epochs", max_epochs },
    { "batch_size", batch_size },
    { "lr", lr },
    { "weight_decay", weight_decay },
    { "clip_norm", clip_norm },
    { "early_stop_patience", early_stop_patience },
    { "plateau", plateau },
    { "plateau_factor", plateau_factor },
    { "plateau_patience", plateau_patience },
  };
}

TrainConfig TrainConfig::from_json(const nlohmann::json &j, TrainConfig c) {
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
  c.plateau = j.value("plateau", c.plateau);
  c.plateau_factor = j.value("plateau_factor", c.plateau_factor);
  c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
  if (c.max_epochs < 0 || c.batch_size < 1 || !(c.lr > 0.0)) {
    throw ConfigMismatch("invalid training configuration");
  }
  return c;
}

nlohmann::json ModelSettings::to_json() const {
  return {
    { "gnn", gnn.to_json() },
    { "deepmodel", deep.to_json() },
    { "mlp", mlp.to_json() },
    { "gbdt", gbdt.to_json() },
    { "gnn_train", gnn_train.to_json() },
    { "deep_train", deep_train.to_json() },
  };
}

ModelSettings ModelSettings::from_json(const nlohmann::json &j) {
  ModelSettings s;
  try {
    if (j.contains("gnn")) {
      s.gnn = GnnConfig::from_json(j["gnn"]);
    }
    if (j.contains("deepmodel")) {
      s.deep = DeepModelConfig::from_json(j["deepmodel"]);
    }
    if (j.contains("mlp")) {
      s.mlp = DeepModelConfig::from_json(j["mlp"]);
    }
    if (j.contains("gbdt")) {
      s.gbdt = GbdtConfig::from_json(j["gbdt"]);
    }
    s.gnn_train = TrainConfig::from_json(j.value("gnn_train", nlohmann::json::object()),
                                         TrainConfig::gnn_defaults());
    s.deep_train = TrainConfig::from_json(
        j.value("deep_train", nlohmann::json::object()), TrainConfig::deep_defaults());
  } catch (const nlohmann::json::exception &e) {
    throw ConfigMismatch(std::string("bad settings: ") + e.what());
  }
  s.gnn.validate();
  s.deep.validate();
  s.mlp.validate();
  s.gbdt.validate();
  return s;
}

void ModelSettings::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  nlohmann::json j = to_json();
  nlohmann::json *node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw Error("unknown setting '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) {
      break;
    }
    start = dot + 1;
  }
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &) {
    value = text;
  }
  const bool number_ok = node->is_number() && value.is_number();
  if (!number_ok && node->type() != value.type()) {
    throw Error("setting '" + key + "' expects " + node->type_name() + ", got '"
                + text + "'");
  }
  *node = value;
  *this = from_json(j);
}

nlohmann::json ModelSettings::for_kind(ModelKind kind) const {
  switch (kind) {
  case ModelKind::kGnn:
    return { { "kind", "gnn" }, { "model", gnn.to_json() },
             { "train", gnn_train.to_json() } };
  case ModelKind::kDeep:
    return { { "kind", "deepmodel" }, { "model", deep.to_json() },
             { "train", deep_train.to_json() } };
  case ModelKind::kMlp:
    return { { "kind", "mlp" }, { "model", mlp.to_json() },
             { "train", deep_train.to_json() } };
  case ModelKind::kGbdt:
    break;
  }
  return { { "kind", "gbdt" }, { "model", gbdt.to_json() } };
}

std::string config_digest(const ModelSettings &settings, ModelKind kind) {
  return digest_string(settings.for_kind(kind).dump());
}

PreparedData prepare_data(const data::Dataset &ds,
                          const descriptors::TableSet &tables, GraphCache &graphs) {
  PreparedData p;
  p.dataset = &ds;
  const std::vector<std::string> reactants { ds.reaction.starting_material };
  const std::vector<std::string> products { ds.reaction.product_2,
                                            ds.reaction.product_3 };
  const auto fp = drfp::drfp_fingerprint(reactants, products);

  const int n = ds.size();
  p.targets.resize(n, 3);
  p.conditions.resize(n, 3);
  p.solvent_a.resize(n);
  p.solvent_b.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto &r = ds.records[i];
    const auto features = descriptors::assemble_baseline_features(r, tables, fp);
    if (i == 0) {
      p.baseline.resize(n, features.width());
      p.fingerprint_width = features.n_drfp;
    } else if (features.width() != p.baseline.cols()
               || features.n_drfp != p.fingerprint_width) {
      throw WidthMismatch("row " + std::to_string(i + 1)
                          + " has a different feature layout");
    }
    for (int j = 0; j < features.width(); ++j) {
      p.baseline(i, j) = features.values[j];
    }
    for (int t = 0; t < 3; ++t) {
      p.targets(i, t) = r.yields[t];
    }
    p.conditions(i, 0) = normalize_temperature(r.temperature_c);
    p.conditions(i, 1) = normalize_residence(r.residence_time_s);
    p.conditions(i, 2) = r.solvent_b ? normalize_pct(r.pct_b) : 0.0;
    p.solvent_a[i] = &graphs.get(r.solvent_a.smiles);
    p.solvent_b[i] = r.solvent_b ? &graphs.get(r.solvent_b->smiles) : p.solvent_a[i];
  }
  p.reactants = { &graphs.get(ds.reaction.starting_material),
                  &graphs.get(ds.reaction.product_2),
                  &graphs.get(ds.reaction.product_3) };
  return p;
}

GnnInputs gnn_inputs(const PreparedData &data, std::span<const int> rows,
                     const GnnConfig &config) {
  GnnInputs in;
  const int n = static_cast<int>(rows.size());
  std::map<const featurize::FeaturizedGraph *, int> slot;
  auto index_of = [&](const featurize::FeaturizedGraph *g) {
    const auto [it, inserted] = slot.emplace(g, static_cast<int>(in.solvent_graphs.size()));
    if (inserted) {
      in.solvent_graphs.push_back(g);
    }
    return it->second;
  };
  in.solvent_a.resize(n);
  in.solvent_b.resize(n);
  in.conditions.resize(n, 3);
  for (int k = 0; k < n; ++k) {
    const int r = rows[k];
    in.solvent_a[k] = index_of(data.solvent_a[r]);
    in.solvent_b[k] = index_of(data.solvent_b[r]);
    in.conditions.row(k) = data.conditions.row(r);
  }
  if (config.use_reactant_product_graphs) {
    in.reactant_graphs.assign(data.reactants.begin(), data.reactants.end());
    in.sm.assign(n, 0);
    in.p2.assign(n, 1);
    in.p3.assign(n, 2);
  }
  if (config.use_drfp) {
    const int w = data.fingerprint_width;
    const Eigen::Index offset = data.baseline.cols() - w;
    in.drfp.resize(n, w);
    for (int k = 0; k < n; ++k) {
      in.drfp.row(k) = data.baseline.row(rows[k]).segment(offset, w);
    }
  }
  return in;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd &m, std::span<const int> rows) {
  Eigen::MatrixXd out(rows.size(), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(k) = m.row(rows[k]);
  }
  return out;
}

TrainResult run_training(ad::ParameterStore<float> &store, int n_train,
                         const std::function<ad::Tensor<float>(
                             std::span<const int>, const DropoutContext &)> &batch_loss,
                         const std::function<std::pair<double, double>()> &evaluate,
                         const TrainConfig &config, std::uint64_t seed) {
  if (n_train <= 0) {
    throw InsufficientData("no training rows");
  }
  TrainResult result;
  const auto params = store.all();
  ad::AdamWOptions opt;
  opt.lr = config.lr;
  opt.weight_decay = config.weight_decay;

  const auto [train0, val0] = evaluate();
  result.curve.push_back({ 0, train0, val0, config.lr });
  result.best_val = val0;
  result.best_epoch = 0;
  auto best_params = store.snapshot();
  std::optional<ad::PlateauScheduler> scheduler;
  if (config.plateau) {
    scheduler.emplace(config.lr, config.plateau_factor, config.plateau_patience, 1e-6,
                      val0);
  }

  Rng shuffle_rng(ad::mix64(seed ^ 0x53485546464c45ULL));
  DropoutContext ctx;
  ctx.training = true;
  ctx.seed = ad::mix64(seed + 1);
  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (int start = 0; start < n_train; start += config.batch_size) {
      const int n = std::min(config.batch_size, n_train - start);
      const std::span<const int> batch(order.data() + start, n);
      const auto loss = batch_loss(batch, ctx);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw NonFiniteLoss(epoch, value);
      }
      loss_sum += value * n;
      ad::backward(loss);
      clip_grad_norm<float>(params, config.clip_norm);
      adamw_step<float>(params, opt);
      store.zero_grad();
      ++ctx.step;
    }
    const double train_loss = loss_sum / n_train;
    const double val = evaluate().second;
    if (!std::isfinite(val)) {
      throw NonFiniteLoss(epoch, val);
    }
    if (val < result.best_val) {
      result.best_val = val;
      result.best_epoch = epoch;
      best_params = store.snapshot();
    }
    result.curve.push_back({ epoch, train_loss, val, opt.lr });
    if (scheduler) {
      opt.lr = scheduler->step(val);
    }
    if (config.early_stop_patience > 0
        && epoch - result.best_epoch >= config.early_stop_patience) {
      break;
    }
  }
  store.restore(best_params);
  return result;
}

Eigen::MatrixXd ModelBundle::predict(const PreparedData &data,
                                     std::span<const int> rows) const {
  ad::NoGradGuard no_grad;
  const DropoutContext eval_ctx;
  switch (kind) {
  case ModelKind::kGnn:
    return predict_chunked(rows, [&](std::span<const int> chunk) {
      const auto in = gnn_inputs(data, chunk, gnn->config());
      return Eigen::MatrixXd(gnn->forward(in, eval_ctx).value().cast<double>());
    });
  case ModelKind::kDeep:
  case ModelKind::kMlp:
    return predict_chunked(rows, [&](std::span<const int> chunk) {
      const auto x = scaler.transform(select_rows(data.baseline, chunk));
      const ad::Tensor<float> input(to_float(x));
      return Eigen::MatrixXd(deep->forward(input, eval_ctx).value().cast<double>());
    });
  case ModelKind::kGbdt:
    break;
  }
  return gbdt->predict(select_rows(data.baseline, rows));
}

ModelBundle make_bundle(ModelKind kind, const ModelSettings &settings,
                        std::uint64_t seed, int input_width) {
  ModelBundle b;
  b.kind = kind;
  b.settings = settings;
  b.seed = seed;
  switch (kind) {
  case ModelKind::kGnn:
    b.gnn = std::make_unique<GnnModel<float>>(settings.gnn, seed);
    break;
  case ModelKind::kDeep:
    b.deep = std::make_unique<DeepModel<float>>(settings.deep, input_width, seed);
    break;
  case ModelKind::kMlp:
    b.deep = std::make_unique<DeepModel<float>>(settings.mlp, input_width, seed);
    break;
  case ModelKind::kGbdt:
    break;
  }
  return b;
}

ModelBundle train_model(ModelKind kind, const ModelSettings &settings,
                        const PreparedData &data, std::span<const int> train_rows,
                        std::span<const int> val_rows, std::uint64_t seed) {
  ModelBundle b = make_bundle(kind, settings, seed,
                              static_cast<int>(data.baseline.cols()));
  const std::vector<int> train(train_rows.begin(), train_rows.end());
  const std::vector<int> val = val_rows.empty() ? train
                                                : std::vector<int>(val_rows.begin(),
                                                                   val_rows.end());
  const Eigen::MatrixXd y_train = select_rows(data.targets, train);
  const Eigen::MatrixXd y_val = select_rows(data.targets, val);

  if (kind == ModelKind::kGbdt) {
    std::vector<int> all = train;
    if (!val_rows.empty()) {
      all.insert(all.end(), val_rows.begin(), val_rows.end());
    }
    b.gbdt = gbdt_fit(select_rows(data.baseline, all), select_rows(data.targets, all),
                      settings.gbdt);
    for (std::size_t it = 0; it < b.gbdt->train_mse.size(); ++it) {
      b.training.curve.push_back({ static_cast<int>(it + 1), b.gbdt->train_mse[it],
                                   0.0, settings.gbdt.learning_rate });
    }
    return b;
  }

  const auto y_train_f = to_float(y_train);
  std::function<ad::Tensor<float>(std::span<const int>, const DropoutContext &)> loss;
  TrainConfig config;
  if (kind == ModelKind::kGnn) {
    config = settings.gnn_train;
    loss = [&](std::span<const int> positions, const DropoutContext &ctx) {
      std::vector<int> rows(positions.size());
      ad::Mat<float> target(positions.size(), 3);
      for (std::size_t k = 0; k < positions.size(); ++k) {
        rows[k] = train[positions[k]];
        target.row(k) = y_train_f.row(positions[k]);
      }
      const auto in = gnn_inputs(data, rows, b.gnn->config());
      return ad::mse_loss(b.gnn->forward(in, ctx), target);
    };
  } else {
    config = settings.deep_train;
    b.scaler.fit(select_rows(data.baseline, train));
    const ad::Mat<float> x_train = to_float(b.scaler.transform(select_rows(data.baseline, train)));
    loss = [&, x_train](std::span<const int> positions, const DropoutContext &ctx) {
      ad::Mat<float> x(positions.size(), x_train.cols());
      ad::Mat<float> target(positions.size(), 3);
      for (std::size_t k = 0; k < positions.size(); ++k) {
        x.row(k) = x_train.row(positions[k]);
        target.row(k) = y_train_f.row(positions[k]);
      }
      return ad::mse_loss(b.deep->forward(ad::Tensor<float>(std::move(x)), ctx), target);
    };
  }
  auto evaluate = [&]() {
    const double val_loss = mse_of(b.predict(data, val), y_val);
    const double train_loss =
        val_rows.empty() ? val_loss : mse_of(b.predict(data, train), y_train);
    return std::make_pair(train_loss, val_loss);
  };
  bool first = true;
  auto evaluate_once = [&]() {
    // the training loss only needs an eval-mode pass for epoch 0
    if (first) {
      first = false;
      return evaluate();
    }
    const double val_loss = mse_of(b.predict(data, val), y_val);
    return std::make_pair(val_loss, val_loss);
  };
  ad::ParameterStore<float> &store =
      kind == ModelKind::kGnn ? b.gnn->parameters() : b.deep->parameters();
  b.training = run_training(store, static_cast<int>(train.size()), loss,
                            evaluate_once, config, seed);
  return b;
}

}  // namespace solvflow::models
