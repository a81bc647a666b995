//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "fixtures.h"
#include "solvflow/checkpoint.h"

using namespace solvflow;
using namespace solvflow::models;
namespace fs = std::filesystem;

namespace {

// One scalar parameter pulled towards 1.
struct Toy {
  ad::ParameterStore<float> store;
  ad::Parameter<float> *p = nullptr;

  Toy() {
    ad::Mat<float> v(1, 1);
    v(0, 0) = 0.0f;
    p = &store.emplace("p", v);
  }

  ad::Tensor<float> loss() const {
    ad::Mat<float> one(1, 1);
    one(0, 0) = 1.0f;
    return ad::mse_loss(p->tensor, one);
  }
};

std::vector<int> iota(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

fs::path temp_path(const std::string &name) {
  const auto dir = fs::temp_directory_path() / "solvflow_test_train";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("flat validation stops 50 epochs after the best") {
  Toy toy;
  TrainConfig c;
  c.batch_size = 4;
  const auto r = run_training(
      toy.store, 8, [&](std::span<const int>, const DropoutContext &) { return toy.loss(); },
      [] { return std::pair { 1.0, 1.0 }; }, c, 3);
  CHECK(r.best_epoch == 0);
  CHECK(r.curve.size() == 51);
  CHECK(r.curve.back().epoch == 50);
  // best (untrained) parameters are restored
  CHECK(toy.p->tensor.value()(0, 0) == 0.0f);
}

TEST_CASE("improving validation runs to the epoch limit") {
  Toy toy;
  TrainConfig c;
  c.max_epochs = 400;
  c.lr = 1e-3;
  const auto r = run_training(
      toy.store, 1, [&](std::span<const int>, const DropoutContext &) { return toy.loss(); },
      [&] {
        const double d = 1.0 - toy.p->tensor.value()(0, 0);
        return std::pair { d * d, d * d };
      },
      c, 3);
  CHECK(r.curve.size() == 401);
  CHECK(r.best_epoch == 400);
  CHECK(r.curve.front().epoch == 0);
  CHECK(r.curve.back().val_loss < r.curve.front().val_loss);
}

TEST_CASE("plateau schedule decays the rate on a flat metric") {
  Toy toy;
  TrainConfig c = TrainConfig::gnn_defaults();
  c.max_epochs = 70;
  CHECK(c.plateau);
  CHECK(c.early_stop_patience == 0);
  const auto r = run_training(
      toy.store, 1, [&](std::span<const int>, const DropoutContext &) { return toy.loss(); },
      [] { return std::pair { 1.0, 1.0 }; }, c, 3);
  REQUIRE(r.curve.size() == 71);
  CHECK(r.curve[30].lr == doctest::Approx(3e-4));
  CHECK(r.curve[31].lr == doctest::Approx(3e-4 * 0.7));
  CHECK(r.curve[61].lr == doctest::Approx(3e-4 * 0.49));
}

TEST_CASE("a non-finite loss aborts with its epoch") {
  Toy toy;
  TrainConfig c;
  int calls = 0;
  const auto batch = [&](std::span<const int>, const DropoutContext &) {
    ad::Mat<float> v(1, 1);
    v(0, 0) = ++calls > 3 ? std::numeric_limits<float>::quiet_NaN() : 1.0f;
    return ad::mul(toy.p->tensor, ad::Tensor<float>(v));
  };
  try {
    run_training(toy.store, 1, batch, [] { return std::pair { 1.0, 1.0 }; }, c, 0);
    FAIL("expected NonFiniteLoss");
  } catch (const NonFiniteLoss &e) {
    CHECK(e.epoch() == 4);
  }
}

TEST_CASE("settings overrides and digests") {
  ModelSettings s;
  const auto before = config_digest(s, ModelKind::kGnn);
  s.apply_override("gnn.hidden=128");
  CHECK(s.gnn.hidden == 128);
  CHECK(config_digest(s, ModelKind::kGnn) != before);
  const auto gbdt = config_digest(s, ModelKind::kGbdt);
  s.apply_override("gnn.use_drfp=false");
  CHECK_FALSE(s.gnn.use_drfp);
  CHECK(config_digest(s, ModelKind::kGbdt) == gbdt);
  s.apply_override("gnn_train.max_epochs=5");
  CHECK(s.gnn_train.max_epochs == 5);
  CHECK_THROWS_AS(s.apply_override("gnn.bogus=1"), Error);
  CHECK_THROWS_AS(s.apply_override("gnn.hidden=\"wide\""), Error);
  CHECK_THROWS_AS(s.apply_override("gnn.hidden=100"), ConfigMismatch);
  CHECK_THROWS_AS(s.apply_override("nothing"), Error);

  const auto back = ModelSettings::from_json(s.to_json());
  CHECK(back.to_json() == s.to_json());
  CHECK(model_kind_from_string("deepmodel") == ModelKind::kDeep);
  CHECK(to_string(ModelKind::kMlp) == "mlp");
  CHECK_THROWS_AS(model_kind_from_string("svm"), Error);
}

TEST_CASE("prepared data") {
  synthetic::SyntheticOptions o;
  o.solvents = 3;
  o.mixtures = true;
  o.points_per_ramp = 2;
  const auto w = testing::make_world(o);
  const auto &p = w->prepared;
  REQUIRE(p.rows() == w->ds.size());
  CHECK(p.baseline.rows() == p.rows());
  CHECK(p.conditions.cols() == 3);
  for (int i = 0; i < p.rows(); ++i) {
    const auto &r = w->ds.records[i];
    CHECK(p.conditions(i, 0) == doctest::Approx((r.temperature_c - 60.0) / 60.0));
    CHECK(p.conditions(i, 1) == doctest::Approx(r.residence_time_s / 300.0));
    CHECK(p.conditions(i, 2) == doctest::Approx(r.pct_b / 100.0));
    for (int t = 0; t < 3; ++t) {
      CHECK(p.targets(i, t) == r.yields[t]);
    }
  }

  const auto single = testing::make_world(3, 2);
  for (int i = 0; i < single->prepared.rows(); ++i) {
    CHECK(single->prepared.solvent_b[i] == single->prepared.solvent_a[i]);
    CHECK(single->prepared.conditions(i, 2) == 0.0);
  }

  GnnConfig c;
  const auto rows = iota(p.rows());
  const auto in = gnn_inputs(p, rows, c);
  CHECK(in.solvent_graphs.size() == 3);
  CHECK(in.reactant_graphs.size() == 3);
  CHECK(in.drfp.cols() == c.drfp_width);
  c.use_drfp = false;
  c.use_reactant_product_graphs = false;
  const auto bare = gnn_inputs(p, rows, c);
  CHECK(bare.drfp.size() == 0);
  CHECK(bare.reactant_graphs.empty());
}

TEST_CASE("every method trains, predicts and round-trips a checkpoint") {
  const auto w = testing::make_world(4, 6);
  const auto &p = w->prepared;
  const auto settings = testing::tiny_settings(3);
  std::vector<int> train;
  std::vector<int> val;
  for (int i = 0; i < p.rows(); ++i) {
    (i % 5 == 0 ? val : train).push_back(i);
  }
  const auto all = iota(p.rows());
  for (const auto kind: { ModelKind::kGbdt, ModelKind::kDeep, ModelKind::kMlp,
                          ModelKind::kGnn }) {
    CAPTURE(to_string(kind));
    const auto a = train_model(kind, settings, p, train, val, 5);
    const auto b = train_model(kind, settings, p, train, val, 5);
    const auto pa = a.predict(p, all);
    REQUIRE(pa.rows() == p.rows());
    REQUIRE(pa.cols() == 3);
    CHECK(pa.allFinite());
    CHECK(pa == b.predict(p, all));
    if (kind != ModelKind::kGbdt) {
      CHECK(a.training.curve.size() <= 4);
      CHECK(a.training.curve.front().epoch == 0);
    }

    const auto path = temp_path(to_string(kind) + ".svck");
    const nlohmann::json meta { { "note", "unit" } };
    save_checkpoint(a, static_cast<int>(p.baseline.cols()), meta, path);
    const auto loaded = load_checkpoint(path, a.config_digest());
    CHECK(loaded.metadata == meta);
    CHECK(loaded.input_width == p.baseline.cols());
    CHECK(loaded.bundle.predict(p, all) == pa);
    CHECK_THROWS_AS(load_checkpoint(path, std::string("0000")), ConfigMismatch);
  }
}

TEST_CASE("malformed checkpoints are rejected") {
  const auto path = temp_path("bad.svck");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE and some more bytes";
  }
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(temp_path("missing.svck")), Error);
}

TEST_CASE("seeds change the initial parameters") {
  const auto w = testing::make_world(3, 2);
  const auto s = testing::tiny_settings(1);
  const int width = static_cast<int>(w->prepared.baseline.cols());
  const auto a = make_bundle(ModelKind::kDeep, s, 1, width);
  const auto b = make_bundle(ModelKind::kDeep, s, 1, width);
  const auto c = make_bundle(ModelKind::kDeep, s, 2, width);
  const auto pa = a.deep->parameters().all();
  CHECK(pa[0]->tensor.value() == b.deep->parameters().all()[0]->tensor.value());
  CHECK(pa[0]->tensor.value() != c.deep->parameters().all()[0]->tensor.value());
}
