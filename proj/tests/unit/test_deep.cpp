//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <random>
#include <set>

#include "gradcheck.h"
#include "solvflow/models/deep.h"

using namespace solvflow;
using namespace solvflow::models;
using solvflow::testing::MatD;
using solvflow::testing::TensorD;
using solvflow::testing::gradcheck;
using solvflow::testing::random_mat;

namespace {

constexpr double kTol = 1e-4;

DeepModelConfig small_config() {
  DeepModelConfig c;
  c.hidden = 16;
  c.tokens = 4;
  c.heads = 2;
  c.swiglu_blocks = 2;
  c.head_hidden = 6;
  return c;
}

}  // namespace

TEST_CASE("default configuration splits into 8 tokens of 48") {
  DeepModelConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.token_width() == 48);
  c.tokens = 7;
  CHECK_THROWS_AS(c.validate(), ConfigMismatch);
  c = DeepModelConfig {};
  c.heads = 5;
  CHECK_THROWS_AS(c.validate(), ConfigMismatch);
  const auto s = small_config();
  CHECK(DeepModelConfig::from_json(s.to_json()).to_json() == s.to_json());
}

TEST_CASE("attention pairs cover each group densely") {
  const auto p = attention_pairs(2, 3);
  REQUIRE(p.query.size() == 18);
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < p.query.size(); ++i) {
    CHECK(p.query[i] / 3 == p.key[i] / 3);
    seen.insert({ p.query[i], p.key[i] });
  }
  CHECK(seen.size() == 18);
}

TEST_CASE("swiglu with a zero gate is zero") {
  ad::ParameterStore<double> store;
  Rng rng(3);
  auto lin = make_linear(store, "l", 5, 4, rng);
  auto gate = make_linear(store, "g", 5, 4, rng);
  gate.weight->tensor.mutable_value().setZero();
  gate.bias->tensor.mutable_value().setZero();
  std::mt19937_64 r(1);
  const auto y = swiglu(TensorD(random_mat(r, 3, 5)), lin, gate);
  CHECK(y.value().isZero());

  // with a large gate it approaches the linear branch
  gate.bias->tensor.mutable_value().setConstant(40.0);
  const TensorD x(random_mat(r, 3, 5));
  const auto z = swiglu(x, lin, gate);
  CHECK((z.value() - lin(x).value() * 40.0).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("identical tokens receive uniform attention") {
  DeepModel<double> model(DeepModelConfig {}, 10, 2);
  std::mt19937_64 rng(4);
  const MatD one = random_mat(rng, 1, 48);
  MatD tokens(16, 48);
  for (int i = 0; i < 16; ++i) {
    tokens.row(i) = one;
  }
  TensorD weights;
  model.self_attention(TensorD(tokens), 2, &weights);
  REQUIRE(weights.rows() == 2 * 64);
  REQUIRE(weights.cols() == 8);
  for (Eigen::Index i = 0; i < weights.value().size(); ++i) {
    CHECK(weights.value().data()[i] == doctest::Approx(0.125).epsilon(1e-12));
  }
}

TEST_CASE("forward shape, width check and determinism") {
  DeepModel<float> a(small_config(), 7, 5);
  DeepModel<float> b(small_config(), 7, 5);
  std::mt19937_64 rng(6);
  const ad::Tensor<float> x(random_mat(rng, 4, 7).cast<float>());
  const DropoutContext ctx { true, 1, 2 };
  const auto ya = a.forward(x, ctx);
  CHECK(ya.rows() == 4);
  CHECK(ya.cols() == 3);
  CHECK(ya.value() == b.forward(x, ctx).value());
  const ad::Tensor<float> bad(ad::Mat<float>::Zero(4, 6));
  CHECK_THROWS_AS(a.forward(bad, {}), ShapeMismatch);
}

TEST_CASE("plain variant has no attention or gated blocks") {
  auto c = small_config();
  c.plain_mlp = true;
  DeepModel<float> m(c, 7, 1);
  for (const auto *p: m.parameters().all()) {
    CAPTURE(p->name);
    CHECK((p->name.rfind("input_proj", 0) == 0 || p->name.rfind("head.", 0) == 0));
  }
  DeepModel<float> full(small_config(), 7, 1);
  CHECK(full.parameters().find("attention.query.weight") != nullptr);
  CHECK(full.parameters().find("swiglu1.gate.weight") != nullptr);
}

TEST_CASE("forward gradients match finite differences") {
  std::mt19937_64 rng(8);
  for (const bool plain: { false, true }) {
    CAPTURE(plain);
    auto c = small_config();
    c.plain_mlp = plain;
    DeepModel<double> model(c, 5, 9);
    std::vector<TensorD> leaves { TensorD(random_mat(rng, 3, 5), true) };
    const ad::Parameter<double> *key_bias = model.parameters().find("attention.key.bias");
    for (auto *p: model.parameters().all()) {
      // a shared key offset cancels in the softmax, so its gradient is
      // exactly zero and a relative comparison only sees rounding noise
      if (p != key_bias) {
        leaves.push_back(p->tensor);
      }
    }
    const TensorD w(random_mat(rng, 3, 3));
    const DropoutContext ctx { true, 4, 0 };
    const auto loss = [&] { return ad::sum(ad::mul(model.forward(leaves[0], ctx), w)); };
    CHECK(gradcheck(leaves, loss) < kTol);
    if (key_bias != nullptr) {
      ad::backward(loss());
      CHECK(key_bias->tensor.grad().norm() < 1e-12);
    }
  }
}
