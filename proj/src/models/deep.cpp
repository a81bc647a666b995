//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/models/deep.h"

#include <cmath>
#include <string>

namespace solvflow::models {
namespace {

constexpr std::uint64_t kAttentionDropout = 1;
constexpr std::uint64_t kSwigluDropout = 10;
constexpr std::uint64_t kHeadDropout = 2;

}  // namespace

void DeepModelConfig::validate() const {
  if (hidden <= 0 || tokens <= 0 || heads <= 0 || hidden % tokens != 0) {
    throw ConfigMismatch("hidden width " + std::to_string(hidden)
                         + " must split into " + std::to_string(tokens)
                         + " tokens");
  }
  if (token_width() % heads != 0) {
    throw ConfigMismatch("token width " + std::to_string(token_width())
                         + " is not divisible by " + std::to_string(heads)
                         + " heads");
  }
  if (swiglu_blocks < 0 || head_hidden <= 0) {
    throw ConfigMismatch("layer sizes must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)
      || !(head_dropout >= 0.0 && head_dropout < 1.0)) {
    throw ConfigMismatch("dropout must lie in [0, 1)");
  }
}

nlohmann::json DeepModelConfig::to_json() const {
  return {
    { "hidden", hidden },
    { "heads", heads },
    { "tokens", tokens },
    { "swiglu_blocks", swiglu_blocks },
    { "head_hidden", head_hidden },
    { "dropout", dropout },
    { "head_dropout", head_dropout },
    { "plain_mlp", plain_mlp },
  };
}

DeepModelConfig DeepModelConfig::from_json(const nlohmann::json &j) {
  DeepModelConfig c;
  c.hidden = j.value("hidden", c.hidden);
  c.heads = j.value("heads", c.heads);
  c.tokens = j.value("tokens", c.tokens);
  c.swiglu_blocks = j.value("swiglu_blocks", c.swiglu_blocks);
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  c.dropout = j.value("dropout", c.dropout);
  c.head_dropout = j.value("head_dropout", c.head_dropout);
  c.plain_mlp = j.value("plain_mlp", c.plain_mlp);
  return c;
}

template <class T>
ad::Tensor<T> swiglu(const ad::Tensor<T> &x, const Linear<T> &linear,
                     const Linear<T> &gate) {
  return ad::mul(linear(x), ad::silu(gate(x)));
}

AttentionPairs attention_pairs(int groups, int tokens) {
  AttentionPairs pairs;
  const std::size_t n = static_cast<std::size_t>(groups) * tokens * tokens;
  pairs.query.reserve(n);
  pairs.key.reserve(n);
  for (int g = 0; g < groups; ++g) {
    for (int q = 0; q < tokens; ++q) {
      for (int k = 0; k < tokens; ++k) {
        pairs.query.push_back(g * tokens + q);
        pairs.key.push_back(g * tokens + k);
      }
    }
  }
  return pairs;
}

template <class T>
DeepModel<T>::DeepModel(const DeepModelConfig &config, int input_width,
                        std::uint64_t seed)
    : config_(config), input_width_(input_width) {
  config_.validate();
  if (input_width <= 0) {
    throw ConfigMismatch("input width must be positive");
  }
  Rng rng(seed);
  const int d = config_.hidden;
  const int w = config_.token_width();
  input_proj_ = make_linear(store_, "input_proj", input_width, d, rng);
  if (!config_.plain_mlp) {
    position_ = &store_.uniform("position", config_.tokens, w,
                                1.0 / std::sqrt(static_cast<double>(w)), rng);
    query_ = make_linear(store_, "attention.query", w, w, rng);
    key_ = make_linear(store_, "attention.key", w, w, rng);
    value_ = make_linear(store_, "attention.value", w, w, rng);
    output_ = make_linear(store_, "attention.output", w, w, rng);
    for (int b = 0; b < config_.swiglu_blocks; ++b) {
      const std::string p = "swiglu" + std::to_string(b);
      swiglu_linear_.push_back(make_linear(store_, p + ".linear", d, d, rng));
      swiglu_gate_.push_back(make_linear(store_, p + ".gate", d, d, rng));
    }
  }
  head1_ = make_linear(store_, "head.0", d, config_.head_hidden, rng);
  head2_ = make_linear(store_, "head.1", config_.head_hidden, 3, rng);
}

template <class T>
ad::Tensor<T> DeepModel<T>::self_attention(const ad::Tensor<T> &tokens,
                                           int rows,
                                           ad::Tensor<T> *weights) const {
  const int t = config_.tokens;
  const int heads = config_.heads;
  const int head_dim = config_.token_width() / heads;
  if (tokens.rows() != static_cast<Eigen::Index>(rows) * t
      || tokens.cols() != config_.token_width()) {
    throw ShapeMismatch("self_attention expects (" + std::to_string(rows * t)
                        + ", " + std::to_string(config_.token_width())
                        + ") tokens");
  }
  const auto pairs = attention_pairs(rows, t);
  const auto q = query_(tokens);
  const auto k = key_(tokens);
  const auto v = value_(tokens);
  auto score = ad::group_sum_cols(
      ad::mul(ad::gather_rows(q, pairs.query), ad::gather_rows(k, pairs.key)),
      heads);
  score = ad::scale(score, static_cast<T>(1.0 / std::sqrt(double(head_dim))));
  const auto alpha = ad::segment_softmax(score, pairs.query, rows * t);
  if (weights != nullptr) {
    *weights = alpha;
  }
  const auto mixed = ad::segment_sum(
      ad::mul(ad::gather_rows(v, pairs.key), ad::repeat_cols(alpha, head_dim)),
      pairs.query, rows * t);
  return output_(mixed);
}

template <class T>
ad::Tensor<T> DeepModel<T>::forward(const ad::Tensor<T> &features,
                                    const DropoutContext &ctx) const {
  if (features.cols() != input_width_ || features.rows() == 0) {
    throw ShapeMismatch("DeepModel expects " + std::to_string(input_width_)
                        + " input columns, got "
                        + std::to_string(features.cols()));
  }
  const int n = static_cast<int>(features.rows());
  ad::Tensor<T> h = input_proj_(features);
  if (config_.plain_mlp) {
    h = ad::silu(h);
  } else {
    const int t = config_.tokens;
    std::vector<int> position_index(static_cast<std::size_t>(n) * t);
    for (std::size_t i = 0; i < position_index.size(); ++i) {
      position_index[i] = static_cast<int>(i % t);
    }
    auto tokens = ad::add(ad::reshape(h, n * t, config_.token_width()),
                          ad::gather_rows(position_->tensor, position_index));
    auto attended = ad::dropout(self_attention(tokens, n), config_.dropout,
                                ctx.key(kAttentionDropout), ctx.training);
    tokens = ad::add(tokens, attended);
    h = ad::reshape(tokens, n, config_.hidden);
    for (int b = 0; b < config_.swiglu_blocks; ++b) {
      auto u = swiglu(h, swiglu_linear_[b], swiglu_gate_[b]);
      u = ad::dropout(u, config_.dropout, ctx.key(kSwigluDropout + b),
                      ctx.training);
      h = ad::add(h, u);
    }
  }
  auto x = ad::silu(head1_(h));
  x = ad::dropout(x, config_.head_dropout, ctx.key(kHeadDropout), ctx.training);
  return head2_(x);
}

template ad::Tensor<float> swiglu<float>(const ad::Tensor<float> &,
                                         const Linear<float> &,
                                         const Linear<float> &);
template ad::Tensor<double> swiglu<double>(const ad::Tensor<double> &,
                                           const Linear<double> &,
                                           const Linear<double> &);
template class DeepModel<float>;
template class DeepModel<double>;

}  // namespace solvflow::models
