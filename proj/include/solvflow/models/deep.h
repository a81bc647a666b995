//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_MODELS_DEEP_H_
#define SOLVFLOW_MODELS_DEEP_H_

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "solvflow/autodiff.h"
#include "solvflow/models/nn.h"

namespace solvflow::models {

struct DeepModelConfig {
  int hidden = 384;
  int heads = 8;
  // The projected vector is read as `tokens` tokens of hidden/tokens each.
  int tokens = 8;
  int swiglu_blocks = 4;
  int head_hidden = 192;
  double dropout = 0.15;
  double head_dropout = 0.075;
  // Projection -> SiLU -> head, no attention and no SwiGLU blocks.
  bool plain_mlp = false;

  int token_width() const { return hidden / tokens; }

  // Throws ConfigMismatch.
  void validate() const;

  nlohmann::json to_json() const;
  static DeepModelConfig from_json(const nlohmann::json &j);
};

// (W1 x + b1) * silu(W2 x + b2)
template <class T>
ad::Tensor<T> swiglu(const ad::Tensor<T> &x, const Linear<T> &linear,
                     const Linear<T> &gate);

// Index lists for dense self-attention inside groups of `tokens` rows:
// pair p = (query, key) with both rows in the same group.
struct AttentionPairs {
  std::vector<int> query;
  std::vector<int> key;
};

AttentionPairs attention_pairs(int groups, int tokens);

template <class T>
class DeepModel {
public:
  DeepModel(const DeepModelConfig &config, int input_width, std::uint64_t seed);

  const DeepModelConfig &config() const { return config_; }
  int input_width() const { return input_width_; }
  ad::ParameterStore<T> &parameters() { return store_; }
  const ad::ParameterStore<T> &parameters() const { return store_; }

  // (rows x input_width) -> (rows x 3). Throws ShapeMismatch.
  ad::Tensor<T> forward(const ad::Tensor<T> &features,
                        const DropoutContext &ctx) const;

  // Multi-head self-attention with output projection over
  // (rows*tokens x token_width) token states, residual not included.
  // `weights`, when given, receives the (rows*tokens*tokens x heads) softmax
  // coefficients in attention_pairs order.
  ad::Tensor<T> self_attention(const ad::Tensor<T> &tokens, int rows,
                               ad::Tensor<T> *weights = nullptr) const;

private:
  DeepModelConfig config_;
  int input_width_;
  ad::ParameterStore<T> store_;
  Linear<T> input_proj_;
  ad::Parameter<T> *position_ = nullptr;
  Linear<T> query_;
  Linear<T> key_;
  Linear<T> value_;
  Linear<T> output_;
  std::vector<Linear<T>> swiglu_linear_;
  std::vector<Linear<T>> swiglu_gate_;
  Linear<T> head1_;
  Linear<T> head2_;
};

}  // namespace solvflow::models

#endif  // SOLVFLOW_MODELS_DEEP_H_
