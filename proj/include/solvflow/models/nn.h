//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_MODELS_NN_H_
#define SOLVFLOW_MODELS_NN_H_

#include <cmath>
#include <random>
#include <string>

#include "solvflow/autodiff.h"

namespace solvflow::models {

using Rng = std::mt19937_64;

// y = x W + b with W stored (in x out). Parameters live in a ParameterStore;
// the layer only keeps stable pointers into it.
template <class T>
struct Linear {
  ad::Parameter<T> *weight = nullptr;
  ad::Parameter<T> *bias = nullptr;

  Eigen::Index in() const { return weight->tensor.rows(); }
  Eigen::Index out() const { return weight->tensor.cols(); }

  ad::Tensor<T> operator()(const ad::Tensor<T> &x) const;
};

// Weights and bias drawn from uniform(+-1/sqrt(in)).
template <class T>
Linear<T> make_linear(ad::ParameterStore<T> &store, const std::string &name,
                      Eigen::Index in, Eigen::Index out, Rng &rng,
                      bool with_bias = true) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear<T> layer;
  layer.weight = &store.uniform(name + ".weight", in, out, bound, rng);
  if (with_bias) {
    layer.bias = &store.uniform(name + ".bias", 1, out, bound, rng);
  }
  return layer;
}

// Dropout keys: one layer id per dropout site, step counts optimiser updates.
// Rates come from the model configuration.
struct DropoutContext {
  bool training = false;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;

  ad::DropoutKey key(std::uint64_t layer) const { return { seed, layer, step }; }
};

// Normalisation of the scalar reaction conditions.
inline double normalize_temperature(double t_c) { return (t_c - 60.0) / 60.0; }
inline double normalize_residence(double tau_s) { return tau_s / 300.0; }
inline double normalize_pct(double pct_b) { return pct_b / 100.0; }

}  // namespace solvflow::models

#endif  // SOLVFLOW_MODELS_NN_H_
