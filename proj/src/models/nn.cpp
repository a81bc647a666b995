//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/models/nn.h"

namespace solvflow::models {

template <class T>
ad::Tensor<T> Linear<T>::operator()(const ad::Tensor<T> &x) const {
  ad::Tensor<T> y = ad::matmul(x, weight->tensor);
  if (bias != nullptr) {
    y = ad::add(y, bias->tensor);
  }
  return y;
}

template struct Linear<float>;
template struct Linear<double>;

}  // namespace solvflow::models
