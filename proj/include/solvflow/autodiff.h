//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_AUTODIFF_H_
#define SOLVFLOW_AUTODIFF_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "solvflow/error.h"

// Reverse-mode automatic differentiation over dense row-major matrices.
//
// Every op returns a Tensor whose node remembers its parents and a closure
// that pushes the output gradient back to them. backward() walks the nodes
// reachable from a scalar loss in reverse topological order, accumulates
// into leaf gradients, and then drops the recorded closures so intermediate
// buffers are released. Nothing is global: independent graphs can be built
// and differentiated on different threads.
namespace solvflow::ad {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class NonScalarLoss: public Error {
public:
  using Error::Error;
};

class MissingGradient: public Error {
public:
  using Error::Error;
};

template <class T>
struct Node {
  Mat<T> value;
  Mat<T> grad;  // empty until something flows in
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node &)> backward;
};

template <class T>
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(Mat<T> value, bool requires_grad = false);

  static Tensor constant(Mat<T> value) { return Tensor(std::move(value)); }

  bool defined() const { return node_ != nullptr; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  const Mat<T> &value() const { return node_->value; }
  Mat<T> &mutable_value() { return node_->value; }
  const Mat<T> &grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.size() > 0; }
  bool requires_grad() const { return node_->requires_grad; }
  std::uint64_t id() const { return node_->id; }

  // Scalar convenience for 1x1 tensors.
  T item() const;

  void zero_grad() { node_->grad.resize(0, 0); }

  const std::shared_ptr<Node<T>> &node() const { return node_; }

  static Tensor from_node(std::shared_ptr<Node<T>> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

private:
  std::shared_ptr<Node<T>> node_;
};

// While alive on a thread, ops on that thread record no backward closures.
class NoGradGuard {
public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;

private:
  bool previous_;
};

bool grad_enabled();

// Throws NonScalarLoss unless loss is 1x1. Gradients of every reachable
// leaf are accumulated (+=); recorded closures are released afterwards.
template <class T>
void backward(const Tensor<T> &loss);

// Matrix product.
template <class T>
Tensor<T> matmul(const Tensor<T> &a, const Tensor<T> &b);

// Elementwise a + b. b may also be a 1 x cols row, broadcast over rows.
template <class T>
Tensor<T> add(const Tensor<T> &a, const Tensor<T> &b);

template <class T>
Tensor<T> sub(const Tensor<T> &a, const Tensor<T> &b);

// Elementwise a * b with the same row broadcast rule as add.
template <class T>
Tensor<T> mul(const Tensor<T> &a, const Tensor<T> &b);

template <class T>
Tensor<T> scale(const Tensor<T> &a, T factor);

template <class T>
Tensor<T> sigmoid(const Tensor<T> &a);

template <class T>
Tensor<T> silu(const Tensor<T> &a);

template <class T>
Tensor<T> exp(const Tensor<T> &a);

template <class T>
Tensor<T> log(const Tensor<T> &a);

template <class T>
Tensor<T> leaky_relu(const Tensor<T> &a, T negative_slope);

template <class T>
Tensor<T> concat_cols(std::span<const Tensor<T>> parts);

template <class T>
Tensor<T> concat_rows(std::span<const Tensor<T>> parts);

template <class T>
Tensor<T> slice_cols(const Tensor<T> &a, Eigen::Index start, Eigen::Index count);

template <class T>
Tensor<T> slice_rows(const Tensor<T> &a, Eigen::Index start, Eigen::Index count);

// out.row(i) = a.row(index[i]); rows may repeat.
template <class T>
Tensor<T> gather_rows(const Tensor<T> &a, std::span<const int> index);

// Row-major reinterpretation; element count must match.
template <class T>
Tensor<T> reshape(const Tensor<T> &a, Eigen::Index rows, Eigen::Index cols);

// Segment reductions: row r of `a` belongs to segment[r] in [0, n).
template <class T>
Tensor<T> segment_sum(const Tensor<T> &a, std::span<const int> segment, int n);

// Throws Error on an empty segment.
template <class T>
Tensor<T> segment_mean(const Tensor<T> &a, std::span<const int> segment, int n);

// Per column maximum inside each segment; ties send the gradient to the
// first maximal row. Throws Error on an empty segment.
template <class T>
Tensor<T> segment_max(const Tensor<T> &a, std::span<const int> segment, int n);

// Column-wise softmax over the rows of each segment.
template <class T>
Tensor<T> segment_softmax(const Tensor<T> &a, std::span<const int> segment,
                          int n);

// (rows, groups*width) -> (rows, groups), summing each block of `width`
// consecutive columns.
template <class T>
Tensor<T> group_sum_cols(const Tensor<T> &a, Eigen::Index groups);

// (rows, groups) -> (rows, groups*width), each column repeated `width` times.
template <class T>
Tensor<T> repeat_cols(const Tensor<T> &a, Eigen::Index width);

template <class T>
Tensor<T> sum(const Tensor<T> &a);

// Stateless dropout randomness: a splitmix-style hash of (seed, layer, step,
// element). Reusing a key reproduces the mask bit for bit.
struct DropoutKey {
  std::uint64_t seed = 0;
  std::uint64_t layer = 0;
  std::uint64_t step = 0;
};

std::uint64_t mix64(std::uint64_t x);
double uniform_from_key(const DropoutKey &key, std::uint64_t element);

// Inverted dropout. Identity when !training or p == 0.
template <class T>
Tensor<T> dropout(const Tensor<T> &a, double p, const DropoutKey &key,
                  bool training);

// Mean of squared differences over every element, as a 1x1 tensor.
template <class T>
Tensor<T> mse_loss(const Tensor<T> &pred, const Mat<T> &target);

// --- parameters and optimisation -----------------------------------------

template <class T>
struct Parameter {
  std::string name;
  Tensor<T> tensor;
  Mat<T> first_moment;
  Mat<T> second_moment;
  long step = 0;
};

template <class T>
class ParameterStore {
public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore &) = delete;
  ParameterStore &operator=(const ParameterStore &) = delete;
  ParameterStore(ParameterStore &&) noexcept = default;
  ParameterStore &operator=(ParameterStore &&) noexcept = default;

  // Uniform(-bound, bound) initialisation drawn from `rng`.
  template <class Rng>
  Parameter<T> &uniform(const std::string &name, Eigen::Index rows,
                        Eigen::Index cols, double bound, Rng &rng);

  Parameter<T> &zeros(const std::string &name, Eigen::Index rows,
                      Eigen::Index cols);

  // Adds a parameter with a given value; used when loading checkpoints.
  Parameter<T> &emplace(const std::string &name, Mat<T> value);

  Parameter<T> *find(const std::string &name);
  const Parameter<T> *find(const std::string &name) const;
  Parameter<T> &at(const std::string &name);

  std::vector<Parameter<T> *> all();
  std::vector<const Parameter<T> *> all() const;
  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;

  void zero_grad();

  std::vector<Mat<T>> snapshot() const;
  void restore(const std::vector<Mat<T>> &values);

private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

struct AdamWOptions {
  double lr = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Decoupled weight decay (w -= lr*wd*w) followed by the bias-corrected Adam
// update. Throws MissingGradient naming the first parameter without one.
template <class T>
void adamw_step(std::span<Parameter<T> *const> params,
                const AdamWOptions &options);

// Global L2 norm over all gradients; if above max_norm every gradient is
// scaled by max_norm / norm. Returns the applied factor (1 when untouched).
template <class T>
double clip_grad_norm(std::span<Parameter<T> *const> params, double max_norm);

template <class T>
double global_grad_norm(std::span<Parameter<T> *const> params);

// Multiplies the learning rate by `factor` once `patience` consecutive
// epochs fail to improve on the best metric by more than `threshold`.
// `initial_best` is the reference value the first epoch must beat; the
// trainers pass the metric of the untrained model.
class PlateauScheduler {
public:
  PlateauScheduler(double lr, double factor = 0.7, int patience = 30,
                   double threshold = 1e-6,
                   double initial_best = std::numeric_limits<double>::infinity());

  // Returns the learning rate to use for the next epoch.
  double step(double metric);

  double lr() const { return lr_; }
  double best() const { return best_; }
  int epochs_since_improvement() const { return bad_epochs_; }
  int reductions() const { return reductions_; }

private:
  double lr_;
  double factor_;
  int patience_;
  double threshold_;
  double best_;
  int bad_epochs_ = 0;
  int reductions_ = 0;
};

// --- template definitions that depend on caller-chosen types --------------

template <class T>
template <class Rng>
Parameter<T> &ParameterStore<T>::uniform(const std::string &name,
                                         Eigen::Index rows, Eigen::Index cols,
                                         double bound, Rng &rng) {
  Mat<T> value(rows, cols);
  for (Eigen::Index i = 0; i < value.size(); ++i) {
    // 53-bit uniform in [0, 1) from the raw engine output
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    value.data()[i] = static_cast<T>((2.0 * u - 1.0) * bound);
  }
  return emplace(name, std::move(value));
}

}  // namespace solvflow::ad

#endif  // SOLVFLOW_AUTODIFF_H_
