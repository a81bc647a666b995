//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "solvflow/autodiff.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

namespace solvflow::ad {
namespace {

std::atomic<std::uint64_t> g_next_id { 1 };
thread_local bool t_grad_enabled = true;

std::string shape_str(Eigen::Index r, Eigen::Index c) {
  return "(" + std::to_string(r) + ", " + std::to_string(c) + ")";
}

template <class T>
std::string shape_of(const Tensor<T> &t) {
  return shape_str(t.rows(), t.cols());
}

template <class T>
[[noreturn]] void shape_error(const char *op, const Tensor<T> &a,
                              const Tensor<T> &b) {
  throw ShapeMismatch(std::string(op) + ": incompatible shapes " + shape_of(a)
                      + " and " + shape_of(b));
}

template <class T, class Expr>
void accumulate(Node<T> &node, const Expr &g) {
  if (!node.requires_grad) {
    return;
  }
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

// Builds the result node; records parents and the closure only when some
// input needs a gradient and recording is enabled.
template <class T>
Tensor<T> make_result(Mat<T> value,
                      std::initializer_list<const Tensor<T> *> inputs,
                      std::function<void(Node<T> &)> fn) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  bool needs = false;
  for (const Tensor<T> *in: inputs) {
    needs = needs || in->requires_grad();
  }
  if (needs && t_grad_enabled) {
    node->requires_grad = true;
    for (const Tensor<T> *in: inputs) {
      node->parents.push_back(in->node());
    }
    node->backward = std::move(fn);
  }
  return Tensor<T>::from_node(std::move(node));
}

template <class T>
Tensor<T> make_result_n(Mat<T> value, std::span<const Tensor<T>> inputs,
                        std::function<void(Node<T> &)> fn) {
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  bool needs = false;
  for (const Tensor<T> &in: inputs) {
    needs = needs || in.requires_grad();
  }
  if (needs && t_grad_enabled) {
    node->requires_grad = true;
    for (const Tensor<T> &in: inputs) {
      node->parents.push_back(in.node());
    }
    node->backward = std::move(fn);
  }
  return Tensor<T>::from_node(std::move(node));
}

void check_segments(std::span<const int> segment, Eigen::Index rows, int n,
                    const char *op) {
  if (static_cast<Eigen::Index>(segment.size()) != rows) {
    throw ShapeMismatch(std::string(op) + ": segment vector has "
                        + std::to_string(segment.size()) + " entries for "
                        + std::to_string(rows) + " rows");
  }
  for (const int s: segment) {
    if (s < 0 || s >= n) {
      throw ShapeMismatch(std::string(op) + ": segment id "
                          + std::to_string(s) + " outside [0, "
                          + std::to_string(n) + ")");
    }
  }
}

}  // namespace

template <class T>
Tensor<T>::Tensor(Mat<T> value, bool requires_grad)
    : node_(std::make_shared<Node<T>>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
  node_->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
}

template <class T>
T Tensor<T>::item() const {
  if (rows() != 1 || cols() != 1) {
    throw ShapeMismatch("item() on a tensor of shape " + shape_of(*this));
  }
  return node_->value(0, 0);
}

NoGradGuard::NoGradGuard(): previous_(t_grad_enabled) {
  t_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() {
  t_grad_enabled = previous_;
}

bool grad_enabled() {
  return t_grad_enabled;
}

template <class T>
void backward(const Tensor<T> &loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1) {
    throw NonScalarLoss("backward() needs a 1x1 loss, got "
                        + (loss.defined() ? shape_of(loss) : std::string("none")));
  }
  if (!loss.requires_grad()) {
    return;
  }

  // iterative post-order DFS -> topological order
  std::vector<Node<T> *> order;
  std::unordered_set<Node<T> *> seen;
  std::vector<std::pair<Node<T> *, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T> *parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  Node<T> &root = *loss.node();
  accumulate(root, Mat<T>::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T> &node = **it;
    if (node.backward && node.grad.size() > 0) {
      node.backward(node);
    }
  }
  // release the recorded graph; leaves keep their accumulated gradients
  for (Node<T> *node: order) {
    if (node->backward) {
      node->backward = nullptr;
      node->parents.clear();
      node->grad.resize(0, 0);
    }
  }
}

template <class T>
Tensor<T> matmul(const Tensor<T> &a, const Tensor<T> &b) {
  if (a.cols() != b.rows()) {
    shape_error("matmul", a, b);
  }
  Mat<T> value;
  value.noalias() = a.value() * b.value();
  return make_result<T>(std::move(value), { &a, &b }, [](Node<T> &out) {
    Node<T> &na = *out.parents[0];
    Node<T> &nb = *out.parents[1];
    if (na.requires_grad) {
      Mat<T> g;
      g.noalias() = out.grad * nb.value.transpose();
      accumulate(na, g);
    }
    if (nb.requires_grad) {
      Mat<T> g;
      g.noalias() = na.value.transpose() * out.grad;
      accumulate(nb, g);
    }
  });
}

namespace {

enum class Broadcast { kSame, kRow };

template <class T>
Broadcast broadcast_kind(const char *op, const Tensor<T> &a, const Tensor<T> &b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) {
    return Broadcast::kSame;
  }
  if (b.rows() == 1 && b.cols() == a.cols()) {
    return Broadcast::kRow;
  }
  shape_error(op, a, b);
}

}  // namespace

template <class T>
Tensor<T> add(const Tensor<T> &a, const Tensor<T> &b) {
  const Broadcast kind = broadcast_kind("add", a, b);
  Mat<T> value = a.value();
  if (kind == Broadcast::kSame) {
    value += b.value();
  } else {
    value.rowwise() += b.value().row(0);
  }
  return make_result<T>(std::move(value), { &a, &b }, [kind](Node<T> &out) {
    accumulate(*out.parents[0], out.grad);
    if (kind == Broadcast::kSame) {
      accumulate(*out.parents[1], out.grad);
    } else {
      accumulate(*out.parents[1], Mat<T>(out.grad.colwise().sum()));
    }
  });
}

template <class T>
Tensor<T> sub(const Tensor<T> &a, const Tensor<T> &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    shape_error("sub", a, b);
  }
  Mat<T> value = a.value() - b.value();
  return make_result<T>(std::move(value), { &a, &b }, [](Node<T> &out) {
    accumulate(*out.parents[0], out.grad);
    accumulate(*out.parents[1], Mat<T>(-out.grad));
  });
}

template <class T>
Tensor<T> mul(const Tensor<T> &a, const Tensor<T> &b) {
  const Broadcast kind = broadcast_kind("mul", a, b);
  Mat<T> value;
  if (kind == Broadcast::kSame) {
    value = a.value().cwiseProduct(b.value());
  } else {
    value = a.value().array().rowwise() * b.value().row(0).array();
  }
  return make_result<T>(std::move(value), { &a, &b }, [kind](Node<T> &out) {
    Node<T> &na = *out.parents[0];
    Node<T> &nb = *out.parents[1];
    if (kind == Broadcast::kSame) {
      if (na.requires_grad) {
        accumulate(na, Mat<T>(out.grad.cwiseProduct(nb.value)));
      }
      if (nb.requires_grad) {
        accumulate(nb, Mat<T>(out.grad.cwiseProduct(na.value)));
      }
    } else {
      if (na.requires_grad) {
        accumulate(na, Mat<T>(out.grad.array().rowwise()
                              * nb.value.row(0).array()));
      }
      if (nb.requires_grad) {
        accumulate(nb, Mat<T>(out.grad.cwiseProduct(na.value).colwise().sum()));
      }
    }
  });
}

template <class T>
Tensor<T> scale(const Tensor<T> &a, T factor) {
  Mat<T> value = a.value() * factor;
  return make_result<T>(std::move(value), { &a }, [factor](Node<T> &out) {
    accumulate(*out.parents[0], Mat<T>(out.grad * factor));
  });
}

template <class T>
Tensor<T> sigmoid(const Tensor<T> &a) {
  Mat<T> value = a.value().unaryExpr([](T x) {
    // split by sign to avoid overflow in exp
    if (x >= T(0)) {
      return T(1) / (T(1) + std::exp(-x));
    }
    const T e = std::exp(x);
    return e / (T(1) + e);
  });
  return make_result<T>(std::move(value), { &a }, [](Node<T> &out) {
    const auto s = out.value.array();
    accumulate(*out.parents[0],
               Mat<T>(out.grad.array() * s * (T(1) - s)));
  });
}

template <class T>
Tensor<T> silu(const Tensor<T> &a) {
  const Mat<T> sig = a.value().unaryExpr([](T x) {
    if (x >= T(0)) {
      return T(1) / (T(1) + std::exp(-x));
    }
    const T e = std::exp(x);
    return e / (T(1) + e);
  });
  Mat<T> value = a.value().cwiseProduct(sig);
  return make_result<T>(std::move(value), { &a }, [sig](Node<T> &out) {
    const Node<T> &in = *out.parents[0];
    const auto s = sig.array();
    const auto x = in.value.array();
    accumulate(*out.parents[0],
               Mat<T>(out.grad.array() * (s * (T(1) + x * (T(1) - s)))));
  });
}

template <class T>
Tensor<T> exp(const Tensor<T> &a) {
  Mat<T> value = a.value().array().exp().matrix();
  return make_result<T>(std::move(value), { &a }, [](Node<T> &out) {
    accumulate(*out.parents[0], Mat<T>(out.grad.cwiseProduct(out.value)));
  });
}

template <class T>
Tensor<T> log(const Tensor<T> &a) {
  Mat<T> value = a.value().array().log().matrix();
  return make_result<T>(std::move(value), { &a }, [](Node<T> &out) {
    accumulate(*out.parents[0],
               Mat<T>(out.grad.array() / out.parents[0]->value.array()));
  });
}

template <class T>
Tensor<T> leaky_relu(const Tensor<T> &a, T negative_slope) {
  Mat<T> value = a.value().unaryExpr(
      [negative_slope](T x) { return x > T(0) ? x : negative_slope * x; });
  return make_result<T>(std::move(value), { &a },
                        [negative_slope](Node<T> &out) {
    const Mat<T> &x = out.parents[0]->value;
    Mat<T> g = out.grad;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (!(x.data()[i] > T(0))) {
        g.data()[i] *= negative_slope;
      }
    }
    accumulate(*out.parents[0], g);
  });
}

template <class T>
Tensor<T> concat_cols(std::span<const Tensor<T>> parts) {
  if (parts.empty()) {
    throw ShapeMismatch("concat_cols of zero tensors");
  }
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Tensor<T> &p: parts) {
    if (p.rows() != rows) {
      shape_error("concat_cols", parts[0], p);
    }
    cols += p.cols();
  }
  Mat<T> value(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const Tensor<T> &p: parts) {
    offsets.push_back(at);
    value.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return make_result_n<T>(std::move(value), parts, [offsets](Node<T> &out) {
    for (std::size_t i = 0; i < out.parents.size(); ++i) {
      Node<T> &p = *out.parents[i];
      if (p.requires_grad) {
        accumulate(p, Mat<T>(out.grad.middleCols(offsets[i], p.value.cols())));
      }
    }
  });
}

template <class T>
Tensor<T> concat_rows(std::span<const Tensor<T>> parts) {
  if (parts.empty()) {
    throw ShapeMismatch("concat_rows of zero tensors");
  }
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Tensor<T> &p: parts) {
    if (p.cols() != cols) {
      shape_error("concat_rows", parts[0], p);
    }
    rows += p.rows();
  }
  Mat<T> value(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const Tensor<T> &p: parts) {
    offsets.push_back(at);
    value.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return make_result_n<T>(std::move(value), parts, [offsets](Node<T> &out) {
    for (std::size_t i = 0; i < out.parents.size(); ++i) {
      Node<T> &p = *out.parents[i];
      if (p.requires_grad) {
        accumulate(p, Mat<T>(out.grad.middleRows(offsets[i], p.value.rows())));
      }
    }
  });
}

template <class T>
Tensor<T> slice_cols(const Tensor<T> &a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw ShapeMismatch("slice_cols [" + std::to_string(start) + ", "
                        + std::to_string(start + count) + ") of shape "
                        + shape_of(a));
  }
  Mat<T> value = a.value().middleCols(start, count);
  return make_result<T>(std::move(value), { &a }, [start, count](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    Mat<T> g = Mat<T>::Zero(p.value.rows(), p.value.cols());
    g.middleCols(start, count) = out.grad;
    accumulate(p, g);
  });
}

template <class T>
Tensor<T> slice_rows(const Tensor<T> &a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw ShapeMismatch("slice_rows [" + std::to_string(start) + ", "
                        + std::to_string(start + count) + ") of shape "
                        + shape_of(a));
  }
  Mat<T> value = a.value().middleRows(start, count);
  return make_result<T>(std::move(value), { &a }, [start, count](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    Mat<T> g = Mat<T>::Zero(p.value.rows(), p.value.cols());
    g.middleRows(start, count) = out.grad;
    accumulate(p, g);
  });
}

template <class T>
Tensor<T> gather_rows(const Tensor<T> &a, std::span<const int> index) {
  Mat<T> value(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= a.rows()) {
      throw ShapeMismatch("gather_rows: index " + std::to_string(index[i])
                          + " outside " + shape_of(a));
    }
    value.row(static_cast<Eigen::Index>(i)) = a.value().row(index[i]);
  }
  std::vector<int> idx(index.begin(), index.end());
  return make_result<T>(std::move(value), { &a }, [idx = std::move(idx)](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    Mat<T> g = Mat<T>::Zero(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      g.row(idx[i]) += out.grad.row(static_cast<Eigen::Index>(i));
    }
    accumulate(p, g);
  });
}

template <class T>
Tensor<T> reshape(const Tensor<T> &a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.rows() * a.cols()) {
    throw ShapeMismatch("reshape " + shape_of(a) + " to "
                        + shape_str(rows, cols));
  }
  Mat<T> value = Eigen::Map<const Mat<T>>(a.value().data(), rows, cols);
  return make_result<T>(std::move(value), { &a }, [](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    accumulate(p, Mat<T>(Eigen::Map<const Mat<T>>(out.grad.data(), p.value.rows(),
                                                  p.value.cols())));
  });
}

template <class T>
Tensor<T> segment_sum(const Tensor<T> &a, std::span<const int> segment, int n) {
  check_segments(segment, a.rows(), n, "segment_sum");
  Mat<T> value = Mat<T>::Zero(n, a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    value.row(segment[r]) += a.value().row(r);
  }
  std::vector<int> seg(segment.begin(), segment.end());
  return make_result<T>(std::move(value), { &a }, [seg = std::move(seg)](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    Mat<T> g(p.value.rows(), p.value.cols());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      g.row(r) = out.grad.row(seg[r]);
    }
    accumulate(p, g);
  });
}

template <class T>
Tensor<T> segment_mean(const Tensor<T> &a, std::span<const int> segment, int n) {
  check_segments(segment, a.rows(), n, "segment_mean");
  std::vector<T> count(n, T(0));
  for (const int s: segment) {
    count[s] += T(1);
  }
  for (int s = 0; s < n; ++s) {
    if (count[s] == T(0)) {
      throw Error("segment_mean: segment " + std::to_string(s) + " is empty");
    }
  }
  Mat<T> value = Mat<T>::Zero(n, a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    value.row(segment[r]) += a.value().row(r);
  }
  for (int s = 0; s < n; ++s) {
    value.row(s) /= count[s];
  }
  std::vector<int> seg(segment.begin(), segment.end());
  return make_result<T>(std::move(value), { &a },
                        [seg = std::move(seg), count = std::move(count)](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    Mat<T> g(p.value.rows(), p.value.cols());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      g.row(r) = out.grad.row(seg[r]) / count[seg[r]];
    }
    accumulate(p, g);
  });
}

template <class T>
Tensor<T> segment_max(const Tensor<T> &a, std::span<const int> segment, int n) {
  check_segments(segment, a.rows(), n, "segment_max");
  const Eigen::Index cols = a.cols();
  Mat<T> value(n, cols);
  std::vector<int> argmax(static_cast<std::size_t>(n) * cols, -1);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const int s = segment[r];
    for (Eigen::Index c = 0; c < cols; ++c) {
      int &best = argmax[s * cols + c];
      if (best < 0 || a.value()(r, c) > value(s, c)) {
        best = static_cast<int>(r);
        value(s, c) = a.value()(r, c);
      }
    }
  }
  for (int s = 0; s < n; ++s) {
    if (cols > 0 && argmax[s * cols] < 0) {
      throw Error("segment_max: segment " + std::to_string(s) + " is empty");
    }
  }
  return make_result<T>(std::move(value), { &a },
                        [argmax = std::move(argmax), n, cols](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    Mat<T> g = Mat<T>::Zero(p.value.rows(), p.value.cols());
    for (int s = 0; s < n; ++s) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        g(argmax[s * cols + c], c) += out.grad(s, c);
      }
    }
    accumulate(p, g);
  });
}

template <class T>
Tensor<T> segment_softmax(const Tensor<T> &a, std::span<const int> segment,
                          int n) {
  check_segments(segment, a.rows(), n, "segment_softmax");
  const Eigen::Index cols = a.cols();
  Mat<T> seg_max = Mat<T>::Constant(n, cols, -std::numeric_limits<T>::infinity());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    seg_max.row(segment[r]) = seg_max.row(segment[r]).cwiseMax(a.value().row(r));
  }
  Mat<T> value(a.rows(), cols);
  Mat<T> denom = Mat<T>::Zero(n, cols);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    value.row(r) = (a.value().row(r) - seg_max.row(segment[r])).array().exp().matrix();
    denom.row(segment[r]) += value.row(r);
  }
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    value.row(r).array() /= denom.row(segment[r]).array();
  }
  std::vector<int> seg(segment.begin(), segment.end());
  return make_result<T>(std::move(value), { &a },
                        [seg = std::move(seg), n](Node<T> &out) {
    // dx = y * (dy - sum_seg(dy * y))
    const Eigen::Index cols = out.value.cols();
    Mat<T> dot = Mat<T>::Zero(n, cols);
    for (Eigen::Index r = 0; r < out.value.rows(); ++r) {
      dot.row(seg[r]) += out.grad.row(r).cwiseProduct(out.value.row(r));
    }
    Mat<T> g(out.value.rows(), cols);
    for (Eigen::Index r = 0; r < out.value.rows(); ++r) {
      g.row(r) = out.value.row(r).cwiseProduct(out.grad.row(r) - dot.row(seg[r]));
    }
    accumulate(*out.parents[0], g);
  });
}

template <class T>
Tensor<T> group_sum_cols(const Tensor<T> &a, Eigen::Index groups) {
  if (groups <= 0 || a.cols() % groups != 0) {
    throw ShapeMismatch("group_sum_cols: " + std::to_string(a.cols())
                        + " columns do not split into "
                        + std::to_string(groups) + " groups");
  }
  const Eigen::Index width = a.cols() / groups;
  Mat<T> value(a.rows(), groups);
  for (Eigen::Index g = 0; g < groups; ++g) {
    value.col(g) = a.value().middleCols(g * width, width).rowwise().sum();
  }
  return make_result<T>(std::move(value), { &a }, [groups, width](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    Mat<T> g(p.value.rows(), p.value.cols());
    for (Eigen::Index k = 0; k < groups; ++k) {
      g.middleCols(k * width, width) = out.grad.col(k).replicate(1, width);
    }
    accumulate(p, g);
  });
}

template <class T>
Tensor<T> repeat_cols(const Tensor<T> &a, Eigen::Index width) {
  if (width <= 0) {
    throw ShapeMismatch("repeat_cols width must be positive");
  }
  const Eigen::Index groups = a.cols();
  Mat<T> value(a.rows(), groups * width);
  for (Eigen::Index g = 0; g < groups; ++g) {
    value.middleCols(g * width, width) = a.value().col(g).replicate(1, width);
  }
  return make_result<T>(std::move(value), { &a }, [groups, width](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    Mat<T> g(p.value.rows(), groups);
    for (Eigen::Index k = 0; k < groups; ++k) {
      g.col(k) = out.grad.middleCols(k * width, width).rowwise().sum();
    }
    accumulate(p, g);
  });
}

template <class T>
Tensor<T> sum(const Tensor<T> &a) {
  Mat<T> value(1, 1);
  value(0, 0) = a.value().sum();
  return make_result<T>(std::move(value), { &a }, [](Node<T> &out) {
    Node<T> &p = *out.parents[0];
    accumulate(p, Mat<T>(Mat<T>::Constant(p.value.rows(), p.value.cols(),
                                          out.grad(0, 0))));
  });
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform_from_key(const DropoutKey &key, std::uint64_t element) {
  std::uint64_t h = mix64(key.seed);
  h = mix64(h ^ key.layer);
  h = mix64(h ^ key.step);
  h = mix64(h ^ element);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

template <class T>
Tensor<T> dropout(const Tensor<T> &a, double p, const DropoutKey &key,
                  bool training) {
  if (!training || p <= 0.0) {
    return a;
  }
  if (p >= 1.0) {
    throw Error("dropout probability must be below 1");
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  Mat<T> mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = uniform_from_key(key, static_cast<std::uint64_t>(i)) >= p
                         ? keep_scale
                         : T(0);
  }
  Mat<T> value = a.value().cwiseProduct(mask);
  return make_result<T>(std::move(value), { &a }, [mask](Node<T> &out) {
    accumulate(*out.parents[0], Mat<T>(out.grad.cwiseProduct(mask)));
  });
}

template <class T>
Tensor<T> mse_loss(const Tensor<T> &pred, const Mat<T> &target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ShapeMismatch("mse_loss: prediction " + shape_of(pred)
                        + " vs target " + shape_str(target.rows(), target.cols()));
  }
  const T count = static_cast<T>(target.size());
  Mat<T> diff = pred.value() - target;
  Mat<T> value(1, 1);
  value(0, 0) = diff.squaredNorm() / count;
  return make_result<T>(std::move(value), { &pred }, [diff, count](Node<T> &out) {
    accumulate(*out.parents[0], Mat<T>(diff * (T(2) * out.grad(0, 0) / count)));
  });
}

// --- parameters -----------------------------------------------------------

template <class T>
Parameter<T> &ParameterStore<T>::zeros(const std::string &name, Eigen::Index rows,
                                       Eigen::Index cols) {
  return emplace(name, Mat<T>::Zero(rows, cols));
}

template <class T>
Parameter<T> &ParameterStore<T>::emplace(const std::string &name, Mat<T> value) {
  if (find(name) != nullptr) {
    throw Error("duplicate parameter name '" + name + "'");
  }
  auto p = std::make_unique<Parameter<T>>();
  p->name = name;
  p->first_moment = Mat<T>::Zero(value.rows(), value.cols());
  p->second_moment = Mat<T>::Zero(value.rows(), value.cols());
  p->tensor = Tensor<T>(std::move(value), true);
  params_.push_back(std::move(p));
  return *params_.back();
}

template <class T>
Parameter<T> *ParameterStore<T>::find(const std::string &name) {
  for (auto &p: params_) {
    if (p->name == name) {
      return p.get();
    }
  }
  return nullptr;
}

template <class T>
const Parameter<T> *ParameterStore<T>::find(const std::string &name) const {
  for (const auto &p: params_) {
    if (p->name == name) {
      return p.get();
    }
  }
  return nullptr;
}

template <class T>
Parameter<T> &ParameterStore<T>::at(const std::string &name) {
  Parameter<T> *p = find(name);
  if (p == nullptr) {
    throw Error("no parameter named '" + name + "'");
  }
  return *p;
}

template <class T>
std::vector<Parameter<T> *> ParameterStore<T>::all() {
  std::vector<Parameter<T> *> out;
  for (auto &p: params_) {
    out.push_back(p.get());
  }
  return out;
}

template <class T>
std::vector<const Parameter<T> *> ParameterStore<T>::all() const {
  std::vector<const Parameter<T> *> out;
  for (const auto &p: params_) {
    out.push_back(p.get());
  }
  return out;
}

template <class T>
std::size_t ParameterStore<T>::num_scalars() const {
  std::size_t n = 0;
  for (const auto &p: params_) {
    n += static_cast<std::size_t>(p->tensor.value().size());
  }
  return n;
}

template <class T>
void ParameterStore<T>::zero_grad() {
  for (auto &p: params_) {
    p->tensor.zero_grad();
  }
}

template <class T>
std::vector<Mat<T>> ParameterStore<T>::snapshot() const {
  std::vector<Mat<T>> out;
  out.reserve(params_.size());
  for (const auto &p: params_) {
    out.push_back(p->tensor.value());
  }
  return out;
}

template <class T>
void ParameterStore<T>::restore(const std::vector<Mat<T>> &values) {
  if (values.size() != params_.size()) {
    throw Error("snapshot has " + std::to_string(values.size())
                + " arrays, store has " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    params_[i]->tensor.mutable_value() = values[i];
  }
}

template <class T>
void adamw_step(std::span<Parameter<T> *const> params,
                const AdamWOptions &options) {
  for (Parameter<T> *p: params) {
    if (!p->tensor.has_grad()) {
      throw MissingGradient("parameter '" + p->name + "' has no gradient");
    }
  }
  for (Parameter<T> *p: params) {
    ++p->step;
    Mat<T> &w = p->tensor.mutable_value();
    const Mat<T> &g = p->tensor.grad();
    const T lr = static_cast<T>(options.lr);
    const T b1 = static_cast<T>(options.beta1);
    const T b2 = static_cast<T>(options.beta2);

    w *= static_cast<T>(1.0 - options.lr * options.weight_decay);

    p->first_moment = b1 * p->first_moment + (T(1) - b1) * g;
    p->second_moment = b2 * p->second_moment
                       + (T(1) - b2) * Mat<T>(g.cwiseProduct(g));
    const T bc1 = static_cast<T>(1.0 - std::pow(options.beta1, p->step));
    const T bc2 = static_cast<T>(1.0 - std::pow(options.beta2, p->step));
    const T eps = static_cast<T>(options.eps);
    w.array() -= lr * (p->first_moment.array() / bc1)
                 / ((p->second_moment.array() / bc2).sqrt() + eps);
  }
}

template <class T>
double global_grad_norm(std::span<Parameter<T> *const> params) {
  double sq = 0.0;
  for (Parameter<T> *p: params) {
    if (p->tensor.has_grad()) {
      sq += p->tensor.grad().template cast<double>().squaredNorm();
    }
  }
  return std::sqrt(sq);
}

template <class T>
double clip_grad_norm(std::span<Parameter<T> *const> params, double max_norm) {
  const double norm = global_grad_norm<T>(params);
  if (!(norm > max_norm)) {
    return 1.0;
  }
  const double factor = max_norm / norm;
  for (Parameter<T> *p: params) {
    if (p->tensor.has_grad()) {
      p->tensor.node()->grad *= static_cast<T>(factor);
    }
  }
  return factor;
}

PlateauScheduler::PlateauScheduler(double lr, double factor, int patience,
                                   double threshold, double initial_best)
    : lr_(lr), factor_(factor), patience_(patience), threshold_(threshold),
      best_(initial_best) {
  if (!(lr > 0.0) || !(factor > 0.0 && factor < 1.0) || patience < 1) {
    throw Error("invalid plateau scheduler settings");
  }
}

double PlateauScheduler::step(double metric) {
  if (metric < best_ - threshold_) {
    best_ = metric;
    bad_epochs_ = 0;
    return lr_;
  }
  if (++bad_epochs_ >= patience_) {
    lr_ *= factor_;
    bad_epochs_ = 0;
    ++reductions_;
  }
  return lr_;
}

#define SOLVFLOW_INSTANTIATE(T)                                                \
  template class Tensor<T>;                                                    \
  template class ParameterStore<T>;                                            \
  template void backward<T>(const Tensor<T> &);                                \
  template Tensor<T> matmul<T>(const Tensor<T> &, const Tensor<T> &);          \
  template Tensor<T> add<T>(const Tensor<T> &, const Tensor<T> &);             \
  template Tensor<T> sub<T>(const Tensor<T> &, const Tensor<T> &);             \
  template Tensor<T> mul<T>(const Tensor<T> &, const Tensor<T> &);             \
  template Tensor<T> scale<T>(const Tensor<T> &, T);                           \
  template Tensor<T> sigmoid<T>(const Tensor<T> &);                            \
  template Tensor<T> silu<T>(const Tensor<T> &);                               \
  template Tensor<T> exp<T>(const Tensor<T> &);                                \
  template Tensor<T> log<T>(const Tensor<T> &);                                \
  template Tensor<T> leaky_relu<T>(const Tensor<T> &, T);                      \
  template Tensor<T> concat_cols<T>(std::span<const Tensor<T>>);               \
  template Tensor<T> concat_rows<T>(std::span<const Tensor<T>>);               \
  template Tensor<T> slice_cols<T>(const Tensor<T> &, Eigen::Index,            \
                                   Eigen::Index);                              \
  template Tensor<T> slice_rows<T>(const Tensor<T> &, Eigen::Index,            \
                                   Eigen::Index);                              \
  template Tensor<T> gather_rows<T>(const Tensor<T> &, std::span<const int>);  \
  template Tensor<T> reshape<T>(const Tensor<T> &, Eigen::Index,               \
                                Eigen::Index);                                 \
  template Tensor<T> segment_sum<T>(const Tensor<T> &, std::span<const int>,   \
                                    int);                                      \
  template Tensor<T> segment_mean<T>(const Tensor<T> &, std::span<const int>,  \
                                     int);                                     \
  template Tensor<T> segment_max<T>(const Tensor<T> &, std::span<const int>,   \
                                    int);                                      \
  template Tensor<T> segment_softmax<T>(const Tensor<T> &,                     \
                                        std::span<const int>, int);            \
  template Tensor<T> group_sum_cols<T>(const Tensor<T> &, Eigen::Index);       \
  template Tensor<T> repeat_cols<T>(const Tensor<T> &, Eigen::Index);          \
  template Tensor<T> sum<T>(const Tensor<T> &);                                \
  template Tensor<T> dropout<T>(const Tensor<T> &, double, const DropoutKey &, \
                                bool);                                         \
  template Tensor<T> mse_loss<T>(const Tensor<T> &, const Mat<T> &);           \
  template void adamw_step<T>(std::span<Parameter<T> *const>,                  \
                              const AdamWOptions &);                           \
  template double clip_grad_norm<T>(std::span<Parameter<T> *const>, double);   \
  template double global_grad_norm<T>(std::span<Parameter<T> *const>);

SOLVFLOW_INSTANTIATE(float)
SOLVFLOW_INSTANTIATE(double)

#undef SOLVFLOW_INSTANTIATE

}  // namespace solvflow::ad
