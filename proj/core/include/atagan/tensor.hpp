#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace atagan {

using Shape = std::vector<std::size_t>;

/// Raised on any shape/argument contract violation inside the tensor ops.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tensor;

namespace detail {

struct Node;

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty means "no grad buffer"
  bool requires_grad = false;
  std::shared_ptr<Node> node;  // producer; null for leaves
};

// Receives the producing tensor and its incoming gradient; accumulates into
// the grads of the node's inputs.
using BackwardFn =
    std::function<void(const TensorImpl& out, std::span<const double> grad_out)>;

struct Node {
  std::string_view op;
  std::vector<Tensor> inputs;
  BackwardFn backward;
  bool consumed = false;
};

}  // namespace detail

/// Dense row-major float64 tensor with optional reverse-mode gradient tracking.
///
/// Tensor is a shared handle: copies alias the same buffer and graph node.
/// Use clone() or detach() for an independent value.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }
  static Tensor scalar(double v) { return Tensor(Shape{1}, v); }

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t i) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;

  std::span<double> data();
  std::span<const double> data() const;
  double item() const;
  double at(std::size_t flat_index) const { return data()[flat_index]; }

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const;

  bool has_grad() const;
  std::span<const double> grad() const;
  /// Writable grad buffer, allocated zero-filled on first use.
  std::span<double> mutable_grad();
  /// Grad as an independent tensor; zeros when no buffer exists.
  Tensor grad_tensor() const;
  void zero_grad();
  void clear_grad();

  /// Independent copy of the values, no graph, requires_grad false.
  Tensor detach() const;
  /// Independent copy of values and the requires_grad flag, no graph.
  Tensor clone() const;

  /// Reverse-mode sweep from a single-element tensor. The graph may be swept
  /// once; a second call on the same graph throws.
  void backward() const;

  detail::TensorImpl& impl() const;
  const std::shared_ptr<detail::TensorImpl>& impl_ptr() const { return impl_; }
  const std::shared_ptr<detail::Node>& node() const;

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Ordered record of the operations reachable from a root tensor. Nodes are in
/// topological order: every producer precedes its consumers.
class Graph {
 public:
  struct Entry {
    std::string_view op;
    detail::TensorImpl* output;
    detail::Node* node;
  };

  static Graph collect(const Tensor& root);

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
};

/// Builds the result of an op. When any input requires grad, the result is
/// attached to a new graph node carrying `backward`; otherwise the graph is
/// not extended.
Tensor record_op(Shape shape, std::vector<double> data, std::string_view op,
                 std::vector<Tensor> inputs, detail::BackwardFn backward);

/// Grad buffer of `t`, allocated (zero-filled) on first use. Intended for
/// BackwardFn implementations.
std::span<double> grad_accumulator(const Tensor& t);

}  // namespace atagan
