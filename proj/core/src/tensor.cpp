#include "atagan/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace atagan {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  impl_->data.assign(shape_numel(shape), fill);
  impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  if (shape_numel(shape) != data.size()) {
    throw ShapeError("tensor: shape " + shape_str(shape) + " holds " +
                     std::to_string(shape_numel(shape)) + " elements, got " +
                     std::to_string(data.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
}

detail::TensorImpl& Tensor::impl() const {
  if (!impl_) throw std::logic_error("tensor: use of undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return impl().shape; }

std::size_t Tensor::dim(std::size_t i) const {
  const auto& s = shape();
  if (i >= s.size()) {
    throw ShapeError("tensor: dim " + std::to_string(i) + " out of range for " +
                     shape_str(s));
  }
  return s[i];
}

std::size_t Tensor::numel() const { return impl().data.size(); }

std::span<double> Tensor::data() { return impl().data; }
std::span<const double> Tensor::data() const { return impl().data; }

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("tensor: item() on tensor of shape " + shape_str(shape()));
  }
  return impl().data[0];
}

bool Tensor::requires_grad() const { return impl().requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  if (!is_leaf()) {
    throw std::logic_error("tensor: requires_grad can only be set on leaves");
  }
  impl().requires_grad = on;
  return *this;
}

bool Tensor::is_leaf() const { return impl().node == nullptr; }

bool Tensor::has_grad() const { return !impl().grad.empty(); }

std::span<const double> Tensor::grad() const { return impl().grad; }

std::span<double> Tensor::mutable_grad() {
  auto& g = impl().grad;
  if (g.empty()) g.assign(numel(), 0.0);
  return g;
}

Tensor Tensor::grad_tensor() const {
  if (!has_grad()) return Tensor::zeros(shape());
  return Tensor(shape(), impl().grad);
}

void Tensor::zero_grad() {
  auto& g = impl().grad;
  std::fill(g.begin(), g.end(), 0.0);
}

void Tensor::clear_grad() {
  impl().grad.clear();
  impl().grad.shrink_to_fit();
}

Tensor Tensor::detach() const { return Tensor(shape(), impl().data); }

Tensor Tensor::clone() const {
  Tensor t = detach();
  t.impl().requires_grad = requires_grad();
  return t;
}

const std::shared_ptr<detail::Node>& Tensor::node() const { return impl().node; }

Graph Graph::collect(const Tensor& root) {
  Graph g;
  if (!root.defined() || !root.node()) return g;

  // Iterative post-order DFS; inputs are visited in argument order so the
  // resulting order depends only on graph structure.
  std::unordered_set<const detail::TensorImpl*> seen;
  struct Frame {
    detail::TensorImpl* impl;
    std::size_t next_input;
  };
  std::vector<Frame> stack;
  stack.push_back({&root.impl(), 0});
  seen.insert(&root.impl());
  while (!stack.empty()) {
    Frame& top = stack.back();
    detail::Node* node = top.impl->node.get();
    if (top.next_input < node->inputs.size()) {
      const Tensor& in = node->inputs[top.next_input++];
      detail::TensorImpl* child = &in.impl();
      if (child->node && seen.insert(child).second) {
        stack.push_back({child, 0});
      }
      continue;
    }
    g.entries_.push_back({node->op, top.impl, node});
    stack.pop_back();
  }
  return g;
}

void Tensor::backward() const {
  if (numel() != 1) {
    throw ShapeError("backward: loss must be a single element, got shape " +
                     shape_str(shape()));
  }
  if (!requires_grad()) {
    throw std::logic_error("backward: loss does not depend on any tensor requiring grad");
  }
  Graph graph = Graph::collect(*this);
  for (const auto& e : graph.entries()) {
    if (e.node->consumed) {
      throw std::logic_error("backward: graph was already swept (op '" +
                             std::string(e.op) + "')");
    }
  }
  auto& root = impl();
  root.grad.assign(1, 1.0);
  auto entries = graph.entries();
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    detail::TensorImpl& out = *it->output;
    if (out.grad.empty()) out.grad.assign(out.data.size(), 0.0);
    it->node->backward(out, out.grad);
    it->node->consumed = true;
  }
}

Tensor record_op(Shape shape, std::vector<double> data, std::string_view op,
                 std::vector<Tensor> inputs, detail::BackwardFn backward) {
  Tensor out(std::move(shape), std::move(data));
  const bool needs_grad = std::any_of(inputs.begin(), inputs.end(),
                                      [](const Tensor& t) { return t.requires_grad(); });
  if (needs_grad) {
    auto node = std::make_shared<detail::Node>();
    node->op = op;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
    out.impl().node = std::move(node);
    out.impl().requires_grad = true;
  }
  return out;
}

std::span<double> grad_accumulator(const Tensor& t) {
  auto& impl = t.impl();
  if (impl.grad.empty()) impl.grad.assign(impl.data.size(), 0.0);
  return impl.grad;
}

}  // namespace atagan
