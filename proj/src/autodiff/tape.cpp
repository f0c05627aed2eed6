#include "adling/autodiff/tape.hpp"

#include "adling/error.hpp"

namespace adling::ad {

Var Tape::input(Tensor value, bool requires_grad) {
  Node& node = nodes_.emplace_back();
  node.owned = std::move(value);
  node.value = &node.owned;
  node.requires_grad = requires_grad;
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::parameter(const Tensor& value, Tensor* grad_sink) {
  if (grad_sink && grad_sink->shape() != value.shape()) {
    throw ShapeError("gradient sink " + shape_string(grad_sink->shape()) + " does not match parameter " +
                     shape_string(value.shape()));
  }
  Node& node = nodes_.emplace_back();
  node.value = &value;
  node.grad = grad_sink;
  node.requires_grad = grad_sink != nullptr;
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw UsageError("operation mixes values from different tapes");
    needs = needs || nodes_[in.id()].requires_grad;
  }
  Node& node = nodes_.emplace_back();
  node.owned = std::move(value);
  node.value = &node.owned;
  node.requires_grad = needs;
  if (needs) node.backward = std::move(backward);
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Tensor& Tape::grad(Var v) {
  Node& node = nodes_[v.id()];
  if (!node.grad) {
    node.owned_grad = Tensor(node.value->shape(), 0.0);
    node.grad = &node.owned_grad;
  }
  return *node.grad;
}

const Tensor& Tape::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  return node.grad ? *node.grad : empty_;
}

void Tape::backward(Var root, double seed) {
  if (consumed_) throw UsageError("backward called on a consumed tape");
  if (&root.tape() != this) throw UsageError("backward root belongs to another tape");
  consumed_ = true;
  Tensor& g = grad(root);
  for (double& x : g.values()) x += seed;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    ++visits_;
    if (node.backward && node.grad) node.backward(*this, Var(this, static_cast<std::uint32_t>(i)));
  }
}

}  // namespace adling::ad
