#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>

#include "adling/autodiff/tensor.hpp"

namespace adling::ad {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  /// Gradient after backward(); zeros when nothing flowed into this value.
  const Tensor& grad() const;

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Records primitive operations in execution order so gradients can be
/// accumulated in one reverse sweep. A tape supports a single backward pass.
///
/// Parameters are bound by pointer: the tape never copies them, and their
/// gradients accumulate straight into caller-owned sink tensors.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var result)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf holding its own value. Inputs whose gradient is wanted (embedding
  /// rows for saliency, grad-check probes) set `requires_grad`.
  Var input(Tensor value, bool requires_grad = false);

  /// Leaf referencing an external parameter. A null `grad_sink` freezes it.
  Var parameter(const Tensor& value, Tensor* grad_sink);

  /// Appends an operation result. `backward` reads grad(result) and adds
  /// into the gradients of the operation's inputs that require them.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
  }

  const Tensor& value(Var v) const { return *nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  /// Gradient buffer of `v`, allocated as zeros on first use.
  Tensor& grad(Var v);
  const Tensor& grad(Var v) const;

  /// Seeds d(root)/d(root) = seed on every element of root and sweeps the
  /// tape in reverse. Throws UsageError when called twice.
  void backward(Var root, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }
  std::size_t backward_visits() const { return visits_; }

 private:
  struct Node {
    Tensor owned;
    const Tensor* value = nullptr;
    Tensor owned_grad;
    Tensor* grad = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;
  bool consumed_ = false;
  std::size_t visits_ = 0;
  Tensor empty_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }
inline const Tensor& Var::grad() const { return tape_->grad(*this); }

}  // namespace adling::ad
