#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "dcdgan/tensor.hpp"

namespace dcdgan {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape& tape() const { return *tape_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode autodiff tape. Each forward pass records nodes in creation
/// order; backward() walks them in reverse. A tape may be differentiated
/// several times from different roots; gradients are reset on each call.
class Tape {
 public:
  /// Called with the gradient of the node's output; accumulates into inputs.
  using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var leaf(Tensor value, bool requires_grad);
  /// Records an op output. The node requires grad iff any input does; the
  /// backward closure is dropped otherwise.
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Tensor value, const std::vector<Var>& inputs, Backward backward);

  /// Seeds d(root)/d(root) = 1 for a scalar root and propagates.
  void backward(Var root);

  /// Gradient from the most recent backward(); zeros if the node was not reached.
  Tensor grad(Var v) const;

  /// Adds `g` into the gradient buffer of `v` (no-op if v does not require grad).
  void accumulate(Var v, const Tensor& g);
  /// Direct access to the gradient buffer, allocated on first use.
  Tensor& grad_buffer(Var v);

  const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };

  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

}  // namespace dcdgan
