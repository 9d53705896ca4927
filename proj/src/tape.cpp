#include "dcdgan/tape.hpp"

#include "dcdgan/errors.hpp"

namespace dcdgan {

Var Tape::constant(Tensor value) { return leaf(std::move(value), false); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backward backward) {
  bool rg = false;
  for (const Var& v : inputs) rg = rg || (v.valid() && v.requires_grad());
  nodes_.push_back(Node{std::move(value), Tensor{}, rg, rg ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, Backward backward) {
  bool rg = false;
  for (const Var& v : inputs) rg = rg || (v.valid() && v.requires_grad());
  nodes_.push_back(Node{std::move(value), Tensor{}, rg, rg ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(Var root) {
  if (&root.tape() != this) throw ConfigError("backward: variable from another tape");
  if (root.value().size() != 1) throw ShapeError("backward: root must be scalar, got " + root.shape().str());
  for (auto& node : nodes_) node.grad = Tensor{};
  auto& r = nodes_[static_cast<std::size_t>(root.id())];
  if (!r.requires_grad) return;
  r.grad = Tensor(r.value.shape(), 1.0);
  for (int id = root.id(); id >= 0; --id) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.requires_grad || !node.backward || node.grad.empty()) continue;
    node.backward(*this, node.grad);
  }
}

Tensor Tape::grad(Var v) const {
  const auto& node = nodes_[static_cast<std::size_t>(v.id())];
  if (node.grad.empty()) return Tensor(node.value.shape(), 0.0);
  return node.grad;
}

Tensor& Tape::grad_buffer(Var v) {
  auto& node = nodes_[static_cast<std::size_t>(v.id())];
  if (node.grad.empty()) node.grad = Tensor(node.value.shape(), 0.0);
  return node.grad;
}

void Tape::accumulate(Var v, const Tensor& g) {
  if (!v.valid() || !v.requires_grad()) return;
  Tensor& buf = grad_buffer(v);
  if (buf.shape() != g.shape()) {
    throw ShapeError("gradient shape " + g.shape().str() + " vs value " + buf.shape().str());
  }
  double* dst = buf.data();
  const double* src = g.data();
  const auto n = buf.size();
  for (std::int64_t i = 0; i < n; ++i) dst[i] += src[i];
}

}  // namespace dcdgan
