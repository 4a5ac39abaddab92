#include "daylight/nn/tape.hpp"

#include <fmt/format.h>

#include "daylight/errors.hpp"

namespace illum::nn {

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (v.id >= nodes_.size()) throw InternalError(fmt::format("tape has no node {}", v.id));
  return nodes_[v.id];
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  if (v.id >= nodes_.size()) throw InternalError(fmt::format("tape has no node {}", v.id));
  return nodes_[v.id];
}

template <typename T>
Var Tape<T>::constant(Tensor<T> value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}});
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Tape<T>::variable(Tensor<T> value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}});
  return Var{nodes_.size() - 1};
}

template <typename T>
Var Tape<T>::record(Tensor<T> value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs_grad = false;
  for (Var in : inputs) {
    // An input at or beyond the new node's position would close a cycle.
    if (in.id >= nodes_.size()) {
      throw InternalError(fmt::format("node {} references node {} that is not yet recorded", nodes_.size(), in.id));
    }
    needs_grad = needs_grad || nodes_[in.id].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs_grad, needs_grad ? std::move(backward) : BackwardFn{}});
  return Var{nodes_.size() - 1};
}

template <typename T>
Tensor<T> Tape<T>::gradient(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty()) return Tensor<T>::zeros(n.value.shape());
  return n.grad;
}

template <typename T>
Tensor<T>& Tape<T>::grad_mut(Var v) {
  Node& n = node(v);
  if (n.grad.empty()) n.grad = Tensor<T>::zeros(n.value.shape());
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var loss) {
  Node& root = node(loss);
  if (root.value.numel() != 1) {
    throw DimensionError(fmt::format("backward needs a scalar loss, got shape {}", shape_to_string(root.value.shape())));
  }
  for (auto& n : nodes_) n.grad = Tensor<T>{};
  grad_mut(loss).fill(T{1});
  visits_ = 0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    ++visits_;
    // Callbacks only touch grad_mut() of earlier nodes.
    n.backward(*this, n.grad);
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace illum::nn
