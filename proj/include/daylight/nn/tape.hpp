#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "daylight/nn/tensor.hpp"

namespace illum::nn {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

// Reverse-mode tape. Nodes are appended in evaluation order and may only
// reference earlier nodes, so the append order is a topological order and
// backward() replays it in reverse.
template <typename T>
class Tape {
 public:
  // Receives the gradient flowing into the node and accumulates into the
  // node's inputs via grad_mut().
  using BackwardFn = std::function<void(Tape&, const Tensor<T>& out_grad)>;

  Var constant(Tensor<T> value);
  Var variable(Tensor<T> value);
  Var record(Tensor<T> value, std::initializer_list<Var> inputs, BackwardFn backward);

  const Tensor<T>& value(Var v) const { return node(v).value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  // Gradient of the last backward() target with respect to v; zeros when v
  // was not reachable.
  Tensor<T> gradient(Var v) const;
  Tensor<T>& grad_mut(Var v);

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must hold one element.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  // Number of nodes whose backward function ran during the last backward().
  std::size_t last_backward_visits() const { return visits_; }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // empty until something flows into it
    bool requires_grad = false;
    BackwardFn backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::deque<Node> nodes_;  // deque: references stay valid while recording
  std::size_t visits_ = 0;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace illum::nn
