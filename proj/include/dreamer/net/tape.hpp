#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "dreamer/net/tensor.hpp"

namespace dreamer::net {

// Reverse-mode tape sized for the handful of graphs the model needs: one tape
// per training step (or per inference call), nodes appended in topological
// order, gradients propagated by walking the node list backwards.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  // Leaf over external storage; the pointee must outlive the tape.
  int leaf(const Tensor* value, bool requires_grad) {
    Node n;
    n.ref = value;
    n.needs = requires_grad;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int constant(Tensor value) {
    Node n;
    n.owned = std::move(value);
    n.needs = false;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int node(Tensor value, std::vector<int> parents, BackwardFn back) {
    Node n;
    n.owned = std::move(value);
    n.parents = std::move(parents);
    for (int p : n.parents)
      if (nodes_[static_cast<size_t>(p)].needs) n.needs = true;
    if (n.needs) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Tensor& value(int id) const {
    const Node& n = nodes_[static_cast<size_t>(id)];
    return n.ref ? *n.ref : n.owned;
  }

  bool wants(int id) const { return nodes_[static_cast<size_t>(id)].needs; }

  // Gradient accumulator, zero-initialized on first touch.
  Tensor& grad(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.has_grad) {
      n.grad = Tensor(value(id).shape);
      n.has_grad = true;
    }
    return n.grad;
  }

  bool has_grad(int id) const { return nodes_[static_cast<size_t>(id)].has_grad; }

  // Seeds d(loss)/d(loss) = 1 and propagates to every leaf that needs
  // gradients. `loss` must be a scalar node.
  void backward(int loss);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    const Tensor* ref = nullptr;
    Tensor owned;
    Tensor grad;
    bool has_grad = false;
    bool needs = false;
    std::vector<int> parents;
    BackwardFn back;
  };
  std::vector<Node> nodes_;
};

// Number of backward passes executed on the calling thread. The actor path
// must never run gradient work; tests assert this stays zero there.
int64_t backward_calls_this_thread();

}  // namespace dreamer::net
