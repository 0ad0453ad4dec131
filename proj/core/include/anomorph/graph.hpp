#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "anomorph/nd_array.hpp"

namespace anomorph {

// Reverse-mode autodiff over a DAG of float32 arrays. A graph is built by
// the op constructors in ops.hpp, is confined to one thread, and is freed
// when the last Tensor referencing its root goes out of scope. Parameter
// leaves outlive graphs and accumulate gradients across backward() calls.

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    NdArray value;
    NdArray grad;                       // per-backward scratch, same shape as value
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backprop; // propagates this->grad into parents' grads
    std::unique_ptr<NdArray> sink;       // parameter accumulation buffer, if a leaf

    void ensure_grad() {
        if (grad.size() != value.size()) grad = NdArray(value.shape());
        else grad.fill(0.0f);
    }
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(NodePtr n) : node_(std::move(n)) {}

    // Leaf with no gradient flow.
    static Tensor constant(NdArray v);
    // Leaf that participates in backward().
    static Tensor leaf(NdArray v, bool requires_grad);

    bool defined() const { return node_ != nullptr; }
    const NdArray& value() const { return node_->value; }
    NdArray& value() { return node_->value; }
    const NdArray& grad() const { return node_->grad; }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    const std::vector<int>& shape() const { return node_->value.shape(); }

    // Scalar convenience for rank-1 size-1 tensors (losses).
    float scalar() const;

    NodePtr node() const { return node_; }

private:
    NodePtr node_;
};

// While alive, ops build no backward closures: outputs are constants.
// Used for frozen-network forward passes and inference.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
    static bool active();

private:
    bool prev_;
};

// A named trainable weight. The node persists across training steps; the
// accumulated gradient buffer lives inside the node (stable across Parameter
// moves) and is zeroed between optimizer steps by the optimizer, never by
// backward itself.
struct Parameter {
    std::string name;
    NodePtr node;
    NdArray adam_m, adam_v;

    Parameter() = default;
    Parameter(std::string n, NdArray value);

    Tensor tensor() const { return Tensor(node); }
    NdArray& value() { return node->value; }
    const NdArray& value() const { return node->value; }
    NdArray& grad() { return *node->sink; }
    const NdArray& grad() const { return *node->sink; }
    void zero_grad() { node->sink->fill(0.0f); }
};

// Reverse topological sweep from a scalar loss. Gradients of reachable
// Parameters are *added* to their accumulation buffers: two backward calls
// without zeroing double them.
void backward(const Tensor& loss);

// Op-construction helper. Attaches the closure only when gradients can flow.
Tensor make_op(NdArray value, const std::vector<Tensor>& inputs,
               std::function<void(Node&)> backprop);

} // namespace anomorph
