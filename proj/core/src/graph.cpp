#include "anomorph/graph.hpp"

#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace anomorph {

namespace {
thread_local bool g_no_grad = false;
} // namespace

NoGradGuard::NoGradGuard() : prev_(g_no_grad) { g_no_grad = true; }
NoGradGuard::~NoGradGuard() { g_no_grad = prev_; }
bool NoGradGuard::active() { return g_no_grad; }

Tensor Tensor::constant(NdArray v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = false;
    return Tensor(std::move(n));
}

Tensor Tensor::leaf(NdArray v, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = requires_grad && !g_no_grad;
    return Tensor(std::move(n));
}

float Tensor::scalar() const {
    if (!node_ || node_->value.size() != 1)
        throw std::logic_error("Tensor::scalar: tensor is not a single element");
    return node_->value.data()[0];
}

Parameter::Parameter(std::string n, NdArray value) : name(std::move(n)) {
    node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    node->sink = std::make_unique<NdArray>(node->value.shape());
    adam_m = NdArray(node->value.shape());
    adam_m.fill(0.0f);
    adam_v = NdArray(node->value.shape());
    adam_v.fill(0.0f);
}

Tensor make_op(NdArray value, const std::vector<Tensor>& inputs,
               std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    if (!g_no_grad) {
        bool any = false;
        for (const auto& t : inputs)
            if (t.defined() && t.node()->requires_grad) any = true;
        if (any) {
            n->requires_grad = true;
            n->backprop = std::move(backprop);
            n->parents.reserve(inputs.size());
            for (const auto& t : inputs) n->parents.push_back(t.node());
        }
    }
    return Tensor(std::move(n));
}

void backward(const Tensor& loss) {
    if (!loss.defined()) throw std::logic_error("backward: undefined tensor");
    NodePtr root = loss.node();
    if (root->value.size() != 1)
        throw std::logic_error("backward: loss must be a single element, got shape " +
                               root->value.shape_str());
    if (!root->requires_grad) return;

    // Iterative post-order DFS for a reverse topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (idx < n->parents.size()) {
            Node* p = n->parents[idx++].get();
            if (p && p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    // Zero scratch gradients, then seed the root with d loss / d loss = 1.
    for (Node* n : order) n->ensure_grad();
    root->grad.data()[0] = 1.0f;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop) n->backprop(*n);
        if (n->sink) n->sink->add_inplace(n->grad);
    }
}

} // namespace anomorph
