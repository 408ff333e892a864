#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "mgmap/core/errors.hpp"

namespace mgmap::ad {

// Reverse-mode autodiff on dense row-major tensors. Templated on the value
// type: float in production, double for the finite-difference suite.
//
// Tensors are handles onto graph nodes. Each op allocates a fresh node whose
// backward closure scatters the output gradient into its parents; backward()
// walks the recorded graph once in reverse topological order, accumulating
// additively into shared inputs.

template <typename T>
struct Node {
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;  // allocated lazily, same extent as value
  bool requires_grad = false;
  bool needs_grad = false;  // requires_grad or any parent needs it
  std::string name;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  long numel() const {
    long n = 1;
    for (int e : shape) n *= e;
    return n;
  }
  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), T(0));
  }
};

// Thread-local switch: when off, ops compute values but record no graph.
bool grad_enabled();
void set_grad_enabled(bool on);

struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(grad_enabled()) { set_grad_enabled(false); }
  ~NoGradGuard() { set_grad_enabled(prev); }
};

// Global toggle: validate op outputs for NaN/Inf (tests keep this on).
bool finite_checks();
void set_finite_checks(bool on);

template <typename T>
class TensorT {
 public:
  TensorT() = default;
  explicit TensorT(std::shared_ptr<Node<T>> n) : node_(std::move(n)) {}

  static TensorT zeros(std::vector<int> shape, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->shape = std::move(shape);
    n->value.assign(n->numel(), T(0));
    n->requires_grad = requires_grad;
    n->needs_grad = requires_grad;
    return TensorT(std::move(n));
  }

  static TensorT full(std::vector<int> shape, T v, bool requires_grad = false) {
    TensorT t = zeros(std::move(shape), requires_grad);
    std::fill(t.node_->value.begin(), t.node_->value.end(), v);
    return t;
  }

  static TensorT scalar(T v, bool requires_grad = false) {
    return full({1}, v, requires_grad);
  }

  static TensorT from_data(std::vector<int> shape, std::vector<T> data,
                           bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->shape = std::move(shape);
    if (static_cast<long>(data.size()) != n->numel())
      throw ShapeError("from_data: size does not match shape");
    n->value = std::move(data);
    n->requires_grad = requires_grad;
    n->needs_grad = requires_grad;
    return TensorT(std::move(n));
  }

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node_->shape; }
  long numel() const { return node_->numel(); }
  int dim(int i) const { return node_->shape[i]; }
  int ndim() const { return static_cast<int>(node_->shape.size()); }

  T* data() { return node_->value.data(); }
  const T* data() const { return node_->value.data(); }
  std::vector<T>& values() { return node_->value; }
  const std::vector<T>& values() const { return node_->value; }

  const std::vector<T>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool needs_grad() const { return node_ && node_->needs_grad; }
  const std::string& name() const { return node_->name; }
  void set_name(const std::string& n) { node_->name = n; }

  T item() const {
    if (numel() != 1) throw ShapeError("item() on non-scalar tensor");
    return node_->value[0];
  }
  T at(long i) const { return node_->value[i]; }

  // Value copy detached from the graph.
  TensorT detach() const {
    auto n = std::make_shared<Node<T>>();
    n->shape = node_->shape;
    n->value = node_->value;
    return TensorT(std::move(n));
  }

  void zero_grad() {
    if (node_) node_->grad.assign(node_->value.size(), T(0));
  }

  // Reverse pass from a scalar output.
  void backward() const {
    if (numel() != 1) throw ShapeError("backward() requires a scalar output");
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    // Iterative post-order DFS.
    std::vector<std::pair<Node<T>*, size_t>> stack;
    stack.push_back({node_.get(), 0});
    seen.insert(node_.get());
    while (!stack.empty()) {
      auto& [cur, idx] = stack.back();
      if (idx < cur->parents.size()) {
        Node<T>* p = cur->parents[idx].get();
        ++idx;
        if (p->needs_grad && !seen.count(p)) {
          seen.insert(p);
          stack.push_back({p, 0});
        }
      } else {
        order.push_back(cur);
        stack.pop_back();
      }
    }
    node_->ensure_grad();
    node_->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node<T>* n = *it;
      if (n->backward) n->backward(*n);
    }
  }

  std::shared_ptr<Node<T>> node() const { return node_; }

  std::string shape_str() const {
    std::ostringstream out;
    out << "(";
    for (size_t i = 0; i < node_->shape.size(); ++i)
      out << node_->shape[i] << (i + 1 < node_->shape.size() ? "," : "");
    out << ")";
    return out.str();
  }

 private:
  std::shared_ptr<Node<T>> node_;
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

template <typename T>
void check_output_finite(const TensorT<T>& t, const char* op) {
  if (!finite_checks()) return;
  for (T v : t.values())
    if (!std::isfinite(v))
      throw NumericError(std::string("non-finite value produced by ") + op);
}

// Graph construction helper used by every op.
template <typename T>
TensorT<T> make_op(std::vector<int> shape, std::vector<std::shared_ptr<Node<T>>> parents,
                   std::function<void(Node<T>&)> backward) {
  auto n = std::make_shared<Node<T>>();
  n->shape = std::move(shape);
  n->value.assign(n->numel(), T(0));
  if (grad_enabled()) {
    bool needs = false;
    for (auto& p : parents) needs = needs || p->needs_grad;
    if (needs) {
      n->needs_grad = true;
      n->parents = std::move(parents);
      n->backward = std::move(backward);
    }
  }
  return TensorT<T>(std::move(n));
}

}  // namespace mgmap::ad
