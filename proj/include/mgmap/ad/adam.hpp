#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mgmap/ad/nn.hpp"
#include "mgmap/ad/tensor.hpp"

namespace mgmap::ad {

// Bias-corrected Adam. Moments are keyed by parameter name so the optimizer
// survives parameter-set rebuilds with identical naming.
template <typename T>
class Adam {
 public:
  struct Moments {
    std::vector<T> m, v;
  };

  explicit Adam(T lr = T(2.5e-4), T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  long step_count() const { return step_; }
  T lr() const { return lr_; }

  // Applies one update from accumulated gradients, then clears them.
  void step(ParamSet<T>& params) {
    ++step_;
    double bc1 = 1.0 - std::pow(static_cast<double>(beta1_), static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(static_cast<double>(beta2_), static_cast<double>(step_));
    for (auto& [name, p] : const_cast<std::map<std::string, TensorT<T>>&>(params.entries())) {
      if (!p.requires_grad()) continue;
      auto& node = *p.node();
      if (node.grad.empty()) continue;
      auto& st = moments_[name];
      if (st.m.empty()) {
        st.m.assign(node.value.size(), T(0));
        st.v.assign(node.value.size(), T(0));
      }
      for (size_t i = 0; i < node.value.size(); ++i) {
        T g = node.grad[i];
        st.m[i] = beta1_ * st.m[i] + (T(1) - beta1_) * g;
        st.v[i] = beta2_ * st.v[i] + (T(1) - beta2_) * g * g;
        T mhat = static_cast<T>(st.m[i] / bc1);
        T vhat = static_cast<T>(st.v[i] / bc2);
        node.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
    params.zero_grads();
  }

  // Global-norm gradient clipping; returns the pre-clip norm.
  static double clip_grad_norm(ParamSet<T>& params, double max_norm) {
    double total = 0;
    for (auto& [name, p] : params.entries()) {
      if (!p.requires_grad()) continue;
      for (T g : p.grad()) total += static_cast<double>(g) * g;
    }
    double norm = std::sqrt(total);
    if (norm > max_norm && norm > 0) {
      T scale = static_cast<T>(max_norm / norm);
      for (auto& [name, p] : const_cast<std::map<std::string, TensorT<T>>&>(params.entries())) {
        if (!p.requires_grad()) continue;
        for (T& g : p.node()->grad) g *= scale;
      }
    }
    return norm;
  }

 private:
  T lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace mgmap::ad
