#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mgmap/ad/kernels.hpp"
#include "mgmap/ad/tensor.hpp"

namespace mgmap::ad {

namespace detail {
template <typename T>
void require_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
}
}  // namespace detail

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "add");
  auto out = make_op<T>(a.shape(), {a.node(), b.node()}, [](Node<T>& n) {
    for (int k = 0; k < 2; ++k) {
      auto& p = n.parents[k];
      if (!p->needs_grad) continue;
      p->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) p->grad[i] += n.grad[i];
    }
  });
  const T* av = a.data();
  const T* bv = b.data();
  T* ov = out.data();
  for (long i = 0; i < out.numel(); ++i) ov[i] = av[i] + bv[i];
  check_output_finite(out, "add");
  return out;
}

template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "sub");
  auto out = make_op<T>(a.shape(), {a.node(), b.node()}, [](Node<T>& n) {
    if (n.parents[0]->needs_grad) {
      n.parents[0]->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) n.parents[0]->grad[i] += n.grad[i];
    }
    if (n.parents[1]->needs_grad) {
      n.parents[1]->ensure_grad();
      for (size_t i = 0; i < n.grad.size(); ++i) n.parents[1]->grad[i] -= n.grad[i];
    }
  });
  for (long i = 0; i < out.numel(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  check_output_finite(out, "sub");
  return out;
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "mul");
  std::vector<T> av = a.values(), bv = b.values();
  auto out = make_op<T>(a.shape(), {a.node(), b.node()},
                        [av, bv](Node<T>& n) {
                          if (n.parents[0]->needs_grad) {
                            n.parents[0]->ensure_grad();
                            for (size_t i = 0; i < n.grad.size(); ++i)
                              n.parents[0]->grad[i] += n.grad[i] * bv[i];
                          }
                          if (n.parents[1]->needs_grad) {
                            n.parents[1]->ensure_grad();
                            for (size_t i = 0; i < n.grad.size(); ++i)
                              n.parents[1]->grad[i] += n.grad[i] * av[i];
                          }
                        });
  for (long i = 0; i < out.numel(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  check_output_finite(out, "mul");
  return out;
}

// Scalar-tensor forms (the only broadcasting supported).
template <typename T>
TensorT<T> scale(const TensorT<T>& a, T s) {
  auto out = make_op<T>(a.shape(), {a.node()}, [s](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) p->grad[i] += n.grad[i] * s;
  });
  for (long i = 0; i < out.numel(); ++i) out.data()[i] = a.data()[i] * s;
  check_output_finite(out, "scale");
  return out;
}

template <typename T>
TensorT<T> add_scalar(const TensorT<T>& a, T s) {
  auto out = make_op<T>(a.shape(), {a.node()}, [](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) p->grad[i] += n.grad[i];
  });
  for (long i = 0; i < out.numel(); ++i) out.data()[i] = a.data()[i] + s;
  check_output_finite(out, "add_scalar");
  return out;
}

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
  std::vector<T> xv = x.values();
  auto out = make_op<T>(x.shape(), {x.node()}, [xv](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i)
      if (xv[i] > T(0)) p->grad[i] += n.grad[i];
  });
  for (long i = 0; i < out.numel(); ++i) out.data()[i] = std::max(x.data()[i], T(0));
  check_output_finite(out, "relu");
  return out;
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x) {
  auto out = TensorT<T>::zeros(x.shape());
  for (long i = 0; i < x.numel(); ++i) out.data()[i] = T(1) / (T(1) + std::exp(-x.data()[i]));
  std::vector<T> yv = out.values();
  auto res = make_op<T>(x.shape(), {x.node()}, [yv](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i)
      p->grad[i] += n.grad[i] * yv[i] * (T(1) - yv[i]);
  });
  res.values() = std::move(out.values());
  check_output_finite(res, "sigmoid");
  return res;
}

template <typename T>
TensorT<T> tanh_op(const TensorT<T>& x) {
  auto out = TensorT<T>::zeros(x.shape());
  for (long i = 0; i < x.numel(); ++i) out.data()[i] = std::tanh(x.data()[i]);
  std::vector<T> yv = out.values();
  auto res = make_op<T>(x.shape(), {x.node()}, [yv](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i)
      p->grad[i] += n.grad[i] * (T(1) - yv[i] * yv[i]);
  });
  res.values() = std::move(out.values());
  check_output_finite(res, "tanh");
  return res;
}

// a (r,k) @ b (k,c) -> (r,c); dA = dC.B^T, dB = A^T.dC
template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.ndim() != 2 || b.ndim() != 2) throw ShapeError("matmul: expects 2-D operands");
  int r = a.dim(0), k = a.dim(1), k2 = b.dim(0), c = b.dim(1);
  if (k != k2)
    throw ShapeError("matmul: inner extents disagree " + a.shape_str() + " vs " + b.shape_str());
  std::vector<T> av = a.values(), bv = b.values();
  auto out = make_op<T>({r, c}, {a.node(), b.node()}, [av, bv, r, k, c](Node<T>& n) {
    if (n.parents[0]->needs_grad) {
      n.parents[0]->ensure_grad();
      T* da = n.parents[0]->grad.data();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
          T g = n.grad[static_cast<long>(i) * c + j];
          if (g == T(0)) continue;
          for (int t = 0; t < k; ++t)
            da[static_cast<long>(i) * k + t] += g * bv[static_cast<long>(t) * c + j];
        }
    }
    if (n.parents[1]->needs_grad) {
      n.parents[1]->ensure_grad();
      T* db = n.parents[1]->grad.data();
      for (int i = 0; i < r; ++i)
        for (int t = 0; t < k; ++t) {
          T aval = av[static_cast<long>(i) * k + t];
          if (aval == T(0)) continue;
          const T* grow = n.grad.data() + static_cast<long>(i) * c;
          T* dbrow = db + static_cast<long>(t) * c;
          for (int j = 0; j < c; ++j) dbrow[j] += aval * grow[j];
        }
    }
  });
  T* ov = out.data();
  for (int i = 0; i < r; ++i) {
    T* orow = ov + static_cast<long>(i) * c;
    for (int t = 0; t < k; ++t) {
      T aval = a.data()[static_cast<long>(i) * k + t];
      if (aval == T(0)) continue;
      const T* brow = b.data() + static_cast<long>(t) * c;
      for (int j = 0; j < c; ++j) orow[j] += aval * brow[j];
    }
  }
  check_output_finite(out, "matmul");
  return out;
}

// W (r,c) @ x (c) -> (r)
template <typename T>
TensorT<T> matvec(const TensorT<T>& w, const TensorT<T>& x) {
  if (w.ndim() != 2 || x.ndim() != 1) throw ShapeError("matvec: expects (r,c) and (c)");
  int r = w.dim(0), c = w.dim(1);
  if (x.dim(0) != c)
    throw ShapeError("matvec: extents disagree " + w.shape_str() + " vs " + x.shape_str());
  std::vector<T> wv = w.values(), xv = x.values();
  auto out = make_op<T>({r}, {w.node(), x.node()}, [wv, xv, r, c](Node<T>& n) {
    if (n.parents[0]->needs_grad) {
      n.parents[0]->ensure_grad();
      T* dw = n.parents[0]->grad.data();
      for (int i = 0; i < r; ++i) {
        T g = n.grad[i];
        if (g == T(0)) continue;
        T* dwrow = dw + static_cast<long>(i) * c;
        for (int j = 0; j < c; ++j) dwrow[j] += g * xv[j];
      }
    }
    if (n.parents[1]->needs_grad) {
      n.parents[1]->ensure_grad();
      T* dx = n.parents[1]->grad.data();
      for (int i = 0; i < r; ++i) {
        T g = n.grad[i];
        if (g == T(0)) continue;
        const T* wrow = wv.data() + static_cast<long>(i) * c;
        for (int j = 0; j < c; ++j) dx[j] += g * wrow[j];
      }
    }
  });
  for (int i = 0; i < r; ++i) {
    T acc = 0;
    const T* wrow = w.data() + static_cast<long>(i) * c;
    for (int j = 0; j < c; ++j) acc += wrow[j] * x.data()[j];
    out.data()[i] = acc;
  }
  check_output_finite(out, "matvec");
  return out;
}

template <typename T>
TensorT<T> transpose2d(const TensorT<T>& a) {
  if (a.ndim() != 2) throw ShapeError("transpose2d: expects 2-D");
  int r = a.dim(0), c = a.dim(1);
  auto out = make_op<T>({c, r}, {a.node()}, [r, c](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (int i = 0; i < c; ++i)
      for (int j = 0; j < r; ++j)
        p->grad[static_cast<long>(j) * c + i] += n.grad[static_cast<long>(i) * r + j];
  });
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out.data()[static_cast<long>(j) * r + i] = a.data()[static_cast<long>(i) * c + j];
  return out;
}

template <typename T>
TensorT<T> reshape(const TensorT<T>& a, std::vector<int> shape) {
  long n = 1;
  for (int e : shape) n *= e;
  if (n != a.numel()) throw ShapeError("reshape: element count mismatch");
  auto out = make_op<T>(shape, {a.node()}, [](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (size_t i = 0; i < n.grad.size(); ++i) p->grad[i] += n.grad[i];
  });
  out.values() = a.values();
  return out;
}

// Concatenate along axis 0; trailing dims must agree.
template <typename T>
TensorT<T> concat0(const std::vector<TensorT<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat0: no inputs");
  std::vector<int> shape = parts[0].shape();
  long inner = 1;
  for (size_t d = 1; d < shape.size(); ++d) inner *= shape[d];
  int total = 0;
  for (const auto& p : parts) {
    if (p.ndim() != static_cast<int>(shape.size()))
      throw ShapeError("concat0: rank mismatch");
    for (size_t d = 1; d < shape.size(); ++d)
      if (p.shape()[d] != shape[d]) throw ShapeError("concat0: trailing extent mismatch");
    total += p.dim(0);
  }
  shape[0] = total;
  std::vector<std::shared_ptr<Node<T>>> nodes;
  std::vector<long> sizes;
  for (const auto& p : parts) {
    nodes.push_back(p.node());
    sizes.push_back(p.numel());
  }
  auto out = make_op<T>(shape, nodes, [sizes](Node<T>& n) {
    long off = 0;
    for (size_t k = 0; k < n.parents.size(); ++k) {
      auto& p = n.parents[k];
      if (p->needs_grad) {
        p->ensure_grad();
        for (long i = 0; i < sizes[k]; ++i) p->grad[i] += n.grad[off + i];
      }
      off += sizes[k];
    }
  });
  long off = 0;
  for (const auto& p : parts) {
    std::copy(p.values().begin(), p.values().end(), out.values().begin() + off);
    off += p.numel();
  }
  return out;
}

// Slice along axis 0: rows [start, start+len).
template <typename T>
TensorT<T> slice0(const TensorT<T>& a, int start, int len) {
  if (a.ndim() < 1 || start < 0 || len < 0 || start + len > a.dim(0))
    throw ShapeError("slice0: range out of bounds");
  std::vector<int> shape = a.shape();
  shape[0] = len;
  long inner = 1;
  for (size_t d = 1; d < shape.size(); ++d) inner *= shape[d];
  auto out = make_op<T>(shape, {a.node()}, [start, inner](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    long off = static_cast<long>(start) * inner;
    for (size_t i = 0; i < n.grad.size(); ++i) p->grad[off + i] += n.grad[i];
  });
  std::copy(a.values().begin() + static_cast<long>(start) * inner,
            a.values().begin() + static_cast<long>(start + len) * inner, out.values().begin());
  return out;
}

// Stack L vectors of extent d into (L,d).
template <typename T>
TensorT<T> stack_rows(const std::vector<TensorT<T>>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no inputs");
  int d = rows[0].dim(0);
  for (const auto& r : rows)
    if (r.ndim() != 1 || r.dim(0) != d) throw ShapeError("stack_rows: extent mismatch");
  std::vector<std::shared_ptr<Node<T>>> nodes;
  for (const auto& r : rows) nodes.push_back(r.node());
  auto out = make_op<T>({static_cast<int>(rows.size()), d}, nodes, [d](Node<T>& n) {
    for (size_t k = 0; k < n.parents.size(); ++k) {
      auto& p = n.parents[k];
      if (!p->needs_grad) continue;
      p->ensure_grad();
      for (int i = 0; i < d; ++i) p->grad[i] += n.grad[k * d + i];
    }
  });
  for (size_t k = 0; k < rows.size(); ++k)
    std::copy(rows[k].values().begin(), rows[k].values().end(),
              out.values().begin() + k * d);
  return out;
}

// Softmax along `axis`, stabilized by max subtraction; the normalizer is
// accumulated in double so the outputs sum to 1 within 1e-6 even at f32.
template <typename T>
TensorT<T> softmax(const TensorT<T>& x, int axis) {
  if (axis < 0) axis += x.ndim();
  if (axis < 0 || axis >= x.ndim()) throw ShapeError("softmax: bad axis");
  int n = x.dim(axis);
  if (n < 1) throw ShapeError("softmax: empty axis");
  long outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= x.dim(d);
  for (int d = axis + 1; d < x.ndim(); ++d) inner *= x.dim(d);

  auto out = TensorT<T>::zeros(x.shape());
  const T* xv = x.data();
  T* yv = out.data();
  for (long o = 0; o < outer; ++o) {
    for (long in = 0; in < inner; ++in) {
      long base = o * n * inner + in;
      T mx = xv[base];
      for (int i = 1; i < n; ++i) mx = std::max(mx, xv[base + i * inner]);
      double denom = 0;
      for (int i = 0; i < n; ++i) {
        T e = std::exp(xv[base + i * inner] - mx);
        yv[base + i * inner] = e;
        denom += static_cast<double>(e);
      }
      for (int i = 0; i < n; ++i)
        yv[base + i * inner] = static_cast<T>(yv[base + i * inner] / denom);
    }
  }
  std::vector<T> yvals = out.values();
  auto res = make_op<T>(x.shape(), {x.node()}, [yvals, outer, inner, n](Node<T>& nd) {
    auto& p = nd.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (long o = 0; o < outer; ++o)
      for (long in = 0; in < inner; ++in) {
        long base = o * n * inner + in;
        double dot = 0;
        for (int i = 0; i < n; ++i)
          dot += static_cast<double>(nd.grad[base + i * inner]) * yvals[base + i * inner];
        for (int i = 0; i < n; ++i) {
          long k = base + i * inner;
          p->grad[k] += yvals[k] * (nd.grad[k] - static_cast<T>(dot));
        }
      }
  });
  res.values() = std::move(out.values());
  check_output_finite(res, "softmax");
  return res;
}

template <typename T>
TensorT<T> sum_all(const TensorT<T>& x) {
  long n = x.numel();
  auto out = make_op<T>({1}, {x.node()}, [n](Node<T>& nd) {
    auto& p = nd.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (long i = 0; i < n; ++i) p->grad[i] += nd.grad[0];
  });
  double acc = 0;
  for (long i = 0; i < n; ++i) acc += static_cast<double>(x.data()[i]);
  out.data()[0] = static_cast<T>(acc);
  check_output_finite(out, "sum");
  return out;
}

template <typename T>
TensorT<T> mean_all(const TensorT<T>& x) {
  long n = x.numel();
  auto out = make_op<T>({1}, {x.node()}, [n](Node<T>& nd) {
    auto& p = nd.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    T g = nd.grad[0] / static_cast<T>(n);
    for (long i = 0; i < n; ++i) p->grad[i] += g;
  });
  double acc = 0;
  for (long i = 0; i < n; ++i) acc += static_cast<double>(x.data()[i]);
  out.data()[0] = static_cast<T>(acc / static_cast<double>(n));
  check_output_finite(out, "mean");
  return out;
}

template <typename T>
TensorT<T> mse(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a, b, "mse");
  long n = a.numel();
  std::vector<T> av = a.values(), bv = b.values();
  auto out = make_op<T>({1}, {a.node(), b.node()}, [av, bv, n](Node<T>& nd) {
    T g = nd.grad[0] * T(2) / static_cast<T>(n);
    if (nd.parents[0]->needs_grad) {
      nd.parents[0]->ensure_grad();
      for (long i = 0; i < n; ++i) nd.parents[0]->grad[i] += g * (av[i] - bv[i]);
    }
    if (nd.parents[1]->needs_grad) {
      nd.parents[1]->ensure_grad();
      for (long i = 0; i < n; ++i) nd.parents[1]->grad[i] -= g * (av[i] - bv[i]);
    }
  });
  double acc = 0;
  for (long i = 0; i < n; ++i) {
    double d = static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i]);
    acc += d * d;
  }
  out.data()[0] = static_cast<T>(acc / static_cast<double>(n));
  check_output_finite(out, "mse");
  return out;
}

// mean over labeled pixels of -log(prob[label]); label < 0 marks unlabeled.
// Probabilities are clamped below at 1e-8 before the log.
template <typename T>
TensorT<T> cross_entropy_per_pixel(const TensorT<T>& probs, const std::vector<int>& labels) {
  if (probs.ndim() != 3) throw ShapeError("cross_entropy_per_pixel: expects (C,H,W)");
  int C = probs.dim(0);
  long hw = static_cast<long>(probs.dim(1)) * probs.dim(2);
  if (static_cast<long>(labels.size()) != hw)
    throw ShapeError("cross_entropy_per_pixel: label count mismatch");
  constexpr T kEps = static_cast<T>(1e-8);
  long labeled = 0;
  for (int l : labels)
    if (l >= 0) ++labeled;
  std::vector<T> pv = probs.values();
  auto out = make_op<T>({1}, {probs.node()},
                        [pv, labels, labeled, hw, C](Node<T>& nd) {
                          auto& p = nd.parents[0];
                          if (!p->needs_grad || labeled == 0) return;
                          p->ensure_grad();
                          T g = nd.grad[0] / static_cast<T>(labeled);
                          for (long i = 0; i < hw; ++i) {
                            int l = labels[i];
                            if (l < 0) continue;
                            if (l >= C) continue;
                            T v = pv[static_cast<long>(l) * hw + i];
                            if (v > kEps) p->grad[static_cast<long>(l) * hw + i] -= g / v;
                          }
                        });
  double acc = 0;
  for (long i = 0; i < hw; ++i) {
    int l = labels[i];
    if (l < 0) continue;
    if (l >= C) throw DomainError("cross_entropy_per_pixel: label out of range");
    T v = probs.data()[static_cast<long>(l) * hw + i];
    acc -= std::log(std::max(static_cast<double>(v), 1e-8));
  }
  out.data()[0] = labeled > 0 ? static_cast<T>(acc / static_cast<double>(labeled)) : T(0);
  check_output_finite(out, "cross_entropy_per_pixel");
  return out;
}

// sum p * log(p / clamp(q, 1e-8)) with the 0*log0 = 0 convention. The target
// p is treated as data; the gradient flows into the prediction q.
template <typename T>
TensorT<T> kl_divergence(const TensorT<T>& p, const TensorT<T>& q) {
  detail::require_same_shape(p, q, "kl_divergence");
  constexpr T kEps = static_cast<T>(1e-8);
  long n = p.numel();
  std::vector<T> pv = p.values(), qv = q.values();
  auto out = make_op<T>({1}, {q.node()}, [pv, qv, n](Node<T>& nd) {
    auto& g = nd.parents[0];
    if (!g->needs_grad) return;
    g->ensure_grad();
    for (long i = 0; i < n; ++i) {
      if (pv[i] <= T(0)) continue;
      if (qv[i] > kEps) g->grad[i] -= nd.grad[0] * pv[i] / qv[i];
    }
  });
  double acc = 0;
  for (long i = 0; i < n; ++i) {
    double pi = p.data()[i];
    if (pi <= 0) continue;
    double qi = std::max(static_cast<double>(q.data()[i]), 1e-8);
    acc += pi * (std::log(pi) - std::log(qi));
  }
  out.data()[0] = static_cast<T>(acc);
  check_output_finite(out, "kl_divergence");
  return out;
}

// table (V,d), ids (L) -> (L,d); backward scatters into the selected rows.
template <typename T>
TensorT<T> embedding_lookup(const TensorT<T>& table, const std::vector<int>& ids) {
  if (table.ndim() != 2) throw ShapeError("embedding_lookup: table must be (V,d)");
  int v = table.dim(0), d = table.dim(1);
  for (int id : ids)
    if (id < 0 || id >= v) throw DomainError("embedding_lookup: id out of range");
  int L = static_cast<int>(ids.size());
  if (L < 1) throw DomainError("embedding_lookup: empty id list");
  auto out = make_op<T>({L, d}, {table.node()}, [ids, d](Node<T>& nd) {
    auto& p = nd.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (size_t k = 0; k < ids.size(); ++k)
      for (int j = 0; j < d; ++j)
        p->grad[static_cast<long>(ids[k]) * d + j] += nd.grad[k * d + j];
  });
  for (int k = 0; k < L; ++k)
    std::copy(table.values().begin() + static_cast<long>(ids[k]) * d,
              table.values().begin() + static_cast<long>(ids[k] + 1) * d,
              out.values().begin() + static_cast<long>(k) * d);
  return out;
}

// logits[h,w] = sum_c map[c,h,w] * v[c]
template <typename T>
TensorT<T> channel_dot(const TensorT<T>& map, const TensorT<T>& v) {
  if (map.ndim() != 3 || v.ndim() != 1 || v.dim(0) != map.dim(0))
    throw ShapeError("channel_dot: expects (C,H,W) and (C)");
  int C = map.dim(0);
  long hw = static_cast<long>(map.dim(1)) * map.dim(2);
  std::vector<T> mv = map.values(), vv = v.values();
  auto out = make_op<T>({map.dim(1), map.dim(2)}, {map.node(), v.node()},
                        [mv, vv, C, hw](Node<T>& nd) {
                          if (nd.parents[0]->needs_grad) {
                            nd.parents[0]->ensure_grad();
                            T* dm = nd.parents[0]->grad.data();
                            for (int c = 0; c < C; ++c) {
                              T vc = vv[c];
                              T* dmc = dm + static_cast<long>(c) * hw;
                              for (long i = 0; i < hw; ++i) dmc[i] += nd.grad[i] * vc;
                            }
                          }
                          if (nd.parents[1]->needs_grad) {
                            nd.parents[1]->ensure_grad();
                            for (int c = 0; c < C; ++c) {
                              double acc = 0;
                              const T* mc = mv.data() + static_cast<long>(c) * hw;
                              for (long i = 0; i < hw; ++i)
                                acc += static_cast<double>(nd.grad[i]) * mc[i];
                              nd.parents[1]->grad[c] += static_cast<T>(acc);
                            }
                          }
                        });
  for (long i = 0; i < hw; ++i) {
    double acc = 0;
    for (int c = 0; c < C; ++c)
      acc += static_cast<double>(map.data()[static_cast<long>(c) * hw + i]) * v.data()[c];
    out.data()[i] = static_cast<T>(acc);
  }
  check_output_finite(out, "channel_dot");
  return out;
}

// pooled[c] = sum_{h,w} map[c,h,w] * wts[h,w]
template <typename T>
TensorT<T> map_pool(const TensorT<T>& map, const TensorT<T>& wts) {
  if (map.ndim() != 3 || wts.ndim() != 2 || wts.dim(0) != map.dim(1) ||
      wts.dim(1) != map.dim(2))
    throw ShapeError("map_pool: expects (C,H,W) and (H,W)");
  int C = map.dim(0);
  long hw = static_cast<long>(map.dim(1)) * map.dim(2);
  std::vector<T> mv = map.values(), wv = wts.values();
  auto out = make_op<T>({C}, {map.node(), wts.node()}, [mv, wv, C, hw](Node<T>& nd) {
    if (nd.parents[0]->needs_grad) {
      nd.parents[0]->ensure_grad();
      for (int c = 0; c < C; ++c) {
        T g = nd.grad[c];
        if (g == T(0)) continue;
        T* dmc = nd.parents[0]->grad.data() + static_cast<long>(c) * hw;
        for (long i = 0; i < hw; ++i) dmc[i] += g * wv[i];
      }
    }
    if (nd.parents[1]->needs_grad) {
      nd.parents[1]->ensure_grad();
      T* dw = nd.parents[1]->grad.data();
      for (int c = 0; c < C; ++c) {
        T g = nd.grad[c];
        if (g == T(0)) continue;
        const T* mc = mv.data() + static_cast<long>(c) * hw;
        for (long i = 0; i < hw; ++i) dw[i] += g * mc[i];
      }
    }
  });
  for (int c = 0; c < C; ++c) {
    double acc = 0;
    const T* mc = map.data() + static_cast<long>(c) * hw;
    for (long i = 0; i < hw; ++i) acc += static_cast<double>(mc[i]) * wts.data()[i];
    out.data()[c] = static_cast<T>(acc);
  }
  check_output_finite(out, "map_pool");
  return out;
}

// x / max(||x||, eps) for vectors.
template <typename T>
TensorT<T> l2_normalize(const TensorT<T>& x) {
  if (x.ndim() != 1) throw ShapeError("l2_normalize: expects a vector");
  long n = x.numel();
  double norm2 = 0;
  for (long i = 0; i < n; ++i) norm2 += static_cast<double>(x.data()[i]) * x.data()[i];
  T norm = static_cast<T>(std::max(std::sqrt(norm2), 1e-8));
  std::vector<T> xv = x.values();
  auto out = make_op<T>(x.shape(), {x.node()}, [xv, norm, n](Node<T>& nd) {
    auto& p = nd.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    double dot = 0;
    for (long i = 0; i < n; ++i) dot += static_cast<double>(nd.grad[i]) * xv[i];
    T inv = T(1) / norm;
    T inv3 = inv * inv * inv;
    for (long i = 0; i < n; ++i)
      p->grad[i] += nd.grad[i] * inv - static_cast<T>(dot) * xv[i] * inv3;
  });
  for (long i = 0; i < n; ++i) out.data()[i] = x.data()[i] / norm;
  check_output_finite(out, "l2_normalize");
  return out;
}

// Normalize each spatial cell's channel vector of a (C,H,W) map.
template <typename T>
TensorT<T> cell_l2_normalize(const TensorT<T>& map) {
  if (map.ndim() != 3) throw ShapeError("cell_l2_normalize: expects (C,H,W)");
  int C = map.dim(0);
  long hw = static_cast<long>(map.dim(1)) * map.dim(2);
  std::vector<T> mv = map.values();
  std::vector<T> norms(hw);
  for (long i = 0; i < hw; ++i) {
    double acc = 0;
    for (int c = 0; c < C; ++c) {
      double v = mv[static_cast<long>(c) * hw + i];
      acc += v * v;
    }
    norms[i] = static_cast<T>(std::max(std::sqrt(acc), 1e-8));
  }
  auto out = make_op<T>(map.shape(), {map.node()}, [mv, norms, C, hw](Node<T>& nd) {
    auto& p = nd.parents[0];
    if (!p->needs_grad) return;
    p->ensure_grad();
    for (long i = 0; i < hw; ++i) {
      double dot = 0;
      for (int c = 0; c < C; ++c)
        dot += static_cast<double>(nd.grad[static_cast<long>(c) * hw + i]) *
               mv[static_cast<long>(c) * hw + i];
      T inv = T(1) / norms[i];
      T inv3 = inv * inv * inv;
      for (int c = 0; c < C; ++c) {
        long k = static_cast<long>(c) * hw + i;
        p->grad[k] += nd.grad[k] * inv - static_cast<T>(dot) * mv[k] * inv3;
      }
    }
  });
  for (long i = 0; i < hw; ++i)
    for (int c = 0; c < C; ++c) {
      long k = static_cast<long>(c) * hw + i;
      out.data()[k] = mv[k] / norms[i];
    }
  check_output_finite(out, "cell_l2_normalize");
  return out;
}

template <typename T>
TensorT<T> conv2d(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b, int stride,
                  int padding) {
  if (x.ndim() != 3 || w.ndim() != 4) throw ShapeError("conv2d: expects (C,H,W) and (Co,Ci,Kh,Kw)");
  int Ci = x.dim(0), H = x.dim(1), W = x.dim(2);
  int Co = w.dim(0), Kh = w.dim(2), Kw = w.dim(3);
  if (w.dim(1) != Ci) throw ShapeError("conv2d: channel mismatch");
  if (b.defined() && (b.ndim() != 1 || b.dim(0) != Co)) throw ShapeError("conv2d: bad bias");
  if (Kh > H + 2 * padding || Kw > W + 2 * padding)
    throw ShapeError("conv2d: kernel larger than padded input");
  int Ho = (H + 2 * padding - Kh) / stride + 1;
  int Wo = (W + 2 * padding - Kw) / stride + 1;
  std::vector<T> xv = x.values(), wv = w.values();
  std::vector<std::shared_ptr<Node<T>>> parents = {x.node(), w.node()};
  if (b.defined()) parents.push_back(b.node());
  auto out = make_op<T>({Co, Ho, Wo}, parents,
                        [xv, wv, Ci, H, W, Co, Kh, Kw, stride, padding, Ho, Wo](Node<T>& nd) {
                          if (nd.parents[0]->needs_grad) {
                            nd.parents[0]->ensure_grad();
                            kern::conv2d_backward_input(nd.grad.data(), wv.data(),
                                                        nd.parents[0]->grad.data(), Ci, H, W, Co,
                                                        Kh, Kw, stride, padding, Ho, Wo);
                          }
                          bool want_w = nd.parents[1]->needs_grad;
                          bool want_b = nd.parents.size() > 2 && nd.parents[2]->needs_grad;
                          if (want_w || want_b) {
                            if (want_w) nd.parents[1]->ensure_grad();
                            if (want_b) nd.parents[2]->ensure_grad();
                            std::vector<T> dw_local;
                            T* dw = nullptr;
                            if (want_w)
                              dw = nd.parents[1]->grad.data();
                            else {
                              dw_local.assign(wv.size(), T(0));
                              dw = dw_local.data();
                            }
                            kern::conv2d_backward_weight(
                                xv.data(), nd.grad.data(), dw,
                                want_b ? nd.parents[2]->grad.data() : nullptr, Ci, H, W, Co, Kh,
                                Kw, stride, padding, Ho, Wo);
                          }
                        });
  kern::conv2d_forward(x.data(), w.data(), b.defined() ? b.data() : nullptr, out.data(), Ci, H,
                       W, Co, Kh, Kw, stride, padding, Ho, Wo);
  check_output_finite(out, "conv2d");
  return out;
}

template <typename T>
TensorT<T> conv2d(const TensorT<T>& x, const TensorT<T>& w, int stride, int padding) {
  return conv2d(x, w, TensorT<T>(), stride, padding);
}

template <typename T>
TensorT<T> transpose_conv2d(const TensorT<T>& x, const TensorT<T>& w, const TensorT<T>& b,
                            int stride, int padding, int output_padding) {
  if (x.ndim() != 3 || w.ndim() != 4)
    throw ShapeError("transpose_conv2d: expects (C,H,W) and (Ci,Co,Kh,Kw)");
  int Ci = x.dim(0), H = x.dim(1), W = x.dim(2);
  int Co = w.dim(1), Kh = w.dim(2), Kw = w.dim(3);
  if (w.dim(0) != Ci) throw ShapeError("transpose_conv2d: channel mismatch");
  int Ho = (H - 1) * stride - 2 * padding + Kh + output_padding;
  int Wo = (W - 1) * stride - 2 * padding + Kw + output_padding;
  if (Ho <= 0 || Wo <= 0) throw ShapeError("transpose_conv2d: empty output");
  std::vector<T> xv = x.values(), wv = w.values();
  std::vector<std::shared_ptr<Node<T>>> parents = {x.node(), w.node()};
  if (b.defined()) parents.push_back(b.node());
  auto out = make_op<T>({Co, Ho, Wo}, parents,
                        [xv, wv, Ci, H, W, Co, Kh, Kw, stride, padding, Ho, Wo](Node<T>& nd) {
                          if (nd.parents[0]->needs_grad) {
                            nd.parents[0]->ensure_grad();
                            kern::tconv2d_backward_input(nd.grad.data(), wv.data(),
                                                         nd.parents[0]->grad.data(), Ci, H, W,
                                                         Co, Kh, Kw, stride, padding, Ho, Wo);
                          }
                          bool want_w = nd.parents[1]->needs_grad;
                          bool want_b = nd.parents.size() > 2 && nd.parents[2]->needs_grad;
                          if (want_w || want_b) {
                            if (want_w) nd.parents[1]->ensure_grad();
                            if (want_b) nd.parents[2]->ensure_grad();
                            std::vector<T> dw_local;
                            T* dw = nullptr;
                            if (want_w)
                              dw = nd.parents[1]->grad.data();
                            else {
                              dw_local.assign(wv.size(), T(0));
                              dw = dw_local.data();
                            }
                            kern::tconv2d_backward_weight(
                                xv.data(), nd.grad.data(), dw,
                                want_b ? nd.parents[2]->grad.data() : nullptr, Ci, H, W, Co, Kh,
                                Kw, stride, padding, Ho, Wo);
                          }
                        });
  kern::tconv2d_forward(x.data(), w.data(), b.defined() ? b.data() : nullptr, out.data(), Ci, H,
                        W, Co, Kh, Kw, stride, padding, Ho, Wo);
  check_output_finite(out, "transpose_conv2d");
  return out;
}

// Channel-wise batch normalization over the spatial extent of a (C,H,W) map.
// Training mode uses batch statistics and, when update_running is set, blends
// them into the running buffers; inference mode uses the running buffers.
template <typename T>
TensorT<T> batch_norm(const TensorT<T>& x, const TensorT<T>& gamma, const TensorT<T>& beta,
                      std::vector<T>& running_mean, std::vector<T>& running_var, bool training,
                      bool update_running = true, T momentum = T(0.1), T eps = T(1e-5)) {
  if (x.ndim() != 3) throw ShapeError("batch_norm: expects (C,H,W)");
  int C = x.dim(0);
  long hw = static_cast<long>(x.dim(1)) * x.dim(2);
  if (gamma.dim(0) != C || beta.dim(0) != C || static_cast<int>(running_mean.size()) != C ||
      static_cast<int>(running_var.size()) != C)
    throw ShapeError("batch_norm: parameter extents disagree");

  std::vector<T> mean(C), var(C);
  if (training) {
    for (int c = 0; c < C; ++c) {
      const T* xc = x.data() + static_cast<long>(c) * hw;
      double m = 0;
      for (long i = 0; i < hw; ++i) m += xc[i];
      m /= static_cast<double>(hw);
      double v = 0;
      for (long i = 0; i < hw; ++i) {
        double d = xc[i] - m;
        v += d * d;
      }
      v /= static_cast<double>(hw);
      mean[c] = static_cast<T>(m);
      var[c] = static_cast<T>(v);
    }
    if (update_running) {
      for (int c = 0; c < C; ++c) {
        running_mean[c] = (T(1) - momentum) * running_mean[c] + momentum * mean[c];
        running_var[c] = (T(1) - momentum) * running_var[c] + momentum * var[c];
      }
    }
  } else {
    mean = running_mean;
    var = running_var;
  }

  std::vector<T> xhat(x.numel());
  std::vector<T> inv_std(C);
  for (int c = 0; c < C; ++c) {
    inv_std[c] = T(1) / std::sqrt(var[c] + eps);
    const T* xc = x.data() + static_cast<long>(c) * hw;
    T* hc = xhat.data() + static_cast<long>(c) * hw;
    for (long i = 0; i < hw; ++i) hc[i] = (xc[i] - mean[c]) * inv_std[c];
  }

  std::vector<T> gv = gamma.values();
  auto out = make_op<T>(x.shape(), {x.node(), gamma.node(), beta.node()},
                        [xhat, inv_std, gv, C, hw, training](Node<T>& nd) {
                          if (nd.parents[1]->needs_grad) {
                            nd.parents[1]->ensure_grad();
                            for (int c = 0; c < C; ++c) {
                              double acc = 0;
                              for (long i = 0; i < hw; ++i)
                                acc += static_cast<double>(nd.grad[c * hw + i]) *
                                       xhat[c * hw + i];
                              nd.parents[1]->grad[c] += static_cast<T>(acc);
                            }
                          }
                          if (nd.parents[2]->needs_grad) {
                            nd.parents[2]->ensure_grad();
                            for (int c = 0; c < C; ++c) {
                              double acc = 0;
                              for (long i = 0; i < hw; ++i)
                                acc += static_cast<double>(nd.grad[c * hw + i]);
                              nd.parents[2]->grad[c] += static_cast<T>(acc);
                            }
                          }
                          if (nd.parents[0]->needs_grad) {
                            nd.parents[0]->ensure_grad();
                            for (int c = 0; c < C; ++c) {
                              const T* dy = nd.grad.data() + static_cast<long>(c) * hw;
                              const T* hc = xhat.data() + static_cast<long>(c) * hw;
                              T* dx = nd.parents[0]->grad.data() + static_cast<long>(c) * hw;
                              T a = gv[c] * inv_std[c];
                              if (training) {
                                double mdy = 0, mdyh = 0;
                                for (long i = 0; i < hw; ++i) {
                                  mdy += dy[i];
                                  mdyh += static_cast<double>(dy[i]) * hc[i];
                                }
                                mdy /= static_cast<double>(hw);
                                mdyh /= static_cast<double>(hw);
                                for (long i = 0; i < hw; ++i)
                                  dx[i] += a * (dy[i] - static_cast<T>(mdy) -
                                                hc[i] * static_cast<T>(mdyh));
                              } else {
                                for (long i = 0; i < hw; ++i) dx[i] += a * dy[i];
                              }
                            }
                          }
                        });
  for (int c = 0; c < C; ++c) {
    const T* hc = xhat.data() + static_cast<long>(c) * hw;
    T* yc = out.data() + static_cast<long>(c) * hw;
    T g = gamma.data()[c], bb = beta.data()[c];
    for (long i = 0; i < hw; ++i) yc[i] = g * hc[i] + bb;
  }
  check_output_finite(out, "batch_norm");
  return out;
}

// softmax(q.K^T / sqrt(d)) . V with q (d), K (L,d), V (L,dv).
template <typename T>
TensorT<T> scaled_dot_attention(const TensorT<T>& q, const TensorT<T>& K, const TensorT<T>& V) {
  if (q.ndim() != 1 || K.ndim() != 2 || V.ndim() != 2)
    throw ShapeError("scaled_dot_attention: expects q(d), K(L,d), V(L,dv)");
  if (K.dim(1) != q.dim(0) || V.dim(0) != K.dim(0))
    throw ShapeError("scaled_dot_attention: extents disagree");
  if (K.dim(0) < 1) throw ShapeError("scaled_dot_attention: empty key set");
  T inv_sqrt_d = static_cast<T>(1.0 / std::sqrt(static_cast<double>(q.dim(0))));
  auto logits = scale(matvec(K, q), inv_sqrt_d);
  auto wts = softmax(logits, 0);
  return matvec(transpose2d(V), wts);
}

}  // namespace mgmap::ad
