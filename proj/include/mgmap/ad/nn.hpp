#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mgmap/ad/ops.hpp"
#include "mgmap/ad/tensor.hpp"
#include "mgmap/core/rng.hpp"

namespace mgmap::ad {

// Named parameter registry. Entries are either trainable parameters or
// persistent buffers (batch-norm running statistics); both serialize.
template <typename T>
class ParamSet {
 public:
  TensorT<T> add(const std::string& name, TensorT<T> t, bool trainable = true) {
    if (entries_.count(name)) throw UsageError("duplicate parameter name: " + name);
    t.node()->requires_grad = trainable;
    t.node()->needs_grad = trainable;
    t.set_name(name);
    entries_[name] = t;
    return t;
  }

  TensorT<T>& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw UsageError("unknown parameter: " + name);
    return it->second;
  }

  const std::map<std::string, TensorT<T>>& entries() const { return entries_; }

  std::vector<TensorT<T>> trainable() const {
    std::vector<TensorT<T>> out;
    for (const auto& [k, v] : entries_)
      if (v.requires_grad()) out.push_back(v);
    return out;
  }

  void zero_grads() {
    for (auto& [k, v] : entries_) v.zero_grad();
  }

  long count() const { return static_cast<long>(entries_.size()); }

 private:
  std::map<std::string, TensorT<T>> entries_;
};

// Deterministic initializers. Construction order is fixed, so a single RNG
// seeded from the config reproduces identical parameters.
template <typename T>
TensorT<T> init_uniform(std::vector<int> shape, double bound, Rng& rng) {
  auto t = TensorT<T>::zeros(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (long i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<T>(dist(rng));
  return t;
}

inline double fan_in_bound(long fan_in) { return fan_in > 0 ? 1.0 / std::sqrt(static_cast<double>(fan_in)) : 0.0; }

template <typename T>
struct Linear {
  TensorT<T> w, b;
  bool has_bias = true;

  Linear() = default;
  Linear(ParamSet<T>& ps, const std::string& name, int in, int out, Rng& rng, bool zero_init,
         bool bias = true)
      : has_bias(bias) {
    double bound = zero_init ? 0.0 : fan_in_bound(in);
    w = ps.add(name + ".w", init_uniform<T>({out, in}, bound, rng));
    if (bias) b = ps.add(name + ".b", init_uniform<T>({out}, bound, rng));
  }

  TensorT<T> forward(const TensorT<T>& x) const {
    auto y = matvec(w, x);
    return has_bias ? add(y, b) : y;
  }
};

template <typename T>
struct Conv2d {
  TensorT<T> w, b;
  int stride = 1, padding = 0;

  Conv2d() = default;
  Conv2d(ParamSet<T>& ps, const std::string& name, int cin, int cout, int k, int stride_,
         int padding_, Rng& rng, bool zero_init, bool bias = true)
      : stride(stride_), padding(padding_) {
    double bound = zero_init ? 0.0 : fan_in_bound(static_cast<long>(cin) * k * k);
    w = ps.add(name + ".w", init_uniform<T>({cout, cin, k, k}, bound, rng));
    if (bias) b = ps.add(name + ".b", init_uniform<T>({cout}, bound, rng));
  }

  TensorT<T> forward(const TensorT<T>& x) const { return conv2d(x, w, b, stride, padding); }
};

template <typename T>
struct ConvTranspose2d {
  TensorT<T> w, b;
  int stride = 1, padding = 0, output_padding = 0;

  ConvTranspose2d() = default;
  ConvTranspose2d(ParamSet<T>& ps, const std::string& name, int cin, int cout, int k,
                  int stride_, int padding_, int output_padding_, Rng& rng, bool zero_init,
                  bool bias = true)
      : stride(stride_), padding(padding_), output_padding(output_padding_) {
    double bound = zero_init ? 0.0 : fan_in_bound(static_cast<long>(cin) * k * k);
    w = ps.add(name + ".w", init_uniform<T>({cin, cout, k, k}, bound, rng));
    if (bias) b = ps.add(name + ".b", init_uniform<T>({cout}, bound, rng));
  }

  TensorT<T> forward(const TensorT<T>& x) const {
    return transpose_conv2d(x, w, b, stride, padding, output_padding);
  }
};

template <typename T>
struct BatchNorm2d {
  TensorT<T> gamma, beta;
  TensorT<T> running_mean, running_var;  // buffers, not trained

  BatchNorm2d() = default;
  BatchNorm2d(ParamSet<T>& ps, const std::string& name, int c, bool zero_init) {
    gamma = ps.add(name + ".gamma", TensorT<T>::full({c}, zero_init ? T(0) : T(1)));
    beta = ps.add(name + ".beta", TensorT<T>::zeros({c}));
    running_mean = ps.add(name + ".running_mean", TensorT<T>::zeros({c}), /*trainable=*/false);
    running_var = ps.add(name + ".running_var", TensorT<T>::full({c}, T(1)), /*trainable=*/false);
  }

  TensorT<T> forward(const TensorT<T>& x, bool training, bool update_running = true) const {
    return batch_norm(x, gamma, beta, running_mean.node()->value, running_var.node()->value,
                      training, training && update_running);
  }
};

// GRU cell in the original formulation: the update gate z blends the
// candidate in (h' = (1-z) h + z n), so a saturated-low update gate carries
// the previous state through. Gate blocks are packed (reset, update,
// candidate) along the first weight axis.
template <typename T>
struct GRUCell {
  TensorT<T> w_ih, w_hh, b_ih, b_hh;
  int hidden = 0;

  GRUCell() = default;
  GRUCell(ParamSet<T>& ps, const std::string& name, int in, int hidden_, Rng& rng,
          bool zero_init)
      : hidden(hidden_) {
    double bound = zero_init ? 0.0 : fan_in_bound(hidden_);
    w_ih = ps.add(name + ".w_ih", init_uniform<T>({3 * hidden_, in}, bound, rng));
    w_hh = ps.add(name + ".w_hh", init_uniform<T>({3 * hidden_, hidden_}, bound, rng));
    b_ih = ps.add(name + ".b_ih", init_uniform<T>({3 * hidden_}, bound, rng));
    b_hh = ps.add(name + ".b_hh", init_uniform<T>({3 * hidden_}, bound, rng));
  }

  TensorT<T> forward(const TensorT<T>& x, const TensorT<T>& h) const {
    auto gi = add(matvec(w_ih, x), b_ih);
    auto gh = add(matvec(w_hh, h), b_hh);
    auto r = sigmoid(add(slice0(gi, 0, hidden), slice0(gh, 0, hidden)));
    auto z = sigmoid(add(slice0(gi, hidden, hidden), slice0(gh, hidden, hidden)));
    auto n = tanh_op(add(slice0(gi, 2 * hidden, hidden),
                         mul(r, slice0(gh, 2 * hidden, hidden))));
    auto one_minus_z = add_scalar(scale(z, T(-1)), T(1));
    return add(mul(one_minus_z, h), mul(z, n));
  }
};

// LSTM cell, gates packed (input, forget, cell, output).
template <typename T>
struct LSTMCell {
  TensorT<T> w_ih, w_hh, b_ih, b_hh;
  int hidden = 0;

  LSTMCell() = default;
  LSTMCell(ParamSet<T>& ps, const std::string& name, int in, int hidden_, Rng& rng,
           bool zero_init)
      : hidden(hidden_) {
    double bound = zero_init ? 0.0 : fan_in_bound(hidden_);
    w_ih = ps.add(name + ".w_ih", init_uniform<T>({4 * hidden_, in}, bound, rng));
    w_hh = ps.add(name + ".w_hh", init_uniform<T>({4 * hidden_, hidden_}, bound, rng));
    b_ih = ps.add(name + ".b_ih", init_uniform<T>({4 * hidden_}, bound, rng));
    b_hh = ps.add(name + ".b_hh", init_uniform<T>({4 * hidden_}, bound, rng));
  }

  std::pair<TensorT<T>, TensorT<T>> forward(const TensorT<T>& x, const TensorT<T>& h,
                                            const TensorT<T>& c) const {
    auto g = add(add(matvec(w_ih, x), b_ih), add(matvec(w_hh, h), b_hh));
    auto i = sigmoid(slice0(g, 0, hidden));
    auto f = sigmoid(slice0(g, hidden, hidden));
    auto cand = tanh_op(slice0(g, 2 * hidden, hidden));
    auto o = sigmoid(slice0(g, 3 * hidden, hidden));
    auto c_new = add(mul(f, c), mul(i, cand));
    auto h_new = mul(o, tanh_op(c_new));
    return {h_new, c_new};
  }
};

template <typename T>
struct Embedding {
  TensorT<T> table;

  Embedding() = default;
  Embedding(ParamSet<T>& ps, const std::string& name, int vocab, int dim, Rng& rng,
            bool zero_init) {
    table = ps.add(name + ".table", init_uniform<T>({vocab, dim}, zero_init ? 0.0 : 0.1, rng));
  }

  TensorT<T> forward(const std::vector<int>& ids) const {
    return embedding_lookup(table, ids);
  }
};

// Bidirectional LSTM over a (L,d) sequence; outputs (L, 2*hidden).
template <typename T>
struct BiLSTM {
  LSTMCell<T> fwd, bwd;
  int hidden = 0;

  BiLSTM() = default;
  BiLSTM(ParamSet<T>& ps, const std::string& name, int in, int hidden_, Rng& rng, bool zero_init)
      : fwd(ps, name + ".fwd", in, hidden_, rng, zero_init),
        bwd(ps, name + ".bwd", in, hidden_, rng, zero_init),
        hidden(hidden_) {}

  TensorT<T> forward(const TensorT<T>& seq) const {
    if (seq.ndim() != 2) throw ShapeError("bilstm: expects (L,d)");
    int L = seq.dim(0);
    if (L < 1) throw DomainError("bilstm: empty sequence");
    std::vector<TensorT<T>> f(L), b(L);
    auto h = TensorT<T>::zeros({hidden});
    auto c = TensorT<T>::zeros({hidden});
    for (int t = 0; t < L; ++t) {
      auto x = reshape(slice0(seq, t, 1), {seq.dim(1)});
      auto [h2, c2] = fwd.forward(x, h, c);
      h = h2;
      c = c2;
      f[t] = h;
    }
    h = TensorT<T>::zeros({hidden});
    c = TensorT<T>::zeros({hidden});
    for (int t = L - 1; t >= 0; --t) {
      auto x = reshape(slice0(seq, t, 1), {seq.dim(1)});
      auto [h2, c2] = bwd.forward(x, h, c);
      h = h2;
      c = c2;
      b[t] = h;
    }
    std::vector<TensorT<T>> rows(L);
    for (int t = 0; t < L; ++t) rows[t] = concat0(std::vector<TensorT<T>>{f[t], b[t]});
    return stack_rows(rows);
  }
};

}  // namespace mgmap::ad
