#include "mgmap/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mgmap/ad/nn.hpp"
#include "mgmap/ad/ops.hpp"
#include "mgmap/core/rng.hpp"

namespace mgmap::ad {

namespace {

using T64 = TensorT<double>;

// Uniform magnitudes bounded away from zero so kinks (relu) and clamp
// thresholds are never straddled by the probe step.
T64 rand_input(std::vector<int> shape, Rng& rng, bool signed_vals = true) {
  auto t = T64::zeros(std::move(shape), /*requires_grad=*/true);
  std::uniform_real_distribution<double> mag(0.15, 1.0);
  std::uniform_int_distribution<int> sign(0, 1);
  for (long i = 0; i < t.numel(); ++i) {
    double v = mag(rng);
    if (signed_vals && sign(rng)) v = -v;
    t.data()[i] = v;
  }
  return t;
}

T64 rand_distribution(std::vector<int> shape, Rng& rng) {
  auto t = T64::zeros(std::move(shape), /*requires_grad=*/true);
  std::uniform_real_distribution<double> mag(0.05, 1.0);
  double sum = 0;
  for (long i = 0; i < t.numel(); ++i) {
    t.data()[i] = mag(rng);
    sum += t.data()[i];
  }
  for (long i = 0; i < t.numel(); ++i) t.data()[i] /= sum;
  return t;
}

}  // namespace

double check_gradient(const std::function<T64()>& fn, const std::vector<T64>& inputs, double eps,
                      int max_probes_per_input, uint64_t probe_seed) {
  auto out = fn();
  if (out.numel() != 1) throw ShapeError("check_gradient: fn must return a scalar");
  out.backward();

  std::vector<std::vector<double>> analytic;
  for (const auto& in : inputs) {
    if (in.grad().empty())
      analytic.emplace_back(in.numel(), 0.0);
    else
      analytic.emplace_back(in.grad().begin(), in.grad().end());
  }

  double max_rel = 0.0;
  Rng rng(make_rng(probe_seed == 0 ? 0x9d2c5680 : probe_seed));
  for (size_t k = 0; k < inputs.size(); ++k) {
    auto& in = const_cast<T64&>(inputs[k]);
    long n = in.numel();
    std::vector<long> idx(n);
    for (long i = 0; i < n; ++i) idx[i] = i;
    if (n > max_probes_per_input) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(max_probes_per_input);
    }
    for (long i : idx) {
      double orig = in.data()[i];
      in.data()[i] = orig + eps;
      double up = fn().item();
      in.data()[i] = orig - eps;
      double dn = fn().item();
      in.data()[i] = orig;
      double numeric = (up - dn) / (2 * eps);
      double a = analytic[k][i];
      double rel = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

std::vector<GradCheckReport> run_op_suite(int cases_per_op, uint64_t seed) {
  std::vector<GradCheckReport> reports;

  auto run = [&](const std::string& name,
                 const std::function<double(Rng&)>& one_case) {
    GradCheckReport rep;
    rep.op = name;
    for (int c = 0; c < cases_per_op; ++c) {
      Rng rng(make_rng(derive_seed(seed, name, static_cast<uint64_t>(c))));
      double err = one_case(rng);
      rep.max_rel_err = std::max(rep.max_rel_err, err);
      ++rep.cases;
    }
    rep.pass = rep.max_rel_err < 1e-5;
    reports.push_back(rep);
  };

  std::uniform_int_distribution<int> d26(2, 6);
  std::uniform_int_distribution<int> d14(1, 4);

  run("add", [&](Rng& rng) {
    auto a = rand_input({d26(rng), d26(rng)}, rng);
    auto b = rand_input(a.shape(), rng);
    auto probe = rand_input(a.shape(), rng);
    probe.node()->requires_grad = false;
    probe.node()->needs_grad = false;
    return check_gradient([&] { return sum_all(mul(add(a, b), probe)); }, {a, b});
  });

  run("sub", [&](Rng& rng) {
    auto a = rand_input({d26(rng)}, rng);
    auto b = rand_input(a.shape(), rng);
    return check_gradient([&] { return sum_all(mul(sub(a, b), sub(a, b))); }, {a, b});
  });

  run("mul", [&](Rng& rng) {
    auto a = rand_input({d26(rng), d26(rng)}, rng);
    auto b = rand_input(a.shape(), rng);
    return check_gradient([&] { return sum_all(mul(a, b)); }, {a, b});
  });

  run("scale_add_scalar", [&](Rng& rng) {
    auto a = rand_input({d26(rng)}, rng);
    return check_gradient([&] { return sum_all(add_scalar(scale(a, 1.7), -0.3)); }, {a});
  });

  run("relu", [&](Rng& rng) {
    auto a = rand_input({d26(rng), d26(rng)}, rng);
    return check_gradient([&] { return sum_all(mul(relu(a), relu(a))); }, {a});
  });

  run("sigmoid", [&](Rng& rng) {
    auto a = rand_input({d26(rng)}, rng);
    return check_gradient([&] { return sum_all(sigmoid(a)); }, {a});
  });

  run("tanh", [&](Rng& rng) {
    auto a = rand_input({d26(rng)}, rng);
    return check_gradient([&] { return sum_all(mul(tanh_op(a), tanh_op(a))); }, {a});
  });

  run("matmul", [&](Rng& rng) {
    int r = d26(rng), k = d26(rng), c = d26(rng);
    auto a = rand_input({r, k}, rng);
    auto b = rand_input({k, c}, rng);
    auto probe = rand_input({r, c}, rng);
    probe.node()->requires_grad = false;
    probe.node()->needs_grad = false;
    return check_gradient([&] { return sum_all(mul(matmul(a, b), probe)); }, {a, b});
  });

  run("matvec", [&](Rng& rng) {
    int r = d26(rng), c = d26(rng);
    auto w = rand_input({r, c}, rng);
    auto x = rand_input({c}, rng);
    return check_gradient([&] { return sum_all(mul(matvec(w, x), matvec(w, x))); }, {w, x});
  });

  run("transpose2d", [&](Rng& rng) {
    auto a = rand_input({d26(rng), d26(rng)}, rng);
    return check_gradient([&] { return sum_all(mul(transpose2d(a), transpose2d(a))); }, {a});
  });

  run("reshape_slice_concat", [&](Rng& rng) {
    int n = 2 * d26(rng);
    auto a = rand_input({n}, rng);
    auto b = rand_input({n / 2}, rng);
    return check_gradient(
        [&] {
          auto top = slice0(a, 0, n / 2);
          auto bottom = slice0(a, n / 2, n / 2);
          auto joined = concat0(std::vector<T64>{mul(top, b), bottom});
          return sum_all(mul(joined, joined));
        },
        {a, b});
  });

  run("stack_rows", [&](Rng& rng) {
    int d = d26(rng);
    auto a = rand_input({d}, rng);
    auto b = rand_input({d}, rng);
    return check_gradient(
        [&] {
          auto s = stack_rows(std::vector<T64>{a, b, a});
          return sum_all(mul(s, s));
        },
        {a, b});
  });

  run("softmax", [&](Rng& rng) {
    int n = d26(rng) + 1;
    auto a = rand_input({n, d26(rng)}, rng);
    auto probe = rand_input(a.shape(), rng);
    probe.node()->requires_grad = false;
    probe.node()->needs_grad = false;
    std::uniform_int_distribution<int> ax(0, 1);
    int axis = ax(rng);
    return check_gradient([&] { return sum_all(mul(softmax(a, axis), probe)); }, {a});
  });

  run("mean_sum", [&](Rng& rng) {
    auto a = rand_input({d26(rng), d26(rng)}, rng);
    return check_gradient([&] { return add(mean_all(mul(a, a)), sum_all(a)); }, {a});
  });

  run("mse", [&](Rng& rng) {
    auto a = rand_input({d26(rng)}, rng);
    auto b = rand_input(a.shape(), rng);
    return check_gradient([&] { return mse(a, b); }, {a, b});
  });

  run("kl_divergence", [&](Rng& rng) {
    int n = d26(rng) + 2;
    auto p = rand_distribution({n}, rng);
    p.node()->requires_grad = false;
    p.node()->needs_grad = false;
    auto q = rand_distribution({n}, rng);
    return check_gradient([&] { return kl_divergence(p, q); }, {q});
  });

  run("cross_entropy_per_pixel", [&](Rng& rng) {
    int c = d26(rng), h = d14(rng) + 1, w = d14(rng) + 1;
    auto probs = T64::zeros({c, h, w}, true);
    std::uniform_real_distribution<double> mag(0.05, 1.0);
    for (int i = 0; i < h * w; ++i) {
      double sum = 0;
      for (int ch = 0; ch < c; ++ch) {
        probs.data()[ch * h * w + i] = mag(rng);
        sum += probs.data()[ch * h * w + i];
      }
      for (int ch = 0; ch < c; ++ch) probs.data()[ch * h * w + i] /= sum;
    }
    std::vector<int> labels(h * w);
    std::uniform_int_distribution<int> lab(-1, c - 1);
    bool any = false;
    for (auto& l : labels) {
      l = lab(rng);
      any = any || l >= 0;
    }
    if (!any) labels[0] = 0;
    return check_gradient([&] { return cross_entropy_per_pixel(probs, labels); }, {probs});
  });

  run("embedding_lookup", [&](Rng& rng) {
    int v = d26(rng) + 2, d = d26(rng), L = d14(rng) + 1;
    auto table = rand_input({v, d}, rng);
    std::vector<int> ids(L);
    std::uniform_int_distribution<int> id(0, v - 1);
    for (auto& i : ids) i = id(rng);
    return check_gradient(
        [&] {
          auto e = embedding_lookup(table, ids);
          return sum_all(mul(e, e));
        },
        {table});
  });

  run("channel_dot", [&](Rng& rng) {
    int c = d26(rng), h = d14(rng) + 1, w = d14(rng) + 1;
    auto map = rand_input({c, h, w}, rng);
    auto v = rand_input({c}, rng);
    auto probe = rand_input({h, w}, rng);
    probe.node()->requires_grad = false;
    probe.node()->needs_grad = false;
    return check_gradient([&] { return sum_all(mul(channel_dot(map, v), probe)); }, {map, v});
  });

  run("map_pool", [&](Rng& rng) {
    int c = d26(rng), h = d14(rng) + 1, w = d14(rng) + 1;
    auto map = rand_input({c, h, w}, rng);
    auto wts = rand_input({h, w}, rng);
    return check_gradient(
        [&] {
          auto pooled = map_pool(map, wts);
          return sum_all(mul(pooled, pooled));
        },
        {map, wts});
  });

  run("l2_normalize", [&](Rng& rng) {
    auto a = rand_input({d26(rng) + 1}, rng);
    auto probe = rand_input(a.shape(), rng);
    probe.node()->requires_grad = false;
    probe.node()->needs_grad = false;
    return check_gradient([&] { return sum_all(mul(l2_normalize(a), probe)); }, {a});
  });

  run("cell_l2_normalize", [&](Rng& rng) {
    int c = d26(rng) + 1, h = d14(rng), w = d14(rng);
    auto map = rand_input({c, h, w}, rng);
    auto probe = rand_input(map.shape(), rng);
    probe.node()->requires_grad = false;
    probe.node()->needs_grad = false;
    return check_gradient([&] { return sum_all(mul(cell_l2_normalize(map), probe)); }, {map});
  });

  run("conv2d", [&](Rng& rng) {
    std::uniform_int_distribution<int> ch(1, 3), sz(4, 7), kk(1, 3), st(1, 2);
    int ci = ch(rng), h = sz(rng), w = sz(rng), co = ch(rng), k = kk(rng), s = st(rng);
    int p = std::uniform_int_distribution<int>(0, 1)(rng);
    if (k > h + 2 * p || k > w + 2 * p) k = 1;
    auto x = rand_input({ci, h, w}, rng);
    auto wt = rand_input({co, ci, k, k}, rng);
    auto b = rand_input({co}, rng);
    return check_gradient(
        [&] {
          auto y = conv2d(x, wt, b, s, p);
          return sum_all(mul(y, y));
        },
        {x, wt, b});
  });

  run("transpose_conv2d", [&](Rng& rng) {
    std::uniform_int_distribution<int> ch(1, 3), sz(3, 6), kk(2, 4), st(1, 2);
    int ci = ch(rng), h = sz(rng), w = sz(rng), co = ch(rng), k = kk(rng), s = st(rng);
    int p = std::uniform_int_distribution<int>(0, 1)(rng);
    int op = s > 1 ? std::uniform_int_distribution<int>(0, 1)(rng) : 0;
    if ((h - 1) * s - 2 * p + k + op <= 0) p = 0;
    auto x = rand_input({ci, h, w}, rng);
    auto wt = rand_input({ci, co, k, k}, rng);
    auto b = rand_input({co}, rng);
    return check_gradient(
        [&] {
          auto y = transpose_conv2d(x, wt, b, s, p, op);
          return sum_all(mul(y, y));
        },
        {x, wt, b});
  });

  run("batch_norm_train", [&](Rng& rng) {
    std::uniform_int_distribution<int> ch(1, 3), sz(3, 6);
    int c = ch(rng), h = sz(rng), w = sz(rng);
    auto x = rand_input({c, h, w}, rng);
    auto gamma = rand_input({c}, rng);
    auto beta = rand_input({c}, rng);
    std::vector<double> rm(c, 0.0), rv(c, 1.0);
    auto probe = rand_input({c, h, w}, rng);
    probe.node()->requires_grad = false;
    probe.node()->needs_grad = false;
    return check_gradient(
        [&] {
          auto y = batch_norm(x, gamma, beta, rm, rv, /*training=*/true,
                              /*update_running=*/false);
          return sum_all(mul(y, probe));
        },
        {x, gamma, beta});
  });

  run("batch_norm_eval", [&](Rng& rng) {
    std::uniform_int_distribution<int> ch(1, 3), sz(3, 6);
    int c = ch(rng), h = sz(rng), w = sz(rng);
    auto x = rand_input({c, h, w}, rng);
    auto gamma = rand_input({c}, rng);
    auto beta = rand_input({c}, rng);
    std::vector<double> rm(c), rv(c);
    std::uniform_real_distribution<double> mdist(-0.5, 0.5), vdist(0.5, 2.0);
    for (int i = 0; i < c; ++i) {
      rm[i] = mdist(rng);
      rv[i] = vdist(rng);
    }
    return check_gradient(
        [&] {
          auto y = batch_norm(x, gamma, beta, rm, rv, /*training=*/false);
          return sum_all(mul(y, y));
        },
        {x, gamma, beta});
  });

  run("gru_cell", [&](Rng& rng) {
    int in = d26(rng), hid = d26(rng);
    ParamSet<double> ps;
    Rng init_rng(rng());
    GRUCell<double> cell(ps, "gru", in, hid, init_rng, false);
    auto x = rand_input({in}, rng);
    auto h = rand_input({hid}, rng);
    std::vector<T64> inputs = {x, h, cell.w_ih, cell.w_hh, cell.b_ih, cell.b_hh};
    return check_gradient(
        [&] {
          auto h2 = cell.forward(x, h);
          return sum_all(mul(h2, h2));
        },
        inputs);
  });

  run("bilstm", [&](Rng& rng) {
    int in = d14(rng) + 1, hid = d14(rng) + 1, L = d14(rng) + 1;
    ParamSet<double> ps;
    Rng init_rng(rng());
    BiLSTM<double> lstm(ps, "lstm", in, hid, init_rng, false);
    auto seq = rand_input({L, in}, rng);
    std::vector<T64> inputs = {seq, lstm.fwd.w_ih, lstm.fwd.w_hh, lstm.fwd.b_ih, lstm.fwd.b_hh,
                               lstm.bwd.w_ih, lstm.bwd.w_hh, lstm.bwd.b_ih, lstm.bwd.b_hh};
    return check_gradient(
        [&] {
          auto out = lstm.forward(seq);
          return sum_all(mul(out, out));
        },
        inputs, 1e-5, 32);
  });

  run("scaled_dot_attention", [&](Rng& rng) {
    int d = d26(rng), L = d14(rng) + 1, dv = d26(rng);
    auto q = rand_input({d}, rng);
    auto K = rand_input({L, d}, rng);
    auto V = rand_input({L, dv}, rng);
    return check_gradient(
        [&] {
          auto out = scaled_dot_attention(q, K, V);
          return sum_all(mul(out, out));
        },
        {q, K, V});
  });

  return reports;
}

}  // namespace mgmap::ad
