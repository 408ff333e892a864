#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mgmap/ad/tensor.hpp"

namespace mgmap::ad {

struct GradCheckReport {
  std::string op;
  int cases = 0;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Central finite differences against the recorded backward pass. `fn` must
// rebuild the graph from the current values of `inputs` on every call; the
// two probe evaluations per element exercise the forward path only, so the
// oracle stays independent of the backward code it checks.
double check_gradient(const std::function<TensorT<double>()>& fn,
                      const std::vector<TensorT<double>>& inputs, double eps = 1e-5,
                      int max_probes_per_input = 64, uint64_t probe_seed = 0);

// The per-op suite: every differentiable op, >= `cases_per_op` random
// shapes/seeds each, 64-bit mode. Threshold per case is 1e-5.
std::vector<GradCheckReport> run_op_suite(int cases_per_op = 20, uint64_t seed = 1234);

}  // namespace mgmap::ad
