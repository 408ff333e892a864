#pragma once

#include <string>
#include <vector>

#include "mgmap/ad/ops.hpp"
#include "mgmap/supervision/coarse_gt.hpp"
#include "mgmap/supervision/targets.hpp"

namespace mgmap::sup {

// KL(P || P_hat) over the egocentric grid (Eq. 2 semantics). Both sides are
// validated to sum to 1 within 1e-5.
template <typename T>
ad::TensorT<T> localization_loss(const ad::TensorT<T>& p_hat_grid, const CoarseGtGrid& gt) {
  if (p_hat_grid.numel() != static_cast<long>(gt.p.size()))
    throw ShapeError("localization_loss: grid sizes disagree");
  double sp = 0, sq = 0;
  for (double v : gt.p) sp += v;
  for (long i = 0; i < p_hat_grid.numel(); ++i) sq += static_cast<double>(p_hat_grid.data()[i]);
  if (std::abs(sp - 1.0) > 1e-5 || std::abs(sq - 1.0) > 1e-5)
    throw DomainError("localization_loss: inputs must be normalized distributions");
  std::vector<T> pv(gt.p.begin(), gt.p.end());
  auto target = ad::TensorT<T>::from_data(p_hat_grid.shape(), std::move(pv));
  return ad::kl_divergence(target, p_hat_grid);
}

// l_w = ||w_hat - w||^2 (sum of squares), l_p = (p_hat - p)^2.
template <typename T>
ad::TensorT<T> waypoint_loss(const ad::TensorT<T>& w_hat, const WaypointTarget& w) {
  if (w_hat.numel() != 2) throw ShapeError("waypoint_loss: expects a 2-vector");
  auto target = ad::TensorT<T>::from_data({2}, {static_cast<T>(w.dx), static_cast<T>(w.dy)});
  auto d = ad::sub(w_hat, target);
  return ad::sum_all(ad::mul(d, d));
}

template <typename T>
ad::TensorT<T> progress_loss(const ad::TensorT<T>& p_hat, double p) {
  if (p_hat.numel() != 1) throw ShapeError("progress_loss: expects a scalar");
  auto target = ad::TensorT<T>::scalar(static_cast<T>(p));
  auto d = ad::sub(p_hat, target);
  return ad::sum_all(ad::mul(d, d));
}

// L = l_s + alpha*l_o + beta*l_p + gamma*l_w (Eq. 6 composition).
template <typename T>
ad::TensorT<T> total_loss(const ad::TensorT<T>& l_s, const ad::TensorT<T>& l_o,
                          const ad::TensorT<T>& l_p, const ad::TensorT<T>& l_w, double alpha,
                          double beta, double gamma) {
  const struct {
    const char* name;
    const ad::TensorT<T>* t;
  } terms[] = {{"l_s", &l_s}, {"l_o", &l_o}, {"l_p", &l_p}, {"l_w", &l_w}};
  for (const auto& term : terms)
    if (!std::isfinite(static_cast<double>(term.t->item())))
      throw NumericError(std::string("total_loss: non-finite term ") + term.name);
  auto acc = ad::add(l_s, ad::scale(l_o, static_cast<T>(alpha)));
  acc = ad::add(acc, ad::scale(l_p, static_cast<T>(beta)));
  return ad::add(acc, ad::scale(l_w, static_cast<T>(gamma)));
}

}  // namespace mgmap::sup
