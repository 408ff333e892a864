#pragma once

#include <string>

#include "mgmap/ad/nn.hpp"
#include "mgmap/mapping/map_spec.hpp"

namespace mgmap::mapping {

template <typename T>
struct ConvBR {
  ad::Conv2d<T> conv;
  ad::BatchNorm2d<T> bn;

  ConvBR() = default;
  ConvBR(ad::ParamSet<T>& ps, const std::string& name, int cin, int cout, int k, int stride,
         int padding, mgmap::Rng& rng, bool zero_init)
      : conv(ps, name + ".conv", cin, cout, k, stride, padding, rng, zero_init),
        bn(ps, name + ".bn", cout, zero_init) {}

  ad::TensorT<T> forward(const ad::TensorT<T>& x, bool training) const {
    return ad::relu(bn.forward(conv.forward(x), training));
  }
};

template <typename T>
struct TransConvBR {
  ad::ConvTranspose2d<T> conv;
  ad::BatchNorm2d<T> bn;

  TransConvBR() = default;
  TransConvBR(ad::ParamSet<T>& ps, const std::string& name, int cin, int cout, int k, int stride,
              int padding, int output_padding, mgmap::Rng& rng, bool zero_init)
      : conv(ps, name + ".conv", cin, cout, k, stride, padding, output_padding, rng, zero_init),
        bn(ps, name + ".bn", cout, zero_init) {}

  ad::TensorT<T> forward(const ad::TensorT<T>& x, bool training) const {
    return ad::relu(bn.forward(conv.forward(x), training));
  }
};

// Semantic hallucination: a conv stack followed by a small two-level U-Net
// with skip connections, upsampled back to the full grid with a per-cell
// category softmax. Covers the whole map, observed or not.
template <typename T>
struct HallucinationNet {
  ConvBR<T> c1, c2, c3;
  ConvBR<T> enc1, enc2;
  TransConvBR<T> dec1;
  ConvBR<T> mix1;
  TransConvBR<T> dec2;
  ConvBR<T> mix2;
  TransConvBR<T> up;
  ad::Conv2d<T> head;
  int m = 0;

  HallucinationNet() = default;
  HallucinationNet(ad::ParamSet<T>& ps, const std::string& name, const MapSpec& spec, int base,
                   mgmap::Rng& rng, bool zero_init);

  // M_f (c_f,m,m) -> per-cell category distribution (c_s,m,m).
  ad::TensorT<T> forward(const ad::TensorT<T>& m_f, bool training) const;
};

// Multi-granularity fusion: each granularity goes through its own conv, the
// concatenation through a 1x1 fusion conv. Ablation modes zero out one input.
enum class MapMode { Multi, SemanticOnly, FineOnly };

MapMode map_mode_from_string(const std::string& s);

template <typename T>
struct MapEncoder {
  ad::Conv2d<T> branch_f, branch_s;
  ad::Conv2d<T> fuse;
  MapMode mode = MapMode::Multi;

  MapEncoder() = default;
  MapEncoder(ad::ParamSet<T>& ps, const std::string& name, const MapSpec& spec, int branch,
             MapMode mode_, mgmap::Rng& rng, bool zero_init);

  ad::TensorT<T> forward(const ad::TensorT<T>& m_f, const ad::TensorT<T>& m_s) const;
};

// Eq.-1-style pixel-wise semantic loss: mean cross entropy between the
// predicted per-cell distribution and the rendered GT categories; cells with
// unknown GT are masked out. all_unknown flags an empty mask (loss 0).
template <typename T>
struct SemanticLoss {
  ad::TensorT<T> loss;
  bool all_unknown = false;
};

template <typename T>
SemanticLoss<T> semantic_loss(const ad::TensorT<T>& m_s_pred, const std::vector<int>& gt_cat) {
  bool any = false;
  for (int l : gt_cat)
    if (l >= 0) {
      any = true;
      break;
    }
  if (!any) return {ad::TensorT<T>::scalar(T(0)), true};
  return {ad::cross_entropy_per_pixel(m_s_pred, gt_cat), false};
}

// Strided reduction of M to a fixed-length vector for the state encoder.
template <typename T>
struct MapReduce {
  ad::Conv2d<T> r1, r2, r3;

  MapReduce() = default;
  MapReduce(ad::ParamSet<T>& ps, const std::string& name, int cin, int cout, mgmap::Rng& rng,
            bool zero_init);

  ad::TensorT<T> forward(const ad::TensorT<T>& m) const;
};

}  // namespace mgmap::mapping
