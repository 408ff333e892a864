#include "mgmap/mapping/nets.hpp"

#include "mgmap/core/errors.hpp"

namespace mgmap::mapping {

namespace {
int down(int n) { return (n + 1) / 2; }  // conv k3 s2 p1
// output_padding that makes transpose conv k3 s2 p1 map `in` back to `out`.
int tconv_outpad(int in, int out) {
  int base = 2 * in - 1;
  if (out - base < 0 || out - base > 1)
    throw DomainError("hallucination net: incompatible spatial sizes");
  return out - base;
}
}  // namespace

MapMode map_mode_from_string(const std::string& s) {
  if (s == "multi") return MapMode::Multi;
  if (s == "semantic_only") return MapMode::SemanticOnly;
  if (s == "fine_only") return MapMode::FineOnly;
  throw DataError("unknown model.map_mode: " + s);
}

template <typename T>
HallucinationNet<T>::HallucinationNet(ad::ParamSet<T>& ps, const std::string& name,
                                      const MapSpec& spec, int base, mgmap::Rng& rng,
                                      bool zero_init)
    : m(spec.m) {
  if (spec.m % 4 != 0) throw DomainError("hallucination net requires map.m divisible by 4");
  int m1 = down(spec.m);     // after c1
  int m2 = down(m1);         // after c2 (= m/4)
  int m3 = down(m2);         // after enc1
  int m4 = down(m3);         // after enc2
  int e1c = base + base / 2;
  int e2c = 2 * base;

  c1 = ConvBR<T>(ps, name + ".c1", spec.c_f, base, 3, 2, 1, rng, zero_init);
  c2 = ConvBR<T>(ps, name + ".c2", base, base, 3, 2, 1, rng, zero_init);
  c3 = ConvBR<T>(ps, name + ".c3", base, base, 3, 1, 1, rng, zero_init);
  enc1 = ConvBR<T>(ps, name + ".enc1", base, e1c, 3, 2, 1, rng, zero_init);
  enc2 = ConvBR<T>(ps, name + ".enc2", e1c, e2c, 3, 2, 1, rng, zero_init);
  dec1 = TransConvBR<T>(ps, name + ".dec1", e2c, e1c, 3, 2, 1, tconv_outpad(m4, m3), rng,
                        zero_init);
  mix1 = ConvBR<T>(ps, name + ".mix1", 2 * e1c, e1c, 3, 1, 1, rng, zero_init);
  dec2 = TransConvBR<T>(ps, name + ".dec2", e1c, base, 3, 2, 1, tconv_outpad(m3, m2), rng,
                        zero_init);
  mix2 = ConvBR<T>(ps, name + ".mix2", 2 * base, base, 3, 1, 1, rng, zero_init);
  up = TransConvBR<T>(ps, name + ".up", base, base, 4, 4, 0, 0, rng, zero_init);
  head = ad::Conv2d<T>(ps, name + ".head", base, spec.c_s, 3, 1, 1, rng, zero_init);
}

template <typename T>
ad::TensorT<T> HallucinationNet<T>::forward(const ad::TensorT<T>& m_f, bool training) const {
  auto x = c1.forward(m_f, training);
  x = c2.forward(x, training);
  auto skip0 = c3.forward(x, training);
  auto e1 = enc1.forward(skip0, training);
  auto e2 = enc2.forward(e1, training);
  auto d1 = dec1.forward(e2, training);
  auto u1 = mix1.forward(ad::concat0(std::vector<ad::TensorT<T>>{d1, e1}), training);
  auto d2 = dec2.forward(u1, training);
  auto u2 = mix2.forward(ad::concat0(std::vector<ad::TensorT<T>>{d2, skip0}), training);
  auto full = up.forward(u2, training);
  auto logits = head.forward(full);
  return ad::softmax(logits, 0);
}

template <typename T>
MapEncoder<T>::MapEncoder(ad::ParamSet<T>& ps, const std::string& name, const MapSpec& spec,
                          int branch, MapMode mode_, mgmap::Rng& rng, bool zero_init)
    : mode(mode_) {
  branch_f = ad::Conv2d<T>(ps, name + ".fine", spec.c_f, branch, 3, 1, 1, rng, zero_init);
  branch_s = ad::Conv2d<T>(ps, name + ".sem", spec.c_s, branch, 3, 1, 1, rng, zero_init);
  fuse = ad::Conv2d<T>(ps, name + ".fuse", 2 * branch, spec.c, 1, 1, 0, rng, zero_init);
}

template <typename T>
ad::TensorT<T> MapEncoder<T>::forward(const ad::TensorT<T>& m_f,
                                      const ad::TensorT<T>& m_s) const {
  auto f_in = mode == MapMode::SemanticOnly ? ad::TensorT<T>::zeros(m_f.shape()) : m_f;
  auto s_in = mode == MapMode::FineOnly ? ad::TensorT<T>::zeros(m_s.shape()) : m_s;
  auto bf = ad::relu(branch_f.forward(f_in));
  auto bs = ad::relu(branch_s.forward(s_in));
  return fuse.forward(ad::concat0(std::vector<ad::TensorT<T>>{bf, bs}));
}

template <typename T>
MapReduce<T>::MapReduce(ad::ParamSet<T>& ps, const std::string& name, int cin, int cout,
                        mgmap::Rng& rng, bool zero_init) {
  r1 = ad::Conv2d<T>(ps, name + ".r1", cin, cout, 3, 2, 1, rng, zero_init);
  r2 = ad::Conv2d<T>(ps, name + ".r2", cout, cout, 3, 2, 1, rng, zero_init);
  r3 = ad::Conv2d<T>(ps, name + ".r3", cout, cout, 3, 2, 1, rng, zero_init);
}

template <typename T>
ad::TensorT<T> MapReduce<T>::forward(const ad::TensorT<T>& m) const {
  auto x = ad::relu(r1.forward(m));
  x = ad::relu(r2.forward(x));
  x = ad::relu(r3.forward(x));
  // Spatial mean per channel via uniform pooling weights.
  long hw = static_cast<long>(x.dim(1)) * x.dim(2);
  auto uniform = ad::TensorT<T>::full({x.dim(1), x.dim(2)}, static_cast<T>(1.0 / hw));
  return ad::map_pool(x, uniform);
}

template struct ConvBR<float>;
template struct ConvBR<double>;
template struct TransConvBR<float>;
template struct TransConvBR<double>;
template struct HallucinationNet<float>;
template struct HallucinationNet<double>;
template struct MapEncoder<float>;
template struct MapEncoder<double>;
template struct MapReduce<float>;
template struct MapReduce<double>;

}  // namespace mgmap::mapping
