#include "mgmap/ad/kernels.hpp"

#include <algorithm>

#include "mgmap/core/parallel.hpp"

namespace mgmap::ad::kern {

namespace {

// First ox with ox*s + k - p >= 0.
inline int ox_lo(int k, int p, int s) {
  int t = p - k;
  return t <= 0 ? 0 : (t + s - 1) / s;
}
// Last ox with ox*s + k - p <= limit-1.
inline int ox_hi(int k, int p, int s, int limit, int count) {
  int t = limit - 1 - k + p;
  if (t < 0) return -1;
  return std::min(count - 1, t / s);
}

}  // namespace

template <typename T>
void conv2d_forward(const T* x, const T* w, const T* b, T* y, int Ci, int H, int W, int Co,
                    int Kh, int Kw, int s, int p, int Ho, int Wo) {
  parallel_for(Ho, [&](long rb, long re, int) {
    for (long oy = rb; oy < re; ++oy) {
      for (int co = 0; co < Co; ++co) {
        T* yrow = y + (static_cast<long>(co) * Ho + oy) * Wo;
        T bias = b ? b[co] : T(0);
        for (int ox = 0; ox < Wo; ++ox) yrow[ox] = bias;
        for (int ci = 0; ci < Ci; ++ci) {
          for (int ky = 0; ky < Kh; ++ky) {
            long iy = oy * s + ky - p;
            if (iy < 0 || iy >= H) continue;
            const T* xrow = x + (static_cast<long>(ci) * H + iy) * W;
            const T* wrow = w + ((static_cast<long>(co) * Ci + ci) * Kh + ky) * Kw;
            for (int kx = 0; kx < Kw; ++kx) {
              T wv = wrow[kx];
              int lo = ox_lo(kx, p, s), hi = ox_hi(kx, p, s, W, Wo);
              const T* xs = xrow + (static_cast<long>(lo) * s + kx - p);
              if (s == 1) {
                for (int ox = lo; ox <= hi; ++ox) yrow[ox] += wv * xs[ox - lo];
              } else {
                for (int ox = lo; ox <= hi; ++ox) yrow[ox] += wv * xs[(ox - lo) * s];
              }
            }
          }
        }
      }
    }
  });
}

template <typename T>
void conv2d_backward_input(const T* dy, const T* w, T* dx, int Ci, int H, int W, int Co, int Kh,
                           int Kw, int s, int p, int Ho, int Wo) {
  parallel_for(H, [&](long rb, long re, int) {
    for (long iy = rb; iy < re; ++iy) {
      for (int ci = 0; ci < Ci; ++ci) {
        T* dxrow = dx + (static_cast<long>(ci) * H + iy) * W;
        for (int ky = 0; ky < Kh; ++ky) {
          long t = iy + p - ky;
          if (t < 0 || t % s != 0) continue;
          long oy = t / s;
          if (oy >= Ho) continue;
          for (int co = 0; co < Co; ++co) {
            const T* dyrow = dy + (static_cast<long>(co) * Ho + oy) * Wo;
            const T* wrow = w + ((static_cast<long>(co) * Ci + ci) * Kh + ky) * Kw;
            for (int kx = 0; kx < Kw; ++kx) {
              T wv = wrow[kx];
              int lo = ox_lo(kx, p, s), hi = ox_hi(kx, p, s, W, Wo);
              if (s == 1) {
                T* dxs = dxrow + (lo + kx - p);
                for (int ox = lo; ox <= hi; ++ox) dxs[ox - lo] += wv * dyrow[ox];
              } else {
                for (int ox = lo; ox <= hi; ++ox)
                  dxrow[static_cast<long>(ox) * s + kx - p] += wv * dyrow[ox];
              }
            }
          }
        }
      }
    }
  });
}

template <typename T>
void conv2d_backward_weight(const T* x, const T* dy, T* dw, T* db, int Ci, int H, int W, int Co,
                            int Kh, int Kw, int s, int p, int Ho, int Wo) {
  parallel_for(Co, [&](long cb, long ce, int) {
    for (long co = cb; co < ce; ++co) {
      if (db) {
        T acc = 0;
        const T* dyc = dy + static_cast<long>(co) * Ho * Wo;
        for (long i = 0; i < static_cast<long>(Ho) * Wo; ++i) acc += dyc[i];
        db[co] += acc;
      }
      for (int ci = 0; ci < Ci; ++ci) {
        for (int ky = 0; ky < Kh; ++ky) {
          for (int kx = 0; kx < Kw; ++kx) {
            T acc = 0;
            int lo = ox_lo(kx, p, s), hi = ox_hi(kx, p, s, W, Wo);
            for (int oy = 0; oy < Ho; ++oy) {
              long iy = static_cast<long>(oy) * s + ky - p;
              if (iy < 0 || iy >= H) continue;
              const T* dyrow = dy + (static_cast<long>(co) * Ho + oy) * Wo;
              const T* xrow = x + (static_cast<long>(ci) * H + iy) * W + kx - p;
              if (s == 1) {
                for (int ox = lo; ox <= hi; ++ox) acc += dyrow[ox] * xrow[ox];
              } else {
                for (int ox = lo; ox <= hi; ++ox)
                  acc += dyrow[ox] * xrow[static_cast<long>(ox) * s];
              }
            }
            dw[((co * Ci + ci) * Kh + ky) * Kw + kx] += acc;
          }
        }
      }
    }
  });
}

// y[co,oy,ox] = sum_{ci,ky,kx} x[ci,iy,ix] w[ci,co,ky,kx]
// with iy = (oy+p-ky)/s when integral and in range (same for ix).
template <typename T>
void tconv2d_forward(const T* x, const T* w, const T* b, T* y, int Ci, int H, int W, int Co,
                     int Kh, int Kw, int s, int p, int Ho, int Wo) {
  parallel_for(Ho, [&](long rb, long re, int) {
    for (long oy = rb; oy < re; ++oy) {
      for (int co = 0; co < Co; ++co) {
        T* yrow = y + (static_cast<long>(co) * Ho + oy) * Wo;
        T bias = b ? b[co] : T(0);
        for (int ox = 0; ox < Wo; ++ox) yrow[ox] = bias;
        for (int ky = 0; ky < Kh; ++ky) {
          long t = oy + p - ky;
          if (t < 0 || t % s != 0) continue;
          long iy = t / s;
          if (iy >= H) continue;
          for (int ci = 0; ci < Ci; ++ci) {
            const T* xrow = x + (static_cast<long>(ci) * H + iy) * W;
            const T* wrow = w + ((static_cast<long>(ci) * Co + co) * Kh + ky) * Kw;
            for (int kx = 0; kx < Kw; ++kx) {
              T wv = wrow[kx];
              for (int ox = 0; ox < Wo; ++ox) {
                long u = ox + p - kx;
                if (u < 0 || u % s != 0) continue;
                long ix = u / s;
                if (ix >= W) continue;
                yrow[ox] += wv * xrow[ix];
              }
            }
          }
        }
      }
    }
  });
}

// dx is a straight convolution of dy with w (correlation semantics).
template <typename T>
void tconv2d_backward_input(const T* dy, const T* w, T* dx, int Ci, int H, int W, int Co, int Kh,
                            int Kw, int s, int p, int Ho, int Wo) {
  parallel_for(H, [&](long rb, long re, int) {
    for (long iy = rb; iy < re; ++iy) {
      for (int ci = 0; ci < Ci; ++ci) {
        T* dxrow = dx + (static_cast<long>(ci) * H + iy) * W;
        for (int ky = 0; ky < Kh; ++ky) {
          long oy = iy * s + ky - p;
          if (oy < 0 || oy >= Ho) continue;
          for (int co = 0; co < Co; ++co) {
            const T* dyrow = dy + (static_cast<long>(co) * Ho + oy) * Wo;
            const T* wrow = w + ((static_cast<long>(ci) * Co + co) * Kh + ky) * Kw;
            for (int kx = 0; kx < Kw; ++kx) {
              T wv = wrow[kx];
              for (int ix = 0; ix < W; ++ix) {
                long ox = static_cast<long>(ix) * s + kx - p;
                if (ox < 0 || ox >= Wo) continue;
                dxrow[ix] += wv * dyrow[ox];
              }
            }
          }
        }
      }
    }
  });
}

template <typename T>
void tconv2d_backward_weight(const T* x, const T* dy, T* dw, T* db, int Ci, int H, int W, int Co,
                             int Kh, int Kw, int s, int p, int Ho, int Wo) {
  if (db) {
    for (int co = 0; co < Co; ++co) {
      T acc = 0;
      const T* dyc = dy + static_cast<long>(co) * Ho * Wo;
      for (long i = 0; i < static_cast<long>(Ho) * Wo; ++i) acc += dyc[i];
      db[co] += acc;
    }
  }
  parallel_for(Ci, [&](long cb, long ce, int) {
    for (long ci = cb; ci < ce; ++ci) {
      for (int co = 0; co < Co; ++co) {
        for (int ky = 0; ky < Kh; ++ky) {
          for (int kx = 0; kx < Kw; ++kx) {
            T acc = 0;
            for (int iy = 0; iy < H; ++iy) {
              long oy = static_cast<long>(iy) * s + ky - p;
              if (oy < 0 || oy >= Ho) continue;
              const T* xrow = x + (ci * H + iy) * W;
              const T* dyrow = dy + (static_cast<long>(co) * Ho + oy) * Wo;
              for (int ix = 0; ix < W; ++ix) {
                long ox = static_cast<long>(ix) * s + kx - p;
                if (ox < 0 || ox >= Wo) continue;
                acc += xrow[ix] * dyrow[ox];
              }
            }
            dw[((ci * Co + co) * Kh + ky) * Kw + kx] += acc;
          }
        }
      }
    }
  });
}

#define MGMAP_INSTANTIATE_KERN(T)                                                              \
  template void conv2d_forward<T>(const T*, const T*, const T*, T*, int, int, int, int, int,  \
                                  int, int, int, int, int);                                    \
  template void conv2d_backward_input<T>(const T*, const T*, T*, int, int, int, int, int,     \
                                         int, int, int, int, int);                            \
  template void conv2d_backward_weight<T>(const T*, const T*, T*, T*, int, int, int, int,     \
                                          int, int, int, int, int, int);                      \
  template void tconv2d_forward<T>(const T*, const T*, const T*, T*, int, int, int, int, int, \
                                   int, int, int, int, int);                                   \
  template void tconv2d_backward_input<T>(const T*, const T*, T*, int, int, int, int, int,    \
                                          int, int, int, int, int);                           \
  template void tconv2d_backward_weight<T>(const T*, const T*, T*, T*, int, int, int, int,    \
                                           int, int, int, int, int, int);

MGMAP_INSTANTIATE_KERN(float)
MGMAP_INSTANTIATE_KERN(double)

}  // namespace mgmap::ad::kern
