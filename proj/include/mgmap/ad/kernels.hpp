#pragma once

namespace mgmap::ad::kern {

// Dense CHW convolution kernels. All loops are statically partitioned over
// rows/channels so results are bit-reproducible for a fixed thread count.

template <typename T>
void conv2d_forward(const T* x, const T* w, const T* b, T* y, int Ci, int H, int W, int Co,
                    int Kh, int Kw, int s, int p, int Ho, int Wo);

template <typename T>
void conv2d_backward_input(const T* dy, const T* w, T* dx, int Ci, int H, int W, int Co, int Kh,
                           int Kw, int s, int p, int Ho, int Wo);

template <typename T>
void conv2d_backward_weight(const T* x, const T* dy, T* dw, T* db, int Ci, int H, int W, int Co,
                            int Kh, int Kw, int s, int p, int Ho, int Wo);

// Transposed convolution, torch weight layout (Ci, Co, Kh, Kw).
template <typename T>
void tconv2d_forward(const T* x, const T* w, const T* b, T* y, int Ci, int H, int W, int Co,
                     int Kh, int Kw, int s, int p, int Ho, int Wo);

template <typename T>
void tconv2d_backward_input(const T* dy, const T* w, T* dx, int Ci, int H, int W, int Co, int Kh,
                            int Kw, int s, int p, int Ho, int Wo);

template <typename T>
void tconv2d_backward_weight(const T* x, const T* dy, T* dw, T* db, int Ci, int H, int W, int Co,
                             int Kh, int Kw, int s, int p, int Ho, int Wo);

}  // namespace mgmap::ad::kern
