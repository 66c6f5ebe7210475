#pragma once

#include <cstddef>

// Scalar reference kernels, templated so the 64-bit gradient-check build can
// run the same arithmetic as the 32-bit inference path.

namespace evtrace::simd::ref {

template <typename T>
void conv1d(const T* in, std::size_t in_stride, std::size_t cin, const T* w, const T* bias, std::size_t cout,
            std::size_t k, T* out, std::size_t out_stride, std::size_t n) {
  for (std::size_t co = 0; co < cout; ++co) {
    T* o = out + co * out_stride;
    const T b = bias ? bias[co] : T(0);
    for (std::size_t t = 0; t < n; ++t) {
      T acc = b;
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const T* row = in + ci * in_stride + t;
        const T* wr = w + (co * cin + ci) * k;
        for (std::size_t j = 0; j < k; ++j) acc += wr[j] * row[j];
      }
      o[t] = acc;
    }
  }
}

template <typename T>
void conv1d_weight_grad(const T* g, std::size_t g_stride, std::size_t cout, const T* in, std::size_t in_stride,
                        std::size_t cin, std::size_t k, T* gw, std::size_t n) {
  for (std::size_t co = 0; co < cout; ++co) {
    const T* gr = g + co * g_stride;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const T* row = in + ci * in_stride;
      T* out = gw + (co * cin + ci) * k;
      for (std::size_t j = 0; j < k; ++j) {
        T acc = 0;
        for (std::size_t t = 0; t < n; ++t) acc += gr[t] * row[t + j];
        out[j] += acc;
      }
    }
  }
}

template <typename T>
void add_relu(const T* a, const T* b, T* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const T s = a[i] + b[i];
    dst[i] = s > T(0) ? s : T(0);
  }
}

template <typename T>
void relu(T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > T(0) ? x[i] : T(0);
}

inline void luma(const float* rgb, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = rgb + 3 * i;
    out[i] = 0.2126 * static_cast<double>(p[0]) + 0.7152 * static_cast<double>(p[1]) +
             0.0722 * static_cast<double>(p[2]);
  }
}

}  // namespace evtrace::simd::ref
