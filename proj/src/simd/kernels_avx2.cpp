#include "evtrace/simd/kernels.hpp"

#if defined(EVTRACE_HAVE_AVX2) && defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>

namespace evtrace::simd {

namespace {

// No FMA anywhere below: every product is rounded before it is added, exactly
// as in the scalar reference, so outputs match bit-for-bit.

template <std::size_t Rows>
void conv_rows(const float* in, std::size_t in_stride, std::size_t cin, const float* w, const float* bias,
               std::size_t co0, std::size_t k, float* out, std::size_t out_stride, std::size_t n) {
  const float* wr[Rows];
  float b[Rows];
  for (std::size_t r = 0; r < Rows; ++r) {
    wr[r] = w + (co0 + r) * cin * k;
    b[r] = bias ? bias[co0 + r] : 0.0f;
  }

  std::size_t t = 0;
  for (; t + 16 <= n; t += 16) {
    __m256 acc[Rows][2];
    for (std::size_t r = 0; r < Rows; ++r) acc[r][0] = acc[r][1] = _mm256_set1_ps(b[r]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const float* row = in + ci * in_stride + t;
      const std::size_t wofs = ci * k;
      for (std::size_t j = 0; j < k; ++j) {
        const __m256 x0 = _mm256_loadu_ps(row + j);
        const __m256 x1 = _mm256_loadu_ps(row + j + 8);
        for (std::size_t r = 0; r < Rows; ++r) {
          const __m256 wv = _mm256_broadcast_ss(wr[r] + wofs + j);
          acc[r][0] = _mm256_add_ps(acc[r][0], _mm256_mul_ps(wv, x0));
          acc[r][1] = _mm256_add_ps(acc[r][1], _mm256_mul_ps(wv, x1));
        }
      }
    }
    for (std::size_t r = 0; r < Rows; ++r) {
      float* o = out + (co0 + r) * out_stride + t;
      _mm256_storeu_ps(o, acc[r][0]);
      _mm256_storeu_ps(o + 8, acc[r][1]);
    }
  }
  for (; t + 8 <= n; t += 8) {
    __m256 acc[Rows];
    for (std::size_t r = 0; r < Rows; ++r) acc[r] = _mm256_set1_ps(b[r]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const float* row = in + ci * in_stride + t;
      const std::size_t wofs = ci * k;
      for (std::size_t j = 0; j < k; ++j) {
        const __m256 x0 = _mm256_loadu_ps(row + j);
        for (std::size_t r = 0; r < Rows; ++r) {
          acc[r] = _mm256_add_ps(acc[r], _mm256_mul_ps(_mm256_broadcast_ss(wr[r] + wofs + j), x0));
        }
      }
    }
    for (std::size_t r = 0; r < Rows; ++r) _mm256_storeu_ps(out + (co0 + r) * out_stride + t, acc[r]);
  }
  for (; t < n; ++t) {
    for (std::size_t r = 0; r < Rows; ++r) {
      float acc = b[r];
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const float* row = in + ci * in_stride + t;
        const float* wv = wr[r] + ci * k;
        for (std::size_t j = 0; j < k; ++j) acc += wv[j] * row[j];
      }
      out[(co0 + r) * out_stride + t] = acc;
    }
  }
}

void conv1d(const float* in, std::size_t in_stride, std::size_t cin, const float* w, const float* bias,
            std::size_t cout, std::size_t k, float* out, std::size_t out_stride, std::size_t n) {
  std::size_t co = 0;
  for (; co + 4 <= cout; co += 4) conv_rows<4>(in, in_stride, cin, w, bias, co, k, out, out_stride, n);
  for (; co < cout; ++co) conv_rows<1>(in, in_stride, cin, w, bias, co, k, out, out_stride, n);
}

float hsum(__m256 v) {
  const __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
  return _mm_cvtss_f32(s);
}

void conv1d_weight_grad(const float* g, std::size_t g_stride, std::size_t cout, const float* in,
                        std::size_t in_stride, std::size_t cin, std::size_t k, float* gw, std::size_t n) {
  constexpr std::size_t kTaps = 4;
  for (std::size_t co = 0; co < cout; ++co) {
    const float* gr = g + co * g_stride;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const float* row = in + ci * in_stride;
      float* dst = gw + (co * cin + ci) * k;
      for (std::size_t j0 = 0; j0 < k; j0 += kTaps) {
        const std::size_t taps = std::min(kTaps, k - j0);
        __m256 acc[kTaps] = {_mm256_setzero_ps(), _mm256_setzero_ps(), _mm256_setzero_ps(), _mm256_setzero_ps()};
        std::size_t t = 0;
        for (; t + 8 <= n; t += 8) {
          const __m256 gv = _mm256_loadu_ps(gr + t);
          for (std::size_t q = 0; q < taps; ++q) {
            acc[q] = _mm256_add_ps(acc[q], _mm256_mul_ps(gv, _mm256_loadu_ps(row + t + j0 + q)));
          }
        }
        for (std::size_t q = 0; q < taps; ++q) {
          float s = hsum(acc[q]);
          for (std::size_t tt = t; tt < n; ++tt) s += gr[tt] * row[tt + j0 + q];
          dst[j0 + q] += s;
        }
      }
    }
  }
}

void add_relu(const float* a, const float* b, float* dst, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 s = _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    _mm256_storeu_ps(dst + i, _mm256_max_ps(s, zero));
  }
  for (; i < n; ++i) {
    const float s = a[i] + b[i];
    dst[i] = s > 0.0f ? s : 0.0f;
  }
}

void relu(float* x, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  for (; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void luma(const float* rgb, double* out, std::size_t n) {
  const __m128i stride = _mm_setr_epi32(0, 3, 6, 9);
  const __m256d cr = _mm256_set1_pd(0.2126);
  const __m256d cg = _mm256_set1_pd(0.7152);
  const __m256d cb = _mm256_set1_pd(0.0722);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float* p = rgb + 3 * i;
    const __m256d r = _mm256_cvtps_pd(_mm_i32gather_ps(p, stride, 4));
    const __m256d g = _mm256_cvtps_pd(_mm_i32gather_ps(p + 1, stride, 4));
    const __m256d b = _mm256_cvtps_pd(_mm_i32gather_ps(p + 2, stride, 4));
    const __m256d s = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(cr, r), _mm256_mul_pd(cg, g)), _mm256_mul_pd(cb, b));
    _mm256_storeu_pd(out + i, s);
  }
  for (; i < n; ++i) {
    const float* p = rgb + 3 * i;
    out[i] = 0.2126 * static_cast<double>(p[0]) + 0.7152 * static_cast<double>(p[1]) +
             0.0722 * static_cast<double>(p[2]);
  }
}

}  // namespace

const Kernels* avx2_table() {
  static const Kernels table{Isa::avx2, &conv1d, &conv1d_weight_grad, &add_relu, &relu, &luma};
  return &table;
}

}  // namespace evtrace::simd

#else

namespace evtrace::simd {
const Kernels* avx2_table() { return nullptr; }
}  // namespace evtrace::simd

#endif
