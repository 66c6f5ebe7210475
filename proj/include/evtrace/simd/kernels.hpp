#pragma once

#include <cstddef>
#include <string_view>

namespace evtrace::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Table of data-parallel inner loops. Every entry has a scalar reference in
/// reference.hpp; vector variants must reproduce conv1d, add_relu, relu and
/// luma bit-for-bit, and conv1d_weight_grad to within reduction-order
/// rounding.
///
/// Tensor layout is channel-major: channel c of a buffer with stride s starts
/// at base + c * s.
struct Kernels {
  Isa isa;

  /// Valid cross-correlation over a pre-padded input:
  ///   out[co][t] = bias[co] + sum_ci sum_j w[co][ci][j] * in[ci][t + j]
  /// for t in [0, n). Input rows need n + k - 1 readable entries. The sum is
  /// accumulated bias first, then ci ascending, then j ascending.
  /// bias may be null (treated as zero).
  void (*conv1d)(const float* in, std::size_t in_stride, std::size_t cin, const float* w, const float* bias,
                 std::size_t cout, std::size_t k, float* out, std::size_t out_stride, std::size_t n);

  /// gw[co][ci][j] += sum_t g[co][t] * in[ci][t + j], t in [0, n).
  void (*conv1d_weight_grad)(const float* g, std::size_t g_stride, std::size_t cout, const float* in,
                             std::size_t in_stride, std::size_t cin, std::size_t k, float* gw, std::size_t n);

  /// dst[i] = max(a[i] + b[i], 0). dst may alias a or b.
  void (*add_relu)(const float* a, const float* b, float* dst, std::size_t n);

  /// x[i] = max(x[i], 0).
  void (*relu)(float* x, std::size_t n);

  /// out[i] = 0.2126 R + 0.7152 G + 0.0722 B in double precision, summed left
  /// to right, over n channel-interleaved RGB pixels.
  void (*luma)(const float* rgb, double* out, std::size_t n);
};

const Kernels& scalar_kernels();

/// Null when the build or the running CPU lacks AVX2.
const Kernels* avx2_kernels();

/// Kernels in use. Chosen on first call: AVX2 when available, unless the
/// EVTRACE_SIMD environment variable says "scalar".
const Kernels& kernels();

/// Forces a backend; returns false (and changes nothing) if unavailable.
bool select_isa(Isa isa);

}  // namespace evtrace::simd
