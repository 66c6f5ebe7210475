#include "evtrace/evsnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "evtrace/errors.hpp"
#include "evtrace/parallel.hpp"
#include "evtrace/rng.hpp"
#include "evtrace/simd/kernels.hpp"
#include "evtrace/simd/reference.hpp"

namespace evtrace {

void EvsNetConfig::validate() const {
  if (channels < 1) throw ConfigError("evsnet channels must be >= 1");
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("evsnet kernel must be odd");
  if (depth < 1) throw ConfigError("evsnet depth must be >= 1");
  lif.validate();
  surrogate.validate();
}

std::size_t receptive_field(const EvsNetConfig& cfg) { return 1 + (cfg.kernel - 1) * (2 * cfg.depth + 1); }

std::vector<TensorSlot> param_layout(const EvsNetConfig& cfg) {
  const auto c = static_cast<std::uint32_t>(cfg.channels);
  const auto k = static_cast<std::uint32_t>(cfg.kernel);
  std::vector<TensorSlot> slots;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::vector<std::uint32_t> dims) {
    std::size_t size = 1;
    for (auto d : dims) size *= d;
    slots.push_back({std::move(name), std::move(dims), offset, size});
    offset += size;
  };
  add("in.w", {c, 1, k});
  add("in.b", {c});
  for (std::size_t i = 0; i < cfg.depth; ++i) {
    const std::string prefix = "block" + std::to_string(i) + ".";
    add(prefix + "w1", {c, c, k});
    add(prefix + "b1", {c});
    add(prefix + "w2", {c, c, k});
    add(prefix + "b2", {c});
  }
  add("head.w", {1, c, 1});
  add("head.b", {1});
  return slots;
}

template <std::floating_point T>
EvsNetParamsT<T>::EvsNetParamsT(const EvsNetConfig& cfg) : cfg_(cfg), layout_(param_layout(cfg)) {
  cfg_.validate();
  values_.assign(layout_.back().offset + layout_.back().size, T(0));
}

template <std::floating_point T>
void EvsNetParamsT<T>::fill_zero() {
  std::fill(values_.begin(), values_.end(), T(0));
}

template class EvsNetParamsT<float>;
template class EvsNetParamsT<double>;

EvsNetParams init_params(const EvsNetConfig& cfg, std::uint64_t seed) {
  EvsNetParams params(cfg);
  const auto& slots = params.layout();
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (slots[s].dims.size() != 3) continue;  // biases stay zero
    const double fan_in = static_cast<double>(slots[s].dims[1]) * slots[s].dims[2];
    const double bound = std::sqrt(6.0 / fan_in);
    CounterRng rng{seed, s};
    for (std::size_t i = 0; i < slots[s].size; ++i) {
      params.flat()[slots[s].offset + i] = static_cast<float>((2.0 * uniform01(rng) - 1.0) * bound);
    }
  }
  return params;
}

namespace {

// Kernel table per precision: the float path takes the dispatched SIMD
// kernels, the double path the scalar reference.
template <typename T>
struct Ops;

template <>
struct Ops<float> {
  const simd::Kernels& k = simd::kernels();
  void conv1d(const float* in, std::size_t is, std::size_t cin, const float* w, const float* b, std::size_t cout,
              std::size_t kk, float* out, std::size_t os, std::size_t n) const {
    k.conv1d(in, is, cin, w, b, cout, kk, out, os, n);
  }
  void wgrad(const float* g, std::size_t gs, std::size_t cout, const float* in, std::size_t is, std::size_t cin,
             std::size_t kk, float* gw, std::size_t n) const {
    k.conv1d_weight_grad(g, gs, cout, in, is, cin, kk, gw, n);
  }
  void add_relu(const float* a, const float* b, float* d, std::size_t n) const { k.add_relu(a, b, d, n); }
  void relu(float* x, std::size_t n) const { k.relu(x, n); }
};

template <>
struct Ops<double> {
  void conv1d(const double* in, std::size_t is, std::size_t cin, const double* w, const double* b,
              std::size_t cout, std::size_t kk, double* out, std::size_t os, std::size_t n) const {
    simd::ref::conv1d(in, is, cin, w, b, cout, kk, out, os, n);
  }
  void wgrad(const double* g, std::size_t gs, std::size_t cout, const double* in, std::size_t is,
             std::size_t cin, std::size_t kk, double* gw, std::size_t n) const {
    simd::ref::conv1d_weight_grad(g, gs, cout, in, is, cin, kk, gw, n);
  }
  void add_relu(const double* a, const double* b, double* d, std::size_t n) const {
    simd::ref::add_relu(a, b, d, n);
  }
  void relu(double* x, std::size_t n) const { simd::ref::relu(x, n); }
};

// Buffers covering global tick positions [base, base + len). Channel c of a
// layer buffer starts at c * len.
template <typename T>
struct StackView {
  T* x;    // [len]
  T* h;    // [(depth + 1) * channels * len]
  T* a;    // [depth * channels * len]
  T* tmp;  // [channels * len]
  std::ptrdiff_t base;
  std::size_t len;
};

// Evaluates the conv stack so that h^(M) is exact on output ticks [lo, hi).
// Layer l (0-based over the 2M + 1 kernel-k convs) is computed on
// [lo - R + (l + 1) pad, hi + R - (l + 1) pad) clipped to [0, ticks); every
// other buffer position must hold zero, which realises the zero padding of a
// full-length pass. Each computed value therefore sees exactly the operands
// it would see in a full-sequence pass.
template <typename T>
void run_stack(const Ops<T>& ops, const EvsNetParamsT<T>& p, const StackView<T>& v, std::ptrdiff_t lo,
               std::ptrdiff_t hi, std::size_t ticks) {
  const auto& cfg = p.config();
  const std::size_t C = cfg.channels;
  const std::size_t k = cfg.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(cfg.pad());
  const auto R = pad * static_cast<std::ptrdiff_t>(2 * cfg.depth + 1);
  const std::size_t L = v.len;
  const std::size_t layer = C * L;

  auto range = [&](std::size_t l) {
    const auto shrink = static_cast<std::ptrdiff_t>(l + 1) * pad;
    const std::ptrdiff_t b = std::max<std::ptrdiff_t>(lo - R + shrink, 0);
    const std::ptrdiff_t e = std::min<std::ptrdiff_t>(hi + R - shrink, static_cast<std::ptrdiff_t>(ticks));
    return std::pair{b, std::max(b, e)};
  };
  auto idx = [&](std::ptrdiff_t g) { return static_cast<std::size_t>(g - v.base); };

  {
    const auto [b, e] = range(0);
    const auto n = static_cast<std::size_t>(e - b);
    ops.conv1d(v.x + idx(b - pad), L, 1, p.in_w(), p.in_b(), C, k, v.h + idx(b), L, n);
    for (std::size_t c = 0; c < C; ++c) ops.relu(v.h + c * L + idx(b), n);
  }
  for (std::size_t i = 0; i < cfg.depth; ++i) {
    T* h_prev = v.h + i * layer;
    T* h_next = v.h + (i + 1) * layer;
    T* a = v.a + i * layer;
    {
      const auto [b, e] = range(2 * i + 1);
      const auto n = static_cast<std::size_t>(e - b);
      ops.conv1d(h_prev + idx(b - pad), L, C, p.w1(i), p.b1(i), C, k, a + idx(b), L, n);
      for (std::size_t c = 0; c < C; ++c) ops.relu(a + c * L + idx(b), n);
    }
    {
      const auto [b, e] = range(2 * i + 2);
      const auto n = static_cast<std::size_t>(e - b);
      ops.conv1d(a + idx(b - pad), L, C, p.w2(i), p.b2(i), C, k, v.tmp + idx(b), L, n);
      for (std::size_t c = 0; c < C; ++c) {
        ops.add_relu(h_prev + c * L + idx(b), v.tmp + c * L + idx(b), h_next + c * L + idx(b), n);
      }
    }
  }
}

template <typename T>
void head(const Ops<T>& ops, const EvsNetParamsT<T>& p, const T* h_last, std::size_t len, std::size_t offset,
          std::size_t n, T* logits) {
  ops.conv1d(h_last + offset, len, p.config().channels, p.head_w(), p.head_b(), 1, 1, logits, n, n);
}

}  // namespace

template <std::floating_point T>
void forward(std::span<const T> x, const EvsNetParamsT<T>& params, T v0, ForwardCacheT<T>& cache,
             std::optional<std::size_t> expected_ticks) {
  const auto& cfg = params.config();
  if (x.empty()) throw ShapeError("forward: empty input sequence");
  if (expected_ticks && *expected_ticks != x.size()) {
    throw ShapeError("forward: input has " + std::to_string(x.size()) + " ticks, expected " +
                     std::to_string(*expected_ticks));
  }
  const std::size_t K = x.size();
  const std::size_t C = cfg.channels;
  cache.channels = C;
  cache.kernel = cfg.kernel;
  cache.depth = cfg.depth;
  cache.ticks = K;
  const std::size_t pad = cache.pad();
  const std::size_t L = cache.stride();

  cache.x.assign(L, T(0));
  std::copy(x.begin(), x.end(), cache.x.begin() + static_cast<std::ptrdiff_t>(pad));
  cache.h.assign((cfg.depth + 1) * C * L, T(0));
  cache.a.assign(cfg.depth * C * L, T(0));
  std::vector<T> tmp(C * L, T(0));

  const Ops<T> ops{};
  StackView<T> view{cache.x.data(), cache.h.data(), cache.a.data(), tmp.data(), -static_cast<std::ptrdiff_t>(pad), L};
  run_stack(ops, params, view, 0, static_cast<std::ptrdiff_t>(K), K);

  cache.logits.resize(K);
  head(ops, params, cache.h.data() + cfg.depth * C * L, L, pad, K, cache.logits.data());

  cache.charged.resize(K);
  cache.soft.resize(K);
  cache.spikes.resize(K);
  const double decay = cfg.lif.decay();
  const double vth = cfg.lif.v_th;
  const T alpha = static_cast<T>(cfg.surrogate.alpha);
  double v = v0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto tick = bilif_tick(v, static_cast<double>(cache.logits[k]), decay, vth);
    v = tick.v;
    cache.charged[k] = static_cast<T>(tick.charged);
    cache.spikes[k] = tick.spike;
    cache.soft[k] = relaxed_bilif(cache.charged[k], static_cast<T>(vth), alpha);
  }
  cache.v0 = v0;
  cache.v_final = static_cast<T>(v);
}

template <std::floating_point T>
TransposedWeights<T>::TransposedWeights(const EvsNetParamsT<T>& params) {
  const auto& cfg = params.config();
  const std::size_t C = cfg.channels;
  const std::size_t k = cfg.kernel;
  // w[co][ci][j] -> wt[ci][co][k - 1 - j]
  auto transpose = [&](const T* w, std::size_t cout, std::size_t cin) {
    std::vector<T> out(cout * cin * k);
    for (std::size_t co = 0; co < cout; ++co) {
      for (std::size_t ci = 0; ci < cin; ++ci) {
        for (std::size_t j = 0; j < k; ++j) out[(ci * cout + co) * k + (k - 1 - j)] = w[(co * cin + ci) * k + j];
      }
    }
    return out;
  };
  in_w = transpose(params.in_w(), C, 1);
  for (std::size_t i = 0; i < cfg.depth; ++i) {
    w1.push_back(transpose(params.w1(i), C, C));
    w2.push_back(transpose(params.w2(i), C, C));
  }
}

namespace {

template <typename T>
void check_cache(const ForwardCacheT<T>& cache, const EvsNetParamsT<T>& params, const EvsNetParamsT<T>& grads,
                 std::size_t grad_len) {
  const auto& cfg = params.config();
  if (cache.channels != cfg.channels || cache.kernel != cfg.kernel || cache.depth != cfg.depth) {
    throw CacheMismatchError("forward cache was produced by a different architecture");
  }
  if (cache.ticks == 0 || cache.logits.size() != cache.ticks || cache.h.size() != (cfg.depth + 1) * cfg.channels * cache.stride()) {
    throw CacheMismatchError("forward cache is incomplete");
  }
  if (grad_len != cache.ticks) throw CacheMismatchError("gradient length does not match cached sequence");
  if (!grads.config().same_shape(cfg)) throw CacheMismatchError("gradient buffer has a different architecture");
}

template <typename T>
void add_row_sums(const T* g, std::size_t stride, std::size_t rows, std::size_t n, T* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    T s = 0;
    for (std::size_t t = 0; t < n; ++t) s += g[r * stride + t];
    out[r] += s;
  }
}

// dst[c][t] = src[c][t] where mask[c][t] > 0, else 0, on the interior [pad, pad + n).
template <typename T>
void mask_positive(const T* src, const T* mask, T* dst, std::size_t rows, std::size_t stride, std::size_t pad,
                   std::size_t n) {
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t o = r * stride + pad;
    for (std::size_t t = 0; t < n; ++t) dst[o + t] = mask[o + t] > T(0) ? src[o + t] : T(0);
  }
}

}  // namespace

template <std::floating_point T>
void backward_from_logits(std::span<const T> grad_logits, const ForwardCacheT<T>& cache,
                          const EvsNetParamsT<T>& params, const TransposedWeights<T>& wt, EvsNetParamsT<T>& grads,
                          std::span<T> input_grad) {
  check_cache(cache, params, grads, grad_logits.size());
  const auto& cfg = params.config();
  const std::size_t C = cfg.channels;
  const std::size_t k = cfg.kernel;
  const std::size_t K = cache.ticks;
  const std::size_t pad = cache.pad();
  const std::size_t L = cache.stride();
  const std::size_t layer = C * L;
  const Ops<T> ops{};

  // Gradient buffers share the padded layout; halos stay zero throughout.
  std::vector<T> gh(layer, T(0));
  std::vector<T> gz(layer, T(0));
  std::vector<T> ga(layer, T(0));
  std::vector<T> gprev(layer, T(0));

  const T* h_last = cache.h.data() + cfg.depth * layer;
  ops.wgrad(grad_logits.data(), K, 1, h_last + pad, L, C, 1, grads.head_w(), K);
  add_row_sums(grad_logits.data(), K, 1, K, grads.head_b());
  for (std::size_t c = 0; c < C; ++c) {
    const T w = params.head_w()[c];
    for (std::size_t t = 0; t < K; ++t) gh[c * L + pad + t] = w * grad_logits[t];
  }

  for (std::size_t i = cfg.depth; i-- > 0;) {
    const T* h_prev = cache.h.data() + i * layer;
    const T* h_next = cache.h.data() + (i + 1) * layer;
    const T* a = cache.a.data() + i * layer;

    mask_positive(gh.data(), h_next, gz.data(), C, L, pad, K);
    add_row_sums(gz.data() + pad, L, C, K, grads.b2(i));
    ops.wgrad(gz.data() + pad, L, C, a, L, C, k, grads.w2(i), K);
    ops.conv1d(gz.data(), L, C, wt.w2[i].data(), nullptr, C, k, ga.data() + pad, L, K);
    mask_positive(ga.data(), a, ga.data(), C, L, pad, K);

    add_row_sums(ga.data() + pad, L, C, K, grads.b1(i));
    ops.wgrad(ga.data() + pad, L, C, h_prev, L, C, k, grads.w1(i), K);
    ops.conv1d(ga.data(), L, C, wt.w1[i].data(), nullptr, C, k, gprev.data() + pad, L, K);

    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t o = c * L + pad;
      for (std::size_t t = 0; t < K; ++t) gh[o + t] = gz[o + t] + gprev[o + t];
    }
  }

  mask_positive(gh.data(), cache.h.data(), gz.data(), C, L, pad, K);
  add_row_sums(gz.data() + pad, L, C, K, grads.in_b());
  ops.wgrad(gz.data() + pad, L, C, cache.x.data(), L, 1, k, grads.in_w(), K);
  if (!input_grad.empty()) {
    if (input_grad.size() != K) throw ShapeError("input gradient buffer has the wrong length");
    ops.conv1d(gz.data(), L, C, wt.in_w.data(), nullptr, 1, k, input_grad.data(), K, K);
  }
}

template <std::floating_point T>
void backward(std::span<const T> grad_spikes, const ForwardCacheT<T>& cache, const EvsNetParamsT<T>& params,
              const TransposedWeights<T>& wt, EvsNetParamsT<T>& grads, std::span<T> input_grad) {
  check_cache(cache, params, grads, grad_spikes.size());
  const auto& cfg = params.config();
  const std::size_t K = cache.ticks;
  const T decay = static_cast<T>(cfg.lif.decay());
  const T vth = static_cast<T>(cfg.lif.v_th);
  const T alpha = static_cast<T>(cfg.surrogate.alpha);

  // V'_k = decay V_{k-1} + logit_k, V_k = V'_k - S_k v_th with S_k held fixed.
  std::vector<T> grad_logits(K);
  T g_v = 0;
  for (std::size_t k = K; k-- > 0;) {
    const T g_charged = grad_spikes[k] * bipolar_surrogate(cache.charged[k], vth, alpha) + g_v;
    grad_logits[k] = g_charged;
    g_v = decay * g_charged;
  }
  backward_from_logits<T>(grad_logits, cache, params, wt, grads, input_grad);
}

template void forward<float>(std::span<const float>, const EvsNetParamsT<float>&, float, ForwardCacheT<float>&,
                             std::optional<std::size_t>);
template void forward<double>(std::span<const double>, const EvsNetParamsT<double>&, double,
                              ForwardCacheT<double>&, std::optional<std::size_t>);
template struct TransposedWeights<float>;
template struct TransposedWeights<double>;
template void backward_from_logits<float>(std::span<const float>, const ForwardCacheT<float>&,
                                          const EvsNetParamsT<float>&, const TransposedWeights<float>&,
                                          EvsNetParamsT<float>&, std::span<float>);
template void backward_from_logits<double>(std::span<const double>, const ForwardCacheT<double>&,
                                           const EvsNetParamsT<double>&, const TransposedWeights<double>&,
                                           EvsNetParamsT<double>&, std::span<double>);
template void backward<float>(std::span<const float>, const ForwardCacheT<float>&, const EvsNetParamsT<float>&,
                              const TransposedWeights<float>&, EvsNetParamsT<float>&, std::span<float>);
template void backward<double>(std::span<const double>, const ForwardCacheT<double>&,
                               const EvsNetParamsT<double>&, const TransposedWeights<double>&,
                               EvsNetParamsT<double>&, std::span<double>);

namespace {

// Reusable buffers for windowed evaluation.
struct WindowWorkspace {
  std::vector<float> x, h, a, tmp, logits;

  void compute(std::span<const float> seq, std::size_t lo, std::size_t hi, const EvsNetParams& params) {
    const auto& cfg = params.config();
    const std::size_t C = cfg.channels;
    const std::size_t R = cfg.pad() * (2 * cfg.depth + 1);
    const std::size_t L = hi - lo + 2 * R;
    const auto base = static_cast<std::ptrdiff_t>(lo) - static_cast<std::ptrdiff_t>(R);

    x.assign(L, 0.0f);
    for (std::size_t i = 0; i < L; ++i) {
      const std::ptrdiff_t g = base + static_cast<std::ptrdiff_t>(i);
      if (g >= 0 && g < static_cast<std::ptrdiff_t>(seq.size())) x[i] = seq[static_cast<std::size_t>(g)];
    }
    h.assign((cfg.depth + 1) * C * L, 0.0f);
    a.assign(cfg.depth * C * L, 0.0f);
    tmp.assign(C * L, 0.0f);

    const Ops<float> ops{};
    StackView<float> view{x.data(), h.data(), a.data(), tmp.data(), base, L};
    run_stack(ops, params, view, static_cast<std::ptrdiff_t>(lo), static_cast<std::ptrdiff_t>(hi), seq.size());
    logits.resize(hi - lo);
    head(ops, params, h.data() + cfg.depth * C * L, L, R, hi - lo, logits.data());
  }
};

}  // namespace

std::vector<float> window_logits(std::span<const float> x, std::size_t lo, std::size_t hi,
                                 const EvsNetParams& params) {
  if (lo >= hi || hi > x.size()) throw ShapeError("window_logits: window outside the sequence");
  WindowWorkspace ws;
  ws.compute(x, lo, hi, params);
  return ws.logits;
}

double initial_potential(const InferOptions& opts, const EvsNetConfig& cfg, std::uint32_t x, std::uint32_t y) {
  if (opts.init_mode == InitMode::zero) return 0.0;
  CounterRng rng{opts.seed, x, y};
  return (2.0 * uniform01(rng) - 1.0) * cfg.lif.v_th;
}

SpikeTrain infer_stream(const LogDiffSeq& x, const EvsNetParams& params, const InferOptions& opts) {
  if (opts.window < 1) throw ConfigError("inference window must be >= 1");
  const auto& cfg = params.config();
  const std::size_t K = x.ticks();
  SpikeTrain out(x.width(), x.height(), x.fps(), K);
  const double decay = cfg.lif.decay();
  const double vth = cfg.lif.v_th;

  parallel_chunks(x.pixel_count(), opts.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    WindowWorkspace ws;
    for (std::size_t p = begin; p < end; ++p) {
      const auto seq = x.row(p);
      auto spikes = out.row(p);
      double v = initial_potential(opts, cfg, static_cast<std::uint32_t>(p % x.width()),
                                   static_cast<std::uint32_t>(p / x.width()));
      for (std::size_t lo = 0; lo < K; lo += opts.window) {
        const std::size_t hi = std::min(K, lo + opts.window);
        ws.compute(seq, lo, hi, params);
        for (std::size_t t = 0; t < hi - lo; ++t) {
          const auto tick = bilif_tick(v, static_cast<double>(ws.logits[t]), decay, vth);
          v = tick.v;
          spikes[lo + t] = tick.spike;
        }
      }
    }
  });
  return out;
}

}  // namespace evtrace
