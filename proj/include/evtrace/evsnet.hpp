#pragma once

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtrace/core.hpp"
#include "evtrace/refsim.hpp"
#include "evtrace/spiking.hpp"

namespace evtrace {

/// Architecture hyperparameters of the per-pixel spiking network.
struct EvsNetConfig {
  std::size_t channels = 32;
  std::size_t kernel = 7;  // odd; every conv except the pointwise head
  std::size_t depth = 3;   // residual blocks
  LifParams lif{};
  SurrogateConfig surrogate{};

  void validate() const;
  std::size_t pad() const { return (kernel - 1) / 2; }
  bool same_shape(const EvsNetConfig& o) const {
    return channels == o.channels && kernel == o.kernel && depth == o.depth;
  }
};

/// Input ticks that can influence one output tick: 1 + (k - 1)(2M + 1).
std::size_t receptive_field(const EvsNetConfig& cfg);

/// One named tensor inside the flat parameter vector.
struct TensorSlot {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Declaration order: in.w [C,1,k], in.b [C], then per block
/// w1 [C,C,k], b1 [C], w2 [C,C,k], b2 [C], then head.w [1,C,1], head.b [1].
std::vector<TensorSlot> param_layout(const EvsNetConfig& cfg);

/// All weights and biases in one contiguous vector, addressed through the
/// layout above. Gradients use the same type.
template <std::floating_point T>
class EvsNetParamsT {
 public:
  explicit EvsNetParamsT(const EvsNetConfig& cfg);

  const EvsNetConfig& config() const { return cfg_; }
  EvsNetConfig& config() { return cfg_; }
  std::span<T> flat() { return values_; }
  std::span<const T> flat() const { return values_; }
  std::size_t size() const { return values_.size(); }

  T* in_w() { return at(0); }
  T* in_b() { return at(1); }
  T* w1(std::size_t block) { return at(2 + 4 * block); }
  T* b1(std::size_t block) { return at(3 + 4 * block); }
  T* w2(std::size_t block) { return at(4 + 4 * block); }
  T* b2(std::size_t block) { return at(5 + 4 * block); }
  T* head_w() { return at(2 + 4 * cfg_.depth); }
  T* head_b() { return at(3 + 4 * cfg_.depth); }
  const T* in_w() const { return at(0); }
  const T* in_b() const { return at(1); }
  const T* w1(std::size_t block) const { return at(2 + 4 * block); }
  const T* b1(std::size_t block) const { return at(3 + 4 * block); }
  const T* w2(std::size_t block) const { return at(4 + 4 * block); }
  const T* b2(std::size_t block) const { return at(5 + 4 * block); }
  const T* head_w() const { return at(2 + 4 * cfg_.depth); }
  const T* head_b() const { return at(3 + 4 * cfg_.depth); }

  const std::vector<TensorSlot>& layout() const { return layout_; }

  void fill_zero();

  template <std::floating_point U>
  EvsNetParamsT<U> cast() const {
    EvsNetParamsT<U> out(cfg_);
    for (std::size_t i = 0; i < values_.size(); ++i) out.flat()[i] = static_cast<U>(values_[i]);
    return out;
  }

  friend bool operator==(const EvsNetParamsT& a, const EvsNetParamsT& b) {
    return a.cfg_.same_shape(b.cfg_) && a.values_ == b.values_;
  }

 private:
  T* at(std::size_t slot) { return values_.data() + layout_[slot].offset; }
  const T* at(std::size_t slot) const { return values_.data() + layout_[slot].offset; }

  EvsNetConfig cfg_;
  std::vector<TensorSlot> layout_;
  std::vector<T> values_;
};

using EvsNetParams = EvsNetParamsT<float>;

/// Uniform weights with variance 2 / fan_in, zero biases.
EvsNetParams init_params(const EvsNetConfig& cfg, std::uint64_t seed);

/// Activations of one forward pass over a full sequence. Channel buffers are
/// zero-padded by (k - 1) / 2 on both sides; row stride is ticks + 2 * pad.
template <std::floating_point T>
struct ForwardCacheT {
  std::size_t channels = 0;
  std::size_t kernel = 0;
  std::size_t depth = 0;
  std::size_t ticks = 0;

  std::vector<T> x;        // [1, stride]
  std::vector<T> h;        // [(depth + 1) * channels, stride], post-ReLU h^(0..M)
  std::vector<T> a;        // [depth * channels, stride], inner post-ReLU activations
  std::vector<T> logits;   // [ticks]
  std::vector<T> charged;  // [ticks], membrane potential after charging
  std::vector<T> soft;     // [ticks], relaxed spikes
  std::vector<std::int8_t> spikes;  // [ticks]
  T v0 = 0;
  T v_final = 0;

  std::size_t pad() const { return (kernel - 1) / 2; }
  std::size_t stride() const { return ticks + 2 * pad(); }
};

using ForwardCache = ForwardCacheT<float>;

/// Runs the network over one pixel sequence. The cache doubles as a reusable
/// workspace. Throws ShapeError if x is empty or its length differs from
/// `expected_ticks`.
template <std::floating_point T>
void forward(std::span<const T> x, const EvsNetParamsT<T>& params, T v0, ForwardCacheT<T>& cache,
             std::optional<std::size_t> expected_ticks = std::nullopt);

template <std::floating_point T>
ForwardCacheT<T> forward(std::span<const T> x, const EvsNetParamsT<T>& params, T v0 = 0,
                         std::optional<std::size_t> expected_ticks = std::nullopt) {
  ForwardCacheT<T> cache;
  forward(x, params, v0, cache, expected_ticks);
  return cache;
}

/// Kernels of every conv, transposed over channels and flipped in time, so
/// input gradients are themselves valid correlations. Build once per update.
template <std::floating_point T>
struct TransposedWeights {
  explicit TransposedWeights(const EvsNetParamsT<T>& params);
  std::vector<T> in_w;
  std::vector<std::vector<T>> w1;
  std::vector<std::vector<T>> w2;
};

/// Reverse pass from d(loss)/d(logits). Accumulates into `grads` and writes
/// d(loss)/d(x) into input_grad when non-empty.
template <std::floating_point T>
void backward_from_logits(std::span<const T> grad_logits, const ForwardCacheT<T>& cache,
                          const EvsNetParamsT<T>& params, const TransposedWeights<T>& wt, EvsNetParamsT<T>& grads,
                          std::span<T> input_grad = {});

/// Reverse pass from d(loss)/d(spikes). The spike derivative is the
/// arctangent surrogate at the charged potential; the membrane recurrence is
/// unrolled through time with the reset treated as constant.
template <std::floating_point T>
void backward(std::span<const T> grad_spikes, const ForwardCacheT<T>& cache, const EvsNetParamsT<T>& params,
              const TransposedWeights<T>& wt, EvsNetParamsT<T>& grads, std::span<T> input_grad = {});

/// Convenience overload returning fresh gradients.
template <std::floating_point T>
EvsNetParamsT<T> backward(std::span<const T> grad_spikes, const ForwardCacheT<T>& cache,
                          const EvsNetParamsT<T>& params, std::span<T> input_grad = {}) {
  EvsNetParamsT<T> grads(params.config());
  TransposedWeights<T> wt(params);
  backward(grad_spikes, cache, params, wt, grads, input_grad);
  return grads;
}

/// Logits for output ticks [lo, hi) of a length-`ticks` sequence, reading
/// only input[lo - R, hi + R) where R = (receptive_field - 1) / 2. Values are
/// bit-identical to the corresponding full-sequence logits. `x` holds the
/// whole sequence; only the needed slice is touched.
std::vector<float> window_logits(std::span<const float> x, std::size_t lo, std::size_t hi,
                                 const EvsNetParams& params);

struct InferOptions {
  std::size_t window = 512;  // output ticks per streaming window
  unsigned workers = 1;
  InitMode init_mode = InitMode::zero;  // uniform samples v0 in (-V_th, V_th)
  std::uint64_t seed = 4;
};

/// Per-pixel network inference in sliding windows; membrane state carries
/// across windows, so the result equals the full-sequence forward exactly.
SpikeTrain infer_stream(const LogDiffSeq& x, const EvsNetParams& params, const InferOptions& opts = {});

/// Initial membrane potential used by infer_stream for pixel (x, y).
double initial_potential(const InferOptions& opts, const EvsNetConfig& cfg, std::uint32_t x, std::uint32_t y);

// EVSN checkpoint: "EVSN", u16 version=1, f32 x6 config (C, k, M, tau, V_th,
// alpha), then each tensor in declaration order as u32 rank, u32 dims[rank],
// f32 values. Little-endian.
void write_checkpoint(std::ostream& out, const EvsNetParams& params);
EvsNetParams read_checkpoint(std::istream& in);
void write_checkpoint(const std::filesystem::path& path, const EvsNetParams& params);
EvsNetParams read_checkpoint(const std::filesystem::path& path);

}  // namespace evtrace
