#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evtrace/evsnet.hpp"
#include "evtrace/loss.hpp"
#include "evtrace/luminance.hpp"
#include "evtrace/refsim.hpp"
#include "evtrace/scenegen.hpp"

namespace evtrace {

/// Network input from noisy frames paired with reference events from the
/// clean frames of the same scene.
struct DatasetPair {
  LogDiffSeq x;
  SpikeTrain e;
  SceneSpec scene;
  NoiseModel noise;  // effective model, including the per-scene seed
  RefSimConfig ref;
};

/// Noise seeds are derived per scene from (noise.seed, scene.seed) so scenes
/// never share a noise field.
std::vector<DatasetPair> make_dataset(std::span<const SceneSpec> scenes, const NoiseModel& noise,
                                      const RefSimConfig& ref, const LuminanceConfig& lum, unsigned workers = 1);

/// Which network output the training loss sees. Both backpropagate through
/// the surrogate derivative; they differ only in the forward value.
enum class TrainForward {
  relaxed,  // smooth sigma-difference of the charged potential
  hard,     // the emitted spikes themselves (straight-through)
};
// The relaxed output is nonzero below threshold, so a loss minimised on it
// leaves the hard spikes badly undercounted; hard is the default.

std::string_view train_forward_name(TrainForward f);
TrainForward parse_train_forward(std::string_view name);

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch = 256;  // pixels per update
  double lr = 1e-3;
  LossConfig loss{};
  double clip = 1.0;  // global gradient-norm cap
  std::uint64_t seed = 5;
  double holdout = 0.2;  // fraction of pixels withheld from gradients
  unsigned workers = 1;
  TrainForward forward = TrainForward::hard;
  std::optional<std::filesystem::path> checkpoint;  // rewritten after every epoch

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;    // mean training-forward loss over the epoch's updates
  double holdout_loss = 0.0;  // hard-forward total loss on holdout pixels
};

struct TrainHooks {
  /// Called for every (pair, pixel) that contributes to a gradient.
  std::function<void(std::size_t pair, std::size_t pixel)> on_gradient_sample;
  /// Called after each epoch.
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  EvsNetParams params;
  std::vector<EpochRecord> history;
};

/// Deterministic holdout membership of a pixel.
bool is_holdout(std::uint64_t seed, std::size_t pair, std::size_t pixel, double fraction);

struct SampleRef {
  std::size_t pair;
  std::size_t pixel;
};

std::vector<SampleRef> holdout_samples(std::span<const DatasetPair> data, const TrainConfig& cfg);

/// Gathers the listed pixel rows into a width = samples, height = 1 train.
SpikeTrain gather_rows(std::span<const DatasetPair> data, std::span<const SampleRef> samples,
                       const std::function<std::span<const std::int8_t>(const SampleRef&)>& row);

struct HoldoutTrains {
  SpikeTrain target;
  SpikeTrain network;
  SpikeTrain naive;
};

/// Reference targets, hard-forward network spikes (v0 = 0) and the
/// frame-difference baseline at each pair's theta, on the holdout pixels.
HoldoutTrains holdout_trains(std::span<const DatasetPair> data, const EvsNetParams& params, const TrainConfig& cfg);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected adaptive-moment update, elementwise.
void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state, double lr);

/// Scales grads so their L2 norm is at most max_norm; returns the norm before clipping.
double clip_grad_norm(std::span<float> grads, double max_norm);

TrainResult train(std::span<const DatasetPair> data, const EvsNetConfig& net_cfg, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

/// Writes "epoch,train_loss,holdout_loss" rows.
void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history);

}  // namespace evtrace
